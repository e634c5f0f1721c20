use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2::BitVec;
use crate::par::{map_range, Execution};

use super::model::ElementaryModel;

/// One sampled shot: fired detectors and flipped observables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shot {
    pub detectors: BitVec,
    pub observables: BitVec,
}

/// Channels grouped by probability for geometric skipping.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    model: &'a ElementaryModel,
    groups: Vec<(f64, Vec<usize>)>,
}

/// Shots per parallel work item. Aggregation order is fixed, so results do
/// not depend on the worker count.
pub const SHOT_BLOCK: usize = 256;

impl<'a> Sampler<'a> {
    pub fn new(model: &'a ElementaryModel) -> Self {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, ch) in model.channels.iter().enumerate() {
            if ch.p <= 0.0 {
                continue;
            }
            match groups.iter_mut().find(|(p, _)| p.to_bits() == ch.p.to_bits()) {
                Some((_, v)) => v.push(i),
                None => groups.push((ch.p, vec![i])),
            }
        }
        Self { model, groups }
    }

    /// Shot `index` of the stream seeded by `seed`. Each shot has its own
    /// ChaCha8 stream, so any subset of shots can be regenerated.
    pub fn shot(&self, seed: u64, index: u64) -> Shot {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut det = BitVec::zeros(self.model.num_detectors);
        let mut obs = BitVec::zeros(self.model.num_observables);
        for (p, members) in &self.groups {
            let mut fire = |ci: usize, rng: &mut ChaCha8Rng| {
                let outs = &self.model.channels[ci].outcomes;
                let s = &outs[if outs.len() == 1 { 0 } else { rng.gen_range(0..outs.len()) }];
                s.dets.iter().for_each(|&d| det.flip(d as usize));
                s.obs.iter().for_each(|&o| obs.flip(o as usize));
            };
            if *p >= 1.0 {
                for &ci in members {
                    fire(ci, &mut rng);
                }
                continue;
            }
            let log_q = (1.0 - p).ln();
            let mut i = 0usize;
            loop {
                let u: f64 = rng.gen();
                let skip = ((1.0 - u).ln() / log_q).floor();
                if !skip.is_finite() || skip >= (members.len() - i) as f64 {
                    break;
                }
                i += skip as usize;
                fire(members[i], &mut rng);
                i += 1;
                if i >= members.len() {
                    break;
                }
            }
        }
        Shot { detectors: det, observables: obs }
    }

    /// Calls `f` on blocks of consecutive shots `[start, end)` in parallel
    /// and returns the per-block results in shot order.
    pub fn map_blocks<R: Send>(&self, seed: u64, shots: usize, exec: Execution, f: impl Fn(usize, Vec<Shot>) -> R + Sync + Send) -> Vec<R> {
        self.map_block_range(seed, 0..shots, exec, f)
    }

    /// As [`Sampler::map_blocks`] over the shot indices in `range`. Blocks
    /// are aligned to multiples of [`SHOT_BLOCK`], so splitting a run into
    /// aligned ranges yields the same blocks.
    pub fn map_block_range<R: Send>(
        &self,
        seed: u64,
        range: std::ops::Range<usize>,
        exec: Execution,
        f: impl Fn(usize, Vec<Shot>) -> R + Sync + Send,
    ) -> Vec<R> {
        if range.is_empty() {
            return Vec::new();
        }
        let first = range.start / SHOT_BLOCK;
        let blocks = range.end.div_ceil(SHOT_BLOCK) - first;
        map_range(exec, blocks, |b| {
            let start = ((first + b) * SHOT_BLOCK).max(range.start);
            let end = ((first + b + 1) * SHOT_BLOCK).min(range.end);
            let batch = (start..end).map(|i| self.shot(seed, i as u64)).collect();
            f(start, batch)
        })
    }
}

/// Samples `shots` shots from `model`.
pub fn sample(model: &ElementaryModel, shots: usize, seed: u64, exec: Execution) -> Vec<Shot> {
    Sampler::new(model).map_blocks(seed, shots, exec, |_, b| b).into_iter().flatten().collect()
}
