use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ir::{Channel, Circuit, Gate, Op, PauliKind};

/// Flattened operation with the record index of measurements resolved.
#[derive(Clone, Copy, Debug)]
pub(crate) enum FlatOp {
    Gate(Gate, u32),
    Channel(usize),
}

/// Program-order op list plus the channel table.
#[derive(Clone, Debug)]
pub(crate) struct FlatCircuit {
    pub ops: Vec<FlatOp>,
    pub channels: Vec<Channel>,
    /// Position of each channel in `ops`.
    pub channel_pos: Vec<usize>,
}

impl FlatCircuit {
    pub fn new(c: &Circuit) -> Self {
        let mut ops = Vec::new();
        let mut channels = Vec::new();
        let mut channel_pos = Vec::new();
        let mut rec = 0u32;
        for op in c.ops() {
            match *op {
                Op::Gate(g) => {
                    let r = match g {
                        Gate::MeasureZ(_) | Gate::MeasureX(_) => {
                            rec += 1;
                            rec - 1
                        }
                        _ => u32::MAX,
                    };
                    ops.push(FlatOp::Gate(g, r));
                }
                Op::Noise(ch) => {
                    channel_pos.push(ops.len());
                    ops.push(FlatOp::Channel(channels.len()));
                    channels.push(ch);
                }
            }
        }
        Self { ops, channels, channel_pos }
    }
}

/// Pauli-frame simulator over `64·words` independent lanes.
///
/// With `randomize`, resets and measurements apply a random stabilizer of
/// the post-operation state, so non-deterministic parities show up as
/// random bits. Without it the frames propagate injected errors only.
pub struct FrameSim {
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    records: Vec<u64>,
}

impl FrameSim {
    pub fn new(num_qubits: usize, num_records: usize, words: usize) -> Self {
        Self {
            words,
            x: vec![0; num_qubits * words],
            z: vec![0; num_qubits * words],
            records: vec![0; num_records * words],
        }
    }

    pub fn lanes(&self) -> usize {
        64 * self.words
    }

    fn span(&self, q: u32) -> std::ops::Range<usize> {
        let s = q as usize * self.words;
        s..s + self.words
    }

    pub fn record(&self, r: usize) -> &[u64] {
        &self.records[r * self.words..(r + 1) * self.words]
    }

    fn fill_random(buf: &mut [u64], rng: &mut Option<&mut ChaCha8Rng>) {
        match rng {
            Some(r) => buf.iter_mut().for_each(|w| *w = r.gen()),
            None => buf.iter_mut().for_each(|w| *w = 0),
        }
    }

    pub(crate) fn apply_gate(&mut self, g: Gate, record: u32, mut rng: Option<&mut ChaCha8Rng>) {
        match g {
            Gate::ResetZ(q) => {
                let s = self.span(q);
                self.x[s.clone()].iter_mut().for_each(|w| *w = 0);
                Self::fill_random(&mut self.z[s], &mut rng);
            }
            Gate::ResetX(q) => {
                let s = self.span(q);
                self.z[s.clone()].iter_mut().for_each(|w| *w = 0);
                Self::fill_random(&mut self.x[s], &mut rng);
            }
            Gate::Cx(c, t) => {
                let (sc, st) = (self.span(c), self.span(t));
                for i in 0..self.words {
                    self.x[st.start + i] ^= self.x[sc.start + i];
                    self.z[sc.start + i] ^= self.z[st.start + i];
                }
            }
            Gate::MeasureZ(q) => {
                let s = self.span(q);
                let r = record as usize * self.words;
                self.records[r..r + self.words].copy_from_slice(&self.x[s.clone()]);
                Self::fill_random(&mut self.z[s], &mut rng);
            }
            Gate::MeasureX(q) => {
                let s = self.span(q);
                let r = record as usize * self.words;
                self.records[r..r + self.words].copy_from_slice(&self.z[s.clone()]);
                Self::fill_random(&mut self.x[s], &mut rng);
            }
            Gate::Idle(_) | Gate::X(_) | Gate::Z(_) => {}
        }
    }

    /// XORs a Pauli into one lane.
    pub fn inject(&mut self, q: u32, p: PauliKind, lane: usize) {
        let (w, b) = (q as usize * self.words + lane / 64, 1u64 << (lane % 64));
        let (xb, zb) = p.bits();
        if xb {
            self.x[w] ^= b;
        }
        if zb {
            self.z[w] ^= b;
        }
    }

    pub fn flip_record(&mut self, r: u32, lane: usize) {
        self.records[r as usize * self.words + lane / 64] ^= 1u64 << (lane % 64);
    }

    /// Parity words of a set of records.
    pub fn parity(&self, records: &[u32]) -> Vec<u64> {
        let mut acc = vec![0u64; self.words];
        for &r in records {
            for (a, b) in acc.iter_mut().zip(self.record(r as usize)) {
                *a ^= b;
            }
        }
        acc
    }
}

/// Detector and observable flip words from a noiseless randomized frame
/// run. Nonzero words expose non-deterministic annotations.
pub struct FrameCheck {
    pub detectors: Vec<Vec<u64>>,
    pub observables: Vec<Vec<u64>>,
}

impl FrameCheck {
    /// Indices of detectors that fired in some lane.
    pub fn nondeterministic_detectors(&self) -> Vec<usize> {
        (0..self.detectors.len()).filter(|&i| self.detectors[i].iter().any(|&w| w != 0)).collect()
    }

    pub fn nondeterministic_observables(&self) -> Vec<usize> {
        (0..self.observables.len()).filter(|&i| self.observables[i].iter().any(|&w| w != 0)).collect()
    }
}

/// Runs `c` without noise under random gauges on `64·words` lanes.
pub fn randomized_frame_check(c: &Circuit, words: usize, seed: u64) -> FrameCheck {
    let flat = FlatCircuit::new(c);
    let mut sim = FrameSim::new(c.num_qubits, c.num_records, words);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for op in &flat.ops {
        if let FlatOp::Gate(g, r) = *op {
            sim.apply_gate(g, r, Some(&mut rng));
        }
    }
    FrameCheck {
        detectors: c.detectors.iter().map(|d| sim.parity(&d.records)).collect(),
        observables: c.observables.iter().map(|o| sim.parity(&o.records)).collect(),
    }
}
