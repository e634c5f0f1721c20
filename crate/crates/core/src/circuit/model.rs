use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::par::{map_range, Execution};

use super::frame::{FlatCircuit, FlatOp, FrameSim};
use super::ir::{Channel, Circuit, Gate, Op, PauliKind, MAX_CORRELATED};

/// The same Pauli on up to `MAX_CORRELATED` qubits at once, applied at the
/// start of every round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedFault {
    pub qubits: Vec<u32>,
    pub pauli: PauliKind,
    pub p: f64,
}

/// Uniform circuit-level noise of strength `p`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    #[serde(default)]
    pub correlated: Vec<CorrelatedFault>,
}

impl NoiseModel {
    pub fn uniform(p: f64) -> Self {
        Self { p, correlated: Vec::new() }
    }
}

/// Inserts noise channels: single-qubit depolarizing after every reset and
/// idle, two-qubit depolarizing after every CX, a record flip with
/// probability `2p/3` after every measurement, and `model.correlated`
/// after the reset timestep of every round.
pub fn apply_noise(c: &Circuit, model: &NoiseModel) -> Result<Circuit> {
    let p = model.p;
    if !(0.0..=1.0).contains(&p) || model.correlated.iter().any(|f| !(0.0..=1.0).contains(&f.p)) {
        return Err(invalid("noise probabilities must lie in [0, 1]"));
    }
    let mut correlated = Vec::with_capacity(model.correlated.len());
    for f in &model.correlated {
        if f.qubits.is_empty() || f.qubits.len() > MAX_CORRELATED || f.qubits.iter().any(|&q| q as usize >= c.num_qubits) {
            return Err(invalid("correlated fault needs 1 to 4 qubits inside the circuit"));
        }
        let mut qubits = [0u32; MAX_CORRELATED];
        qubits[..f.qubits.len()].copy_from_slice(&f.qubits);
        correlated.push(Channel::Correlated {
            qubits,
            len: f.qubits.len() as u8,
            pauli: f.pauli,
            p: f.p,
        });
    }
    let mut out = c.clone();
    let mut rec = 0u32;
    for (t, m) in c.moments.iter().enumerate() {
        let mut ops = Vec::with_capacity(2 * m.len());
        let mut noise = Vec::new();
        for op in m {
            ops.push(*op);
            if let Op::Gate(g) = *op {
                match g {
                    Gate::ResetZ(q) | Gate::ResetX(q) | Gate::Idle(q) => noise.push(Channel::Depolarize1 { q, p }),
                    Gate::Cx(a, b) => noise.push(Channel::Depolarize2 { a, b, p }),
                    Gate::MeasureZ(_) | Gate::MeasureX(_) => {
                        noise.push(Channel::RecordFlip { record: rec, p: 2.0 * p / 3.0 });
                        rec += 1;
                    }
                    Gate::X(_) | Gate::Z(_) => {}
                }
            }
        }
        if c.round_starts.contains(&t) {
            noise.extend(correlated.iter().copied());
        }
        ops.extend(noise.into_iter().map(Op::Noise));
        out.moments[t] = ops;
    }
    Ok(out)
}

/// Detectors and observables flipped by one fault.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub dets: Vec<u32>,
    pub obs: Vec<u32>,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.dets.is_empty() && self.obs.is_empty()
    }
}

/// One noise channel with the signature of each of its outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub p: f64,
    pub outcomes: Vec<Signature>,
}

/// Per-channel fault signatures; sampling from it reproduces the circuit
/// noise exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub channels: Vec<ChannelModel>,
}

/// A merged fault column of the detector error model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub dets: Vec<u32>,
    pub obs: Vec<u32>,
    pub p: f64,
}

/// Independent faults with distinct signatures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub faults: Vec<Fault>,
}

const BATCH_WORDS: usize = 8;

/// Propagates every outcome of every channel through the noiseless circuit.
pub fn derive_elementary_model(c: &Circuit, exec: Execution) -> ElementaryModel {
    let flat = FlatCircuit::new(c);
    let mut instances: Vec<(usize, usize)> = Vec::new();
    for (ci, ch) in flat.channels.iter().enumerate() {
        instances.extend((0..ch.outcome_count()).map(|k| (ci, k)));
    }
    let lanes = 64 * BATCH_WORDS;
    let batches = instances.len().div_ceil(lanes);
    let sigs: Vec<Vec<Signature>> = map_range(exec, batches, |b| {
        let slice = &instances[b * lanes..((b + 1) * lanes).min(instances.len())];
        propagate_batch(c, &flat, slice)
    });
    let mut it = sigs.into_iter().flatten();
    let channels = flat
        .channels
        .iter()
        .map(|ch| ChannelModel {
            p: ch.probability(),
            outcomes: (0..ch.outcome_count()).map(|_| it.next().expect("one signature per outcome")).collect(),
        })
        .collect();
    ElementaryModel {
        num_detectors: c.detectors.len(),
        num_observables: c.observables.len(),
        channels,
    }
}

fn propagate_batch(c: &Circuit, flat: &FlatCircuit, slice: &[(usize, usize)]) -> Vec<Signature> {
    let mut sim = FrameSim::new(c.num_qubits, c.num_records, BATCH_WORDS);
    let first = slice[0].0;
    let last = slice[slice.len() - 1].0;
    // Lanes of each channel in the batch are contiguous.
    let mut lane_start = vec![0usize; last - first + 2];
    for (lane, &(ci, _)) in slice.iter().enumerate() {
        lane_start[ci - first + 1] = lane + 1;
    }
    for i in 1..lane_start.len() {
        lane_start[i] = lane_start[i].max(lane_start[i - 1]);
    }
    for op in &flat.ops[flat.channel_pos[first]..] {
        match *op {
            FlatOp::Gate(g, r) => sim.apply_gate(g, r, None),
            FlatOp::Channel(ci) if (first..=last).contains(&ci) => {
                let ch = &flat.channels[ci];
                for lane in lane_start[ci - first]..lane_start[ci - first + 1] {
                    let k = slice[lane].1;
                    match *ch {
                        Channel::RecordFlip { record, .. } => sim.flip_record(record, lane),
                        _ => {
                            for (q, p) in ch.outcome(k) {
                                sim.inject(q, p, lane);
                            }
                        }
                    }
                }
            }
            FlatOp::Channel(_) => {}
        }
    }
    let mut out = vec![Signature::default(); slice.len()];
    for (d, det) in c.detectors.iter().enumerate() {
        for_each_lane(&sim.parity(&det.records), slice.len(), |l| out[l].dets.push(d as u32));
    }
    for (o, ob) in c.observables.iter().enumerate() {
        for_each_lane(&sim.parity(&ob.records), slice.len(), |l| out[l].obs.push(o as u32));
    }
    out
}

fn for_each_lane(words: &[u64], limit: usize, mut f: impl FnMut(usize)) {
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let lane = wi * 64 + w.trailing_zeros() as usize;
            if lane < limit {
                f(lane);
            }
            w &= w - 1;
        }
    }
}

/// `p ⊕ q`: probability that exactly one of two independent events occurs.
pub fn xor_probability(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

impl ElementaryModel {
    /// Merges outcomes with equal signatures, in order of first occurrence.
    /// Outcomes that flip nothing are dropped.
    pub fn merged(&self) -> DetectorModel {
        let mut index: HashMap<&Signature, usize> = HashMap::new();
        let mut faults: Vec<Fault> = Vec::new();
        for ch in &self.channels {
            let each = ch.p / ch.outcomes.len() as f64;
            for s in &ch.outcomes {
                if s.is_empty() {
                    continue;
                }
                match index.get(s) {
                    Some(&i) => faults[i].p = xor_probability(faults[i].p, each),
                    None => {
                        index.insert(s, faults.len());
                        faults.push(Fault {
                            dets: s.dets.clone(),
                            obs: s.obs.clone(),
                            p: each,
                        });
                    }
                }
            }
        }
        DetectorModel {
            num_detectors: self.num_detectors,
            num_observables: self.num_observables,
            faults,
        }
    }

    /// Number of outcomes that flip an observable without any detector.
    pub fn undetectable_logical_outcomes(&self) -> usize {
        self.channels
            .iter()
            .flat_map(|c| &c.outcomes)
            .filter(|s| s.dets.is_empty() && !s.obs.is_empty())
            .count()
    }
}

/// Noisy circuit to merged detector model in one call.
pub fn derive_detector_model(c: &Circuit, exec: Execution) -> DetectorModel {
    derive_elementary_model(c, exec).merged()
}
