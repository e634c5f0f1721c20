use serde::{Deserialize, Serialize};

/// A Clifford operation on qubit indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    ResetZ(u32),
    ResetX(u32),
    /// `Cx(control, target)`.
    Cx(u32, u32),
    MeasureZ(u32),
    MeasureX(u32),
    /// Placeholder marking a live qubit with nothing to do this timestep.
    Idle(u32),
    X(u32),
    Z(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Y,
    Z,
}

impl PauliKind {
    /// `(x, z)` components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliKind::X => (true, false),
            PauliKind::Y => (true, true),
            PauliKind::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Self> {
        match (x, z) {
            (true, false) => Some(PauliKind::X),
            (true, true) => Some(PauliKind::Y),
            (false, true) => Some(PauliKind::Z),
            (false, false) => None,
        }
    }
}

/// Largest support of a correlated channel.
pub const MAX_CORRELATED: usize = 4;

/// A stochastic Pauli channel. Each channel fires with total probability
/// `p` and then picks one of its outcomes uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    /// X, Y or Z with probability `p/3` each.
    Depolarize1 { q: u32, p: f64 },
    /// Each of the 15 non-identity two-qubit Paulis with probability `p/15`.
    Depolarize2 { a: u32, b: u32, p: f64 },
    /// Flips measurement record `record` with probability `p`.
    RecordFlip { record: u32, p: f64 },
    /// `P` on each of `qubits[..len]` simultaneously with probability `p`.
    Correlated {
        qubits: [u32; MAX_CORRELATED],
        len: u8,
        pauli: PauliKind,
        p: f64,
    },
}

impl Channel {
    pub fn probability(&self) -> f64 {
        match *self {
            Channel::Depolarize1 { p, .. }
            | Channel::Depolarize2 { p, .. }
            | Channel::RecordFlip { p, .. }
            | Channel::Correlated { p, .. } => p,
        }
    }

    pub fn outcome_count(&self) -> usize {
        match self {
            Channel::Depolarize1 { .. } => 3,
            Channel::Depolarize2 { .. } => 15,
            Channel::RecordFlip { .. } | Channel::Correlated { .. } => 1,
        }
    }

    /// Pauli components `(qubit, kind)` of outcome `k`; empty for record flips.
    pub fn outcome(&self, k: usize) -> Vec<(u32, PauliKind)> {
        const ORDER: [PauliKind; 3] = [PauliKind::X, PauliKind::Y, PauliKind::Z];
        match *self {
            Channel::Depolarize1 { q, .. } => vec![(q, ORDER[k])],
            Channel::Depolarize2 { a, b, .. } => {
                // k + 1 in base 4: low digit on `a`, high digit on `b`, 0 = identity.
                let code = k + 1;
                let mut out = Vec::with_capacity(2);
                if code % 4 != 0 {
                    out.push((a, ORDER[code % 4 - 1]));
                }
                if code / 4 != 0 {
                    out.push((b, ORDER[code / 4 - 1]));
                }
                out
            }
            Channel::Correlated { qubits, len, pauli, .. } => qubits[..len as usize].iter().map(|&q| (q, pauli)).collect(),
            Channel::RecordFlip { .. } => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate(Gate),
    Noise(Channel),
}

/// A parity of measurement records that is deterministic without noise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub records: Vec<u32>,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub records: Vec<u32>,
    pub name: String,
}

/// A timestep-ordered stabilizer circuit with detector and observable
/// annotations. Measurements append records in program order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub moments: Vec<Vec<Op>>,
    pub num_records: usize,
    pub detectors: Vec<Detector>,
    pub observables: Vec<Observable>,
    /// Index of the first timestep of each syndrome round.
    #[serde(default)]
    pub round_starts: Vec<usize>,
}

impl Circuit {
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.moments.iter().flatten()
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    pub fn count_gates(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.ops()
            .filter(|op| matches!(op, Op::Gate(g) if pred(g)))
            .count()
    }

    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        self.ops().filter_map(|op| match op {
            Op::Noise(c) => Some(c),
            Op::Gate(_) => None,
        })
    }

    /// Checks that no qubit is touched twice in a timestep and that record
    /// references are in range.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut records = 0usize;
        for (t, m) in self.moments.iter().enumerate() {
            let mut used = vec![false; self.num_qubits];
            for op in m {
                let qs: Vec<u32> = match op {
                    Op::Gate(Gate::Cx(a, b)) => vec![*a, *b],
                    Op::Gate(
                        Gate::ResetZ(q) | Gate::ResetX(q) | Gate::MeasureZ(q) | Gate::MeasureX(q) | Gate::Idle(q) | Gate::X(q) | Gate::Z(q),
                    ) => vec![*q],
                    Op::Noise(Channel::RecordFlip { record, .. }) => {
                        if *record as usize >= records {
                            return Err(format!("timestep {t}: record flip before measurement"));
                        }
                        vec![]
                    }
                    Op::Noise(_) => vec![],
                };
                if matches!(op, Op::Gate(Gate::MeasureZ(_) | Gate::MeasureX(_))) {
                    records += 1;
                }
                for q in qs {
                    let q = q as usize;
                    if q >= self.num_qubits {
                        return Err(format!("timestep {t}: qubit {q} out of range"));
                    }
                    if used[q] {
                        return Err(format!("timestep {t}: qubit {q} used twice"));
                    }
                    used[q] = true;
                }
            }
        }
        if records != self.num_records {
            return Err(format!("{records} measurements but {} records declared", self.num_records));
        }
        for d in self.detectors.iter().map(|d| &d.records).chain(self.observables.iter().map(|o| &o.records)) {
            if d.iter().any(|&r| r as usize >= records) {
                return Err("annotation references a missing record".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_outcomes_are_distinct_and_nontrivial() {
        let c = Channel::Depolarize2 { a: 0, b: 1, p: 0.1 };
        let mut seen = std::collections::HashSet::new();
        for k in 0..15 {
            let o = c.outcome(k);
            assert!(!o.is_empty());
            assert!(seen.insert(format!("{o:?}")));
        }
    }
}
