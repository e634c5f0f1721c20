use serde::{Deserialize, Serialize};

use crate::codes::{Basis, CssCode, SurfaceLayout};
use crate::error::{invalid, Result};
use crate::gf2::BitMatrix;

use super::ir::{Circuit, Gate, Op};

/// CX order of one check. `Some(q)` in slot `s` asks for the CX with
/// qubit `q` no earlier than layer `s`; `None` leaves the layer empty.
pub type SlotOrder = Vec<Option<usize>>;

/// Optional per-check CX orders. Checks without an order are scheduled
/// greedily in any order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOrders {
    pub x: Vec<Option<SlotOrder>>,
    pub z: Vec<Option<SlotOrder>>,
}

impl CheckOrders {
    pub fn free(code: &CssCode) -> Self {
        Self {
            x: vec![None; code.h_x.rows()],
            z: vec![None; code.h_z.rows()],
        }
    }

    /// Orders for the unrotated surface code that keep weight-2 hook errors
    /// perpendicular to the logical they could shorten: X checks go
    /// W, E, N, S and Z checks go N, S, W, E.
    pub fn surface(d: usize) -> Self {
        let lay = SurfaceLayout::new(d);
        let g = 2 * d - 1;
        let find = |r: isize, c: isize| -> Option<usize> {
            if r < 0 || c < 0 || r >= g as isize || c >= g as isize {
                return None;
            }
            lay.data.binary_search(&(r as usize, c as usize)).ok()
        };
        let order = |checks: &[(usize, usize)], dirs: [(isize, isize); 4]| {
            checks
                .iter()
                .map(|&(r, c)| Some(dirs.iter().map(|&(dr, dc)| find(r as isize + dr, c as isize + dc)).collect()))
                .collect()
        };
        let (n, s, w, e) = ((-1, 0), (1, 0), (0, -1), (0, 1));
        Self {
            x: order(&lay.x_checks, [w, e, n, s]),
            z: order(&lay.z_checks, [n, s, w, e]),
        }
    }

    fn shifted(&self, offset: usize) -> Self {
        let sh = |v: &Vec<Option<SlotOrder>>| {
            v.iter()
                .map(|o| o.as_ref().map(|s| s.iter().map(|q| q.map(|q| q + offset)).collect()))
                .collect()
        };
        Self { x: sh(&self.x), z: sh(&self.z) }
    }

    /// Appends `other`'s orders with qubit indices shifted by `n_first`.
    pub fn direct_sum(&self, n_first: usize, other: &CheckOrders) -> Self {
        let o = other.shifted(n_first);
        Self {
            x: self.x.iter().cloned().chain(o.x).collect(),
            z: self.z.iter().cloned().chain(o.z).collect(),
        }
    }

    /// Orders for `composite(register, noisy, q)`.
    pub fn composite(register: &CheckOrders, n_register: usize, noisy: &CheckOrders, n_noisy: usize, q: usize) -> Self {
        let mut acc = register.clone();
        for i in 0..q {
            acc = acc.direct_sum(n_register + i * n_noisy, noisy);
        }
        acc
    }

    /// Checks that every order lists exactly the support of its row.
    pub fn validate(&self, h_x: &BitMatrix, h_z: &BitMatrix) -> Result<()> {
        for (orders, h, name) in [(&self.x, h_x, "X"), (&self.z, h_z, "Z")] {
            if orders.len() != h.rows() {
                return Err(invalid(format!("{name} orders: {} entries for {} checks", orders.len(), h.rows())));
            }
            for (i, o) in orders.iter().enumerate() {
                if let Some(o) = o {
                    let mut listed: Vec<usize> = o.iter().flatten().copied().collect();
                    listed.sort_unstable();
                    if listed != h.row_ones(i).collect::<Vec<_>>() {
                        return Err(invalid(format!("{name} order {i} does not match the check support")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One check to be measured through an ancilla.
#[derive(Clone, Debug)]
pub struct CheckJob {
    pub ancilla: u32,
    pub basis: Basis,
    /// `(earliest layer, qubit)` in execution order.
    pub items: Vec<(usize, u32)>,
    /// Execute `items` strictly in order; otherwise any free item may go next.
    pub strict: bool,
}

impl CheckJob {
    /// Job for check `row` of `h`. An order fixes the sequence; extra
    /// support outside the order is appended after it.
    pub fn new(ancilla: u32, basis: Basis, support: &[usize], order: Option<&SlotOrder>) -> Self {
        match order {
            Some(o) => {
                let mut items: Vec<(usize, u32)> =
                    o.iter().enumerate().filter_map(|(s, q)| q.map(|q| (s, q as u32))).collect();
                let mut slot = o.len();
                for &q in support {
                    if !items.iter().any(|&(_, x)| x as usize == q) {
                        items.push((slot, q as u32));
                        slot += 1;
                    }
                }
                Self { ancilla, basis, items, strict: true }
            }
            None => Self {
                ancilla,
                basis,
                items: support.iter().map(|&q| (0, q as u32)).collect(),
                strict: false,
            },
        }
    }

    fn gate(&self, q: u32) -> Gate {
        match self.basis {
            Basis::X => Gate::Cx(self.ancilla, q),
            Basis::Z => Gate::Cx(q, self.ancilla),
        }
    }
}

/// Packs the CX gates of `jobs` into layers in which no qubit is used
/// twice. Jobs are visited with the longest remaining list first.
pub fn layer_jobs(jobs: &[CheckJob], num_qubits: usize) -> Vec<Vec<Gate>> {
    layer_round(jobs, &[], num_qubits)
}

/// Packs X-check and Z-check CX gates into shared layers. On every qubit
/// all gates of `x_jobs` precede all gates of `z_jobs`, which keeps each X check
/// commuting with each Z check through the round.
pub fn layer_round(x_jobs: &[CheckJob], z_jobs: &[CheckJob], num_qubits: usize) -> Vec<Vec<Gate>> {
    let jobs: Vec<&CheckJob> = x_jobs.iter().chain(z_jobs).collect();
    let mut remaining: Vec<Vec<(usize, u32)>> = jobs.iter().map(|j| j.items.clone()).collect();
    let mut x_pending = vec![0usize; num_qubits];
    for j in x_jobs {
        for &(_, q) in &j.items {
            x_pending[q as usize] += 1;
        }
    }
    let mut layers = Vec::new();
    let mut layer = 0usize;
    while remaining.iter().any(|r| !r.is_empty()) {
        let mut busy = vec![false; num_qubits];
        let mut gates = Vec::new();
        let mut done_x = Vec::new();
        let mut visit: Vec<usize> = (0..jobs.len()).filter(|&j| !remaining[j].is_empty()).collect();
        visit.sort_by_key(|&j| (std::cmp::Reverse(remaining[j].len()), j));
        for j in visit {
            let anc = jobs[j].ancilla as usize;
            if busy[anc] {
                continue;
            }
            let is_z = j >= x_jobs.len();
            let ready = |q: u32| !busy[q as usize] && !(is_z && x_pending[q as usize] > 0);
            let pick = if jobs[j].strict {
                let (slot, q) = remaining[j][0];
                (slot <= layer && ready(q)).then_some(0)
            } else {
                remaining[j].iter().position(|&(_, q)| ready(q))
            };
            if let Some(i) = pick {
                let (_, q) = remaining[j].remove(i);
                busy[q as usize] = true;
                busy[anc] = true;
                if !is_z {
                    done_x.push(q as usize);
                }
                gates.push(jobs[j].gate(q));
            }
        }
        for q in done_x {
            x_pending[q] -= 1;
        }
        if !gates.is_empty() {
            layers.push(gates);
        }
        layer += 1;
    }
    layers
}

/// Incrementally built circuit that inserts `Idle` for every live data
/// qubit not acted on in a timestep. Check ancillas never idle.
#[derive(Clone, Debug)]
pub struct Builder {
    pub circuit: Circuit,
    live: Vec<bool>,
    data: Vec<bool>,
}

impl Builder {
    /// Qubits `0..num_data` are data qubits, the rest check ancillas.
    pub fn new(num_qubits: usize, num_data: usize) -> Self {
        Self {
            circuit: Circuit { num_qubits, ..Default::default() },
            live: vec![false; num_qubits],
            data: (0..num_qubits).map(|q| q < num_data).collect(),
        }
    }

    /// Appends one timestep; returns the record indices of its measurements
    /// in gate order.
    pub fn moment(&mut self, gates: Vec<Gate>) -> Vec<u32> {
        let mut touched = vec![false; self.circuit.num_qubits];
        let mut recs = Vec::new();
        let mut ops: Vec<Op> = Vec::with_capacity(gates.len());
        for g in gates {
            match g {
                Gate::Cx(a, b) => {
                    touched[a as usize] = true;
                    touched[b as usize] = true;
                }
                Gate::ResetZ(q) | Gate::ResetX(q) => {
                    touched[q as usize] = true;
                    self.live[q as usize] = true;
                }
                Gate::MeasureZ(q) | Gate::MeasureX(q) => {
                    touched[q as usize] = true;
                    self.live[q as usize] = false;
                    recs.push(self.circuit.num_records as u32);
                    self.circuit.num_records += 1;
                }
                Gate::Idle(q) | Gate::X(q) | Gate::Z(q) => touched[q as usize] = true,
            }
            ops.push(Op::Gate(g));
        }
        for q in 0..self.circuit.num_qubits {
            if self.live[q] && self.data[q] && !touched[q] {
                ops.push(Op::Gate(Gate::Idle(q as u32)));
            }
        }
        self.circuit.moments.push(ops);
        recs
    }

    /// One syndrome-extraction round: reset moment (plus `extra_resets`),
    /// interleaved CX layers, measurement moment (plus
    /// `extra_measures`). Returns records of the X jobs, the Z jobs and the
    /// extra measurements.
    pub fn round(
        &mut self,
        x_jobs: &[CheckJob],
        z_jobs: &[CheckJob],
        extra_resets: &[Gate],
        extra_measures: &[Gate],
    ) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
        let nq = self.circuit.num_qubits;
        let mut resets: Vec<Gate> = extra_resets.to_vec();
        resets.extend(x_jobs.iter().map(|j| Gate::ResetX(j.ancilla)));
        resets.extend(z_jobs.iter().map(|j| Gate::ResetZ(j.ancilla)));
        self.circuit.round_starts.push(self.circuit.moments.len());
        self.moment(resets);
        for layer in layer_round(x_jobs, z_jobs, nq) {
            self.moment(layer);
        }
        let mut meas: Vec<Gate> = x_jobs.iter().map(|j| Gate::MeasureX(j.ancilla)).collect();
        meas.extend(z_jobs.iter().map(|j| Gate::MeasureZ(j.ancilla)));
        meas.extend_from_slice(extra_measures);
        let recs = self.moment(meas);
        let (xr, rest) = recs.split_at(x_jobs.len());
        let (zr, er) = rest.split_at(z_jobs.len());
        (xr.to_vec(), zr.to_vec(), er.to_vec())
    }

    pub fn finish(self) -> Circuit {
        self.circuit
    }
}

/// Jobs for the rows of `h` with ancillas `first_ancilla..`.
pub fn jobs_for(h: &BitMatrix, basis: Basis, first_ancilla: usize, orders: Option<&[Option<SlotOrder>]>) -> Vec<CheckJob> {
    (0..h.rows())
        .map(|i| {
            let support: Vec<usize> = h.row_ones(i).collect();
            let order = orders.and_then(|o| o.get(i)).and_then(|o| o.as_ref());
            CheckJob::new((first_ancilla + i) as u32, basis, &support, order)
        })
        .collect()
}

/// Bare syndrome-extraction circuit: `rounds` rounds measuring `h_x` and
/// `h_z` on data qubits `0..n` with ancillas after them. Data are not
/// prepared or read out and no detectors are attached.
pub fn schedule_parity_circuit(h_x: &BitMatrix, h_z: &BitMatrix, rounds: usize) -> Result<Circuit> {
    if h_x.cols() != h_z.cols() && h_x.rows() > 0 && h_z.rows() > 0 {
        return Err(invalid("schedule_parity_circuit: check matrices differ in length"));
    }
    let n = h_x.cols().max(h_z.cols());
    let nq = n + h_x.rows() + h_z.rows();
    let xj = jobs_for(h_x, Basis::X, n, None);
    let zj = jobs_for(h_z, Basis::Z, n + h_x.rows(), None);
    let mut b = Builder::new(nq, n);
    for _ in 0..rounds {
        b.round(&xj, &zj, &[], &[]);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{repetition_chain, surface};

    #[test]
    fn repetition_round_has_depth_four() {
        let h = repetition_chain(3).unwrap();
        let c = schedule_parity_circuit(&BitMatrix::zeros(0, 3), &h, 1).unwrap();
        assert_eq!(c.num_qubits, 5);
        assert_eq!(c.depth(), 4);
        assert_eq!(c.count_gates(|g| matches!(g, Gate::Cx(..))), 4);
        c.validate().unwrap();
    }

    #[test]
    fn surface_orders_match_supports_and_pack_tightly() {
        for d in 2..=4 {
            let code = surface(d).unwrap();
            let o = CheckOrders::surface(d);
            o.validate(&code.h_x, &code.h_z).unwrap();
            let n = code.n();
            let xj = jobs_for(&code.h_x, Basis::X, n, Some(&o.x));
            let zj = jobs_for(&code.h_z, Basis::Z, n + code.h_x.rows(), Some(&o.z));
            let nq = n + code.h_x.rows() + code.h_z.rows();
            assert_eq!(layer_jobs(&xj, nq).len(), 4);
            assert_eq!(layer_jobs(&zj, nq).len(), 4);
        }
    }

    #[test]
    fn strict_order_is_respected() {
        let code = surface(3).unwrap();
        let o = CheckOrders::surface(3);
        let n = code.n();
        let xj = jobs_for(&code.h_x, Basis::X, n, Some(&o.x));
        let layers = layer_jobs(&xj, n + code.h_x.rows());
        for (j, job) in xj.iter().enumerate() {
            let seq: Vec<u32> = layers
                .iter()
                .flatten()
                .filter_map(|g| match *g {
                    Gate::Cx(a, q) if a == job.ancilla => Some(q),
                    _ => None,
                })
                .collect();
            let want: Vec<u32> = o.x[j].as_ref().unwrap().iter().flatten().map(|&q| q as u32).collect();
            assert_eq!(seq, want);
        }
    }
}
