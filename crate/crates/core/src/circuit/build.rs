use serde::{Deserialize, Serialize};

use crate::codes::{Basis, CssCode};
use crate::error::{invalid, Result};
use crate::gf2::BitMatrix;
use crate::surgery::DeformedCode;

use super::ir::{Circuit, Detector, Gate, Observable};
use super::schedule::{jobs_for, Builder, CheckJob, CheckOrders, SlotOrder};

/// Which error type the detectors and observables track. `Z` prepares and
/// reads out in the Z basis and tracks X errors; `X` the converse. `Both`
/// prepares in Z but attaches every deterministic detector of either type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentBasis {
    Z,
    X,
    Both,
}

impl ExperimentBasis {
    fn prep(self) -> Basis {
        match self {
            ExperimentBasis::X => Basis::X,
            _ => Basis::Z,
        }
    }

    fn tracks(self, b: Basis) -> bool {
        match self {
            ExperimentBasis::Both => true,
            ExperimentBasis::Z => b == Basis::Z,
            ExperimentBasis::X => b == Basis::X,
        }
    }
}

/// Qubit roles of an experiment circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    /// Data qubits of the original code, `0..n`.
    pub n: usize,
    /// Ancilla-system (edge) qubits, `n..n + r_g`.
    pub r_g: usize,
    /// First X-check ancilla.
    pub x_ancilla: usize,
    /// First Z-check ancilla.
    pub z_ancilla: usize,
    pub total: usize,
}

/// Comparison state of one check family across rounds.
struct Tracker {
    prev: Vec<Option<u32>>,
    /// Records to fold into the next comparison of each check.
    pending: Vec<Vec<u32>>,
}

impl Tracker {
    fn new(m: usize) -> Self {
        Self {
            prev: vec![None; m],
            pending: vec![Vec::new(); m],
        }
    }

    /// Compares each of `recs` with the previous record of the same check.
    /// Checks with no previous record are compared with 0 when
    /// `deterministic_start` is set and skipped otherwise.
    fn compare(&mut self, recs: &[u32], deterministic_start: bool, label: &str, round: usize, out: &mut Vec<Detector>) {
        for (i, &r) in recs.iter().enumerate() {
            let mut records = std::mem::take(&mut self.pending[i]);
            match self.prev[i] {
                Some(p) => records.push(p),
                None if deterministic_start => {}
                None => {
                    self.prev[i] = Some(r);
                    continue;
                }
            }
            records.push(r);
            out.push(Detector {
                records: normalize(records),
                label: format!("{label}[{i}]@{round}"),
            });
            self.prev[i] = Some(r);
        }
    }

    /// Closes each check against final data readouts.
    fn close(&mut self, h: &BitMatrix, readout: &[u32], offset: usize, label: &str, out: &mut Vec<Detector>) {
        for i in 0..self.prev.len() {
            let Some(p) = self.prev[i] else { continue };
            let mut records = std::mem::take(&mut self.pending[i]);
            records.push(p);
            records.extend(h.row_ones(i).filter(|&q| q >= offset && q - offset < readout.len()).map(|q| readout[q - offset]));
            out.push(Detector {
                records: normalize(records),
                label: format!("{label}[{i}]@final"),
            });
        }
    }
}

/// Sorts and cancels repeated records.
fn normalize(mut r: Vec<u32>) -> Vec<u32> {
    r.sort_unstable();
    let mut out: Vec<u32> = Vec::with_capacity(r.len());
    for x in r {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn readout_parity(row: impl Iterator<Item = usize>, readout: &[u32]) -> Vec<u32> {
    normalize(row.map(|q| readout[q]).collect())
}

/// Jobs whose first rows follow `orders` and extend onto extra columns.
fn extended_jobs(h: &BitMatrix, basis: Basis, first_ancilla: usize, orders: &[Option<SlotOrder>]) -> Vec<CheckJob> {
    let mut padded: Vec<Option<SlotOrder>> = orders.to_vec();
    padded.resize(h.rows(), None);
    jobs_for(h, basis, first_ancilla, Some(&padded))
}

fn prep_gate(b: Basis, q: usize) -> Gate {
    match b {
        Basis::Z => Gate::ResetZ(q as u32),
        Basis::X => Gate::ResetX(q as u32),
    }
}

fn measure_gate(b: Basis, q: usize) -> Gate {
    match b {
        Basis::Z => Gate::MeasureZ(q as u32),
        Basis::X => Gate::MeasureX(q as u32),
    }
}

/// Memory experiment: prepare, run `rounds` rounds of `code`'s checks, read
/// out transversally. Observables are the logical rows of the tracked basis.
pub fn build_memory_circuit(code: &CssCode, orders: &CheckOrders, rounds: usize, basis: ExperimentBasis) -> Result<Circuit> {
    if rounds == 0 {
        return Err(invalid("memory circuit needs at least one round"));
    }
    orders.validate(&code.h_x, &code.h_z)?;
    let n = code.n();
    let (rx, rz) = (code.h_x.rows(), code.h_z.rows());
    let mut b = Builder::new(n + rx + rz, n);
    let xj = jobs_for(&code.h_x, Basis::X, n, Some(&orders.x));
    let zj = jobs_for(&code.h_z, Basis::Z, n + rx, Some(&orders.z));
    let prep = basis.prep();
    let mut dets = Vec::new();
    let mut tx = Tracker::new(rx);
    let mut tz = Tracker::new(rz);
    let mut readout = Vec::new();
    for t in 0..rounds {
        let resets: Vec<Gate> = if t == 0 { (0..n).map(|q| prep_gate(prep, q)).collect() } else { vec![] };
        let meas: Vec<Gate> = if t + 1 == rounds { (0..n).map(|q| measure_gate(prep, q)).collect() } else { vec![] };
        let (xr, zr, er) = b.round(&xj, &zj, &resets, &meas);
        if basis.tracks(Basis::X) {
            tx.compare(&xr, prep == Basis::X, "X", t, &mut dets);
        }
        if basis.tracks(Basis::Z) {
            tz.compare(&zr, prep == Basis::Z, "Z", t, &mut dets);
        }
        readout = er;
    }
    let mut obs = Vec::new();
    if basis.tracks(prep) {
        let (tracker, h, j) = match prep {
            Basis::Z => (&mut tz, &code.h_z, &code.j_z),
            Basis::X => (&mut tx, &code.h_x, &code.j_x),
        };
        tracker.close(h, &readout, 0, &format!("{prep:?}"), &mut dets);
        for i in 0..j.rows() {
            obs.push(Observable {
                records: readout_parity(j.row_ones(i), &readout),
                name: format!("{prep:?}{i}"),
            });
        }
    }
    let mut c = b.finish();
    c.detectors = dets;
    c.observables = obs;
    c.validate().map_err(invalid)?;
    Ok(c)
}

pub fn injection_layout(dc: &DeformedCode) -> QubitLayout {
    let n = dc.n();
    let r_g = dc.r_g();
    let nb = n + r_g;
    let x_ancilla = nb;
    let z_ancilla = nb + dc.bar_h_x.rows();
    QubitLayout {
        n,
        r_g,
        x_ancilla,
        z_ancilla,
        total: z_ancilla + dc.bar_h_z.rows(),
    }
}

/// Surgery experiment: `d_t` rounds of the original code, `d_t` rounds of
/// the deformed code with the ancilla system prepared in `|+⟩` and read
/// out in X afterwards, `d_t` rounds of the original code, transversal
/// readout.
///
/// Z-basis observables: `Z{i}` for the rows of `J̄_Z` on the data, then
/// `oc{i}` for each measured operator, taken from the first deformed round
/// of vertex checks. X-basis observables: `X{i}` for the rows of `J̄_X`,
/// read from data and ancilla-system outcomes.
pub fn build_injection_circuit(dc: &DeformedCode, orders: &CheckOrders, d_t: usize, basis: ExperimentBasis) -> Result<Circuit> {
    if d_t == 0 {
        return Err(invalid("injection circuit needs d_t >= 1"));
    }
    let code = &dc.original;
    orders.validate(&code.h_x, &code.h_z)?;
    let lay = injection_layout(dc);
    let n = lay.n;
    let (rx, rz) = (code.h_x.rows(), code.h_z.rows());
    let (rx_bar, rz_bar) = (dc.bar_h_x.rows(), dc.bar_h_z.rows());
    let edges: Vec<usize> = (n..n + lay.r_g).collect();

    let pad = |h: &BitMatrix| h.hstack(&BitMatrix::zeros(h.rows(), lay.r_g));
    let xj_plain = jobs_for(&pad(&code.h_x), Basis::X, lay.x_ancilla, Some(&orders.x));
    let zj_plain = jobs_for(&pad(&code.h_z), Basis::Z, lay.z_ancilla, Some(&orders.z));
    let xj_def = extended_jobs(&dc.bar_h_x, Basis::X, lay.x_ancilla, &orders.x);
    let zj_def = extended_jobs(&dc.bar_h_z, Basis::Z, lay.z_ancilla, &orders.z);

    let prep = basis.prep();
    let mut b = Builder::new(lay.total, n + lay.r_g);
    let mut dets = Vec::new();
    let mut tx = Tracker::new(rx);
    let mut tz = Tracker::new(rz);
    let mut tplaq = Tracker::new(rx_bar - rx);
    let mut tvert = Tracker::new(rz_bar - rz);
    let mut first_vertex_records = Vec::new();
    let mut readout = Vec::new();
    let mut edge_readout = Vec::new();
    let total_rounds = 3 * d_t;
    for t in 0..total_rounds {
        let deformed = (d_t..2 * d_t).contains(&t);
        let mut resets: Vec<Gate> = Vec::new();
        let mut meas: Vec<Gate> = Vec::new();
        if t == 0 {
            resets.extend((0..n).map(|q| prep_gate(prep, q)));
        }
        if t == d_t {
            resets.extend(edges.iter().map(|&q| Gate::ResetX(q as u32)));
        }
        if t == 2 * d_t - 1 {
            meas.extend(edges.iter().map(|&q| Gate::MeasureX(q as u32)));
        }
        if t + 1 == total_rounds {
            meas.extend((0..n).map(|q| measure_gate(prep, q)));
        }
        let (xj, zj) = if deformed { (&xj_def, &zj_def) } else { (&xj_plain, &zj_plain) };
        let (xr, zr, er) = b.round(xj, zj, &resets, &meas);

        if basis.tracks(Basis::X) {
            tx.compare(&xr[..rx], prep == Basis::X, "X", t, &mut dets);
            if deformed {
                // Plaquettes act only on the ancilla system, which starts in |+⟩.
                tplaq.compare(&xr[rx..], true, "P", t, &mut dets);
            }
        }
        if basis.tracks(Basis::Z) {
            tz.compare(&zr[..rz], prep == Basis::Z, "Z", t, &mut dets);
            if deformed {
                tvert.compare(&zr[rz..], false, "V", t, &mut dets);
            }
        }
        if t == d_t {
            first_vertex_records = zr[rz..].to_vec();
        }
        if t == 2 * d_t - 1 {
            let edge_recs = &er[..lay.r_g];
            if basis.tracks(Basis::X) {
                // Removing the ancilla system changes deformed X checks by
                // their ancilla part, read from the edge outcomes.
                for i in 0..rx {
                    tx.pending[i].extend(dc.bar_h_x.row_ones(i).filter(|&q| q >= n).map(|q| edge_recs[q - n]));
                }
                let hm = dc.bar_h_x.row_range(rx, rx_bar - rx);
                tplaq.close(&hm, edge_recs, n, "P", &mut dets);
            }
            edge_readout = edge_recs.to_vec();
        }
        if t + 1 == total_rounds {
            readout = er;
        }
    }
    let mut obs = Vec::new();
    match prep {
        Basis::Z => {
            if basis.tracks(Basis::Z) {
                tz.close(&code.h_z, &readout, 0, "Z", &mut dets);
                for i in 0..dc.bar_j_z.rows() {
                    obs.push(Observable {
                        records: readout_parity(dc.bar_j_z.row_ones(i).filter(|&q| q < n), &readout),
                        name: format!("Z{i}"),
                    });
                }
                let om = dc.outcome_map();
                for i in 0..om.rows() {
                    obs.push(Observable {
                        records: normalize(om.row_ones(i).map(|v| first_vertex_records[v]).collect()),
                        name: format!("oc{i}"),
                    });
                }
            }
        }
        Basis::X => {
            tx.close(&code.h_x, &readout, 0, "X", &mut dets);
            for i in 0..dc.bar_j_x.rows() {
                let recs = dc
                    .bar_j_x
                    .row_ones(i)
                    .map(|q| if q < n { readout[q] } else { edge_readout[q - n] })
                    .collect();
                obs.push(Observable {
                    records: normalize(recs),
                    name: format!("X{i}"),
                });
            }
        }
    }
    let mut c = b.finish();
    c.detectors = dets;
    c.observables = obs;
    c.validate().map_err(invalid)?;
    Ok(c)
}
