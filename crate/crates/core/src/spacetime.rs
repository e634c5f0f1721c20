//! Spacetime check and generator matrices for `d_T` rounds of deformed-code
//! parity checks.
//!
//! Columns are laid out as
//! `(round-0 data | d_T−1 interior data blocks | final data | outcomes)`,
//! with outcomes grouped by round and then by check. The X family acts on
//! Z errors and has `n + r_G` data columns in every block; the Z family acts
//! on X errors and has only the `n` original qubits in its first and last
//! blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::repetition_chain;
use crate::error::{invalid, shape_err, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::surgery::DeformedCode;

/// Which check family a vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `H^st_X`: X checks detecting Z errors.
    X,
    /// `H^st_Z`: Z checks detecting X errors.
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Column {
    /// Data error in block `block` (0 = before the first round,
    /// `d_T` = after the last).
    Data { block: usize, qubit: usize },
    /// Flip of the outcome of `check` in round `round` (1-based).
    Outcome { round: usize, check: usize },
}

/// Block sizes of one family's column layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub first: usize,
    pub interior: usize,
    pub last: usize,
    pub checks: usize,
    pub d_t: usize,
}

impl Layout {
    pub fn total(&self) -> usize {
        self.first + (self.d_t - 1) * self.interior + self.last + self.d_t * self.checks
    }

    pub fn interior_offset(&self, t: usize) -> usize {
        self.first + (t - 1) * self.interior
    }

    pub fn last_offset(&self) -> usize {
        self.first + (self.d_t - 1) * self.interior
    }

    pub fn outcome_offset(&self, round: usize) -> usize {
        self.last_offset() + self.last + (round - 1) * self.checks
    }

    pub fn column(&self, c: usize) -> Column {
        let mut c = c;
        if c < self.first {
            return Column::Data { block: 0, qubit: c };
        }
        c -= self.first;
        if c < (self.d_t - 1) * self.interior {
            return Column::Data {
                block: 1 + c / self.interior,
                qubit: c % self.interior,
            };
        }
        c -= (self.d_t - 1) * self.interior;
        if c < self.last {
            return Column::Data {
                block: self.d_t,
                qubit: c,
            };
        }
        c -= self.last;
        Column::Outcome {
            round: 1 + c / self.checks,
            check: c % self.checks,
        }
    }

    pub fn columns(&self) -> Vec<Column> {
        (0..self.total()).map(|c| self.column(c)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacetimeCode {
    pub h_st_x: BitMatrix,
    pub h_st_z: BitMatrix,
    pub j_st_x: BitMatrix,
    pub j_st_z: BitMatrix,
    pub j_st_mz: BitMatrix,
    pub j_st_oc: BitMatrix,
    pub d_t: usize,
    pub layout_x: Layout,
    pub layout_z: Layout,
}

fn ones_row(len: usize) -> BitMatrix {
    BitMatrix::from_entries(1, len, (0..len).map(|i| (0, i)))
}

fn unit_row(len: usize, i: usize) -> BitMatrix {
    BitMatrix::from_entries(1, len, [(0, i)])
}

/// `γ₁ = (E_{r_Z} 0)`, selecting original Z-check outcomes.
pub fn gamma1(dc: &DeformedCode) -> BitMatrix {
    let r_z = dc.original.h_z.rows();
    BitMatrix::identity(r_z).hstack(&BitMatrix::zeros(r_z, dc.n_g()))
}

/// `γ₂ = (0 E_{n_G})`, selecting vertex-check outcomes.
pub fn gamma2(dc: &DeformedCode) -> BitMatrix {
    let r_z = dc.original.h_z.rows();
    BitMatrix::zeros(dc.n_g(), r_z).hstack(&BitMatrix::identity(dc.n_g()))
}

/// `η = (E_n 0)`, dropping ancilla columns.
pub fn eta(dc: &DeformedCode) -> BitMatrix {
    BitMatrix::identity(dc.n()).hstack(&BitMatrix::zeros(dc.n(), dc.r_g()))
}

fn three_blocks(first: &BitMatrix, interior: &BitMatrix, last: &BitMatrix, outcomes: &BitMatrix, d_t: usize) -> BitMatrix {
    let mid = ones_row(d_t - 1).kron(interior);
    first.hstack(&mid).hstack(last).hstack(outcomes)
}

pub fn build_spacetime(dc: &DeformedCode, d_t: usize) -> Result<SpacetimeCode> {
    if d_t < 2 {
        return Err(invalid("d_t must be at least 2"));
    }
    let c = &dc.original;
    let n = c.n();
    let nbar = n + dc.r_g();
    let m_x = dc.bar_h_x.rows();
    let m_z = dc.bar_h_z.rows();
    let h_d = repetition_chain(d_t)?;
    let e_first = unit_row(d_t, 0);
    let e_last = unit_row(d_t, d_t - 1);
    let interior_x = BitMatrix::identity(d_t - 1).kron(&dc.bar_h_x);
    let interior_z = BitMatrix::identity(d_t - 1).kron(&dc.bar_h_z);

    let layout_x = Layout {
        first: nbar,
        interior: nbar,
        last: nbar,
        checks: m_x,
        d_t,
    };
    let layout_z = Layout {
        first: n,
        interior: nbar,
        last: n,
        checks: m_z,
        d_t,
    };

    let zx = |r: usize, c: usize| BitMatrix::zeros(r, c);
    let e_mx = BitMatrix::identity(m_x);
    let mid_cols_x = (d_t - 1) * nbar;
    let h_st_x = BitMatrix::block(&[
        &[&dc.bar_h_x, &zx(m_x, mid_cols_x), &zx(m_x, nbar), &e_first.kron(&e_mx)],
        &[&zx(interior_x.rows(), nbar), &interior_x, &zx(interior_x.rows(), nbar), &h_d.kron(&e_mx)],
        &[&zx(m_x, nbar), &zx(m_x, mid_cols_x), &dc.bar_h_x, &e_last.kron(&e_mx)],
    ]);

    let g1 = gamma1(dc);
    let r_z = c.h_z.rows();
    let mid_cols_z = (d_t - 1) * nbar;
    let h_st_z = BitMatrix::block(&[
        &[&c.h_z, &zx(r_z, mid_cols_z), &zx(r_z, n), &e_first.kron(&g1)],
        &[&zx(interior_z.rows(), n), &interior_z, &zx(interior_z.rows(), n), &h_d.kron(&BitMatrix::identity(m_z))],
        &[&zx(r_z, n), &zx(r_z, mid_cols_z), &c.h_z, &e_last.kron(&g1)],
    ]);

    let kq = dc.bar_j_x.rows();
    let q = dc.targets.q();
    let j_st_x = three_blocks(&dc.bar_j_x, &dc.bar_j_x, &dc.bar_j_x, &zx(kq, d_t * m_x), d_t);
    let perp_jz = dc.targets.alpha_perp_r.transpose().mul(&c.j_z);
    let j_st_z = three_blocks(&perp_jz, &dc.bar_j_z, &perp_jz, &zx(kq, d_t * m_z), d_t);
    let measured = dc.measured();
    let j_st_mz = three_blocks(&measured, &measured.mul(&eta(dc)), &measured, &zx(q, d_t * m_z), d_t);
    let oc_window = dc.outcome_map().mul(&gamma2(dc));
    let j_st_oc = measured
        .hstack(&zx(q, mid_cols_z + n))
        .hstack(&e_first.kron(&oc_window));

    debug_assert_eq!(h_st_x.cols(), layout_x.total());
    debug_assert_eq!(h_st_z.cols(), layout_z.total());
    Ok(SpacetimeCode {
        h_st_x,
        h_st_z,
        j_st_x,
        j_st_z,
        j_st_mz,
        j_st_oc,
        d_t,
        layout_x,
        layout_z,
    })
}

/// Detection and logical-flip outcome of a spacetime error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub detected: bool,
    /// Flips of the unmeasured logicals (`J^st_X` or `J^st_Z`).
    pub unmeasured: BitVec,
    /// Flips of the measured logicals (`J^st_mz`); Z family only.
    pub measured: Option<BitVec>,
    /// Flips of the extracted outcomes (`J^st_oc`); Z family only.
    pub outcome: Option<BitVec>,
}

pub fn logical_flips(sc: &SpacetimeCode, e: &BitVec, family: Family) -> Result<FlipRecord> {
    let (h, j) = match family {
        Family::X => (&sc.h_st_x, &sc.j_st_x),
        Family::Z => (&sc.h_st_z, &sc.j_st_z),
    };
    if e.len() != h.cols() {
        return Err(shape_err(format!("error has length {}, layout expects {}", e.len(), h.cols())));
    }
    let z = family == Family::Z;
    Ok(FlipRecord {
        detected: !h.mul_vec(e).is_zero(),
        unmeasured: j.mul_vec(e),
        measured: z.then(|| sc.j_st_mz.mul_vec(e)),
        outcome: z.then(|| sc.j_st_oc.mul_vec(e)),
    })
}

/// Measured-operator outcomes `αJ_Z·R·γ₂·μᵀ` from one round of deformed
/// Z-check outcomes `μ` (length `r_Z + n_G`).
pub fn extract_logical_outcomes(dc: &DeformedCode, mu: &BitVec) -> Result<BitVec> {
    let g2 = gamma2(dc);
    if mu.len() != g2.cols() {
        return Err(shape_err(format!("μ has length {}, expected r_Z + n_G = {}", mu.len(), g2.cols())));
    }
    Ok(dc.outcome_map().mul(&g2).mul_vec(mu))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub samples: usize,
    /// `(check name, failures)`.
    pub entries: Vec<(String, usize)>,
}

impl ConsistencyReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|(_, f)| *f == 0)
    }
}

fn random_kernel_element(kernel: &BitMatrix, rng: &mut ChaCha8Rng) -> BitVec {
    let mut e = BitVec::zeros(kernel.cols());
    for r in 0..kernel.rows() {
        if rng.gen::<bool>() {
            e.xor_assign(&kernel.row(r));
        }
    }
    e
}

/// Samples undetected errors of both families and checks that every `J^st`
/// flip equals the flip of the reduced effective error on the deformed or
/// original code.
///
/// For an X-family error the effective error is the sum of all data blocks;
/// it must satisfy `H̄_X` and flip `J̄_X` exactly as `J^st_X` does. For a
/// Z-family error the sum of the original-qubit parts must satisfy `H_Z` and
/// reproduce `J^st_Z` and `J^st_mz`. For every round `j` the outcome flip
/// equals `αJ_Z` on the partial sum over blocks before round `j`, plus the
/// round-`j` outcome errors seen through `αJ_Z·R·γ₂`.
pub fn verify_spacetime_consistency(sc: &SpacetimeCode, dc: &DeformedCode, samples: usize, seed: u64) -> ConsistencyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = &dc.original;
    let n = c.n();
    let lx = sc.layout_x;
    let lz = sc.layout_z;
    let kx = sc.h_st_x.kernel_basis();
    let kz = sc.h_st_z.kernel_basis();
    let perp_jz = dc.targets.alpha_perp_r.transpose().mul(&c.j_z);
    let measured = dc.measured();
    let oc_window = dc.outcome_map().mul(&gamma2(dc));
    let mut fails = [0usize; 6];

    let chain = {
        let h = repetition_chain(sc.d_t).expect("d_t >= 2");
        let mut v = h.vec_mul(&BitVec::from_indices(sc.d_t - 1, 0..sc.d_t - 1));
        v.flip(0);
        v.flip(sc.d_t - 1);
        v.is_zero()
    };

    for _ in 0..samples {
        let e = random_kernel_element(&kx, &mut rng);
        let mut u = e.slice(0, lx.first);
        for t in 1..sc.d_t {
            u.xor_assign(&e.slice(lx.interior_offset(t), lx.interior));
        }
        u.xor_assign(&e.slice(lx.last_offset(), lx.last));
        if !dc.bar_h_x.mul_vec(&u).is_zero() {
            fails[0] += 1;
        }
        if sc.j_st_x.mul_vec(&e) != dc.bar_j_x.mul_vec(&u) {
            fails[1] += 1;
        }

        let e = random_kernel_element(&kz, &mut rng);
        let u0 = e.slice(0, n);
        let interior: Vec<BitVec> = (1..sc.d_t).map(|t| e.slice(lz.interior_offset(t), n)).collect();
        let mut u = u0.clone();
        for b in &interior {
            u.xor_assign(b);
        }
        u.xor_assign(&e.slice(lz.last_offset(), n));
        if !c.h_z.mul_vec(&u).is_zero() {
            fails[2] += 1;
        }
        if sc.j_st_z.mul_vec(&e) != perp_jz.mul_vec(&u) {
            fails[3] += 1;
        }
        if sc.j_st_mz.mul_vec(&e) != measured.mul_vec(&u) {
            fails[4] += 1;
        }
        let oc = sc.j_st_oc.mul_vec(&e);
        let mut partial = u0;
        for j in 1..=sc.d_t {
            if j > 1 {
                partial.xor_assign(&interior[j - 2]);
            }
            let m_j = e.slice(lz.outcome_offset(j), lz.checks);
            let predicted = measured.mul_vec(&partial).xor(&oc_window.mul_vec(&m_j));
            if predicted != oc {
                fails[5] += 1;
                break;
            }
        }
    }
    let names = [
        "X: H̄_X·u_effᵀ = 0",
        "X: J^st_X·eᵀ = J̄_X·u_effᵀ",
        "Z: H_Z·u_effᵀ = 0",
        "Z: J^st_Z·eᵀ = α⊥^rᵀJ_Z·u_effᵀ",
        "Z: J^st_mz·eᵀ = αJ_Z·u_effᵀ",
        "Z: J^st_oc·eᵀ matches every round's partial effective error",
    ];
    let mut entries: Vec<(String, usize)> = names.iter().zip(fails).map(|(n, f)| (n.to_string(), f)).collect();
    entries.push(("chain identity e_1ᵀ + H_dᵀ·1ᵀ + e_dᵀ = 0".into(), usize::from(!chain)));
    ConsistencyReport { samples, entries }
}
