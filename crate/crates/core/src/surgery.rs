//! Deformed codes for simultaneous Z-logical measurement.
//!
//! A glue code `(H_G, H_M)` is attached to the original code through the
//! pasting matrices `S` and `T`; thickening it into `d_R` layers makes the
//! pair `(d_R, S)`-bounded, which keeps the deformed code's X distance at
//! least `min(d, d_R)`.

use serde::{Deserialize, Serialize};

use crate::codes::CssCode;
use crate::distance::{min_weight_coset, Distance, SearchBudget};
use crate::error::{invalid, shape_err, Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::par::Execution;

/// The measured operators `αJ_Z` and a complement `α⊥` with right inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryTargets {
    pub alpha: BitMatrix,
    pub alpha_perp: BitMatrix,
    pub alpha_perp_r: BitMatrix,
}

impl SurgeryTargets {
    /// Uses a kernel basis of `α` as `α⊥`.
    pub fn new(alpha: BitMatrix) -> Result<Self> {
        let perp = alpha.kernel_basis();
        let perp_r = right_inverse_or_empty(&perp)?;
        Self::with_complement(alpha, perp, perp_r)
    }

    pub fn with_complement(alpha: BitMatrix, alpha_perp: BitMatrix, alpha_perp_r: BitMatrix) -> Result<Self> {
        let k = alpha.cols();
        let q = alpha.rows();
        if alpha.rank() != q || q > k {
            return Err(invalid("α must have full row rank"));
        }
        if alpha_perp.shape() != (k - q, k) || alpha_perp_r.shape() != (k, k - q) {
            return Err(shape_err("α⊥ must be (k−q)×k and α⊥^r k×(k−q)"));
        }
        if !alpha_perp.mul(&alpha.transpose()).is_zero() || alpha_perp.rank() != k - q {
            return Err(invalid("α⊥ must be a full-rank complement with α⊥·αᵀ = 0"));
        }
        if alpha_perp.mul(&alpha_perp_r) != BitMatrix::identity(k - q) {
            return Err(invalid("α⊥^r is not a right inverse of α⊥"));
        }
        Ok(Self {
            alpha,
            alpha_perp,
            alpha_perp_r,
        })
    }

    pub fn q(&self) -> usize {
        self.alpha.rows()
    }
}

fn right_inverse_or_empty(m: &BitMatrix) -> Result<BitMatrix> {
    if m.rows() == 0 {
        Ok(BitMatrix::zeros(m.cols(), 0))
    } else {
        m.right_inverse()
    }
}

/// Ancilla system `(H_G, H_M)` with pasting matrices and auxiliaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueCode {
    /// `r_G × n_G`: rows are ancilla qubits (edges), columns vertices.
    pub h_g: BitMatrix,
    /// `r_M × r_G`.
    pub h_m: BitMatrix,
    /// `n_G × n`.
    pub s: BitMatrix,
    /// `r_X × r_G`.
    pub t: BitMatrix,
    /// `n × n_G`.
    pub r: BitMatrix,
    /// `(k−q) × r_G`.
    pub beta: BitMatrix,
}

impl GlueCode {
    pub fn n_g(&self) -> usize {
        self.h_g.cols()
    }

    pub fn r_g(&self) -> usize {
        self.h_g.rows()
    }

    pub fn r_m(&self) -> usize {
        self.h_m.rows()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphPolicy {
    /// Path through each operator's support in qubit order.
    #[default]
    Path,
    /// Edges joining support qubits that share an X check, in check order,
    /// plus path edges where needed for connectivity.
    SharedChecks,
}

/// Edge list of a connected graph on `verts` (local indices).
fn glue_edges(code: &CssCode, support: &[usize], policy: GraphPolicy) -> Vec<(usize, usize)> {
    let path: Vec<(usize, usize)> = (1..support.len()).map(|i| (i - 1, i)).collect();
    match policy {
        GraphPolicy::Path => path,
        GraphPolicy::SharedChecks => {
            let local = |q: usize| support.binary_search(&q).ok();
            let mut edges: Vec<(usize, usize)> = Vec::new();
            let mut parent: Vec<usize> = (0..support.len()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut x = x;
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for r in 0..code.h_x.rows() {
                let hit: Vec<usize> = code.h_x.row_ones(r).filter_map(local).collect();
                for w in hit.windows(2) {
                    let e = (w[0], w[1]);
                    if !edges.contains(&e) {
                        edges.push(e);
                        let (a, b) = (find(&mut parent, e.0), find(&mut parent, e.1));
                        parent[a] = b;
                    }
                }
            }
            for &(a, b) in &path {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    edges.push((a, b));
                    parent[ra] = rb;
                }
            }
            edges
        }
    }
}

/// Base glue: one connected graph per measured operator on its support,
/// with `H_G` the edge-vertex incidence, `H_M` a cycle basis and `S` the
/// one-hot vertex-to-qubit map. Blocks are direct-summed across operators,
/// whose supports must be disjoint.
pub fn build_graph_glue(code: &CssCode, targets: &SurgeryTargets, policy: GraphPolicy) -> Result<GlueCode> {
    let n = code.n();
    if targets.alpha.cols() != code.k() {
        return Err(shape_err("α must have k columns"));
    }
    let measured = targets.alpha.mul(&code.j_z);
    let mut used = BitVec::zeros(n);
    let mut h_g = BitMatrix::zeros(0, 0);
    let mut s_rows: Vec<BitVec> = Vec::new();
    for i in 0..measured.rows() {
        let support: Vec<usize> = measured.row_ones(i).collect();
        if support.is_empty() {
            return Err(invalid("measured operator has empty support"));
        }
        for &qb in &support {
            if used.get(qb) {
                return Err(invalid("measured operators must have disjoint supports"));
            }
            used.set(qb, true);
            s_rows.push(BitVec::from_indices(n, [qb]));
        }
        let edges = glue_edges(code, &support, policy);
        let block = BitMatrix::from_entries(edges.len(), support.len(), edges.iter().enumerate().flat_map(|(e, &(a, b))| [(e, a), (e, b)]));
        h_g = h_g.direct_sum(&block);
    }
    let s = BitMatrix::from_rows(n, &s_rows);
    let h_m = h_g.transpose().kernel_basis();
    let h_gt = h_g.transpose();
    let t = h_gt.solve_right(&s.mul(&code.h_x.transpose()))?.transpose();
    let perp_jx = targets.alpha_perp.mul(&code.j_x);
    let beta = h_gt.solve_right(&s.mul(&perp_jx.transpose()))?.transpose();
    let r = s.transpose();
    Ok(GlueCode { h_g, h_m, s, t, r, beta })
}

/// `(d−1)×d` chain boundary matrix.
fn lambda(d: usize) -> BitMatrix {
    BitMatrix::from_entries(d - 1, d, (0..d - 1).flat_map(|i| [(i, i), (i, i + 1)]))
}

fn unit_col(d: usize) -> BitMatrix {
    BitMatrix::from_entries(d, 1, [(0, 0)])
}

/// Stacks `d_r` copies of the glue graph, joined by vertical edges between
/// consecutive copies, and pastes only the first copy onto the code.
///
/// Ancilla qubits are ordered as the `(d_r−1)·n_G` vertical edges (layer
/// major) followed by the `d_r·r_G` in-layer edges. Meta-checks are the
/// plaquettes between layers plus the base cycles in every layer.
pub fn thicken_sticker(glue: &GlueCode, d_r: usize) -> Result<GlueCode> {
    if d_r == 0 {
        return Err(invalid("d_r must be at least 1"));
    }
    if d_r == 1 {
        return Ok(glue.clone());
    }
    let n_g = glue.n_g();
    let r_g = glue.r_g();
    let lam = lambda(d_r);
    let e1 = unit_col(d_r);
    let h_g = lam
        .kron(&BitMatrix::identity(n_g))
        .vstack(&BitMatrix::identity(d_r).kron(&glue.h_g));
    let plaquettes = BitMatrix::identity(d_r - 1)
        .kron(&glue.h_g)
        .hstack(&lam.kron(&BitMatrix::identity(r_g)));
    let cycles = BitMatrix::zeros(d_r * glue.r_m(), (d_r - 1) * n_g).hstack(&BitMatrix::identity(d_r).kron(&glue.h_m));
    let h_m = plaquettes.vstack(&cycles);
    let s = e1.kron(&glue.s);
    let pad = |m: &BitMatrix| BitMatrix::zeros(m.rows(), (d_r - 1) * n_g).hstack(&e1.transpose().kron(m));
    let t = pad(&glue.t);
    let beta = pad(&glue.beta);
    let ones = BitMatrix::from_entries(1, d_r, (0..d_r).map(|i| (0, i)));
    let r = ones.kron(&glue.r);
    Ok(GlueCode { h_g, h_m, s, t, r, beta })
}

/// The merged code measured during surgery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformedCode {
    pub original: CssCode,
    pub targets: SurgeryTargets,
    /// Thickened glue.
    pub glue: GlueCode,
    pub d_r: usize,
    pub bar_h_x: BitMatrix,
    pub bar_h_z: BitMatrix,
    pub bar_j_x: BitMatrix,
    pub bar_j_z: BitMatrix,
}

impl DeformedCode {
    pub fn n(&self) -> usize {
        self.original.n()
    }

    /// Number of ancilla qubits.
    pub fn r_g(&self) -> usize {
        self.glue.r_g()
    }

    pub fn n_g(&self) -> usize {
        self.glue.n_g()
    }

    pub fn r_m(&self) -> usize {
        self.glue.r_m()
    }

    /// `αJ_Z`, the measured operators.
    pub fn measured(&self) -> BitMatrix {
        self.targets.alpha.mul(&self.original.j_z)
    }

    /// `αJ_Z·R`, the vertex checks whose product reveals each measured operator.
    pub fn outcome_map(&self) -> BitMatrix {
        self.measured().mul(&self.glue.r)
    }
}

/// Thickens `glue` to `d_r` layers and assembles the deformed code.
pub fn assemble_deformed(code: &CssCode, targets: &SurgeryTargets, glue: &GlueCode, d_r: usize) -> Result<DeformedCode> {
    let glue = thicken_sticker(glue, d_r)?;
    let r_z = code.h_z.rows();
    let bar_h_x = BitMatrix::block(&[
        &[&code.h_x, &glue.t],
        &[&BitMatrix::zeros(glue.r_m(), code.n()), &glue.h_m],
    ]);
    let bar_h_z = BitMatrix::block(&[&[&code.h_z, &BitMatrix::zeros(r_z, glue.r_g())], &[&glue.s, &glue.h_g.transpose()]]);
    let bar_j_x = targets.alpha_perp.mul(&code.j_x).hstack(&glue.beta);
    let kq = targets.alpha_perp.rows();
    let bar_j_z = targets
        .alpha_perp_r
        .transpose()
        .mul(&code.j_z)
        .hstack(&BitMatrix::zeros(kq, glue.r_g()));
    Ok(DeformedCode {
        original: code.clone(),
        targets: targets.clone(),
        glue,
        d_r,
        bar_h_x,
        bar_h_z,
        bar_j_x,
        bar_j_z,
    })
}

/// Builds the base glue with `policy` and assembles the deformed code.
pub fn deform(code: &CssCode, targets: &SurgeryTargets, policy: GraphPolicy, d_r: usize) -> Result<DeformedCode> {
    let glue = build_graph_glue(code, targets, policy)?;
    assemble_deformed(code, targets, &glue, d_r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryReport {
    pub entries: Vec<CheckEntry>,
}

impl SurgeryReport {
    fn push(&mut self, name: &str, pass: bool) {
        self.entries.push(CheckEntry {
            name: name.to_string(),
            pass,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.name.as_str()).collect()
    }
}

/// Checks conditions i–iv on the thickened glue together with every
/// deformed-code and generator identity. Shape mismatches are reported as
/// failures rather than panics.
pub fn verify_surgery_conditions(dc: &DeformedCode) -> SurgeryReport {
    let mut rep = SurgeryReport::default();
    let c = &dc.original;
    let g = &dc.glue;
    let tg = &dc.targets;
    let (n, k, q) = (c.n(), c.k(), tg.q());
    let shapes_ok = g.s.shape() == (g.n_g(), n)
        && g.t.shape() == (c.h_x.rows(), g.r_g())
        && g.r.shape() == (n, g.n_g())
        && g.beta.shape() == (k - q, g.r_g())
        && g.h_m.cols() == g.r_g()
        && tg.alpha.cols() == k;
    rep.push("shapes", shapes_ok);
    if !shapes_ok {
        return rep;
    }
    let measured = dc.measured();
    let ar = measured.mul(&g.r);
    rep.push("i: H_X·Sᵀ = T·H_G", c.h_x.mul(&g.s.transpose()) == g.t.mul(&g.h_g));
    rep.push("ii: H_M·H_G = 0", g.h_m.mul(&g.h_g).is_zero());
    rep.push("iii: αJ_Z·R·S = αJ_Z", ar.mul(&g.s) == measured);
    rep.push("iii: H_G·(αJ_Z·R)ᵀ = 0", g.h_g.mul(&ar.transpose()).is_zero());
    rep.push(
        "iv: α⊥J_X·Sᵀ = β·H_G",
        tg.alpha_perp.mul(&c.j_x).mul(&g.s.transpose()) == g.beta.mul(&g.h_g),
    );
    rep.push("‖S‖ = 1", !g.s.is_zero() && (0..g.s.rows()).all(|r| g.s.row_weight(r) <= 1));
    rep.push("α full rank", tg.alpha.rank() == q);
    rep.push("α⊥ full rank", tg.alpha_perp.rank() == k - q);
    rep.push("α⊥·αᵀ = 0", tg.alpha_perp.mul(&tg.alpha.transpose()).is_zero());
    rep.push("α⊥·α⊥^r = E", tg.alpha_perp.mul(&tg.alpha_perp_r) == BitMatrix::identity(k - q));
    rep.push("H̄_X·H̄_Zᵀ = 0", dc.bar_h_x.mul(&dc.bar_h_z.transpose()).is_zero());
    rep.push("H̄_X·J̄_Zᵀ = 0", dc.bar_h_x.mul(&dc.bar_j_z.transpose()).is_zero());
    rep.push("H̄_Z·J̄_Xᵀ = 0", dc.bar_h_z.mul(&dc.bar_j_x.transpose()).is_zero());
    rep.push("J̄_X·J̄_Zᵀ = E", dc.bar_j_x.mul(&dc.bar_j_z.transpose()) == BitMatrix::identity(k - q));
    let n_bar = n + g.r_g();
    rep.push("k̄ = k − q", n_bar - dc.bar_h_x.rank() - dc.bar_h_z.rank() == k - q);
    let outcome_rows = ar.mul(&g.s.hstack(&g.h_g.transpose()));
    rep.push(
        "αJ_Z·R·(S | H_Gᵀ) = (αJ_Z | 0)",
        outcome_rows == measured.hstack(&BitMatrix::zeros(q, g.r_g())),
    );
    rep
}

/// First `v` (in weight then lexicographic order) with `H_M·vᵀ = 0`,
/// `|v| < d_r`, for which no `u` with `H_G·uᵀ = vᵀ` has `|u·S| <= |v|`.
pub fn bounded_pair_counterexample(
    h_g: &BitMatrix,
    h_m: &BitMatrix,
    s: &BitMatrix,
    d_r: usize,
    budget: SearchBudget,
) -> Result<Option<BitVec>> {
    if h_m.cols() != h_g.rows() || s.rows() != h_g.cols() {
        return Err(shape_err("bounded pair: inconsistent shapes"));
    }
    let r_g = h_g.rows();
    let candidates: u128 = (1..d_r).map(|w| crate::distance::binomial(r_g, w)).fold(0u128, u128::saturating_add);
    if candidates > budget.max_candidates {
        return Err(Error::ExplosionGuard {
            candidates,
            budget: budget.max_candidates,
        });
    }
    let ks = h_g.kernel_basis().mul(s);
    let mut found = None;
    let mut failure: Option<Error> = None;
    for w in 1..d_r.min(r_g + 1) {
        for_each_combination(r_g, w, &mut |idx| {
            let v = BitVec::from_indices(r_g, idx.iter().copied());
            if !h_m.mul_vec(&v).is_zero() {
                return false;
            }
            let u0 = match h_g.solve_vec(&v) {
                Ok(u) => u,
                Err(_) => {
                    found = Some(v);
                    return true;
                }
            };
            match min_weight_coset(&s.vec_mul(&u0), &ks, w, budget, Execution::Sequential) {
                Ok(Distance::Exact(_)) => false,
                Ok(_) => {
                    found = Some(v);
                    true
                }
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if found.is_some() {
            break;
        }
    }
    Ok(found)
}

/// Whether `(H_G, H_M)` is `(d_r, S)`-bounded, by exhaustive search.
pub fn check_bounded_pair(h_g: &BitMatrix, h_m: &BitMatrix, s: &BitMatrix, d_r: usize, budget: SearchBudget) -> Result<bool> {
    Ok(bounded_pair_counterexample(h_g, h_m, s, d_r, budget)?.is_none())
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order until it
/// returns true.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
