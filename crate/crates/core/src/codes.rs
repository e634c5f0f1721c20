//! CSS code constructions and logical-operator bookkeeping.

use serde::{Deserialize, Serialize};

use crate::distance::{min_weight_nontrivial, Distance, SearchBudget};
use crate::error::{invalid, shape_err, Error, Result};
use crate::gf2::{BitMatrix, BitVec, SpanBuilder};
use crate::par::Execution;

/// Pauli type of an operator or error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn opposite(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

/// A CSS code `(H_X, H_Z, J_X, J_Z)` with paired logical generators,
/// `J_X · J_Zᵀ = E_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssCode {
    pub h_x: BitMatrix,
    pub h_z: BitMatrix,
    pub j_x: BitMatrix,
    pub j_z: BitMatrix,
}

impl CssCode {
    /// Builds a code and checks every invariant.
    pub fn new(h_x: BitMatrix, h_z: BitMatrix, j_x: BitMatrix, j_z: BitMatrix) -> Result<Self> {
        let code = Self { h_x, h_z, j_x, j_z };
        code.validate()?;
        Ok(code)
    }

    /// Builds a code from its checks, deriving paired logical generators.
    pub fn from_checks(h_x: BitMatrix, h_z: BitMatrix) -> Result<Self> {
        let (j_x, j_z) = derive_logicals(&h_x, &h_z)?;
        Self::new(h_x, h_z, j_x, j_z)
    }

    pub fn n(&self) -> usize {
        self.h_x.cols()
    }

    pub fn k(&self) -> usize {
        self.j_x.rows()
    }

    pub fn checks(&self, basis: Basis) -> &BitMatrix {
        match basis {
            Basis::X => &self.h_x,
            Basis::Z => &self.h_z,
        }
    }

    pub fn logicals(&self, basis: Basis) -> &BitMatrix {
        match basis {
            Basis::X => &self.j_x,
            Basis::Z => &self.j_z,
        }
    }

    /// Named pass/fail results for each defining identity.
    pub fn invariants(&self) -> Vec<(&'static str, bool)> {
        let n = self.n();
        let shapes = self.h_z.cols() == n && self.j_x.cols() == n && self.j_z.cols() == n && self.j_x.rows() == self.j_z.rows();
        if !shapes {
            return vec![("shapes", false)];
        }
        let k = self.k();
        vec![
            ("shapes", true),
            ("H_X·H_Zᵀ = 0", self.h_x.mul(&self.h_z.transpose()).is_zero()),
            ("H_X·J_Zᵀ = 0", self.h_x.mul(&self.j_z.transpose()).is_zero()),
            ("H_Z·J_Xᵀ = 0", self.h_z.mul(&self.j_x.transpose()).is_zero()),
            ("J_X·J_Zᵀ = E_k", self.j_x.mul(&self.j_z.transpose()) == BitMatrix::identity(k)),
            ("k = n − rank H_X − rank H_Z", k + self.h_x.rank() + self.h_z.rank() == n),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self.invariants().into_iter().find(|(_, ok)| !ok) {
            None => Ok(()),
            Some((name, _)) => Err(invalid(format!("code invariant failed: {name}"))),
        }
    }

    /// Replaces the Z logicals by `j_z` (which must represent independent
    /// logical classes) and solves for the matching X logicals.
    pub fn with_z_logicals(&self, j_z: BitMatrix) -> Result<CssCode> {
        if j_z.rows() != self.k() || j_z.cols() != self.n() {
            return Err(shape_err("with_z_logicals: expected a k×n matrix"));
        }
        // New J_X = P·J_X (mod stabilizers), with J_X' · J_Z'ᵀ = E.
        // Write J_Z' ≡ Q·J_Z, then P = (Qᵀ)⁻¹ and Q = J_Z'·J_Xᵀ.
        let q = j_z.mul(&self.j_x.transpose());
        let qt_inv = q.transpose().right_inverse().map_err(|_| invalid("chosen Z logicals are dependent"))?;
        let j_x = qt_inv.mul(&self.j_x);
        CssCode::new(self.h_x.clone(), self.h_z.clone(), j_x, j_z)
    }
}

/// Chain-graph check matrix of the length-`d` repetition code,
/// `(d−1)×d` with row `i` supported on columns `i, i+1`.
pub fn repetition_chain(d: usize) -> Result<BitMatrix> {
    if d < 2 {
        return Err(invalid("repetition chain needs d >= 2"));
    }
    Ok(BitMatrix::from_entries(d - 1, d, (0..d - 1).flat_map(|i| [(i, i), (i, i + 1)])))
}

/// A single unprotected qubit: no checks, one logical pair.
pub fn bare_qubit() -> CssCode {
    CssCode {
        h_x: BitMatrix::zeros(0, 1),
        h_z: BitMatrix::zeros(0, 1),
        j_x: BitMatrix::identity(1),
        j_z: BitMatrix::identity(1),
    }
}

/// Qubit layout of the unrotated planar surface code on a
/// `(2d−1)×(2d−1)` grid.
#[derive(Clone, Debug)]
pub struct SurfaceLayout {
    pub d: usize,
    /// Grid coordinate of each data qubit.
    pub data: Vec<(usize, usize)>,
    pub x_checks: Vec<(usize, usize)>,
    pub z_checks: Vec<(usize, usize)>,
}

impl SurfaceLayout {
    pub fn new(d: usize) -> Self {
        let g = 2 * d - 1;
        let mut data = Vec::new();
        let mut x_checks = Vec::new();
        let mut z_checks = Vec::new();
        for r in 0..g {
            for c in 0..g {
                match (r % 2, c % 2) {
                    (0, 0) | (1, 1) => data.push((r, c)),
                    (0, 1) => z_checks.push((r, c)),
                    _ => x_checks.push((r, c)),
                }
            }
        }
        Self { d, data, x_checks, z_checks }
    }

    fn index_of(&self, pos: (usize, usize)) -> Option<usize> {
        self.data.binary_search(&pos).ok()
    }

    fn neighbours(&self, (r, c): (usize, usize)) -> Vec<usize> {
        let g = 2 * self.d - 1;
        let mut out = Vec::new();
        let cand = [
            (r.wrapping_sub(1), c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
            (r + 1, c),
        ];
        for (rr, cc) in cand {
            if rr < g && cc < g {
                if let Some(i) = self.index_of((rr, cc)) {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Unrotated planar surface code, `[[d² + (d−1)², 1, d]]`.
///
/// Z checks sit on even rows and odd columns, X checks on odd rows and even
/// columns. The Z logical runs down column 0 and the X logical along row 0.
pub fn surface(d: usize) -> Result<CssCode> {
    if d < 2 {
        return Err(invalid("surface code needs d >= 2"));
    }
    let lay = SurfaceLayout::new(d);
    let n = lay.data.len();
    let rows_of = |checks: &[(usize, usize)]| {
        BitMatrix::from_entries(
            checks.len(),
            n,
            checks.iter().enumerate().flat_map(|(i, &p)| lay.neighbours(p).into_iter().map(move |q| (i, q))),
        )
    };
    let h_x = rows_of(&lay.x_checks);
    let h_z = rows_of(&lay.z_checks);
    let g = 2 * d - 1;
    let z_log = BitVec::from_indices(n, (0..g).step_by(2).map(|r| lay.index_of((r, 0)).unwrap()));
    let x_log = BitVec::from_indices(n, (0..g).step_by(2).map(|c| lay.index_of((0, c)).unwrap()));
    CssCode::new(h_x, h_z, BitMatrix::row_matrix(&x_log), BitMatrix::row_matrix(&z_log))
}

/// Cyclic shift `M[i][(i+1) mod l] = 1`.
fn shift(l: usize) -> BitMatrix {
    BitMatrix::from_entries(l, l, (0..l).map(|i| (i, (i + 1) % l)))
}

fn matrix_power(m: &BitMatrix, e: usize) -> BitMatrix {
    let mut acc = BitMatrix::identity(m.rows());
    for _ in 0..e {
        acc = acc.mul(m);
    }
    acc
}

/// Sum of monomials `x^a y^b` with `x = S_l ⊗ I_m`, `y = I_l ⊗ S_m`.
fn bivariate_polynomial(l: usize, m: usize, terms: &[(usize, usize)]) -> BitMatrix {
    let x = shift(l).kron(&BitMatrix::identity(m));
    let y = BitMatrix::identity(l).kron(&shift(m));
    let mut acc = BitMatrix::zeros(l * m, l * m);
    for &(a, b) in terms {
        acc = acc.add(&matrix_power(&x, a % l).mul(&matrix_power(&y, b % m)));
    }
    acc
}

/// Bivariate bicycle code with `H_X = (A | B)` and `H_Z = (Bᵀ | Aᵀ)`.
/// Qubits `0..lm` form the left block, `lm..2lm` the right block.
pub fn bivariate_bicycle(l: usize, m: usize, a_terms: &[(usize, usize)], b_terms: &[(usize, usize)]) -> Result<CssCode> {
    if l == 0 || m == 0 {
        return Err(invalid("bivariate bicycle needs l, m >= 1"));
    }
    if a_terms.is_empty() || b_terms.is_empty() {
        return Err(invalid("bivariate bicycle needs nonempty polynomials"));
    }
    let a = bivariate_polynomial(l, m, a_terms);
    let b = bivariate_polynomial(l, m, b_terms);
    let h_x = a.hstack(&b);
    let h_z = b.transpose().hstack(&a.transpose());
    CssCode::from_checks(h_x, h_z)
}

/// The `[[18,4,4]]` bivariate bicycle code, `l = m = 3`,
/// `A = 1 + y + x`, `B = 1 + y + x²y`.
pub fn bb18() -> CssCode {
    bivariate_bicycle(3, 3, &[(0, 0), (0, 1), (1, 0)], &[(0, 0), (0, 1), (2, 1)]).expect("valid construction")
}

/// The `[[90,8,10]]` bivariate bicycle code, `l = 15`, `m = 3`,
/// `A = x⁹ + y + y²`, `B = 1 + x² + x⁷`.
pub fn bb90() -> CssCode {
    bivariate_bicycle(15, 3, &[(9, 0), (0, 1), (0, 2)], &[(0, 0), (2, 0), (7, 0)]).expect("valid construction")
}

/// Register plus `q` copies of a noisy code, block diagonally, with logicals
/// ordered register first and then each noisy block in turn.
pub fn composite(register: &CssCode, noisy: &CssCode, q: usize) -> Result<CssCode> {
    if q == 0 {
        return Err(invalid("composite needs q >= 1"));
    }
    let eq = BitMatrix::identity(q);
    let stack = |a: &BitMatrix, b: &BitMatrix| a.direct_sum(&eq.kron(b));
    CssCode::new(
        stack(&register.h_x, &noisy.h_x),
        stack(&register.h_z, &noisy.h_z),
        stack(&register.j_x, &noisy.j_x),
        stack(&register.j_z, &noisy.j_z),
    )
}

/// Representatives of `ker(h)` modulo `rowspan(stab)`.
fn logical_representatives(h: &BitMatrix, stab: &BitMatrix) -> Vec<BitVec> {
    let mut span = SpanBuilder::from_matrix(stab);
    let mut reps = Vec::new();
    for v in h.kernel_basis().row_iter() {
        if span.insert(v.clone()) {
            reps.push(v);
        }
    }
    reps
}

/// Paired logical generators for the code with checks `(h_x, h_z)`.
///
/// Z logicals are kernel vectors of `H_X` independent of `rowspan(H_Z)`,
/// X logicals likewise; the Z set is then changed by the inverse of the
/// pairing matrix so that `J_X · J_Zᵀ = E_k`.
pub fn derive_logicals(h_x: &BitMatrix, h_z: &BitMatrix) -> Result<(BitMatrix, BitMatrix)> {
    if h_x.cols() != h_z.cols() {
        return Err(shape_err("derive_logicals: H_X and H_Z differ in length"));
    }
    if !h_x.mul(&h_z.transpose()).is_zero() {
        return Err(invalid("derive_logicals: checks do not commute"));
    }
    let n = h_x.cols();
    let lz = BitMatrix::from_rows(n, &logical_representatives(h_x, h_z));
    let lx = BitMatrix::from_rows(n, &logical_representatives(h_z, h_x));
    if lz.rows() != lx.rows() {
        return Err(invalid("derive_logicals: inconsistent logical counts"));
    }
    if lz.rows() == 0 {
        return Ok((BitMatrix::zeros(0, n), BitMatrix::zeros(0, n)));
    }
    let pairing = lx.mul(&lz.transpose());
    let inv = pairing.right_inverse().map_err(|_| Error::NoSolution)?;
    Ok((lx, inv.transpose().mul(&lz)))
}

/// Distance of the `basis`-type logical operators: the minimum weight of
/// `v` with `H_opp · vᵀ = 0` and `J_opp · vᵀ ≠ 0`.
pub fn exact_code_distance(code: &CssCode, basis: Basis, cap: usize) -> Result<Distance> {
    let opp = basis.opposite();
    min_weight_nontrivial(
        code.checks(opp),
        code.logicals(opp),
        cap,
        SearchBudget::default(),
        Execution::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_examples() {
        assert_eq!(repetition_chain(3).unwrap(), BitMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1]]));
        assert_eq!(repetition_chain(2).unwrap(), BitMatrix::from_dense(&[&[1, 1]]));
        assert!(repetition_chain(1).is_err());
    }

    #[test]
    fn chain_boundary_identity() {
        // e_1ᵀ + H_dᵀ·1ᵀ + e_dᵀ = 0
        for d in 2..=6 {
            let h = repetition_chain(d).unwrap();
            let ones = BitVec::from_indices(d - 1, 0..d - 1);
            let mut v = h.vec_mul(&ones);
            v.flip(0);
            v.flip(d - 1);
            assert!(v.is_zero(), "d = {d}");
        }
    }

    #[test]
    fn surface_parameters() {
        for d in 2..=4 {
            let c = surface(d).unwrap();
            assert_eq!(c.n(), d * d + (d - 1) * (d - 1));
            assert_eq!(c.k(), 1);
        }
        let c = surface(2).unwrap();
        assert_eq!(exact_code_distance(&c, Basis::X, 4).unwrap(), Distance::Exact(2));
        assert_eq!(exact_code_distance(&c, Basis::Z, 4).unwrap(), Distance::Exact(2));
        assert_eq!(exact_code_distance(&c, Basis::X, 1).unwrap(), Distance::AboveCap);
        let c = surface(3).unwrap();
        assert_eq!(exact_code_distance(&c, Basis::X, 5).unwrap(), Distance::Exact(3));
        assert_eq!(exact_code_distance(&c, Basis::Z, 5).unwrap(), Distance::Exact(3));
    }

    #[test]
    fn bb_small_instance() {
        let c = bivariate_bicycle(3, 3, &[(0, 0), (1, 0)], &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(c.n(), 18);
        let rank_k = 18 - c.h_x.rank() - c.h_z.rank();
        assert_eq!(c.k(), rank_k);
    }

    #[test]
    fn bb18_parameters() {
        let c = bb18();
        assert_eq!((c.n(), c.k()), (18, 4));
        assert_eq!(exact_code_distance(&c, Basis::X, 6).unwrap(), Distance::Exact(4));
        assert_eq!(exact_code_distance(&c, Basis::Z, 6).unwrap(), Distance::Exact(4));
    }

    #[test]
    fn bb90_parameters() {
        let c = bb90();
        assert_eq!((c.n(), c.k()), (90, 8));
    }

    #[test]
    fn composite_parameters() {
        let s = surface(2).unwrap();
        let c = composite(&s, &s, 1).unwrap();
        assert_eq!((c.n(), c.k()), (10, 2));
        let c = composite(&bb18(), &s, 2).unwrap();
        assert_eq!((c.n(), c.k()), (28, 6));
        assert_eq!(exact_code_distance(&c, Basis::X, 6).unwrap(), Distance::Exact(2));
        let c = composite(&s, &bare_qubit(), 2).unwrap();
        assert_eq!((c.n(), c.k()), (7, 3));
    }

    #[test]
    fn zero_logical_code() {
        let h_x = BitMatrix::identity(2);
        let h_z = BitMatrix::zeros(0, 2);
        let (jx, jz) = derive_logicals(&h_x, &h_z).unwrap();
        assert_eq!((jx.rows(), jz.rows()), (0, 0));
    }

    #[test]
    fn repetition_toy_code() {
        // Classical repetition code as a CSS code with no X checks.
        let h_z = repetition_chain(4).unwrap();
        let c = CssCode::from_checks(BitMatrix::zeros(0, 4), h_z).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(exact_code_distance(&c, Basis::X, 6).unwrap(), Distance::Exact(4));
        assert_eq!(exact_code_distance(&c, Basis::Z, 6).unwrap(), Distance::Exact(1));
    }

    #[test]
    fn reselect_z_logicals() {
        let c = bb18();
        // Swap the first two Z logicals and add the third to the first.
        let mut rows: Vec<BitVec> = c.j_z.row_iter().collect();
        rows.swap(0, 1);
        rows[0] = rows[0].xor(&rows[2]);
        let c2 = c.with_z_logicals(BitMatrix::from_rows(c.n(), &rows)).unwrap();
        assert_eq!(c2.j_z.row(1), c.j_z.row(0));
    }
}
