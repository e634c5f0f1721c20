//! Exact density-matrix model of 5-to-1 magic state distillation with
//! independent and global depolarizing input noise.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::experiments::fit_power_law;
use crate::par::{map_range, Execution};

/// Dense density operator on `log2(dim)` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    pub matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bloch vector of a one-qubit state.
    pub fn bloch(&self) -> Vector3<f64> {
        assert_eq!(self.dim(), 2, "Bloch vector of a one-qubit state");
        let m = &self.matrix;
        Vector3::new(2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re)
    }

    /// One-qubit state with Bloch vector `r`.
    pub fn from_bloch(r: Vector3<f64>) -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Self {
            matrix: DMatrix::from_row_slice(2, 2, &[c((1.0 + r.z) / 2.0, 0.0), c(r.x / 2.0, -r.y / 2.0), c(r.x / 2.0, r.y / 2.0), c((1.0 - r.z) / 2.0, 0.0)]),
        }
    }
}

/// Independent depolarizing rate `q` and global-noise fraction `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMix {
    pub q: f64,
    pub r: f64,
}

/// The T-type magic state with Bloch vector `(1, 1, 1)/√3`.
pub fn magic_state() -> DensityOperator {
    DensityOperator::from_bloch(Vector3::repeat(1.0 / 3f64.sqrt()))
}

fn kron_power(a: &DMatrix<Complex64>, m: usize) -> DMatrix<Complex64> {
    (1..m).fold(a.clone(), |acc, _| acc.kronecker(a))
}

fn maximally_mixed(dim: usize) -> DMatrix<Complex64> {
    DMatrix::identity(dim, dim).map(|z: Complex64| z / dim as f64)
}

/// `C_m = (1 − q) A^⊗m + q I/2^m`.
fn noisy_block(q: f64, m: usize) -> DMatrix<Complex64> {
    let a = magic_state().matrix;
    kron_power(&a, m).map(|z| z * (1.0 - q)) + maximally_mixed(1 << m).map(|z| z * q)
}

/// `ρ = (1 − r) C_1^⊗5 + r C_5`.
pub fn build_input_state(mix: NoiseMix) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&mix.q) || !(0.0..=1.0).contains(&mix.r) {
        return Err(invalid("q and r must lie in [0, 1]"));
    }
    let product = kron_power(&noisy_block(mix.q, 1), 5);
    let global = noisy_block(mix.q, 5);
    Ok(DensityOperator {
        matrix: product.map(|z| z * (1.0 - mix.r)) + global.map(|z| z * mix.r),
    })
}

/// Code space of the five-qubit code and the Clifford frame that returns
/// the ideal output to the magic state.
struct FiveQubitCode {
    /// Columns `|0̄⟩`, `|1̄⟩` in the 32-dimensional space.
    logical: DMatrix<Complex64>,
    frame: Matrix3<f64>,
}

fn pauli_string(s: &str) -> DMatrix<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let one = |p: char| -> DMatrix<Complex64> {
        let v = match p {
            'I' => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
            'X' => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            'Y' => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
            'Z' => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            _ => unreachable!("Pauli letter"),
        };
        DMatrix::from_row_slice(2, 2, &v)
    };
    s.chars().skip(1).fold(one(s.chars().next().expect("nonempty")), |acc, p| acc.kronecker(&one(p)))
}

/// Rotations of the cube: signed permutation matrices with determinant 1,
/// the action of single-qubit Cliffords on Bloch vectors.
fn cube_rotations() -> Vec<Matrix3<f64>> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..8 {
            let mut m = Matrix3::zeros();
            for (row, &col) in p.iter().enumerate() {
                m[(row, col)] = if signs >> row & 1 == 1 { -1.0 } else { 1.0 };
            }
            if m.determinant() > 0.0 {
                out.push(m);
            }
        }
    }
    out
}

fn five_qubit_code() -> &'static FiveQubitCode {
    static CODE: OnceLock<FiveQubitCode> = OnceLock::new();
    CODE.get_or_init(|| {
        let id = DMatrix::<Complex64>::identity(32, 32);
        let projector = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
            .iter()
            .fold(id.clone(), |acc, s| acc * (&id + pauli_string(s)).map(|z| z * 0.5));
        let zero = projector.column(0).into_owned();
        let zero = zero.map(|z| z / zero.norm());
        let one = pauli_string("XXXXX") * &zero;
        let logical = DMatrix::from_columns(&[zero, one]);
        let raw = project(&logical, &kron_power(&magic_state().matrix, 5)).expect("ideal input succeeds").0;
        let target = magic_state().bloch();
        let b = raw.bloch();
        let frame = cube_rotations()
            .into_iter()
            .find(|r| (r * b - target).norm() < 1e-9)
            .expect("the ideal output is a T-type state");
        FiveQubitCode { logical, frame }
    })
}

/// Logical state `⟨ā|ρ|b̄⟩ / Tr(Pρ)` and the success probability.
fn project(logical: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> Result<(DensityOperator, f64)> {
    let d = logical.adjoint() * rho * logical;
    let success = d.trace().re;
    if success < 1e-14 {
        return Err(Error::ZeroSuccess(success));
    }
    Ok((DensityOperator { matrix: d.map(|z| z / success) }, success))
}

/// Projects a five-qubit state onto the trivial syndrome of the five-qubit
/// code, decodes, and applies the fixed Clifford frame. Returns the output
/// state and the success probability.
pub fn distill_5to1(rho: &DensityOperator) -> Result<(DensityOperator, f64)> {
    if rho.dim() != 32 {
        return Err(invalid("distillation needs a five-qubit input"));
    }
    let code = five_qubit_code();
    let (raw, success) = project(&code.logical, &rho.matrix)?;
    Ok((DensityOperator::from_bloch(code.frame * raw.bloch()), success))
}

/// `1 − Tr(A·D)`, clipped to `[0, 1]`.
pub fn output_error_rate(output: &DensityOperator) -> f64 {
    let overlap = (magic_state().matrix * &output.matrix).trace().re;
    (1.0 - overlap).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub r: f64,
    pub success_probability: f64,
    pub error_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `(r, slope of log error against log q)`, `None` when fewer than
    /// three points have nonzero error.
    pub slopes: Vec<(f64, Option<f64>)>,
}

/// `points` values spaced evenly in log scale over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Exact output error for every `(q, r)`; rows ordered by `r`, then `q`.
pub fn sweep(qs: &[f64], rs: &[f64], exec: Execution) -> Result<SweepTable> {
    if qs.is_empty() || rs.is_empty() {
        return Err(invalid("sweep grid must be nonempty"));
    }
    let cells: Vec<(f64, f64)> = rs.iter().flat_map(|&r| qs.iter().map(move |&q| (q, r))).collect();
    let rows = map_range(exec, cells.len(), |i| {
        let (q, r) = cells[i];
        let (out, success) = distill_5to1(&build_input_state(NoiseMix { q, r })?)?;
        Ok(SweepRow {
            q,
            r,
            success_probability: success,
            error_rate: output_error_rate(&out),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let slopes = rs
        .iter()
        .map(|&r| {
            let pts: Vec<(f64, f64, f64)> = rows.iter().filter(|x| x.r == r).map(|x| (x.q, x.error_rate, 0.0)).collect();
            (r, fit_power_law(&pts).ok().map(|f| f.d_cir))
        })
        .collect();
    Ok(SweepTable { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn ideal_input_is_a_fixed_point() {
        let rho = build_input_state(NoiseMix { q: 0.0, r: 0.7 }).unwrap();
        let (out, success) = distill_5to1(&rho).unwrap();
        assert!(close(&out.matrix, &magic_state().matrix) < 1e-10);
        assert!(output_error_rate(&out) < 1e-10);
        // Five copies of a T-type state pass with probability 1/6.
        assert!((success - 1.0 / 6.0).abs() < 1e-10, "{success}");
    }

    #[test]
    fn input_state_is_a_valid_density_operator() {
        let rho = build_input_state(NoiseMix { q: 0.01, r: 0.5 }).unwrap();
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-10);
        let (out, _) = distill_5to1(&rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-10 && out.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn fully_depolarized_product_is_maximally_mixed() {
        let rho = build_input_state(NoiseMix { q: 1.0, r: 0.0 }).unwrap();
        assert!(close(&rho.matrix, &maximally_mixed(32)) < 1e-15);
        let (out, success) = distill_5to1(&rho).unwrap();
        assert!((success - 1.0 / 16.0).abs() < 1e-12);
        assert!((output_error_rate(&out) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn global_noise_decomposes_linearly() {
        let (q, r) = (0.03, 0.4);
        let lhs = build_input_state(NoiseMix { q, r }).unwrap().matrix;
        let local = build_input_state(NoiseMix { q, r: 0.0 }).unwrap().matrix;
        let a5 = kron_power(&magic_state().matrix, 5);
        let rhs = local.map(|z| z * (1.0 - r)) + (a5.map(|z| z * (1.0 - q)) + maximally_mixed(32).map(|z| z * q)).map(|z| z * r);
        assert!(close(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn error_rate_reference_states() {
        assert!(output_error_rate(&magic_state()) < 1e-12);
        let mixed = DensityOperator { matrix: maximally_mixed(2) };
        assert!((output_error_rate(&mixed) - 0.5).abs() < 1e-12);
        let orth = DensityOperator::from_bloch(-magic_state().bloch());
        assert!((output_error_rate(&orth) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stabilizers_commute_and_fix_the_code_space() {
        let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"].map(pauli_string);
        for a in &gens {
            for b in &gens {
                assert!(close(&(a * b), &(b * a)) < 1e-12);
            }
        }
        let l = &five_qubit_code().logical;
        assert!(close(&(l.adjoint() * l), &DMatrix::identity(2, 2)) < 1e-12);
        for g in &gens {
            assert!(close(&(g * l), l) < 1e-12);
        }
    }

    #[test]
    fn output_error_is_quadratic_for_local_noise() {
        // Leading order 5ε² with ε the input infidelity q/2.
        let q = 1e-3;
        let (out, _) = distill_5to1(&build_input_state(NoiseMix { q, r: 0.0 }).unwrap()).unwrap();
        let e = output_error_rate(&out);
        assert!((e / (5.0 * (q / 2.0).powi(2)) - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn sweep_slopes_and_monotonicity() {
        let qs = log_grid(1e-3, 1e-2, 5);
        let rs = [0.0, 0.5, 1.0];
        let t = sweep(&qs, &rs, Execution::default()).unwrap();
        assert_eq!(t.rows.len(), 15);
        let slope = |r: f64| t.slopes.iter().find(|s| s.0 == r).unwrap().1.unwrap();
        assert!((slope(0.0) - 2.0).abs() < 0.1, "{}", slope(0.0));
        assert!((slope(1.0) - 1.0).abs() < 0.1, "{}", slope(1.0));
        for &q in &qs {
            let errs: Vec<f64> = rs.iter().map(|&r| t.rows.iter().find(|x| x.q == q && x.r == r).unwrap().error_rate).collect();
            assert!(errs.windows(2).all(|w| w[0] <= w[1]));
        }
        let zero = sweep(&[0.0], &rs, Execution::Sequential).unwrap();
        assert!(zero.rows.iter().all(|x| x.error_rate < 1e-10));
    }
}
