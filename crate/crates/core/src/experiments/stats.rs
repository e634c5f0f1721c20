use serde::{Deserialize, Serialize};

use crate::circuit::Observable;
use crate::error::{invalid, Error, Result};
use crate::gf2::BitVec;

/// `p_L = alpha · p^d_cir` fitted on log-log axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub d_cir: f64,
    /// Covariance of `(ln alpha, d_cir)`.
    pub covariance: [[f64; 2]; 2],
}

impl PowerLawFit {
    pub fn d_cir_err(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Weighted least squares of `ln p_L` on `ln p` over points `(p, p_L, σ)`
/// with `p_L > 0`. The log-space standard error is `σ / p_L`. When any
/// used point has `σ = 0` the fit is unweighted and the covariance is
/// scaled by the residual variance.
pub fn fit_power_law(points: &[(f64, f64, f64)]) -> Result<PowerLawFit> {
    let used: Vec<&(f64, f64, f64)> = points.iter().filter(|(p, pl, _)| *p > 0.0 && *pl > 0.0).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs 3 points with p_L > 0, got {}",
            used.len()
        )));
    }
    let weighted = used.iter().all(|(_, pl, s)| *s > 0.0 && (s / pl).is_finite());
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &&(p, pl, s) in &used {
        let w = if weighted { (pl / s).powi(2) } else { 1.0 };
        let (x, y) = (p.ln(), pl.ln());
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() <= f64::EPSILON * sw * sxx {
        return Err(invalid("power-law fit needs at least two distinct p values"));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let mut cov = [[sxx / det, -sx / det], [-sx / det, sw / det]];
    if !weighted {
        let rss: f64 = used.iter().map(|&&(p, pl, _)| (pl.ln() - intercept - slope * p.ln()).powi(2)).sum();
        let s2 = rss / (used.len() - 2) as f64;
        cov.iter_mut().flatten().for_each(|c| *c *= s2);
    }
    Ok(PowerLawFit {
        alpha: intercept.exp(),
        d_cir: slope,
        covariance: cov,
    })
}

/// Binomial standard error `sqrt((1 − p_L) p_L / N)`.
pub fn binomial_sigma(failures: u64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    let p = failures as f64 / shots as f64;
    ((1.0 - p) * p / shots as f64).sqrt()
}

/// Wilson score interval for `k` successes in `n` trials at normal
/// quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Signed z-statistic `sqrt(n)·φ` of the 2×2 table for events A and B,
/// testing `Pr(A∩B) = Pr(A)·Pr(B)`. `None` when a marginal is 0 or `n`.
pub fn independence_z(n: u64, n_a: u64, n_b: u64, n_ab: u64) -> Option<f64> {
    if n == 0 || n_a == 0 || n_b == 0 || n_a == n || n_b == n {
        return None;
    }
    let (n, a, b, ab) = (n as f64, n_a as f64, n_b as f64, n_ab as f64);
    let phi = (n * ab - a * b) / (a * (n - a) * b * (n - b)).sqrt();
    Some(n.sqrt() * phi)
}

/// Pauli-frame exponents `(z, x)` of the correction `V = Z^(μ1+μ3) X^μ2`
/// after measuring `X_j`, `Z_j z_j` and `x_j` with outcomes `μ1, μ2, μ3`.
pub fn injection_frame(mu1: bool, mu2: bool, mu3: bool) -> (bool, bool) {
    (mu1 ^ mu3, mu2)
}

/// Residual logical flips of one shot for each measured pair `j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    /// `Z_j` flipped (Z-basis runs).
    pub z: Vec<bool>,
    /// Outcome of `Z_j z_j` flipped (Z-basis runs).
    pub oc: Vec<bool>,
    /// `X_j x_j` flipped (X-basis runs).
    pub xx: Vec<bool>,
}

impl EventRecord {
    /// Z error on injected state `j`: exactly one of `Z_j` and the outcome
    /// flipped.
    pub fn z_error(&self, j: usize) -> Option<bool> {
        Some(*self.z.get(j)? ^ *self.oc.get(j)?)
    }

    pub fn x_error(&self, j: usize) -> Option<bool> {
        self.xx.get(j).copied()
    }

    pub fn a(&self) -> Option<bool> {
        self.z_error(0)
    }

    pub fn b(&self) -> Option<bool> {
        self.z_error(1)
    }

    pub fn c(&self) -> Option<bool> {
        self.x_error(0)
    }

    pub fn d(&self) -> Option<bool> {
        self.x_error(1)
    }
}

/// Observable indices feeding each event family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventMap {
    z: Vec<usize>,
    oc: Vec<usize>,
    xx: Vec<usize>,
}

impl EventMap {
    /// Looks up `Z{t}`, `oc{j}` and `X{t}` for `t = targets[j]`. Families
    /// absent from the circuit stay empty.
    pub fn new(observables: &[Observable], targets: &[usize]) -> Result<Self> {
        let find = |name: String| observables.iter().position(|o| o.name == name);
        let family = |f: &dyn Fn(usize, usize) -> String| -> Result<Vec<usize>> {
            let found: Vec<Option<usize>> = targets.iter().enumerate().map(|(j, &t)| find(f(j, t))).collect();
            match (found.iter().all(Option::is_some), found.iter().any(Option::is_some)) {
                (true, _) => Ok(found.into_iter().flatten().collect()),
                (false, false) => Ok(Vec::new()),
                (false, true) => Err(invalid("circuit defines only some of the event observables")),
            }
        };
        Ok(Self {
            z: family(&|_, t| format!("Z{t}"))?,
            oc: family(&|j, _| format!("oc{j}"))?,
            xx: family(&|_, t| format!("X{t}"))?,
        })
    }

    /// Maps residual observable flips (true ⊕ predicted) to events.
    pub fn classify(&self, residual: &BitVec) -> EventRecord {
        let pick = |idx: &[usize]| idx.iter().map(|&i| residual.get(i)).collect();
        EventRecord {
            z: pick(&self.z),
            oc: if self.z.is_empty() { Vec::new() } else { pick(&self.oc) },
            xx: pick(&self.xx),
        }
    }
}

/// Counts for one event pair over a shot stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub shots: u64,
    pub first: u64,
    pub second: u64,
    pub both: u64,
}

impl PairCounts {
    pub fn add(&mut self, a: bool, b: bool) {
        self.shots += 1;
        self.first += a as u64;
        self.second += b as u64;
        self.both += (a && b) as u64;
    }

    pub fn merge(&mut self, o: &PairCounts) {
        self.shots += o.shots;
        self.first += o.first;
        self.second += o.second;
        self.both += o.both;
    }
}

/// Rate estimate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl Rate {
    fn of(k: u64, n: u64) -> Self {
        let (low, high) = wilson_interval(k, n, 1.96);
        Self {
            value: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            low,
            high,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: String,
    pub shots: u64,
    pub first: Rate,
    pub second: Rate,
    pub both: Rate,
    /// `None` when a marginal has no events or only events.
    pub z: Option<f64>,
    pub insufficient: bool,
}

impl PairReport {
    pub fn from_counts(pair: &str, c: &PairCounts) -> Self {
        let z = independence_z(c.shots, c.first, c.second, c.both);
        Self {
            pair: pair.to_string(),
            shots: c.shots,
            first: Rate::of(c.first, c.shots),
            second: Rate::of(c.second, c.shots),
            both: Rate::of(c.both, c.shots),
            z,
            insufficient: z.is_none(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub pairs: Vec<PairReport>,
}

/// Independence statistics for (A, B) and (C, D) over the records where
/// both events of a pair are defined.
pub fn independence_report(events: &[EventRecord]) -> IndependenceReport {
    let (mut ab, mut cd) = (PairCounts::default(), PairCounts::default());
    for e in events {
        if let (Some(a), Some(b)) = (e.a(), e.b()) {
            ab.add(a, b);
        }
        if let (Some(c), Some(d)) = (e.c(), e.d()) {
            cd.add(c, d);
        }
    }
    IndependenceReport {
        pairs: vec![PairReport::from_counts("AB", &ab), PairReport::from_counts("CD", &cd)],
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn exact_cubic_is_recovered() {
        let pts: Vec<_> = [1e-3, 3e-3, 1e-2, 3e-2].iter().map(|&p: &f64| (p, 2.0 * p.powi(3), 0.0)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.d_cir - 3.0).abs() < 1e-6);
        assert!((f.alpha - 2.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_cubic_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2]
            .iter()
            .map(|&p: &f64| {
                let pl = 2.0 * p.powi(3) * (1.0 + 0.05 * rng.gen_range(-1.0..1.0));
                (p, pl, 0.05 * pl)
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.d_cir - 3.0).abs() < 0.2, "{f:?}");
        assert!(f.d_cir_err() > 0.0);
    }

    #[test]
    fn weighted_fit_matches_closed_form_two_parameter_solution() {
        // Three points, weights 1, 4, 1 in log space: solve the normal
        // equations by hand.
        let pts = [(0.01, 0.001, 0.001), (0.02, 0.004, 0.002), (0.04, 0.02, 0.02)];
        let f = fit_power_law(&pts).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        let ws = [1.0, 4.0, 1.0];
        let xm = (0..3).map(|i| ws[i] * xs[i]).sum::<f64>() / 6.0;
        let ym = (0..3).map(|i| ws[i] * ys[i]).sum::<f64>() / 6.0;
        let slope = (0..3).map(|i| ws[i] * (xs[i] - xm) * (ys[i] - ym)).sum::<f64>() / (0..3).map(|i| ws[i] * (xs[i] - xm).powi(2)).sum::<f64>();
        assert!((f.d_cir - slope).abs() < 1e-12);
        let var = 1.0 / (0..3).map(|i| ws[i] * (xs[i] - xm).powi(2)).sum::<f64>();
        assert!((f.covariance[1][1] - var).abs() < 1e-12);
    }

    #[test]
    fn too_few_positive_points_are_rejected() {
        let pts = [(0.01, 0.0, 0.0), (0.02, 0.1, 0.01), (0.03, 0.2, 0.01)];
        assert!(matches!(fit_power_law(&pts), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn wilson_interval_reference_values() {
        // 10 of 100 at z = 1.96.
        let (lo, hi) = wilson_interval(10, 100, 1.96);
        assert!((lo - 0.05522854).abs() < 1e-7 && (hi - 0.17436730).abs() < 1e-7, "{lo} {hi}");
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
        assert_eq!(wilson_interval(0, 50, 1.96).0, 0.0);
    }

    #[test]
    fn wilson_coverage_is_near_nominal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (p, n, reps) = (0.03, 2000u64, 2000);
        let covered = (0..reps)
            .filter(|_| {
                let k = (0..n).filter(|_| rng.gen_bool(p)).count() as u64;
                let (lo, hi) = wilson_interval(k, n, 1.96);
                lo <= p && p <= hi
            })
            .count();
        let rate = covered as f64 / reps as f64;
        assert!((rate - 0.95).abs() < 0.02, "{rate}");
    }

    fn stream(rng: &mut ChaCha8Rng, n: usize, pa: f64, pb: f64, copy: bool) -> PairCounts {
        let mut c = PairCounts::default();
        for _ in 0..n {
            let a = rng.gen_bool(pa);
            let b = if copy { a } else { rng.gen_bool(pb) };
            c.add(a, b);
        }
        c
    }

    #[test]
    fn independent_streams_pass_at_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let reps = 300;
        let ok = (0..reps)
            .filter(|_| {
                let c = stream(&mut rng, 20_000, 0.02, 0.03, false);
                independence_z(c.shots, c.first, c.second, c.both).unwrap().abs() < 3.0
            })
            .count();
        assert!(ok as f64 >= 0.99 * reps as f64, "{ok}/{reps}");
    }

    #[test]
    fn correlated_streams_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let c = stream(&mut rng, 100_000, 0.01, 0.01, true);
        assert!(independence_z(c.shots, c.first, c.second, c.both).unwrap() > 5.0);
    }

    #[test]
    fn empty_stream_is_insufficient() {
        let r = PairReport::from_counts("AB", &PairCounts { shots: 1000, ..Default::default() });
        assert!(r.insufficient && r.z.is_none());
        let rep = independence_report(&[EventRecord::default()]);
        assert!(rep.pairs.iter().all(|p| p.insufficient));
    }

    #[test]
    fn z_matches_chi_square_of_two_by_two_table() {
        // Pearson χ² = Σ (O − E)² / E over the four cells.
        let (n, a, b, ab) = (1000u64, 120u64, 200u64, 40u64);
        let cells = [(ab, a, b), (a - ab, a, n - b), (b - ab, n - a, b), (n - a - b + ab, n - a, n - b)];
        let chi2: f64 = cells
            .iter()
            .map(|&(o, r, c)| {
                let e = r as f64 * c as f64 / n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        let z = independence_z(n, a, b, ab).unwrap();
        assert!((z * z - chi2).abs() < 1e-9);
        assert!(z > 0.0);
    }

    #[test]
    fn injection_frame_examples() {
        assert_eq!(injection_frame(false, false, false), (false, false));
        assert_eq!(injection_frame(true, false, true), (false, false));
        assert_eq!(injection_frame(false, true, true), (true, true));
    }

    fn named(names: &[&str]) -> Vec<Observable> {
        names.iter().map(|n| Observable { records: vec![], name: n.to_string() }).collect()
    }

    #[test]
    fn events_follow_symmetric_difference() {
        let obs = named(&["Z0", "Z1", "Z2", "Z3", "oc0", "oc1"]);
        let map = EventMap::new(&obs, &[0, 2]).unwrap();
        let flip = |idx: &[usize]| map.classify(&BitVec::from_indices(6, idx.iter().copied()));
        assert_eq!(flip(&[]).a(), Some(false));
        // Z_1 and its outcome both flipped cancel.
        assert_eq!(flip(&[0, 4]).a(), Some(false));
        assert_eq!(flip(&[0]).a(), Some(true));
        assert_eq!(flip(&[5]).b(), Some(true));
        // Target 2 is observable Z2, not Z1.
        assert_eq!(flip(&[1]).b(), Some(false));
        assert_eq!(flip(&[2]).b(), Some(true));
        assert_eq!(flip(&[]).c(), None);
    }

    #[test]
    fn x_events_read_target_rows() {
        let obs = named(&["X0", "X1", "X2"]);
        let map = EventMap::new(&obs, &[1, 2]).unwrap();
        let e = map.classify(&BitVec::from_indices(3, [2]));
        assert_eq!((e.c(), e.d(), e.a()), (Some(false), Some(true), None));
    }
}
