use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::search::{min_weight_solution, Distance, SearchBudget};
use crate::error::{invalid, shape_err, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::par::{self, Execution};
use crate::spacetime::SpacetimeCode;
use crate::surgery::DeformedCode;

/// `d(H, J, ψ)` with a search cap.
#[derive(Clone, Debug)]
pub struct DistanceQuery<'a> {
    pub h: &'a BitMatrix,
    pub j: &'a BitMatrix,
    pub psi: BitVec,
    pub cap: usize,
}

pub fn error_wise_distance(q: &DistanceQuery<'_>, budget: SearchBudget, exec: Execution) -> Result<Distance> {
    if q.h.cols() != q.j.cols() || q.psi.len() != q.j.rows() {
        return Err(shape_err("distance query: inconsistent shapes"));
    }
    let m = q.h.vstack(q.j);
    let target = BitVec::zeros(q.h.rows()).concat(&q.psi);
    min_weight_solution(&m, &target, q.cap, budget, exec)
}

/// Largest `J` row count accepted by [`distance_profile`].
pub const MAX_PROFILE_ROWS: usize = 16;

fn all_targets(rows: usize) -> impl Iterator<Item = BitVec> {
    (0u64..1 << rows).map(move |x| BitVec::from_indices(rows, (0..rows).filter(move |&i| x >> i & 1 == 1)))
}

/// `d(H, J, ψ)` for every nonzero `ψ`, keyed by the hex form of `ψ`.
pub fn distance_profile(h: &BitMatrix, j: &BitMatrix, cap: usize, budget: SearchBudget, exec: Execution) -> Result<BTreeMap<String, Distance>> {
    if j.rows() > MAX_PROFILE_ROWS {
        return Err(invalid(format!("distance profile limited to {MAX_PROFILE_ROWS} logical rows")));
    }
    let targets: Vec<BitVec> = all_targets(j.rows()).skip(1).collect();
    let results = par::map_slice(exec, &targets, |psi| {
        let q = DistanceQuery { h, j, psi: psi.clone(), cap };
        error_wise_distance(&q, budget, Execution::Sequential)
    });
    targets.iter().zip(results).map(|(t, r)| Ok((t.to_hex(), r?))).collect()
}

fn min_distance(items: impl IntoIterator<Item = Distance>) -> Distance {
    let mut best = Distance::Infinite;
    for d in items {
        best = match (best, d) {
            (Distance::Exact(a), Distance::Exact(b)) => Distance::Exact(a.min(b)),
            (Distance::Exact(a), _) => Distance::Exact(a),
            (_, Distance::Exact(b)) => Distance::Exact(b),
            (Distance::AboveCap, _) | (_, Distance::AboveCap) => Distance::AboveCap,
            _ => Distance::Infinite,
        };
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Entry {
    pub psi: String,
    pub direct: Distance,
    pub via_preimage: Distance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub entries: Vec<Lemma1Entry>,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.direct == e.via_preimage)
    }
}

/// Checks `d(H, φJ, ψ) = min{ d(H, J, ψ★) : φψ★ᵀ = ψᵀ }` for every `ψ`.
pub fn lemma1_verify(h: &BitMatrix, j: &BitMatrix, phi: &BitMatrix, cap: usize, budget: SearchBudget) -> Result<Lemma1Report> {
    if phi.cols() != j.rows() {
        return Err(shape_err("φ must have one column per row of J"));
    }
    if phi.rows() > MAX_PROFILE_ROWS || j.rows() > MAX_PROFILE_ROWS {
        return Err(invalid("lemma check limited to 16 logical rows"));
    }
    let exec = Execution::Sequential;
    let phij = phi.mul(j);
    let star: Vec<(BitVec, Distance)> = all_targets(j.rows())
        .map(|s| {
            let d = error_wise_distance(&DistanceQuery { h, j, psi: s.clone(), cap }, budget, exec)?;
            Ok((phi.mul_vec(&s), d))
        })
        .collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for psi in all_targets(phi.rows()) {
        let direct = error_wise_distance(
            &DistanceQuery {
                h,
                j: &phij,
                psi: psi.clone(),
                cap,
            },
            budget,
            exec,
        )?;
        let via = min_distance(star.iter().filter(|(img, _)| *img == psi).map(|(_, d)| *d));
        entries.push(Lemma1Entry {
            psi: psi.to_hex(),
            direct,
            via_preimage: via,
        });
    }
    Ok(Lemma1Report { entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// The cap was too small to decide.
    Undetermined,
}

/// One `ψ` of one inequality `lhs >= min(rhs, clamp)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub psi: String,
    pub lhs: Distance,
    pub rhs: Distance,
    pub clamp: Option<usize>,
    /// `lhs − min(rhs, clamp)` when both sides are known exactly.
    pub margin: Option<i64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub entries: Vec<BoundEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub cap: usize,
    pub checks: Vec<BoundCheck>,
}

impl AuditReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.entries.iter().all(|e| e.verdict == Verdict::Holds))
    }

    pub fn any_violated(&self) -> bool {
        self.checks.iter().any(|c| c.entries.iter().any(|e| e.verdict == Verdict::Violated))
    }
}

/// Required value `min(rhs, clamp)`.
enum Required {
    Exact(usize),
    /// Finite, but only known to exceed the cap.
    AboveCap,
    Infinite,
}

pub(crate) fn compare_bound(lhs: Distance, rhs: Distance, clamp: Option<usize>, cap: usize) -> (Verdict, Option<i64>) {
    let req = match (rhs, clamp) {
        (Distance::Exact(w), c) => Required::Exact(c.map_or(w, |c| w.min(c))),
        (Distance::AboveCap, Some(c)) if c <= cap + 1 => Required::Exact(c),
        (Distance::AboveCap, _) => Required::AboveCap,
        (Distance::Infinite, Some(c)) => Required::Exact(c),
        (Distance::Infinite, None) => Required::Infinite,
    };
    match (lhs, req) {
        (Distance::Infinite, _) => (Verdict::Holds, None),
        (Distance::Exact(a), Required::Exact(r)) => {
            let v = if a >= r { Verdict::Holds } else { Verdict::Violated };
            (v, Some(a as i64 - r as i64))
        }
        // An exact lhs is at most cap, below any unresolved requirement.
        (Distance::Exact(_), _) => (Verdict::Violated, None),
        (Distance::AboveCap, Required::Exact(r)) if r <= cap + 1 => (Verdict::Holds, None),
        (Distance::AboveCap, Required::Infinite) => (Verdict::Violated, None),
        (Distance::AboveCap, _) => (Verdict::Undetermined, None),
    }
}

fn bound_check(
    name: &str,
    lhs_h: &BitMatrix,
    lhs_j: &BitMatrix,
    rhs_h: &BitMatrix,
    rhs_j: &BitMatrix,
    clamp: Option<usize>,
    cap: usize,
    budget: SearchBudget,
    exec: Execution,
) -> Result<BoundCheck> {
    if lhs_j.rows() != rhs_j.rows() {
        return Err(shape_err(format!("{name}: logical row counts differ")));
    }
    if lhs_j.rows() > MAX_PROFILE_ROWS {
        return Err(invalid(format!("{name}: too many logical rows to enumerate")));
    }
    let targets: Vec<BitVec> = all_targets(lhs_j.rows()).collect();
    let rows = par::map_slice(exec, &targets, |psi| -> Result<BoundEntry> {
        let seq = Execution::Sequential;
        let lhs = error_wise_distance(
            &DistanceQuery {
                h: lhs_h,
                j: lhs_j,
                psi: psi.clone(),
                cap,
            },
            budget,
            seq,
        )?;
        let rhs = error_wise_distance(
            &DistanceQuery {
                h: rhs_h,
                j: rhs_j,
                psi: psi.clone(),
                cap,
            },
            budget,
            seq,
        )?;
        let (verdict, margin) = compare_bound(lhs, rhs, clamp, cap);
        Ok(BoundEntry {
            psi: psi.to_hex(),
            lhs,
            rhs,
            clamp,
            margin,
            verdict,
        })
    });
    Ok(BoundCheck {
        name: name.to_string(),
        entries: rows.into_iter().collect::<Result<_>>()?,
    })
}

/// The two deformed-code bounds:
/// `d(H̄_X, J̄_X, ψ) ≥ min{d(H_X, α⊥J_X, ψ), d_R}` and
/// `d(H̄_Z, J̄_Z, ψ) ≥ d(H_Z, α⊥^rᵀJ_Z, ψ)`.
pub fn deformed_audit(dc: &DeformedCode, cap: usize, budget: SearchBudget, exec: Execution) -> Result<AuditReport> {
    let c = &dc.original;
    let perp_jx = dc.targets.alpha_perp.mul(&c.j_x);
    let perp_jz = dc.targets.alpha_perp_r.transpose().mul(&c.j_z);
    Ok(AuditReport {
        cap,
        checks: vec![
            bound_check("deformed X", &dc.bar_h_x, &dc.bar_j_x, &c.h_x, &perp_jx, Some(dc.d_r), cap, budget, exec)?,
            bound_check("deformed Z", &dc.bar_h_z, &dc.bar_j_z, &c.h_z, &perp_jz, None, cap, budget, exec)?,
        ],
    })
}

/// The four spacetime bounds, each checked for every `ψ`:
///
/// - `d(H^st_X, J^st_X, ψ) ≥ min{d(H_X, α⊥J_X, ψ), d_R}`
/// - `d(H^st_Z, J^st_Z, ψ) ≥ d(H_Z, α⊥^rᵀJ_Z, ψ)`
/// - `d(H^st_Z, J^st_mz, ψ) ≥ d(H_Z, αJ_Z, ψ)`
/// - `d(H^st_Z, J^st_oc, ψ) ≥ min{d(H_Z, αJ_Z, ψ), d_T}`
pub fn theorem1_audit(sc: &SpacetimeCode, dc: &DeformedCode, cap: usize, budget: SearchBudget, exec: Execution) -> Result<AuditReport> {
    let c = &dc.original;
    let perp_jx = dc.targets.alpha_perp.mul(&c.j_x);
    let perp_jz = dc.targets.alpha_perp_r.transpose().mul(&c.j_z);
    let measured = dc.measured();
    Ok(AuditReport {
        cap,
        checks: vec![
            bound_check("unmeasured X", &sc.h_st_x, &sc.j_st_x, &c.h_x, &perp_jx, Some(dc.d_r), cap, budget, exec)?,
            bound_check("unmeasured Z", &sc.h_st_z, &sc.j_st_z, &c.h_z, &perp_jz, None, cap, budget, exec)?,
            bound_check("measured Z", &sc.h_st_z, &sc.j_st_mz, &c.h_z, &measured, None, cap, budget, exec)?,
            bound_check("outcomes", &sc.h_st_z, &sc.j_st_oc, &c.h_z, &measured, Some(sc.d_t), cap, budget, exec)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_distance_examples() {
        let h = BitMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1]]);
        let j = BitMatrix::from_dense(&[&[1, 1, 1]]);
        let b = SearchBudget::default();
        let ex = Execution::Sequential;
        let q = |bits: &[u8]| DistanceQuery {
            h: &h,
            j: &j,
            psi: BitVec::from_bits(bits),
            cap: 5,
        };
        assert_eq!(error_wise_distance(&q(&[1]), b, ex).unwrap(), Distance::Exact(3));
        assert_eq!(error_wise_distance(&q(&[0]), b, ex).unwrap(), Distance::Exact(0));
        // A J row inside rowspace(H) can never flip.
        let j2 = BitMatrix::from_dense(&[&[1, 0, 1]]);
        let q2 = DistanceQuery {
            h: &h,
            j: &j2,
            psi: BitVec::from_bits(&[1]),
            cap: 5,
        };
        assert_eq!(error_wise_distance(&q2, b, ex).unwrap(), Distance::Infinite);
    }

    #[test]
    fn profile_single_row() {
        let h = BitMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1]]);
        let j = BitMatrix::from_dense(&[&[1, 1, 1]]);
        let p = distance_profile(&h, &j, 5, SearchBudget::default(), Execution::Sequential).unwrap();
        assert_eq!(p.len(), 1);
        assert!(distance_profile(&h, &BitMatrix::zeros(17, 3), 5, SearchBudget::default(), Execution::Sequential).is_err());
    }

    #[test]
    fn lemma1_identity_and_empty_preimage() {
        let h = BitMatrix::from_dense(&[&[1, 1, 0, 0, 0, 0], &[0, 0, 1, 1, 0, 0]]);
        let j = BitMatrix::from_dense(&[&[1, 0, 1, 0, 1, 0], &[0, 0, 0, 0, 1, 1]]);
        let b = SearchBudget::default();
        assert!(lemma1_verify(&h, &j, &BitMatrix::identity(2), 6, b).unwrap().holds());
        assert!(lemma1_verify(&h, &j, &BitMatrix::from_dense(&[&[1, 1]]), 6, b).unwrap().holds());
        let r = lemma1_verify(&h, &j, &BitMatrix::zeros(1, 2), 6, b).unwrap();
        assert!(r.holds());
        assert_eq!(r.entries[1].direct, Distance::Infinite);
    }

    #[test]
    fn bound_comparison_cases() {
        use Distance::*;
        assert_eq!(compare_bound(Exact(3), Exact(2), None, 4).0, Verdict::Holds);
        assert_eq!(compare_bound(Exact(1), Exact(2), None, 4).0, Verdict::Violated);
        assert_eq!(compare_bound(Exact(2), Exact(5), Some(2), 6).0, Verdict::Holds);
        assert_eq!(compare_bound(Exact(2), AboveCap, None, 4).0, Verdict::Violated);
        assert_eq!(compare_bound(AboveCap, Exact(3), None, 4).0, Verdict::Holds);
        assert_eq!(compare_bound(AboveCap, AboveCap, None, 4).0, Verdict::Undetermined);
        assert_eq!(compare_bound(AboveCap, AboveCap, Some(3), 4).0, Verdict::Holds);
        assert_eq!(compare_bound(Infinite, Exact(1), None, 4).0, Verdict::Holds);
        assert_eq!(compare_bound(Exact(4), Infinite, None, 4).0, Verdict::Violated);
        assert_eq!(compare_bound(Exact(2), Infinite, Some(2), 4).0, Verdict::Holds);
        assert_eq!(compare_bound(Exact(0), Exact(0), None, 4), (Verdict::Holds, Some(0)));
    }
}
