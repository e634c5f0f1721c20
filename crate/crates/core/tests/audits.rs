use inject_core::codes::{composite, surface};
use inject_core::distance::{deformed_audit, theorem1_audit, SearchBudget, Verdict};
use inject_core::par::Execution;
use inject_core::spacetime::build_spacetime;
use inject_core::surgery::{deform, GraphPolicy, SurgeryTargets};
use inject_core::BitMatrix;

fn fig2(d_r: usize, d_t: usize) -> (inject_core::surgery::DeformedCode, inject_core::spacetime::SpacetimeCode) {
    let s = surface(2).unwrap();
    let code = composite(&s, &s, 1).unwrap();
    let t = SurgeryTargets::new(BitMatrix::from_dense(&[&[1, 1]])).unwrap();
    let dc = deform(&code, &t, GraphPolicy::Path, d_r).unwrap();
    let sc = build_spacetime(&dc, d_t).unwrap();
    (dc, sc)
}

#[test]
fn fig2_theorem_bounds_hold() {
    let (dc, sc) = fig2(2, 2);
    let rep = theorem1_audit(&sc, &dc, 4, SearchBudget::default(), Execution::default()).unwrap();
    assert!(rep.all_hold());
    let rep = deformed_audit(&dc, 4, SearchBudget::default(), Execution::default()).unwrap();
    assert!(rep.all_hold());
}

#[test]
fn audit_is_decisive_without_thickening() {
    let (dc, sc) = fig2(1, 2);
    let rep = theorem1_audit(&sc, &dc, 4, SearchBudget::default(), Execution::default()).unwrap();
    assert!(rep.checks.iter().all(|c| c.entries.iter().all(|e| e.verdict != Verdict::Undetermined)));
}
