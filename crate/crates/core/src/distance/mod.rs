//! Error-wise distance: the minimum weight of an undetectable error that
//! produces a given logical flip pattern.

mod audit;
mod search;

pub use audit::{
    deformed_audit, distance_profile, error_wise_distance, lemma1_verify, theorem1_audit, AuditReport, BoundCheck, BoundEntry,
    DistanceQuery, Lemma1Entry, Lemma1Report, Verdict, MAX_PROFILE_ROWS,
};

pub use search::{min_weight_coset, min_weight_nontrivial, min_weight_solution, Distance, SearchBudget};
pub(crate) use search::binomial;
