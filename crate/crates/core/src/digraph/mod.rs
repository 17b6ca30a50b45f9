//! Stochastic matrices and periodic time-varying digraphs.
//!
//! Covers the weight-rule and connectivity validators, transition products
//! `Φ(k, s)` with their limits, Perron vectors, the ergodicity coefficient
//! and the cycle construction that realizes a prescribed left eigenvector.

mod limits;
mod matrix;
mod sequence;

pub use limits::{
    limiting_stochastic_vector, perron_vector, transition_product, GeometricRateBound, LimitVector, LIMIT_TOL,
};
pub use matrix::{
    build_cycle_matrix, ergodicity_coefficient, is_weight_balanced, strongly_connected, Matrix, StochasticMatrix,
    STOCHASTIC_TOL,
};
pub use sequence::{
    check_jointly_bipartite, check_ujsc, validate_weight_rule, CrossEdge, GraphPhase, GraphSequenceSpec, Subnet,
    WeightClause, WeightRuleReport, WeightViolation, Windows,
};

use crate::error::{Error, Result};

/// Largest pairwise Euclidean distance among `points`.
pub fn disagreement_span<P: AsRef<[f64]>>(points: &[P]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::contract("disagreement of an empty set"));
    }
    let dim = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dim) {
        return Err(Error::contract("points have unequal dimensions"));
    }
    let mut span = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            span = span.max(crate::convex::distance(p.as_ref(), q.as_ref()));
        }
    }
    Ok(span)
}
