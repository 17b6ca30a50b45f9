//! Convex-concave objectives as expression trees, box constraint sets and
//! the Euclidean projection.

mod analysis;
mod boxset;
mod catalog;
mod expr;
mod prefix;

pub use analysis::{convexity_warnings, finite_difference, lipschitz_bound, sample_axis};
pub use boxset::{distance, norm, project, BoxSet};
pub use catalog::{CatalogEntry, ObjectiveCatalog};
pub use expr::{subgradient_x, subgradient_y, Expr, Side, SubgradientSelection};
pub use prefix::{parse_expr, PrefixError};

pub(crate) use boxset::linspace;
