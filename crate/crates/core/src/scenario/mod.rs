//! Bell scenarios, behaviors and the bracket expression algebra.

pub mod behavior;
pub mod catalog;
pub mod expression;
pub mod symsum;
pub mod text;

pub use behavior::{Behavior, Scenario};
pub use catalog::{catalog, catalog_any_k, CATALOG_NAMES};
pub use expression::{
    bracket_expectation, BellExpression, BracketTerm, CoefficientTensor, Comparator, PartySetting, Rational,
    SymmetryGroup,
};
pub use symsum::SymmetricSumExpression;
pub use text::{parse_expression, serialize_expression};
