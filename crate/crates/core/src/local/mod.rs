//! Exact classical analysis over deterministic strategies.

mod facet;
pub mod rank;
mod strategy;

pub use facet::{
    facet_check, facet_check_with, polytope_dimension, polytope_dimension_modp, saturating_strategies, ExactPass,
    FacetOptions, FacetReport, RankCertificate, DEFAULT_PRIME_SEED,
};
pub use strategy::{enumerate_strategies, local_bound, DeterministicStrategy, LocalBound, StrategySpace, MAX_STRATEGIES};
