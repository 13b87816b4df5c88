//! Bracket-form Bell inequalities for multipartite scenarios.
//!
//! * [`scenario`]: behaviors, the modular-bracket expression algebra and the built-in catalog.
//! * [`local`]: deterministic strategies, exact local bounds and facet certification.
//! * [`quantum`]: states, POVMs, Bell operators, quantum values and visibilities.
//! * [`sdp`]: the interior-point solver for single-measurement POVM subproblems.
//! * [`seesaw`]: alternating state/measurement optimization with seeded restarts.
//! * [`report`]: table reproduction harness with embedded reference values.

pub mod error;
pub mod local;
pub mod quantum;
pub mod report;
pub mod scenario;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};
