//! Analytic testbeds for subsample annealing.
//!
//! * [`urns`]: a two-component boolean mixture ("two urns") small enough to
//!   have an exact posterior, with the full set of inference strategies and
//!   the single-step moment oracle behind its continuum limit.
//! * [`bimodal`]: a two-mode system with a data-linear energy barrier, its
//!   annealed dynamics and the bounds on annealing and cold mixing time.

pub mod bimodal;
pub mod error;
pub mod urns;

pub use error::{Error, Result};
