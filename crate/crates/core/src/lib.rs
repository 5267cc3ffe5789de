//! Subsample-annealed collapsed Gibbs inference for Pitman-Yor mixture models.
//!
//! The Gibbs step is split into its two halves, *remove* and *assign*, so the
//! sampler can run over a growing, churning subsample of the data. The
//! subsample fraction plays the role of an inverse temperature.
//!
//! * [`mixture`] holds the partition state, the conjugate component models and
//!   the remove/assign kernel.
//! * [`schedules`] builds and runs remove/assign/hyper action streams.
//! * [`hyper`] performs grid-Gibbs updates of the hyperparameters.

pub mod error;
pub mod hyper;
pub mod math;
pub mod mixture;
pub mod rng;
pub mod schedules;

pub use error::{Error, Result};
pub use hyper::{gibbs_hyper_step, FeatureGrid, GridAxis, HyperGrid};
pub use mixture::{
    ClusterId, ComponentPrior, Datum, Dataset, FeatureKind, MixtureModel, NixPrior,
    PartitionState, PitmanYorParams, SuffStats,
};
pub use rng::SeedStreams;
pub use schedules::{
    run, run_source, ActionSource, AnnealAction, AnnealSchedule, Budget, InitialState,
    PacedAnneal, Progress, RunOptions, RunOutcome, ScheduleStream, ScheduleSummary, Strategy,
    TracePoint,
};
