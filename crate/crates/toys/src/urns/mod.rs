//! The two-urn clustering model.
//!
//! Balls are red or blue and come from a left or a right urn. With the urn
//! colour probabilities integrated out and same-coloured balls
//! interchangeable, the latent state reduces to the red and blue counts in
//! the left urn, [`UrnCounts`], whose exact posterior is cheap to tabulate.

pub mod kernels;
pub mod mixing;
pub mod model;
pub mod moments;
pub mod report;
pub mod strategies;
pub mod tvd;

pub use kernels::{anneal_stepsize_step, gibbs_transitions, stepsize_transitions, urn_gibbs_step, UrnSubsample};
pub use model::{exact_posterior, urn_joint_log_prob, ExactPosterior, UrnCounts, UrnModel, UrnModelParams};
pub use moments::{
    fokker_planck_coeffs, single_step_moments_exact, single_step_moments_mc, Convention, FokkerPlanck,
    MomentEstimate, StepMoments,
};
pub use strategies::{prior_draw, run_strategy, run_with_assigns, UrnStrategy};
pub use tvd::{bootstrap_tvd_se, tvd, Binning, Histogram};
