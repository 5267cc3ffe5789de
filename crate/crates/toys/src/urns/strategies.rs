use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use subanneal_core::{AnnealAction, AnnealSchedule};

use super::kernels::{anneal_stepsize_step, urn_gibbs_step, UrnSubsample};
use super::model::{UrnCounts, UrnModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UrnStrategy {
    /// Prior initialization, then full-data Gibbs.
    PriorGibbs,
    /// Sequential initialization only.
    Sequential,
    /// Sequential initialization, then full-data Gibbs.
    SequentialGibbs,
    /// Subsample annealing with a linear size schedule.
    AnnealSubsample,
    /// Full-data Gibbs with the likelihood raised to a linearly rising power.
    AnnealEnergy,
    /// Full-data block moves of `ceil(1 / beta)` same-coloured balls.
    AnnealStepsize,
}

impl UrnStrategy {
    pub const ALL: [UrnStrategy; 6] = [
        UrnStrategy::PriorGibbs,
        UrnStrategy::Sequential,
        UrnStrategy::SequentialGibbs,
        UrnStrategy::AnnealSubsample,
        UrnStrategy::AnnealEnergy,
        UrnStrategy::AnnealStepsize,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            UrnStrategy::PriorGibbs => "prior-gibbs",
            UrnStrategy::Sequential => "sequential",
            UrnStrategy::SequentialGibbs => "seq-gibbs",
            UrnStrategy::AnnealSubsample => "anneal-subsample",
            UrnStrategy::AnnealEnergy => "anneal-energy",
            UrnStrategy::AnnealStepsize => "anneal-stepsize",
        }
    }
}

impl std::str::FromStr for UrnStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UrnStrategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown urn strategy `{s}`")))
    }
}

/// Every ball placed independently by the known mixing probability.
pub fn prior_draw<R: Rng + ?Sized>(model: &UrnModel, rng: &mut R) -> UrnCounts {
    let p = model.params();
    let draw = |n: u32, rng: &mut R| -> u32 {
        if n == 0 {
            0
        } else {
            Binomial::new(n as u64, p.p).expect("valid binomial").sample(rng) as u32
        }
    };
    let r1 = draw(p.red, rng);
    let b1 = draw(p.blue, rng);
    UrnCounts::new(r1, b1)
}

/// Runs `steps` full-data Gibbs steps.
pub fn gibbs_steps<R: Rng + ?Sized>(mut c: UrnCounts, model: &UrnModel, steps: u64, rng: &mut R) -> UrnCounts {
    for _ in 0..steps {
        c = urn_gibbs_step(c, model, 1.0, rng);
    }
    c
}

/// Drives a subsample through a core schedule on the projected state.
pub fn run_schedule<R: Rng + ?Sized>(schedule: &AnnealSchedule, model: &UrnModel, rng: &mut R) -> UrnCounts {
    let mut s = match schedule.initial_state() {
        subanneal_core::InitialState::Empty => UrnSubsample::empty(model),
        subanneal_core::InitialState::PriorDraw => UrnSubsample::full(prior_draw(model, rng), model),
    };
    for action in schedule.stream() {
        match action {
            AnnealAction::RemoveRandomAssigned => s.remove_random(rng),
            AnnealAction::AssignRandomUnassigned => s.assign_random(model, rng),
            AnnealAction::HyperSweep => {}
        }
    }
    debug_assert!(s.is_complete());
    s.assigned.projected()
}

/// Runs `strategy` with a total of `assigns` conditional assignments (or
/// block proposals for the stepsize strategy). Prior initialization is free.
/// `Sequential` always performs exactly N assignments.
pub fn run_with_assigns<R: Rng + ?Sized>(
    strategy: UrnStrategy,
    model: &UrnModel,
    assigns: u64,
    rng: &mut R,
) -> Result<UrnCounts> {
    let n = model.params().n() as u64;
    let need_full = matches!(strategy, UrnStrategy::SequentialGibbs | UrnStrategy::AnnealSubsample);
    if need_full && assigns < n {
        return Err(Error::InvalidArgument(format!(
            "{} needs at least N = {n} assignments, got {assigns}",
            strategy.name()
        )));
    }
    let c = match strategy {
        UrnStrategy::PriorGibbs => {
            let c = prior_draw(model, rng);
            gibbs_steps(c, model, assigns, rng)
        }
        UrnStrategy::Sequential => {
            let s = AnnealSchedule::build(subanneal_core::Strategy::SequentialGibbs, n as usize, 1)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            run_schedule(&s, model, rng)
        }
        UrnStrategy::SequentialGibbs => {
            let s = AnnealSchedule::build(subanneal_core::Strategy::SequentialGibbs, n as usize, 1)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let c = run_schedule(&s, model, rng);
            gibbs_steps(c, model, assigns - n, rng)
        }
        UrnStrategy::AnnealSubsample => {
            let s = AnnealSchedule::anneal_with_assign_budget(n as usize, assigns)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            run_schedule(&s, model, rng)
        }
        UrnStrategy::AnnealEnergy => {
            let mut c = prior_draw(model, rng);
            for i in 0..assigns {
                let beta = (i + 1) as f64 / assigns as f64;
                c = urn_gibbs_step(c, model, beta, rng);
            }
            c
        }
        UrnStrategy::AnnealStepsize => {
            let mut c = prior_draw(model, rng);
            for i in 0..assigns {
                let beta = (i + 1) as f64 / assigns as f64;
                let block = (1.0 / beta).ceil().min(n as f64) as u32;
                c = anneal_stepsize_step(c, model, block, rng);
            }
            c
        }
    };
    Ok(c)
}

/// Runs `strategy` with a budget of `budget_factor * N` Gibbs steps.
pub fn run_strategy<R: Rng + ?Sized>(
    strategy: UrnStrategy,
    model: &UrnModel,
    budget_factor: u32,
    rng: &mut R,
) -> Result<UrnCounts> {
    if budget_factor == 0 {
        return Err(Error::InvalidArgument("budget factor must be at least 1".into()));
    }
    let n = model.params().n() as u64;
    run_with_assigns(strategy, model, budget_factor as u64 * n, rng)
}
