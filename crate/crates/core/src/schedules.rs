//! Remove/assign/hyper action streams realizing subsample-size schedules
//! `beta(t) * N = #S_t`, and a runner that executes them against a
//! [`PartitionState`].

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::{gibbs_hyper_step, HyperGrid};
use crate::mixture::{Dataset, MixtureModel, PartitionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Initialize from the partition prior, then full-data Gibbs.
    PriorGibbs,
    /// Sequential incremental initialization, then full-data Gibbs.
    SequentialGibbs,
    /// Linear subsample growth with churn at every size.
    AnnealSubsample,
    /// Explicit subsample-size trace.
    Custom,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::PriorGibbs => "prior-gibbs",
            Strategy::SequentialGibbs => "seq-gibbs",
            Strategy::AnnealSubsample => "anneal",
            Strategy::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prior-gibbs" | "prior" => Ok(Strategy::PriorGibbs),
            "seq-gibbs" | "sequential-gibbs" => Ok(Strategy::SequentialGibbs),
            "anneal" | "anneal-subsample" => Ok(Strategy::AnnealSubsample),
            "custom" => Ok(Strategy::Custom),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnealAction {
    RemoveRandomAssigned,
    AssignRandomUnassigned,
    HyperSweep,
}

impl AnnealAction {
    pub fn name(&self) -> &'static str {
        match self {
            AnnealAction::RemoveRandomAssigned => "remove",
            AnnealAction::AssignRandomUnassigned => "assign",
            AnnealAction::HyperSweep => "hyper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Empty,
    /// Every datapoint seated by the partition prior.
    PriorDraw,
}

/// Immutable description of a schedule. Actions are generated lazily by
/// [`AnnealSchedule::stream`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    strategy: Strategy,
    n: usize,
    t: usize,
    churn_total: u64,
    sizes: Option<Vec<usize>>,
    hyper: bool,
}

/// Counts gathered while validating a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScheduleSummary {
    pub removes: u64,
    pub assigns: u64,
    pub hyper_sweeps: u64,
    pub final_size: usize,
}

impl AnnealSchedule {
    /// The three built-in strategies with duration parameter `t`:
    /// `PriorGibbs` runs `t*n` churn pairs after a prior draw;
    /// `SequentialGibbs` runs `n` assigns then `(t-1)*n` churn pairs;
    /// `AnnealSubsample` runs, for each growth step, one assign followed by
    /// `t` churn pairs.
    pub fn build(strategy: Strategy, n: usize, t: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("schedule needs N >= 1".into()));
        }
        if t == 0 {
            return Err(Error::InvalidArgument("schedule needs T >= 1".into()));
        }
        if strategy == Strategy::Custom {
            return Err(Error::InvalidArgument(
                "custom schedules are built from a size trace".into(),
            ));
        }
        Ok(Self {
            strategy,
            n,
            t,
            churn_total: (n as u64).saturating_mul(t as u64),
            sizes: None,
            hyper: false,
        })
    }

    /// Linear anneal with `churn_total` churn pairs spread as evenly as
    /// possible over the `n` growth steps (step `k` gets
    /// `floor(C k / n) - floor(C (k-1) / n)`). With `churn_total = n t` this is
    /// exactly `build(AnnealSubsample, n, t)`.
    pub fn anneal_with_churn(n: usize, churn_total: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("schedule needs N >= 1".into()));
        }
        Ok(Self {
            strategy: Strategy::AnnealSubsample,
            n,
            t: (churn_total / n as u64).max(1) as usize,
            churn_total,
            sizes: None,
            hyper: false,
        })
    }

    /// Anneal whose total number of assignments is `assigns` (at least `n`).
    pub fn anneal_with_assign_budget(n: usize, assigns: u64) -> Result<Self> {
        Self::anneal_with_churn(n, assigns.saturating_sub(n as u64))
    }

    /// Arbitrary subsample-size trace starting from the empty subsample.
    /// `sizes[0]` must be 0; each later entry differs from its predecessor by
    /// exactly one.
    pub fn custom(n: usize, sizes: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("schedule needs N >= 1".into()));
        }
        let s = Self {
            strategy: Strategy::Custom,
            n,
            t: 1,
            churn_total: 0,
            sizes: Some(sizes),
            hyper: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// Interleave a hyperparameter sweep once per full cycle through the
    /// current subsample.
    pub fn with_hyper(mut self, hyper: bool) -> Self {
        self.hyper = hyper;
        self
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn churn_total(&self) -> u64 {
        self.churn_total
    }

    pub fn hyper(&self) -> bool {
        self.hyper
    }

    pub fn initial_state(&self) -> InitialState {
        match self.strategy {
            Strategy::PriorGibbs => InitialState::PriorDraw,
            _ => InitialState::Empty,
        }
    }

    pub fn initial_size(&self) -> usize {
        match self.initial_state() {
            InitialState::PriorDraw => self.n,
            InitialState::Empty => 0,
        }
    }

    /// Number of conditional assignments the schedule performs.
    pub fn assign_count(&self) -> u64 {
        let n = self.n as u64;
        let t = self.t as u64;
        match self.strategy {
            Strategy::PriorGibbs => n * t,
            Strategy::SequentialGibbs => n + (t - 1) * n,
            Strategy::AnnealSubsample => n + self.churn_total,
            Strategy::Custom => {
                let sizes = self.sizes.as_deref().unwrap_or(&[]);
                sizes.windows(2).filter(|w| w[1] > w[0]).count() as u64
            }
        }
    }

    pub fn stream(&self) -> ScheduleStream<'_> {
        let size = self.initial_size();
        ScheduleStream {
            sched: self,
            size,
            grown: 0,
            churn_in_step: 0,
            churn_done: 0,
            custom_pos: 0,
            last_was_remove: false,
            pending: Pending::default(),
            countdown: size.max(1),
        }
    }

    /// Subsample size after every remove/assign action.
    pub fn size_trace(&self) -> Vec<usize> {
        let mut size = self.initial_size();
        let mut out = Vec::new();
        for a in self.stream() {
            match a {
                AnnealAction::RemoveRandomAssigned => size -= 1,
                AnnealAction::AssignRandomUnassigned => size += 1,
                AnnealAction::HyperSweep => continue,
            }
            out.push(size);
        }
        out
    }

    /// Checks the step constraint `|#S_{t+1} - #S_t| = 1`, that sizes stay in
    /// `[0, N]` (no removal from an empty subsample, no assignment from an
    /// empty pool) and that the schedule ends on the full data.
    pub fn validate(&self) -> Result<ScheduleSummary> {
        let n = self.n;
        let mut summary = ScheduleSummary::default();
        if let Some(sizes) = &self.sizes {
            if sizes.first() != Some(&0) {
                return Err(Error::Schedule {
                    step: 0,
                    reason: "custom size trace must start from the empty subsample".into(),
                });
            }
            for (i, w) in sizes.windows(2).enumerate() {
                if w[0].abs_diff(w[1]) != 1 {
                    return Err(Error::Schedule {
                        step: i + 1,
                        reason: format!("size changes from {} to {}", w[0], w[1]),
                    });
                }
                if w[1] > n {
                    return Err(Error::Schedule {
                        step: i + 1,
                        reason: format!("size {} exceeds N = {n}", w[1]),
                    });
                }
            }
        }
        let mut size = self.initial_size();
        for (step, a) in self.stream().enumerate() {
            match a {
                AnnealAction::RemoveRandomAssigned => {
                    if size == 0 {
                        return Err(Error::Schedule {
                            step,
                            reason: "remove from an empty subsample".into(),
                        });
                    }
                    size -= 1;
                    summary.removes += 1;
                }
                AnnealAction::AssignRandomUnassigned => {
                    if size == n {
                        return Err(Error::Schedule {
                            step,
                            reason: "assign with an empty unassigned pool".into(),
                        });
                    }
                    size += 1;
                    summary.assigns += 1;
                }
                AnnealAction::HyperSweep => summary.hyper_sweeps += 1,
            }
        }
        summary.final_size = size;
        if size != n {
            return Err(Error::Schedule {
                step: (summary.removes + summary.assigns) as usize,
                reason: format!("schedule ends at size {size}, not N = {n}"),
            });
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone, Default)]
struct Pending {
    buf: [Option<AnnealAction>; 3],
    head: usize,
}

impl Pending {
    fn pop(&mut self) -> Option<AnnealAction> {
        while self.head < 3 {
            let a = self.buf[self.head].take();
            self.head += 1;
            if a.is_some() {
                return a;
            }
        }
        None
    }

    fn set(&mut self, a: AnnealAction, b: Option<AnnealAction>, c: Option<AnnealAction>) {
        self.buf = [Some(a), b, c];
        self.head = 0;
    }
}

/// Run-time information available to an [`ActionSource`].
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub assigned: usize,
    pub n: usize,
    pub assigns: u64,
    pub elapsed: Duration,
}

/// Anything that can feed actions to [`run_source`].
pub trait ActionSource {
    fn next_action(&mut self, progress: &Progress) -> Option<AnnealAction>;
}

/// Lazy action stream of a built [`AnnealSchedule`].
#[derive(Debug, Clone)]
pub struct ScheduleStream<'a> {
    sched: &'a AnnealSchedule,
    size: usize,
    grown: usize,
    churn_in_step: u64,
    churn_done: u64,
    custom_pos: usize,
    last_was_remove: bool,
    pending: Pending,
    countdown: usize,
}

impl ScheduleStream<'_> {
    fn churn_quota(&self, step: usize) -> u64 {
        let c = self.sched.churn_total as u128;
        let n = self.sched.n as u128;
        let k = step as u128;
        ((c * k) / n - (c * (k - 1)) / n) as u64
    }

    /// Hyper sweep due after this churn pair?
    fn tick(&mut self) -> Option<AnnealAction> {
        if !self.sched.hyper {
            return None;
        }
        self.countdown -= 1;
        if self.countdown == 0 {
            self.countdown = self.size.max(1);
            Some(AnnealAction::HyperSweep)
        } else {
            None
        }
    }

    fn churn(&mut self) {
        self.churn_done += 1;
        let h = self.tick();
        self.pending.set(
            AnnealAction::RemoveRandomAssigned,
            Some(AnnealAction::AssignRandomUnassigned),
            h,
        );
    }

    fn grow(&mut self) {
        self.size += 1;
        self.pending.set(AnnealAction::AssignRandomUnassigned, None, None);
    }

    fn refill(&mut self) -> bool {
        let n = self.sched.n;
        let t = self.sched.t as u64;
        match self.sched.strategy {
            Strategy::PriorGibbs => {
                if self.churn_done < n as u64 * t {
                    self.churn();
                    return true;
                }
            }
            Strategy::SequentialGibbs => {
                if self.grown < n {
                    self.grown += 1;
                    self.grow();
                    return true;
                }
                if self.churn_done < (t - 1) * n as u64 {
                    self.churn();
                    return true;
                }
            }
            Strategy::AnnealSubsample => {
                if self.grown > 0 && self.churn_in_step < self.churn_quota(self.grown) {
                    self.churn_in_step += 1;
                    self.churn();
                    return true;
                }
                if self.grown < n {
                    self.grown += 1;
                    self.churn_in_step = 0;
                    self.grow();
                    return true;
                }
            }
            Strategy::Custom => {
                let sizes = self.sched.sizes.as_deref().unwrap_or(&[]);
                let i = self.custom_pos;
                if i + 1 < sizes.len() {
                    self.custom_pos += 1;
                    if sizes[i + 1] < sizes[i] {
                        self.size -= 1;
                        self.last_was_remove = true;
                        self.pending.set(AnnealAction::RemoveRandomAssigned, None, None);
                    } else {
                        self.size += 1;
                        let h = if self.last_was_remove { self.tick() } else { None };
                        self.last_was_remove = false;
                        self.pending.set(AnnealAction::AssignRandomUnassigned, h, None);
                    }
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for ScheduleStream<'_> {
    type Item = AnnealAction;

    fn next(&mut self) -> Option<AnnealAction> {
        loop {
            if let Some(a) = self.pending.pop() {
                return Some(a);
            }
            if !self.refill() {
                return None;
            }
        }
    }
}

impl ActionSource for ScheduleStream<'_> {
    fn next_action(&mut self, _: &Progress) -> Option<AnnealAction> {
        self.next()
    }
}

/// Linear subsample anneal paced by wall-clock time: the subsample grows to
/// size `s + 1` once the elapsed fraction of the time budget reaches
/// `pace * s / N`; in between it churns. After reaching the full data it runs
/// full-data Gibbs until the runner's budget stops it.
#[derive(Debug, Clone)]
pub struct PacedAnneal {
    n: usize,
    budget: Duration,
    pace: f64,
    hyper: bool,
    size: usize,
    countdown: usize,
    pending: Pending,
}

impl PacedAnneal {
    pub fn new(n: usize, budget_secs: f64, pace: f64) -> Result<Self> {
        if n == 0 || !(budget_secs > 0.0) || !(pace > 0.0 && pace <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "paced anneal needs N >= 1, positive budget and pace in (0, 1]; \
                 got N={n}, budget={budget_secs}, pace={pace}"
            )));
        }
        Ok(Self {
            n,
            budget: Duration::from_secs_f64(budget_secs),
            pace,
            hyper: false,
            size: 0,
            countdown: 1,
            pending: Pending::default(),
        })
    }

    pub fn with_hyper(mut self, hyper: bool) -> Self {
        self.hyper = hyper;
        self
    }
}

impl ActionSource for PacedAnneal {
    fn next_action(&mut self, progress: &Progress) -> Option<AnnealAction> {
        if let Some(a) = self.pending.pop() {
            return Some(a);
        }
        let frac = progress.elapsed.as_secs_f64() / self.budget.as_secs_f64();
        let grow = self.size < self.n && (self.size == 0 || frac >= self.pace * self.size as f64 / self.n as f64);
        if grow {
            self.size += 1;
            return Some(AnnealAction::AssignRandomUnassigned);
        }
        let h = if self.hyper {
            self.countdown -= 1;
            if self.countdown == 0 {
                self.countdown = self.size.max(1);
                Some(AnnealAction::HyperSweep)
            } else {
                None
            }
        } else {
            None
        };
        self.pending.set(AnnealAction::AssignRandomUnassigned, h, None);
        Some(AnnealAction::RemoveRandomAssigned)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_assigns: Option<u64>,
    pub max_secs: Option<f64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn assigns(k: u64) -> Self {
        Self {
            max_assigns: Some(k),
            max_secs: None,
        }
    }

    pub fn secs(s: f64) -> Self {
        Self {
            max_assigns: None,
            max_secs: Some(s),
        }
    }

    fn exhausted(&self, assigns: u64, elapsed: Duration) -> bool {
        self.max_assigns.is_some_and(|k| assigns >= k)
            || self.max_secs.is_some_and(|s| elapsed.as_secs_f64() >= s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Record a trace point every this many actions (0: only the final one).
    pub trace_every: u64,
    /// Debug-build consistency check interval, in assignments.
    pub check_interval: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            trace_every: 0,
            check_interval: crate::mixture::DEFAULT_CHECK_INTERVAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub subsample_size: usize,
    pub assigns: u64,
    pub elapsed_secs: f64,
    pub joint_log_prob: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: PartitionState,
    pub model: MixtureModel,
    pub trace: Vec<TracePoint>,
    /// Conditional assignments performed by the schedule.
    pub assigns: u64,
    /// Sequential assignments needed after the budget ran out to cover all data.
    pub completion_assigns: u64,
    pub hyper_sweeps: u64,
    pub elapsed_secs: f64,
    pub budget_exhausted: bool,
    /// False when the budget ran out before the schedule reached the full data.
    pub reached_full_data: bool,
}

/// Executes a built schedule. The dataset must have exactly `schedule.n()` rows.
pub fn run<R: Rng + ?Sized>(
    schedule: &AnnealSchedule,
    data: &Dataset,
    model: MixtureModel,
    grid: Option<&HyperGrid>,
    rng: &mut R,
    budget: Budget,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    if schedule.n() != data.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "schedule is for N = {}, dataset has {} rows",
            schedule.n(),
            data.n_rows()
        )));
    }
    let mut stream = schedule.stream();
    run_source(&mut stream, schedule.initial_state(), data, model, grid, rng, budget, opts)
}

/// Executes any action source. Removal picks uniformly among assigned
/// datapoints; assignment picks uniformly among unassigned ones and samples
/// its cluster conditionally. When the budget runs out, the remaining
/// unassigned datapoints are assigned sequentially so the returned state
/// always covers the full data.
#[allow(clippy::too_many_arguments)]
pub fn run_source<S: ActionSource + ?Sized, R: Rng + ?Sized>(
    source: &mut S,
    init: InitialState,
    data: &Dataset,
    mut model: MixtureModel,
    grid: Option<&HyperGrid>,
    rng: &mut R,
    budget: Budget,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    model.check_compatible(data)?;
    if let Some(g) = grid {
        g.validate(&model)?;
    }
    let n = data.n_rows();
    let start = Instant::now();
    let mut state = PartitionState::new(n, &model);
    state.set_check_interval(opts.check_interval);
    if init == InitialState::PriorDraw {
        state.draw_from_prior(data, &model, rng)?;
    }
    let mut trace = Vec::new();
    let mut assigns = 0u64;
    let mut hyper_sweeps = 0u64;
    let mut step = 0u64;
    let mut exhausted = false;
    loop {
        let elapsed = start.elapsed();
        if budget.exhausted(assigns, elapsed) {
            exhausted = true;
            break;
        }
        let progress = Progress {
            assigned: state.n_assigned(),
            n,
            assigns,
            elapsed,
        };
        let Some(action) = source.next_action(&progress) else { break };
        match action {
            AnnealAction::RemoveRandomAssigned => {
                state.remove_random(data, rng)?;
            }
            AnnealAction::AssignRandomUnassigned => {
                state.assign_random(data, &model, rng)?;
                assigns += 1;
            }
            AnnealAction::HyperSweep => {
                if let Some(g) = grid {
                    gibbs_hyper_step(&state, &mut model, g, rng)?;
                    hyper_sweeps += 1;
                }
            }
        }
        step += 1;
        if opts.trace_every > 0 && step % opts.trace_every == 0 {
            trace.push(TracePoint {
                step,
                subsample_size: state.n_assigned(),
                assigns,
                elapsed_secs: start.elapsed().as_secs_f64(),
                joint_log_prob: state.joint_log_prob(&model),
            });
        }
    }
    let reached_full_data = state.n_unassigned() == 0;
    let mut completion_assigns = 0;
    while state.n_unassigned() > 0 {
        state.assign_random(data, &model, rng)?;
        completion_assigns += 1;
    }
    let elapsed_secs = start.elapsed().as_secs_f64();
    trace.push(TracePoint {
        step,
        subsample_size: state.n_assigned(),
        assigns: assigns + completion_assigns,
        elapsed_secs,
        joint_log_prob: state.joint_log_prob(&model),
    });
    Ok(RunOutcome {
        state,
        model,
        trace,
        assigns,
        completion_assigns,
        hyper_sweeps,
        elapsed_secs,
        budget_exhausted: exhausted,
        reached_full_data,
    })
}
