//! Everything needed to reproduce one chain of a benchmark.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subanneal_core::{
    run, run_source, AnnealSchedule, Budget, Dataset, HyperGrid, MixtureModel, PacedAnneal, PitmanYorParams,
    RunOptions, SeedStreams, Strategy,
};

use crate::cv::CvSplit;
use crate::error::{Error, Result};
use crate::score::heldout_log_score;

/// Either a wall-clock limit or an assignment count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetSpec {
    Secs(f64),
    Assigns(u64),
}

impl fmt::Display for BudgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetSpec::Secs(s) => write!(f, "{s}s"),
            BudgetSpec::Assigns(k) => write!(f, "{k}a"),
        }
    }
}

impl FromStr for BudgetSpec {
    type Err = Error;

    /// `2.5s` is a time limit; `5000` or `5000a` an assignment count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse budget {s:?} (expected e.g. 2s or 5000a)"));
        if let Some(v) = s.strip_suffix('s') {
            let secs: f64 = v.parse().map_err(|_| bad())?;
            if !(secs > 0.0 && secs.is_finite()) {
                return Err(bad());
            }
            Ok(BudgetSpec::Secs(secs))
        } else {
            let k: u64 = s.strip_suffix('a').unwrap_or(s).parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            Ok(BudgetSpec::Assigns(k))
        }
    }
}

impl BudgetSpec {
    pub fn budget(&self) -> Budget {
        match *self {
            BudgetSpec::Secs(s) => Budget::secs(s),
            BudgetSpec::Assigns(k) => Budget::assigns(k),
        }
    }
}

/// Inference settings shared by every chain of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    /// Fraction of a wall-clock budget over which the anneal grows the
    /// subsample to the full data.
    pub pace: f64,
    /// Grid-Gibbs hyperparameter sweeps once per cycle through the subsample.
    pub hyper: bool,
    /// Points per geometric hyperparameter axis.
    pub grid_points: usize,
    /// Points on the discount axis.
    pub discount_points: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            pace: 1.0,
            hyper: true,
            grid_points: subanneal_core::hyper::DEFAULT_SCALE_POINTS,
            discount_points: subanneal_core::hyper::DEFAULT_DISCOUNT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub strategy: String,
    pub budget: BudgetSpec,
    pub seed: u64,
    pub chain: u64,
    pub dataset_fingerprint: String,
    pub config: InferenceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub manifest: RunManifest,
    pub raw_score: f64,
    pub wall_secs: f64,
    pub assigns: u64,
    pub n_clusters: usize,
    pub alpha: f64,
    pub discount: f64,
}

/// SHA-256 of the dataset's schema and values.
pub fn fingerprint(data: &Dataset) -> String {
    let bytes = serde_json::to_vec(data).expect("datasets serialize");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Duration parameter large enough that a Gibbs schedule outlasts any
/// wall-clock budget.
const OPEN_ENDED_ASSIGNS: u64 = 1 << 40;

impl RunManifest {
    pub fn strategy(&self) -> Result<Strategy> {
        let s: Strategy = self.strategy.parse()?;
        if s == Strategy::Custom {
            return Err(Error::InvalidArgument("benchmarks need a built-in strategy".into()));
        }
        Ok(s)
    }

    /// Trains on this chain's split and scores the held-out rows. The split
    /// and the initial hyperparameters depend only on `(seed, chain)`, so all
    /// strategies and budgets of a chain see the same ones.
    pub fn run(&self, data: &Dataset) -> Result<ChainResult> {
        let fp = fingerprint(data);
        if fp != self.dataset_fingerprint {
            return Err(Error::InvalidArgument(format!(
                "dataset fingerprint {fp} does not match manifest {}",
                self.dataset_fingerprint
            )));
        }
        self.run_unchecked(data)
    }

    pub(crate) fn run_unchecked(&self, data: &Dataset) -> Result<ChainResult> {
        let strategy = self.strategy()?;
        let streams = SeedStreams::new(self.seed);
        let split = CvSplit::new(data.n_rows(), &mut streams.stream("cv-split", self.chain))?;
        let train = data.subset(&split.train);
        let mut model = MixtureModel::default_for(&train, PitmanYorParams::crp(1.0)?);
        let grid = HyperGrid::with_resolution(&train, self.config.grid_points, self.config.discount_points);
        grid.draw_initial(&mut model, &mut streams.stream("hyper-init", self.chain))?;
        let grid = self.config.hyper.then_some(&grid);

        let mut rng = streams.stream(&format!("{}-{}", strategy.name(), self.budget), self.chain);
        let n = train.n_rows();
        let opts = RunOptions::default();
        let budget = self.budget.budget();
        let outcome = match (strategy, self.budget) {
            (Strategy::AnnealSubsample, BudgetSpec::Secs(s)) => {
                let mut src = PacedAnneal::new(n, s, self.config.pace)?.with_hyper(self.config.hyper);
                run_source(&mut src, subanneal_core::InitialState::Empty, &train, model, grid, &mut rng, budget, &opts)?
            }
            (Strategy::AnnealSubsample, BudgetSpec::Assigns(k)) => {
                let sched = AnnealSchedule::anneal_with_assign_budget(n, k)?.with_hyper(self.config.hyper);
                run(&sched, &train, model, grid, &mut rng, budget, &opts)?
            }
            (s, b) => {
                let assigns = match b {
                    BudgetSpec::Secs(_) => OPEN_ENDED_ASSIGNS,
                    BudgetSpec::Assigns(k) => k,
                };
                let t = assigns.div_ceil(n as u64).max(1) as usize;
                let sched = AnnealSchedule::build(s, n, t)?.with_hyper(self.config.hyper);
                run(&sched, &train, model, grid, &mut rng, budget, &opts)?
            }
        };
        let raw_score = heldout_log_score(&outcome.state, &outcome.model, data, &split.test)?;
        Ok(ChainResult {
            manifest: self.clone(),
            raw_score,
            wall_secs: outcome.elapsed_secs,
            assigns: outcome.assigns + outcome.completion_assigns,
            n_clusters: outcome.state.n_clusters(),
            alpha: outcome.model.py.alpha(),
            discount: outcome.model.py.discount(),
        })
    }
}
