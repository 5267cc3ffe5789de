//! Grid-Gibbs updates for partition and component hyperparameters,
//! conditioned on the current assignment of datapoints to clusters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sample_log_weights;
use crate::mixture::{
    ComponentPrior, Dataset, Datum, FeatureKind, MixtureModel, NixPrior, PartitionState,
    PitmanYorParams, SuffStats,
};

/// Candidate values for one hyperparameter with a log-prior weight each.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    values: Vec<f64>,
    log_prior: Vec<f64>,
}

impl GridAxis {
    /// Uniform prior over the given candidates.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::with_log_prior(values, vec![0.0; n])
    }

    pub fn with_log_prior(values: Vec<f64>, log_prior: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("hyperparameter grid is empty".into()));
        }
        if values.len() != log_prior.len() {
            return Err(Error::InvalidArgument("grid values and log-prior differ in length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || log_prior.iter().any(|w| w.is_nan()) {
            return Err(Error::InvalidArgument("grid contains non-finite values".into()));
        }
        if log_prior.iter().all(|w| *w == f64::NEG_INFINITY) {
            return Err(Error::InvalidArgument("grid prior has no mass".into()));
        }
        Ok(Self { values, log_prior })
    }

    /// `n` points spaced geometrically over `[lo, hi]`.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) || n == 0 {
            return Err(Error::InvalidArgument(format!("bad geometric grid [{lo}, {hi}] x {n}")));
        }
        let values = if n == 1 {
            vec![lo]
        } else {
            let step = (hi / lo).ln() / (n - 1) as f64;
            (0..n).map(|i| lo * (step * i as f64).exp()).collect()
        };
        Self::new(values)
    }

    /// `n` points spaced evenly over `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi >= lo) || n == 0 {
            return Err(Error::InvalidArgument(format!("bad uniform grid [{lo}, {hi}] x {n}")));
        }
        let values = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn sample_from_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut ws = self.log_prior.clone();
        let i = sample_log_weights(&mut ws, rng).expect("grid prior has positive mass");
        self.values[i]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|v| f(*v)).collect(),
            log_prior: self.log_prior.clone(),
        }
    }
}

/// Grid over one feature's component hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureGrid {
    /// Beta/Dirichlet pseudo-counts `scale * base[l]`: one shared scale over a
    /// fixed non-uniform base measure.
    Scale { scale: GridAxis, base: Vec<f64> },
    /// Normal-inverse-chi^2 with a fixed location.
    Nix {
        mu0: f64,
        kappa0: GridAxis,
        sigma2: GridAxis,
        nu0: GridAxis,
    },
}

/// Discrete priors over every hyperparameter that is learned. `None` axes are
/// held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub alpha: Option<GridAxis>,
    pub discount: Option<GridAxis>,
    pub features: Vec<Option<FeatureGrid>>,
}

pub const DEFAULT_SCALE_LO: f64 = 1e-2;
pub const DEFAULT_SCALE_HI: f64 = 1e2;
pub const DEFAULT_SCALE_POINTS: usize = 31;
pub const DEFAULT_DISCOUNT_HI: f64 = 0.95;
pub const DEFAULT_DISCOUNT_POINTS: usize = 20;

impl HyperGrid {
    /// Learns only the concentration.
    pub fn alpha_only(alpha: GridAxis, n_features: usize) -> Self {
        Self {
            alpha: Some(alpha),
            discount: None,
            features: vec![None; n_features],
        }
    }

    /// Default grids: 31 geometric points on `[1e-2, 1e2]` for concentrations,
    /// pseudo-count scales and variance-type parameters (the variance scale is
    /// relative to the column variance), 20 uniform points on `[0, 0.95]` for
    /// the discount, uniform log-priors throughout.
    pub fn default_for(data: &Dataset) -> Self {
        Self::with_resolution(data, DEFAULT_SCALE_POINTS, DEFAULT_DISCOUNT_POINTS)
    }

    pub fn with_resolution(data: &Dataset, scale_points: usize, discount_points: usize) -> Self {
        let scale = || {
            GridAxis::geometric(DEFAULT_SCALE_LO, DEFAULT_SCALE_HI, scale_points).expect("valid grid")
        };
        let features = data
            .kinds()
            .iter()
            .enumerate()
            .map(|(f, kind)| {
                Some(match kind {
                    FeatureKind::Boolean => FeatureGrid::Scale {
                        scale: scale(),
                        base: level_base(data, f, 2),
                    },
                    FeatureKind::Categorical { levels } => FeatureGrid::Scale {
                        scale: scale(),
                        base: level_base(data, f, *levels as usize),
                    },
                    FeatureKind::Real => {
                        let (mean, var) = crate::mixture::model_column_moments(data, f);
                        FeatureGrid::Nix {
                            mu0: mean,
                            kappa0: scale(),
                            sigma2: scale().map(|s| s * var),
                            nu0: scale(),
                        }
                    }
                })
            })
            .collect();
        Self {
            alpha: Some(scale()),
            discount: Some(
                GridAxis::uniform(0.0, DEFAULT_DISCOUNT_HI, discount_points).expect("valid grid"),
            ),
            features,
        }
    }

    pub fn validate(&self, model: &MixtureModel) -> Result<()> {
        if let Some(a) = &self.alpha {
            if a.values.iter().any(|v| *v <= 0.0) {
                return Err(Error::InvalidArgument("concentration candidates must be positive".into()));
            }
        }
        if let Some(d) = &self.discount {
            if d.values.iter().any(|v| !(0.0..1.0).contains(v)) {
                return Err(Error::InvalidArgument("discount candidates must lie in [0, 1)".into()));
            }
        }
        if self.features.len() != model.n_features() {
            return Err(Error::InvalidArgument(format!(
                "grid covers {} features, model has {}",
                self.features.len(),
                model.n_features()
            )));
        }
        for (f, (g, prior)) in self.features.iter().zip(model.priors()).enumerate() {
            match (g, prior) {
                (None, _) => {}
                (Some(FeatureGrid::Scale { scale, base }), ComponentPrior::BetaBernoulli { .. }) => {
                    check_scale(f, scale, base, 2)?
                }
                (Some(FeatureGrid::Scale { scale, base }), ComponentPrior::DirichletCategorical { alphas, .. }) => {
                    check_scale(f, scale, base, alphas.len())?
                }
                (Some(FeatureGrid::Nix { mu0, kappa0, sigma2, nu0 }), ComponentPrior::NormalInvChiSq(_)) => {
                    let positive = |ax: &GridAxis| ax.values.iter().all(|v| *v > 0.0);
                    if !mu0.is_finite() || !positive(kappa0) || !positive(sigma2) || !positive(nu0) {
                        return Err(Error::InvalidArgument(format!("feature {f}: invalid NIX grid")));
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "feature {f}: grid family does not match component model"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Replaces every learned hyperparameter with a draw from its grid prior.
    pub fn draw_initial<R: Rng + ?Sized>(&self, model: &mut MixtureModel, rng: &mut R) -> Result<()> {
        self.validate(model)?;
        let mut alpha = model.py.alpha();
        let mut discount = model.py.discount();
        if let Some(a) = &self.alpha {
            alpha = a.sample_from_prior(rng);
        }
        if let Some(d) = &self.discount {
            discount = d.sample_from_prior(rng);
        }
        model.py = PitmanYorParams::new(alpha, discount)?;
        for f in 0..self.features.len() {
            let prior = match (&self.features[f], &model.priors()[f]) {
                (None, _) => continue,
                (Some(FeatureGrid::Scale { scale, base }), p) => scaled_prior(p, scale.sample_from_prior(rng), base)?,
                (Some(FeatureGrid::Nix { mu0, kappa0, sigma2, nu0 }), ComponentPrior::NormalInvChiSq(p)) => {
                    let table = p.table_len().saturating_sub(1);
                    ComponentPrior::NormalInvChiSq(
                        NixPrior::new(
                            *mu0,
                            kappa0.sample_from_prior(rng),
                            sigma2.sample_from_prior(rng),
                            nu0.sample_from_prior(rng),
                        )?
                        .with_table(table),
                    )
                }
                _ => unreachable!("validated above"),
            };
            model.set_prior(f, prior);
        }
        Ok(())
    }
}

fn check_scale(f: usize, scale: &GridAxis, base: &[f64], levels: usize) -> Result<()> {
    if base.len() != levels || base.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "feature {f}: base measure needs {levels} positive entries"
        )));
    }
    if scale.values.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidArgument(format!("feature {f}: scales must be positive")));
    }
    Ok(())
}

/// Empirical level frequencies (add-one smoothed), normalized to mean 1.
fn level_base(data: &Dataset, f: usize, levels: usize) -> Vec<f64> {
    let mut counts = vec![1.0; levels];
    for x in data.column(f) {
        match x {
            Datum::Bool(b) => counts[usize::from(!*b)] += 1.0,
            Datum::Cat(l) => counts[*l as usize] += 1.0,
            Datum::Real(_) => {}
        }
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c * levels as f64 / total).collect()
}

fn scaled_prior(current: &ComponentPrior, scale: f64, base: &[f64]) -> Result<ComponentPrior> {
    match current {
        // Boolean base is ordered (true, false).
        ComponentPrior::BetaBernoulli { .. } => ComponentPrior::beta_bernoulli(scale * base[0], scale * base[1]),
        ComponentPrior::DirichletCategorical { .. } => {
            ComponentPrior::dirichlet(base.iter().map(|b| scale * b).collect())
        }
        ComponentPrior::NormalInvChiSq(_) => Err(Error::InvalidArgument(
            "scale grid applied to a real-valued feature".into(),
        )),
    }
}

fn sample_axis<R: Rng + ?Sized>(
    name: &str,
    axis: &GridAxis,
    mut log_lik: impl FnMut(f64) -> f64,
    rng: &mut R,
) -> Result<f64> {
    let mut ws: Vec<f64> = axis
        .values
        .iter()
        .zip(&axis.log_prior)
        .map(|(v, lp)| {
            let w = lp + log_lik(*v);
            if w.is_nan() {
                f64::NEG_INFINITY
            } else {
                w
            }
        })
        .collect();
    let i = sample_log_weights(&mut ws, rng).ok_or_else(|| Error::DegenerateGrid(name.to_string()))?;
    Ok(axis.values[i])
}

/// Normalized conditional probabilities for every candidate of the
/// concentration axis.
/// Exposed for exact checks of the sampler.
pub fn alpha_conditional(state: &PartitionState, model: &MixtureModel, axis: &GridAxis) -> Vec<f64> {
    let d = model.py.discount();
    let mut ws: Vec<f64> = axis
        .values
        .iter()
        .zip(&axis.log_prior)
        .map(|(a, lp)| match PitmanYorParams::new(*a, d) {
            Ok(py) => lp + py.ln_eppf(state.cluster_sizes()),
            Err(_) => f64::NEG_INFINITY,
        })
        .collect();
    crate::math::normalize_log_weights(&mut ws);
    ws
}

/// One Gibbs pass over every learned hyperparameter, each sampled from its
/// grid conditional given the partition and the other hyperparameters.
/// The partition itself is never modified.
pub fn gibbs_hyper_step<R: Rng + ?Sized>(
    state: &PartitionState,
    model: &mut MixtureModel,
    grid: &HyperGrid,
    rng: &mut R,
) -> Result<()> {
    if let Some(axis) = &grid.alpha {
        let d = model.py.discount();
        let alpha = sample_axis(
            "alpha",
            axis,
            |a| match PitmanYorParams::new(a, d) {
                Ok(py) => py.ln_eppf(state.cluster_sizes()),
                Err(_) => f64::NEG_INFINITY,
            },
            rng,
        )?;
        model.py = PitmanYorParams::new(alpha, d)?;
    }
    if let Some(axis) = &grid.discount {
        let a = model.py.alpha();
        let d = sample_axis(
            "discount",
            axis,
            |d| match PitmanYorParams::new(a, d) {
                Ok(py) => py.ln_eppf(state.cluster_sizes()),
                Err(_) => f64::NEG_INFINITY,
            },
            rng,
        )?;
        model.py = PitmanYorParams::new(a, d)?;
    }
    for (f, g) in grid.features.iter().enumerate() {
        let Some(g) = g else { continue };
        let stats: Vec<&SuffStats> = state.clusters().map(|(_, c)| &c.stats()[f]).collect();
        let score = |prior: &ComponentPrior| -> f64 { stats.iter().map(|s| prior.log_marginal(s)).sum() };
        match g {
            FeatureGrid::Scale { scale, base } => {
                let current = model.priors()[f].clone();
                let s = sample_axis(
                    &format!("feature {f} scale"),
                    scale,
                    |s| scaled_prior(&current, s, base).map(|p| score(&p)).unwrap_or(f64::NEG_INFINITY),
                    rng,
                )?;
                model.set_prior(f, scaled_prior(&current, s, base)?);
            }
            FeatureGrid::Nix { mu0, kappa0, sigma2, nu0 } => {
                let ComponentPrior::NormalInvChiSq(cur) = &model.priors()[f] else {
                    return Err(Error::InvalidArgument(format!("feature {f}: NIX grid on non-real feature")));
                };
                let (s2, n0) = (cur.sigma2, cur.nu0);
                let table = cur.table_len().saturating_sub(1);
                let nix = |k: f64, s: f64, n: f64| {
                    NixPrior::new(*mu0, k, s, n).map(ComponentPrior::NormalInvChiSq)
                };
                let lik = |k: f64, s: f64, n: f64| nix(k, s, n).map(|p| score(&p)).unwrap_or(f64::NEG_INFINITY);
                let k0 = sample_axis(&format!("feature {f} kappa0"), kappa0, |k| lik(k, s2, n0), rng)?;
                let s2 = sample_axis(&format!("feature {f} sigma2"), sigma2, |s| lik(k0, s, n0), rng)?;
                let n0 = sample_axis(&format!("feature {f} nu0"), nu0, |n| lik(k0, s2, n), rng)?;
                let rebuilt = if n0 == cur.nu0 && cur.mu0 == *mu0 {
                    // Student-t normalizers depend on nu0 only.
                    let mut p = cur.clone();
                    p.kappa0 = k0;
                    p.sigma2 = s2;
                    p
                } else {
                    NixPrior::new(*mu0, k0, s2, n0)?.with_table(table)
                };
                model.set_prior(f, ComponentPrior::NormalInvChiSq(rebuilt));
            }
        }
    }
    Ok(())
}
