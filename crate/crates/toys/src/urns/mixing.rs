//! Empirical mixing time: the smallest budget at which the distribution of
//! final states over many independent chains is within a TVD target of the
//! exact posterior.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use subanneal_core::SeedStreams;

use super::kernels::urn_gibbs_step;
use super::model::{UrnCounts, UrnModel, UrnModelParams};
use super::strategies::{prior_draw, run_with_assigns, UrnStrategy};
use super::tvd::{Binning, Histogram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingConfig {
    pub chains: usize,
    pub red_parts: u32,
    pub blue_parts: u32,
    pub p: f64,
    pub alpha_beta: f64,
    pub binning: Binning,
    pub seed: u64,
    /// Ratio between consecutive budgets in the checkpoint scan and the
    /// stopping ratio of the bisection.
    pub resolution: f64,
    /// Give up above `max_budget_factor * N^2` assignments.
    pub max_budget_factor: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        Self {
            chains: 10_000,
            red_parts: 2,
            blue_parts: 3,
            p: 0.45,
            alpha_beta: 0.5,
            binning: Binning::Intrinsic { bx: 10, by: 10 },
            seed: 0,
            resolution: 1.02,
            max_budget_factor: 200.0,
        }
    }
}

impl MixingConfig {
    pub fn params(&self, n: u32) -> Result<UrnModelParams> {
        let parts = self.red_parts + self.blue_parts;
        if parts == 0 || n % parts != 0 {
            return Err(Error::InvalidArgument(format!(
                "N = {n} is not a multiple of {}:{}",
                self.red_parts, self.blue_parts
            )));
        }
        let unit = n / parts;
        UrnModelParams::new(self.p, self.alpha_beta, unit * self.red_parts, unit * self.blue_parts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingPoint {
    pub n: u32,
    /// Assignments needed to reach the target.
    pub budget: f64,
    pub tvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    pub strategy: UrnStrategy,
    pub eps: f64,
    pub points: Vec<MixingPoint>,
    /// Least-squares slope of log budget against log N.
    pub slope: f64,
}

/// Final-state histogram of `chains` independent runs, chain `c` using stream
/// `(label, c)` of `streams`.
pub fn final_state_histogram(
    strategy: UrnStrategy,
    model: &UrnModel,
    assigns: u64,
    chains: usize,
    binning: Binning,
    streams: &SeedStreams,
    label: &str,
) -> Result<Histogram> {
    let params = *model.params();
    let nb = binning.n_bins(&params);
    (0..chains)
        .into_par_iter()
        .map(|c| -> Result<Histogram> {
            let mut rng = streams.stream(label, c as u64);
            let s = run_with_assigns(strategy, model, assigns, &mut rng)?;
            let mut h = Histogram::new(nb);
            h.add(binning.bin(s, &params));
            Ok(h)
        })
        .try_reduce(|| Histogram::new(nb), |a, b| Ok(a.merge(&b)))
}

pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Scans geometrically spaced budgets of a single homogeneous Gibbs run per
/// chain and returns the interpolated first crossing of `eps`.
fn prior_gibbs_crossing(
    model: &UrnModel,
    reference: &[f64],
    eps: f64,
    cfg: &MixingConfig,
    label: &str,
) -> Result<MixingPoint> {
    let params = *model.params();
    let n = params.n();
    let streams = SeedStreams::new(cfg.seed);
    let mut chains: Vec<(UrnCounts, ChaCha8Rng)> = (0..cfg.chains)
        .map(|c| {
            let mut rng = streams.stream(label, c as u64);
            (prior_draw(model, &mut rng), rng)
        })
        .collect();
    let tvd_now = |chains: &[(UrnCounts, ChaCha8Rng)]| -> Result<f64> {
        let mut h = Histogram::new(reference.len());
        for (s, _) in chains {
            h.add(cfg.binning.bin(*s, &params));
        }
        h.tvd_to(reference)
    };
    let max = cfg.max_budget_factor * (n as f64).powi(2);
    let mut done = 0u64;
    let mut prev = (0u64, tvd_now(&chains)?);
    if prev.1 <= eps {
        return Ok(MixingPoint { n, budget: 0.0, tvd: prev.1 });
    }
    let mut target = 1u64;
    loop {
        let steps = target - done;
        chains.par_iter_mut().for_each(|(s, rng)| {
            for _ in 0..steps {
                *s = urn_gibbs_step(*s, model, 1.0, rng);
            }
        });
        done = target;
        let t = tvd_now(&chains)?;
        if t <= eps {
            let (b0, t0) = prev;
            let budget = if b0 == 0 {
                done as f64
            } else {
                // Linear interpolation of TVD in log budget.
                let w = (t0 - eps) / (t0 - t);
                ((b0 as f64).ln() + w * ((done as f64).ln() - (b0 as f64).ln())).exp()
            };
            return Ok(MixingPoint { n, budget, tvd: t });
        }
        prev = (done, t);
        if done as f64 > max {
            return Err(Error::Domain(format!(
                "N = {n}: TVD {t:.4} still above {} after {done} steps",
                eps
            )));
        }
        target = ((done as f64 * cfg.resolution).ceil() as u64).max(done + 1);
    }
}

/// Bisects the total budget of a schedule-driven strategy, reusing the same
/// chain seeds for every candidate.
fn bisect_budget(
    strategy: UrnStrategy,
    model: &UrnModel,
    reference: &[f64],
    eps: f64,
    cfg: &MixingConfig,
    label: &str,
) -> Result<MixingPoint> {
    let n = model.params().n();
    let streams = SeedStreams::new(cfg.seed);
    let eval = |b: u64| -> Result<f64> {
        final_state_histogram(strategy, model, b, cfg.chains, cfg.binning, &streams, label)?.tvd_to(reference)
    };
    let lo_start = match strategy {
        UrnStrategy::SequentialGibbs | UrnStrategy::AnnealSubsample => n as u64,
        _ => 1,
    };
    let t_lo = eval(lo_start)?;
    if t_lo <= eps {
        return Ok(MixingPoint { n, budget: lo_start as f64, tvd: t_lo });
    }
    let max = cfg.max_budget_factor * (n as f64).powi(2);
    let (mut lo, mut hi) = (lo_start, lo_start * 2);
    let mut t_hi = eval(hi)?;
    while t_hi > eps {
        if hi as f64 > max {
            return Err(Error::Domain(format!(
                "N = {n}: TVD {t_hi:.4} still above {} at budget {hi}",
                eps
            )));
        }
        lo = hi;
        hi *= 2;
        t_hi = eval(hi)?;
    }
    while hi as f64 > lo as f64 * cfg.resolution && hi > lo + 1 {
        let mid = ((lo as f64 * hi as f64).sqrt().round() as u64).clamp(lo + 1, hi - 1);
        let t = eval(mid)?;
        if t <= eps {
            hi = mid;
            t_hi = t;
        } else {
            lo = mid;
        }
    }
    Ok(MixingPoint { n, budget: hi as f64, tvd: t_hi })
}

/// For every size, the budget (in conditional assignments) at which the
/// final-state distribution of `cfg.chains` chains comes within `eps` TVD of
/// the exact posterior, and the scaling exponent of budget in N.
pub fn mixing_time_experiment(
    sizes: &[u32],
    strategy: UrnStrategy,
    eps: f64,
    cfg: &MixingConfig,
) -> Result<MixingResult> {
    if strategy == UrnStrategy::Sequential {
        return Err(Error::InvalidArgument("the sequential strategy has a fixed budget".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let params = cfg.params(n)?;
        let model = UrnModel::new(params);
        let reference = cfg.binning.bin_posterior(&model.exact_posterior(), &params);
        let label = format!("mixing-{}-{n}", strategy.name());
        let point = if strategy == UrnStrategy::PriorGibbs {
            prior_gibbs_crossing(&model, &reference, eps, cfg, &label)?
        } else {
            bisect_budget(strategy, &model, &reference, eps, cfg, &label)?
        };
        points.push(point);
    }
    let slope = if points.len() >= 2 {
        log_log_slope(&points.iter().map(|p| (p.n as f64, p.budget)).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    Ok(MixingResult { strategy, eps, points, slope })
}
