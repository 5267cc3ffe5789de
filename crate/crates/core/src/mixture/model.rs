use serde::{Deserialize, Serialize};

use super::component::{ComponentPrior, NixPrior, SuffStats};
use super::data::{Dataset, Datum, FeatureKind};
use super::pitman_yor::PitmanYorParams;
use crate::error::{Error, Result};

/// Partition prior plus one conjugate component prior per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub py: PitmanYorParams,
    priors: Vec<ComponentPrior>,
}

impl MixtureModel {
    pub fn new(py: PitmanYorParams, priors: Vec<ComponentPrior>) -> Self {
        Self { py, priors }
    }

    /// Weakly informative defaults derived from the data: unit Beta/Dirichlet
    /// pseudo-counts, and a normal-inverse-chi^2 centred on the column mean
    /// with the column variance as scale.
    pub fn default_for(data: &Dataset, py: PitmanYorParams) -> Self {
        let priors = data
            .kinds()
            .iter()
            .enumerate()
            .map(|(f, kind)| match kind {
                FeatureKind::Boolean => ComponentPrior::BetaBernoulli { a: 1.0, b: 1.0 },
                FeatureKind::Categorical { levels } => {
                    ComponentPrior::dirichlet(vec![1.0; *levels as usize]).expect("levels >= 2")
                }
                FeatureKind::Real => {
                    let (mean, var) = column_moments(data, f);
                    ComponentPrior::NormalInvChiSq(
                        NixPrior::new(mean, 1.0, var, 1.0)
                            .expect("finite moments")
                            .with_table(data.n_rows()),
                    )
                }
            })
            .collect();
        Self { py, priors }
    }

    pub fn priors(&self) -> &[ComponentPrior] {
        &self.priors
    }

    pub fn set_prior(&mut self, f: usize, prior: ComponentPrior) {
        self.priors[f] = prior;
    }

    pub fn n_features(&self) -> usize {
        self.priors.len()
    }

    pub fn check_compatible(&self, data: &Dataset) -> Result<()> {
        if self.priors.len() != data.n_features() {
            return Err(Error::InvalidArgument(format!(
                "model has {} features, dataset has {}",
                self.priors.len(),
                data.n_features()
            )));
        }
        for (prior, kind) in self.priors.iter().zip(data.kinds()) {
            if !prior.accepts(kind) {
                return Err(Error::KindMismatch {
                    expected: prior.kind_name(),
                    found: kind.name(),
                });
            }
        }
        Ok(())
    }

    pub fn empty_stats(&self) -> Vec<SuffStats> {
        self.priors.iter().map(|p| p.empty_stats()).collect()
    }

    /// Sum over features of the log predictive of `row` given `stats`.
    #[inline]
    pub fn ln_pp_row(&self, stats: &[SuffStats], row: &[Datum]) -> f64 {
        self.priors
            .iter()
            .zip(stats)
            .zip(row)
            .map(|((p, s), x)| p.ln_pp(s, x))
            .sum()
    }

    /// Checked variant of [`Self::ln_pp_row`].
    pub fn log_predictive_row(&self, stats: &[SuffStats], row: &[Datum]) -> Result<f64> {
        if row.len() != self.priors.len() || stats.len() != self.priors.len() {
            return Err(Error::InvalidArgument("row width does not match model".into()));
        }
        let mut acc = 0.0;
        for ((p, s), x) in self.priors.iter().zip(stats).zip(row) {
            acc += p.log_predictive(s, x)?;
        }
        Ok(acc)
    }

    pub fn ln_marginal_cluster(&self, stats: &[SuffStats]) -> f64 {
        self.priors
            .iter()
            .zip(stats)
            .map(|(p, s)| p.log_marginal(s))
            .sum()
    }
}

pub(crate) fn column_moments(data: &Dataset, f: usize) -> (f64, f64) {
    let vals: Vec<f64> = data
        .column(f)
        .filter_map(|x| match x {
            Datum::Real(v) => Some(*v),
            _ => None,
        })
        .collect();
    if vals.is_empty() {
        return (0.0, 1.0);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, if var > 0.0 { var } else { 1.0 })
}
