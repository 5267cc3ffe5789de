//! Synthetic data from a known Pitman-Yor mixture.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use subanneal_core::math::log_sum_exp;
use subanneal_core::{Dataset, Datum, FeatureKind, SeedStreams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub rows: usize,
    pub alpha: f64,
    pub discount: f64,
    /// Stick-breaking truncation level.
    pub max_clusters: usize,
    pub real_features: usize,
    pub categorical_features: usize,
    pub levels: u32,
    /// Standard deviation of cluster means, in units of the within-cluster
    /// standard deviation.
    pub separation: f64,
    /// Symmetric Dirichlet concentration of the per-cluster level
    /// probabilities; small values separate clusters.
    pub level_concentration: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 10_000,
            alpha: 2.0,
            discount: 0.2,
            max_clusters: 30,
            real_features: 4,
            categorical_features: 4,
            levels: 4,
            separation: 2.0,
            level_concentration: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.rows == 0 || self.max_clusters == 0 {
            return bad("rows and max_clusters must be positive");
        }
        if self.real_features + self.categorical_features == 0 {
            return bad("need at least one feature");
        }
        if !(0.0..1.0).contains(&self.discount) || !(self.alpha > -self.discount) {
            return bad("need 0 <= discount < 1 and alpha > -discount");
        }
        if self.categorical_features > 0 && self.levels < 2 {
            return bad("categorical features need at least 2 levels");
        }
        if !(self.separation >= 0.0 && self.level_concentration > 0.0) {
            return bad("separation must be nonnegative and level_concentration positive");
        }
        Ok(())
    }
}

/// Parameters of the generating mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueMixture {
    pub weights: Vec<f64>,
    /// Per cluster, per real feature: mean (unit standard deviation).
    pub means: Vec<Vec<f64>>,
    /// Per cluster, per categorical feature: level probabilities.
    pub level_probs: Vec<Vec<Vec<f64>>>,
}

impl TrueMixture {
    /// Log density of a row under the generating mixture. Real features come
    /// first, then categorical ones.
    pub fn log_density(&self, row: &[Datum]) -> f64 {
        let ln_norm = -0.5 * (2.0 * std::f64::consts::PI).ln();
        let terms: Vec<f64> = (0..self.weights.len())
            .map(|k| {
                let mut lp = self.weights[k].ln();
                let (mut r, mut c) = (0, 0);
                for x in row {
                    match x {
                        Datum::Real(v) => {
                            lp += ln_norm - 0.5 * (v - self.means[k][r]).powi(2);
                            r += 1;
                        }
                        Datum::Cat(l) => {
                            lp += self.level_probs[k][c][*l as usize].ln();
                            c += 1;
                        }
                        Datum::Bool(_) => unreachable!("synthetic data has no boolean columns"),
                    }
                }
                lp
            })
            .collect();
        log_sum_exp(&terms)
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub dataset: Dataset,
    /// Generating cluster of each row.
    pub labels: Vec<usize>,
    pub truth: TrueMixture,
}

pub fn synth_dataset(cfg: &SynthConfig, seed: u64) -> Result<SynthData> {
    cfg.validate()?;
    let streams = SeedStreams::new(seed);
    let mut rng = streams.stream("synth-params", 0);
    let weights = stick_breaking(cfg, &mut rng);
    let normal = Normal::new(0.0, cfg.separation.max(1e-300)).expect("valid normal");
    let gamma = Gamma::new(cfg.level_concentration, 1.0).expect("valid gamma");
    let k = weights.len();
    let means: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..cfg.real_features).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    let level_probs: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|_| {
            (0..cfg.categorical_features)
                .map(|_| {
                    let g: Vec<f64> = (0..cfg.levels).map(|_| gamma.sample(&mut rng).max(1e-300)).collect();
                    let s: f64 = g.iter().sum();
                    g.iter().map(|x| x / s).collect()
                })
                .collect()
        })
        .collect();
    let truth = TrueMixture {
        weights,
        means,
        level_probs,
    };

    let mut rng = streams.stream("synth-rows", 0);
    let cdf: Vec<f64> = truth
        .weights
        .iter()
        .scan(0.0, |a, w| {
            *a += w;
            Some(*a)
        })
        .collect();
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut labels = Vec::with_capacity(cfg.rows);
    let mut rows = Vec::with_capacity(cfg.rows);
    for _ in 0..cfg.rows {
        let u: f64 = rng.random::<f64>() * cdf[k - 1];
        let z = cdf.partition_point(|c| *c < u).min(k - 1);
        let mut row = Vec::with_capacity(cfg.real_features + cfg.categorical_features);
        for f in 0..cfg.real_features {
            row.push(Datum::Real(truth.means[z][f] + unit.sample(&mut rng)));
        }
        for f in 0..cfg.categorical_features {
            let p = &truth.level_probs[z][f];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut level = p.len() - 1;
            for (l, q) in p.iter().enumerate() {
                acc += q;
                if u < acc {
                    level = l;
                    break;
                }
            }
            row.push(Datum::Cat(level as u32));
        }
        labels.push(z);
        rows.push(row);
    }
    let mut names: Vec<String> = (0..cfg.real_features).map(|f| format!("real{f}")).collect();
    names.extend((0..cfg.categorical_features).map(|f| format!("cat{f}")));
    let mut kinds = vec![FeatureKind::Real; cfg.real_features];
    kinds.extend(std::iter::repeat_n(
        FeatureKind::Categorical { levels: cfg.levels },
        cfg.categorical_features,
    ));
    let dataset = Dataset::new(names, kinds, rows)?;
    Ok(SynthData { dataset, labels, truth })
}

/// Truncated Pitman-Yor stick-breaking weights, renormalized.
fn stick_breaking<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Vec<f64> {
    let mut rest = 1.0;
    let mut w = Vec::with_capacity(cfg.max_clusters);
    for k in 0..cfg.max_clusters {
        let v = if k + 1 == cfg.max_clusters {
            1.0
        } else {
            Beta::new(1.0 - cfg.discount, cfg.alpha + (k + 1) as f64 * cfg.discount)
                .expect("valid beta")
                .sample(rng)
        };
        w.push(rest * v);
        rest *= 1.0 - v;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}
