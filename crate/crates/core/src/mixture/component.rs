//! Conjugate component families and their sufficient statistics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::data::{Datum, FeatureKind};
use crate::error::{Error, Result};
use crate::math::{ln_beta, ln_gamma};

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Normal likelihood with unknown mean and variance under a
/// normal-inverse-chi-squared prior `(mu0, kappa0, sigma2_0, nu0)`:
/// `sigma^2 ~ Scaled-Inv-chi^2(nu0, sigma2_0)`, `mu | sigma^2 ~ N(mu0, sigma^2 / kappa0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NixPrior {
    pub mu0: f64,
    pub kappa0: f64,
    pub sigma2: f64,
    pub nu0: f64,
    /// `ln G((nu0 + n + 1)/2) - ln G((nu0 + n)/2)` indexed by `n`.
    #[serde(skip)]
    t_norm: Vec<f64>,
}

impl PartialEq for NixPrior {
    fn eq(&self, other: &Self) -> bool {
        self.mu0 == other.mu0
            && self.kappa0 == other.kappa0
            && self.sigma2 == other.sigma2
            && self.nu0 == other.nu0
    }
}

impl NixPrior {
    pub fn new(mu0: f64, kappa0: f64, sigma2: f64, nu0: f64) -> Result<Self> {
        if !mu0.is_finite() || !(kappa0 > 0.0) || !(sigma2 > 0.0) || !(nu0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "normal-inverse-chi2 prior needs finite mu0 and positive kappa0, sigma2, nu0; \
                 got ({mu0}, {kappa0}, {sigma2}, {nu0})"
            )));
        }
        if !(kappa0.is_finite() && sigma2.is_finite() && nu0.is_finite()) {
            return Err(Error::InvalidArgument("non-finite prior parameter".into()));
        }
        Ok(Self {
            mu0,
            kappa0,
            sigma2,
            nu0,
            t_norm: Vec::new(),
        })
    }

    /// Precomputes the Student-t normalizers for clusters of up to `n_max` members.
    pub fn with_table(mut self, n_max: usize) -> Self {
        self.t_norm = (0..=n_max)
            .map(|n| {
                let nu = self.nu0 + n as f64;
                ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)
            })
            .collect();
        self
    }

    pub fn table_len(&self) -> usize {
        self.t_norm.len()
    }

    #[inline]
    fn t_norm(&self, n: u64) -> f64 {
        match self.t_norm.get(n as usize) {
            Some(v) => *v,
            None => {
                let nu = self.nu0 + n as f64;
                ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)
            }
        }
    }

    /// Posterior `(mu_n, kappa_n, sigma2_n, nu_n)` given the summarized data.
    pub fn posterior(&self, count: u64, sum: f64, sum_sq: f64) -> (f64, f64, f64, f64) {
        let n = count as f64;
        let kappa_n = self.kappa0 + n;
        let nu_n = self.nu0 + n;
        if count == 0 {
            return (self.mu0, self.kappa0, self.sigma2, self.nu0);
        }
        let mean = sum / n;
        let ss = (sum_sq - sum * mean).max(0.0);
        let mu_n = (self.kappa0 * self.mu0 + sum) / kappa_n;
        let dev = mean - self.mu0;
        let scatter = self.nu0 * self.sigma2 + ss + n * self.kappa0 / kappa_n * dev * dev;
        (mu_n, kappa_n, scatter / nu_n, nu_n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ComponentPrior {
    BetaBernoulli { a: f64, b: f64 },
    DirichletCategorical { alphas: Vec<f64>, alpha_total: f64 },
    NormalInvChiSq(NixPrior),
}

/// Per-cluster sufficient statistics for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SuffStats {
    BetaBernoulli { heads: u64, tails: u64 },
    DirichletCategorical { counts: Vec<u32>, total: u32 },
    NormalInvChiSq { count: u64, sum: f64, sum_sq: f64 },
}

impl ComponentPrior {
    pub fn beta_bernoulli(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta prior needs positive pseudo-counts, got ({a}, {b})"
            )));
        }
        Ok(ComponentPrior::BetaBernoulli { a, b })
    }

    pub fn dirichlet(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(
                "dirichlet prior needs >= 2 positive pseudo-counts".into(),
            ));
        }
        let alpha_total = alphas.iter().sum();
        Ok(ComponentPrior::DirichletCategorical { alphas, alpha_total })
    }

    pub fn normal_inv_chi_sq(prior: NixPrior) -> Self {
        ComponentPrior::NormalInvChiSq(prior)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ComponentPrior::BetaBernoulli { .. } => "boolean",
            ComponentPrior::DirichletCategorical { .. } => "categorical",
            ComponentPrior::NormalInvChiSq(_) => "real",
        }
    }

    pub fn accepts(&self, kind: &FeatureKind) -> bool {
        match (self, kind) {
            (ComponentPrior::BetaBernoulli { .. }, FeatureKind::Boolean) => true,
            (ComponentPrior::DirichletCategorical { alphas, .. }, FeatureKind::Categorical { levels }) => {
                alphas.len() == *levels as usize
            }
            (ComponentPrior::NormalInvChiSq(_), FeatureKind::Real) => true,
            _ => false,
        }
    }

    pub fn empty_stats(&self) -> SuffStats {
        match self {
            ComponentPrior::BetaBernoulli { .. } => SuffStats::BetaBernoulli { heads: 0, tails: 0 },
            ComponentPrior::DirichletCategorical { alphas, .. } => SuffStats::DirichletCategorical {
                counts: vec![0; alphas.len()],
                total: 0,
            },
            ComponentPrior::NormalInvChiSq(_) => SuffStats::NormalInvChiSq {
                count: 0,
                sum: 0.0,
                sum_sq: 0.0,
            },
        }
    }

    /// Log posterior-predictive probability (mass or density) of `x` given the
    /// data summarized in `stats`. Empty stats give the prior predictive.
    pub fn log_predictive(&self, stats: &SuffStats, x: &Datum) -> Result<f64> {
        match (self, stats, x) {
            (ComponentPrior::BetaBernoulli { .. }, SuffStats::BetaBernoulli { .. }, Datum::Bool(_))
            | (
                ComponentPrior::DirichletCategorical { .. },
                SuffStats::DirichletCategorical { .. },
                Datum::Cat(_),
            )
            | (ComponentPrior::NormalInvChiSq(_), SuffStats::NormalInvChiSq { .. }, Datum::Real(_)) => {
                if let (ComponentPrior::DirichletCategorical { alphas, .. }, Datum::Cat(l)) = (self, x) {
                    if *l as usize >= alphas.len() {
                        return Err(Error::InvalidArgument(format!(
                            "level {l} outside cardinality {}",
                            alphas.len()
                        )));
                    }
                }
                Ok(self.ln_pp(stats, x))
            }
            _ => Err(Error::KindMismatch {
                expected: self.kind_name(),
                found: x.kind_name(),
            }),
        }
    }

    /// Unchecked predictive used on hot paths; kinds are validated when a
    /// model is bound to a dataset.
    #[inline]
    pub(crate) fn ln_pp(&self, stats: &SuffStats, x: &Datum) -> f64 {
        match (self, stats, x) {
            (ComponentPrior::BetaBernoulli { a, b }, SuffStats::BetaBernoulli { heads, tails }, Datum::Bool(v)) => {
                let h = *heads as f64;
                let t = *tails as f64;
                let num = if *v { h + a } else { t + b };
                (num / (h + t + a + b)).ln()
            }
            (
                ComponentPrior::DirichletCategorical { alphas, alpha_total },
                SuffStats::DirichletCategorical { counts, total },
                Datum::Cat(l),
            ) => {
                let l = *l as usize;
                ((counts[l] as f64 + alphas[l]) / (*total as f64 + alpha_total)).ln()
            }
            (ComponentPrior::NormalInvChiSq(p), SuffStats::NormalInvChiSq { count, sum, sum_sq }, Datum::Real(v)) => {
                let (mu_n, kappa_n, sigma2_n, nu_n) = p.posterior(*count, *sum, *sum_sq);
                let scale2 = sigma2_n * (1.0 + 1.0 / kappa_n);
                let z = (v - mu_n) * (v - mu_n) / (nu_n * scale2);
                p.t_norm(*count) - 0.5 * (nu_n * PI * scale2).ln() - 0.5 * (nu_n + 1.0) * z.ln_1p()
            }
            _ => panic!(
                "component kind mismatch: model {} vs datum {}",
                self.kind_name(),
                x.kind_name()
            ),
        }
    }

    /// Log marginal likelihood of all data summarized in `stats`.
    pub fn log_marginal(&self, stats: &SuffStats) -> f64 {
        match (self, stats) {
            (ComponentPrior::BetaBernoulli { a, b }, SuffStats::BetaBernoulli { heads, tails }) => {
                ln_beta(a + *heads as f64, b + *tails as f64) - ln_beta(*a, *b)
            }
            (
                ComponentPrior::DirichletCategorical { alphas, alpha_total },
                SuffStats::DirichletCategorical { counts, total },
            ) => {
                let mut acc = ln_gamma(*alpha_total) - ln_gamma(alpha_total + *total as f64);
                for (a, c) in alphas.iter().zip(counts) {
                    if *c > 0 {
                        acc += ln_gamma(a + *c as f64) - ln_gamma(*a);
                    }
                }
                acc
            }
            (ComponentPrior::NormalInvChiSq(p), SuffStats::NormalInvChiSq { count, sum, sum_sq }) => {
                if *count == 0 {
                    return 0.0;
                }
                let n = *count as f64;
                let (_, kappa_n, sigma2_n, nu_n) = p.posterior(*count, *sum, *sum_sq);
                ln_gamma(nu_n / 2.0) - ln_gamma(p.nu0 / 2.0) + 0.5 * (p.kappa0 / kappa_n).ln()
                    + 0.5 * p.nu0 * (p.nu0 * p.sigma2).ln()
                    - 0.5 * nu_n * (nu_n * sigma2_n).ln()
                    - 0.5 * n * LN_PI
            }
            _ => panic!("component kind mismatch in log_marginal"),
        }
    }
}

impl SuffStats {
    #[inline]
    pub fn add(&mut self, x: &Datum) {
        match (self, x) {
            (SuffStats::BetaBernoulli { heads, tails }, Datum::Bool(v)) => {
                if *v {
                    *heads += 1
                } else {
                    *tails += 1
                }
            }
            (SuffStats::DirichletCategorical { counts, total }, Datum::Cat(l)) => {
                counts[*l as usize] += 1;
                *total += 1;
            }
            (SuffStats::NormalInvChiSq { count, sum, sum_sq }, Datum::Real(v)) => {
                *count += 1;
                *sum += v;
                *sum_sq += v * v;
            }
            (s, x) => panic!("cannot add {} datum to {:?}", x.kind_name(), s),
        }
    }

    #[inline]
    pub fn remove(&mut self, x: &Datum) {
        match (self, x) {
            (SuffStats::BetaBernoulli { heads, tails }, Datum::Bool(v)) => {
                let c = if *v { heads } else { tails };
                assert!(*c > 0, "removing a boolean that was never added");
                *c -= 1;
            }
            (SuffStats::DirichletCategorical { counts, total }, Datum::Cat(l)) => {
                let c = &mut counts[*l as usize];
                assert!(*c > 0, "removing a level that was never added");
                *c -= 1;
                *total -= 1;
            }
            (SuffStats::NormalInvChiSq { count, sum, sum_sq }, Datum::Real(v)) => {
                assert!(*count > 0, "removing from empty normal stats");
                *count -= 1;
                if *count == 0 {
                    *sum = 0.0;
                    *sum_sq = 0.0;
                } else {
                    *sum -= v;
                    *sum_sq -= v * v;
                }
            }
            (s, x) => panic!("cannot remove {} datum from {:?}", x.kind_name(), s),
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            SuffStats::BetaBernoulli { heads, tails } => heads + tails,
            SuffStats::DirichletCategorical { total, .. } => *total as u64,
            SuffStats::NormalInvChiSq { count, .. } => *count,
        }
    }

    /// Integer fields must agree exactly; real accumulators within `rel`
    /// relative error (scaled by the accumulated magnitude).
    pub fn approx_eq(&self, other: &SuffStats, rel: f64) -> bool {
        match (self, other) {
            (
                SuffStats::NormalInvChiSq { count: c1, sum: s1, sum_sq: q1 },
                SuffStats::NormalInvChiSq { count: c2, sum: s2, sum_sq: q2 },
            ) => {
                let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= rel * scale.max(1.0);
                c1 == c2 && close(*s1, *s2, q1.abs().sqrt() * (*c1 as f64).sqrt()) && close(*q1, *q2, q1.abs())
            }
            _ => self == other,
        }
    }
}
