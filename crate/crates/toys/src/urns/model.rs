use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use subanneal_core::math::log_sum_exp;

use crate::error::{Error, Result};

/// Balls are drawn from the left urn with known probability `p`; each urn's
/// red probability has a symmetric `Beta(alpha_beta, alpha_beta)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrnModelParams {
    pub p: f64,
    pub alpha_beta: f64,
    pub red: u32,
    pub blue: u32,
}

impl UrnModelParams {
    pub fn new(p: f64, alpha_beta: f64, red: u32, blue: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
        }
        if !(alpha_beta > 0.0 && alpha_beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha_beta must be positive, got {alpha_beta}")));
        }
        if red as u64 + blue as u64 == 0 {
            return Err(Error::InvalidArgument("need at least one ball".into()));
        }
        Ok(Self { p, alpha_beta, red, blue })
    }

    pub fn n(&self) -> u32 {
        self.red + self.blue
    }

    /// Fraction of red balls.
    pub fn r(&self) -> f64 {
        self.red as f64 / self.n() as f64
    }
}

/// Projected latent state: how many red and blue balls sit in the left urn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct UrnCounts {
    pub r1: u32,
    pub b1: u32,
}

impl UrnCounts {
    pub fn new(r1: u32, b1: u32) -> Self {
        Self { r1, b1 }
    }

    pub fn is_valid(&self, params: &UrnModelParams) -> bool {
        self.r1 <= params.red && self.b1 <= params.blue
    }

    /// Intrinsic coordinates `(x, y)`: fractions of red and blue on the left.
    /// A colour with no balls maps to 0.
    pub fn intrinsic(&self, params: &UrnModelParams) -> (f64, f64) {
        let frac = |k: u32, tot: u32| if tot == 0 { 0.0 } else { k as f64 / tot as f64 };
        (frac(self.r1, params.red), frac(self.b1, params.blue))
    }
}

/// Precomputed log-gamma tables for fast exact joint probabilities.
#[derive(Debug, Clone)]
pub struct UrnModel {
    params: UrnModelParams,
    ln_fact: Vec<f64>,
    ln_gamma_a: Vec<f64>,
    ln_gamma_2a: Vec<f64>,
    ln_p: f64,
    ln_q: f64,
    ln_beta_aa: f64,
}

impl UrnModel {
    pub fn new(params: UrnModelParams) -> Self {
        let n = params.n() as usize;
        let a = params.alpha_beta;
        Self {
            params,
            ln_fact: (0..=n).map(|k| ln_gamma(k as f64 + 1.0)).collect(),
            ln_gamma_a: (0..=n).map(|k| ln_gamma(k as f64 + a)).collect(),
            ln_gamma_2a: (0..=n).map(|k| ln_gamma(k as f64 + 2.0 * a)).collect(),
            ln_p: params.p.ln(),
            ln_q: (1.0 - params.p).ln(),
            ln_beta_aa: 2.0 * ln_gamma(a) - ln_gamma(2.0 * a),
        }
    }

    pub fn params(&self) -> &UrnModelParams {
        &self.params
    }

    fn ln_choose(&self, n: u32, k: u32) -> f64 {
        self.ln_fact[n as usize] - self.ln_fact[k as usize] - self.ln_fact[(n - k) as usize]
    }

    /// Log probability of one particular red/blue sequence of `r + b` balls
    /// from an urn with a Beta prior on its red probability.
    fn ln_sequence(&self, r: u32, b: u32) -> f64 {
        self.ln_gamma_a[r as usize] + self.ln_gamma_a[b as usize]
            - self.ln_gamma_2a[(r + b) as usize]
            - self.ln_beta_aa
    }

    /// Log joint probability of the projected state, including the number of
    /// labelled assignments it represents.
    pub fn joint_log_prob(&self, c: UrnCounts) -> f64 {
        let pr = &self.params;
        debug_assert!(c.is_valid(pr));
        let (r2, b2) = (pr.red - c.r1, pr.blue - c.b1);
        let n1 = (c.r1 + c.b1) as f64;
        let n2 = (r2 + b2) as f64;
        self.ln_choose(pr.red, c.r1) + self.ln_choose(pr.blue, c.b1) + n1 * self.ln_p + n2 * self.ln_q
            + self.ln_sequence(c.r1, c.b1)
            + self.ln_sequence(r2, b2)
    }

    pub fn exact_posterior(&self) -> ExactPosterior {
        let pr = self.params;
        let (nr, nb) = (pr.red as usize + 1, pr.blue as usize + 1);
        let mut logs = Vec::with_capacity(nr * nb);
        for r1 in 0..nr as u32 {
            for b1 in 0..nb as u32 {
                logs.push(self.joint_log_prob(UrnCounts::new(r1, b1)));
            }
        }
        let z = log_sum_exp(&logs);
        ExactPosterior {
            red: pr.red,
            blue: pr.blue,
            probs: logs.iter().map(|l| (l - z).exp()).collect(),
        }
    }
}

/// `urn_joint_log_prob` without prebuilt tables.
pub fn urn_joint_log_prob(counts: UrnCounts, params: &UrnModelParams) -> Result<f64> {
    if !counts.is_valid(params) {
        return Err(Error::InvalidArgument(format!(
            "counts {counts:?} exceed totals ({}, {})",
            params.red, params.blue
        )));
    }
    Ok(UrnModel::new(*params).joint_log_prob(counts))
}

pub fn exact_posterior(params: &UrnModelParams) -> ExactPosterior {
    UrnModel::new(*params).exact_posterior()
}

/// Distribution over the `(R + 1) x (B + 1)` grid of projected states,
/// row-major in `r1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPosterior {
    pub red: u32,
    pub blue: u32,
    pub probs: Vec<f64>,
}

impl ExactPosterior {
    pub fn index(&self, c: UrnCounts) -> usize {
        c.r1 as usize * (self.blue as usize + 1) + c.b1 as usize
    }

    pub fn get(&self, c: UrnCounts) -> f64 {
        self.probs[self.index(c)]
    }

    pub fn counts_at(&self, i: usize) -> UrnCounts {
        let w = self.blue as usize + 1;
        UrnCounts::new((i / w) as u32, (i % w) as u32)
    }

    /// Grid points that beat all eight neighbours.
    pub fn local_maxima(&self) -> Vec<UrnCounts> {
        let (nr, nb) = (self.red as i64 + 1, self.blue as i64 + 1);
        let mut out = Vec::new();
        for r in 0..nr {
            for b in 0..nb {
                let v = self.probs[(r * nb + b) as usize];
                let mut best = true;
                for dr in -1..=1 {
                    for db in -1..=1 {
                        let (rr, bb) = (r + dr, b + db);
                        if (dr, db) == (0, 0) || rr < 0 || bb < 0 || rr >= nr || bb >= nb {
                            continue;
                        }
                        if self.probs[(rr * nb + bb) as usize] >= v {
                            best = false;
                        }
                    }
                }
                if best {
                    out.push(UrnCounts::new(r as u32, b as u32));
                }
            }
        }
        out
    }
}
