use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::model::{ExactPosterior, UrnCounts, UrnModelParams};
use crate::error::{Error, Result};

/// Half the L1 distance between two distributions on the same support.
pub fn tvd(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "distributions have different supports ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// How projected states are grouped before comparing distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    /// One bin per `(r1, b1)` grid point.
    Exact,
    /// `bx * by` equal cells in the intrinsic coordinates `(x, y)`.
    Intrinsic { bx: u32, by: u32 },
}

impl Binning {
    pub fn n_bins(&self, params: &UrnModelParams) -> usize {
        match self {
            Binning::Exact => (params.red as usize + 1) * (params.blue as usize + 1),
            Binning::Intrinsic { bx, by } => *bx as usize * *by as usize,
        }
    }

    pub fn bin(&self, c: UrnCounts, params: &UrnModelParams) -> usize {
        match self {
            Binning::Exact => c.r1 as usize * (params.blue as usize + 1) + c.b1 as usize,
            Binning::Intrinsic { bx, by } => {
                let cell = |k: u32, tot: u32, m: u32| -> usize {
                    if tot == 0 {
                        return 0;
                    }
                    // Integer arithmetic keeps bin edges exact.
                    ((k as u64 * m as u64 / (tot as u64 + 1)) as usize).min(m as usize - 1)
                };
                cell(c.r1, params.red, *bx) * *by as usize + cell(c.b1, params.blue, *by)
            }
        }
    }

    pub fn bin_posterior(&self, post: &ExactPosterior, params: &UrnModelParams) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bins(params)];
        for (i, p) in post.probs.iter().enumerate() {
            out[self.bin(post.counts_at(i), params)] += p;
        }
        out
    }
}

/// Counts of final states over bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(n_bins: usize) -> Self {
        Self {
            counts: vec![0; n_bins],
            total: 0,
        }
    }

    pub fn add(&mut self, bin: usize) {
        self.counts[bin] += 1;
        self.total += 1;
    }

    /// Sums two histograms; merging is associative and order-independent.
    pub fn merge(mut self, other: &Histogram) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    pub fn distribution(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|c| *c as f64 / t).collect()
    }

    pub fn tvd_to(&self, reference: &[f64]) -> Result<f64> {
        tvd(&self.distribution(), reference)
    }
}

/// Monte Carlo standard error of `hist.tvd_to(reference)` from a multinomial
/// bootstrap of the histogram.
pub fn bootstrap_tvd_se<R: Rng + ?Sized>(hist: &Histogram, reference: &[f64], reps: usize, rng: &mut R) -> Result<f64> {
    if reps < 2 {
        return Err(Error::InvalidArgument("bootstrap needs at least two replicates".into()));
    }
    let p = hist.distribution();
    let mut vals = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut left = hist.total;
        let mut mass = 1.0;
        let mut resampled = Histogram::new(p.len());
        for (i, pi) in p.iter().enumerate() {
            if left == 0 {
                break;
            }
            let k = if i + 1 == p.len() || mass <= 0.0 {
                left
            } else {
                let q = (pi / mass).clamp(0.0, 1.0);
                Binomial::new(left, q).expect("valid binomial").sample(rng)
            };
            resampled.counts[i] = k;
            left -= k;
            mass -= pi;
        }
        resampled.total = hist.total;
        vals.push(resampled.tvd_to(reference)?);
    }
    let m = vals.iter().sum::<f64>() / reps as f64;
    Ok((vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt())
}
