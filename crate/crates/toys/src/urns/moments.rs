//! Single-step moments of the decoupled remove/add dynamics in intrinsic
//! coordinates, and the drift and diffusion coefficients built from them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernels::{left_probability, Color, Side, SplitCounts};
use super::model::{UrnCounts, UrnModel};

/// How a removed ball counts toward `x = r1 / R` while it is out of the urns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// The removed ball counts half left and half right, so a removal from
    /// the left moves `x` by `-1/(2R)` and re-adding it to the left moves `x`
    /// by `+1/(2R)`.
    HalfBall,
    /// The removed ball counts as right: removal from the left moves `x` by
    /// `-1/R`, re-adding to the left by `+1/R`.
    WholeBall,
}

/// Means and variances of the four increments, in the order
/// `dx_rem, dx_add, dy_rem, dy_add`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepMoments {
    pub mean: [f64; 4],
    pub var: [f64; 4],
}

pub const MOMENT_NAMES: [&str; 4] = ["dx_rem", "dx_add", "dy_rem", "dy_add"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub moments: StepMoments,
    /// Standard errors of every mean and variance.
    pub se: StepMoments,
    pub trials: u64,
    /// Set when fewer than 1000 trials were used.
    pub low_trials: bool,
}

/// Drift and diagonal diffusion of the continuum limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FokkerPlanck {
    pub drift: [f64; 2],
    pub diffusion: [[f64; 2]; 2],
}

fn increments(c: Color, from: Side, to: Side, red: u32, blue: u32, conv: Convention) -> [f64; 4] {
    let unit = |tot: u32| if tot == 0 { 0.0 } else { 1.0 / tot as f64 };
    let (rem, add) = match conv {
        Convention::HalfBall => {
            let s = |side: Side| if side == Side::Left { 0.5 } else { -0.5 };
            (-s(from), s(to))
        }
        Convention::WholeBall => {
            let s = |side: Side| if side == Side::Left { 1.0 } else { 0.0 };
            (-s(from), s(to))
        }
    };
    match c {
        Color::Red => [rem * unit(red), add * unit(red), 0.0, 0.0],
        Color::Blue => [0.0, 0.0, rem * unit(blue), add * unit(blue)],
    }
}

/// Every (colour, source, destination) move with its probability and the
/// increments it produces, plus the combined `x` and `y` increments.
fn moves(counts: UrnCounts, model: &UrnModel, conv: Convention) -> Vec<(f64, [f64; 4])> {
    let s = SplitCounts::full(counts, model);
    let (red, blue) = (model.params().red, model.params().blue);
    let n = s.total() as f64;
    let mut out = Vec::with_capacity(8);
    for c in [Color::Red, Color::Blue] {
        for from in [Side::Left, Side::Right] {
            let k = s.get(c, from);
            if k == 0 {
                continue;
            }
            let mut rest = s;
            rest.take(c, from);
            let pl = left_probability(model, &rest, c, 1.0);
            for (to, q) in [(Side::Left, pl), (Side::Right, 1.0 - pl)] {
                out.push((k as f64 / n * q, increments(c, from, to, red, blue, conv)));
            }
        }
    }
    out
}

/// Exact moments by summing over all single-ball moves.
pub fn single_step_moments_exact(counts: UrnCounts, model: &UrnModel, conv: Convention) -> StepMoments {
    let mv = moves(counts, model, conv);
    let mut m = StepMoments::default();
    for j in 0..4 {
        let mean: f64 = mv.iter().map(|(p, d)| p * d[j]).sum();
        let second: f64 = mv.iter().map(|(p, d)| p * d[j] * d[j]).sum();
        m.mean[j] = mean;
        m.var[j] = (second - mean * mean).max(0.0);
    }
    m
}

/// Monte Carlo estimate of the same moments from `trials` simulated moves
/// (the state itself is not advanced).
pub fn single_step_moments_mc<R: Rng + ?Sized>(
    counts: UrnCounts,
    model: &UrnModel,
    trials: u64,
    conv: Convention,
    rng: &mut R,
) -> MomentEstimate {
    let s = SplitCounts::full(counts, model);
    let (red, blue) = (model.params().red, model.params().blue);
    let mut sum = [0.0; 4];
    let mut sum2 = [0.0; 4];
    let mut sum3 = [0.0; 4];
    let mut sum4 = [0.0; 4];
    for _ in 0..trials {
        let (c, from) = s.pick(rng);
        let mut rest = s;
        rest.take(c, from);
        let pl = left_probability(model, &rest, c, 1.0);
        let to = if rng.random::<f64>() < pl { Side::Left } else { Side::Right };
        let d = increments(c, from, to, red, blue, conv);
        for j in 0..4 {
            sum[j] += d[j];
            sum2[j] += d[j] * d[j];
            sum3[j] += d[j] * d[j] * d[j];
            sum4[j] += d[j] * d[j] * d[j] * d[j];
        }
    }
    let n = trials.max(1) as f64;
    let mut moments = StepMoments::default();
    let mut se = StepMoments::default();
    for j in 0..4 {
        let m1 = sum[j] / n;
        let m2 = sum2[j] / n;
        let m3 = sum3[j] / n;
        let m4 = sum4[j] / n;
        let var = (m2 - m1 * m1).max(0.0);
        // Fourth central moment for the standard error of the variance.
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        moments.mean[j] = m1;
        moments.var[j] = var * n / (n - 1.0).max(1.0);
        se.mean[j] = (var / n).sqrt();
        se.var[j] = ((mu4 - var * var).max(0.0) / n).sqrt();
    }
    MomentEstimate {
        moments,
        se,
        trials,
        low_trials: trials < 1000,
    }
}

/// `f = N E[d_rem + d_add]`, `D = N^2 diag(V[d_rem + d_add])` for `x` and `y`
/// under the half-ball convention.
pub fn fokker_planck_coeffs(counts: UrnCounts, model: &UrnModel) -> FokkerPlanck {
    let mv = moves(counts, model, Convention::HalfBall);
    let n = model.params().n() as f64;
    let stat = |a: usize, b: usize| {
        let mean: f64 = mv.iter().map(|(p, d)| p * (d[a] + d[b])).sum();
        let second: f64 = mv.iter().map(|(p, d)| p * (d[a] + d[b]).powi(2)).sum();
        (mean, (second - mean * mean).max(0.0))
    };
    let (mx, vx) = stat(0, 1);
    let (my, vy) = stat(2, 3);
    FokkerPlanck {
        drift: [n * mx, n * my],
        diffusion: [[n * n * vx, 0.0], [0.0, n * n * vy]],
    }
}
