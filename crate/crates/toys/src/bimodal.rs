//! Two-mode system with energy gap `gamma * N` and barrier `delta * N`.
//!
//! The mass `x` in the favoured mode relaxes toward `sigma(beta gamma N)` at
//! rate `exp(-beta delta N)`:
//!
//! `dx/dt = exp(-beta delta N) (sigma(beta gamma N) - x)`.
//!
//! The equation is scalar and linear in `x`, so constant pieces of a schedule
//! are integrated in closed form; other schedules use an adaptive
//! Dormand-Prince 5(4) integrator.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use subanneal_core::math::sigmoid;

pub const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-14;
const MAX_STEPS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BimodalParams {
    pub gamma: f64,
    pub delta: f64,
    pub n: f64,
}

impl BimodalParams {
    pub fn new(gamma: f64, delta: f64, n: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(gamma) && ok(delta) && ok(n)) {
            return Err(Error::InvalidArgument(format!(
                "gamma, delta and N must be positive and finite (got {gamma}, {delta}, {n})"
            )));
        }
        Ok(Self { gamma, delta, n })
    }

    /// Stationary mass of the favoured mode at `beta`.
    pub fn target(&self, beta: f64) -> f64 {
        sigmoid(beta * self.gamma * self.n)
    }

    /// Relaxation rate at `beta`.
    pub fn rate(&self, beta: f64) -> f64 {
        (-beta * self.delta * self.n).exp()
    }
}

pub fn dynamics_rhs(x: f64, beta: f64, params: &BimodalParams) -> f64 {
    params.rate(beta) * (params.target(beta) - x)
}

/// Inverse temperature as a function of time on `[0, T]`.
#[derive(Clone)]
pub enum BetaSchedule {
    Constant(f64),
    /// `beta(t) = t / T`.
    Linear,
    /// Constant `betas[i]` up to time `ends[i] * T`; `ends` increases to 1.
    Piecewise { ends: Vec<f64>, betas: Vec<f64> },
    /// Arbitrary `beta(t, T)`.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for BetaSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetaSchedule::Constant(b) => write!(f, "Constant({b})"),
            BetaSchedule::Linear => write!(f, "Linear"),
            BetaSchedule::Piecewise { ends, betas } => write!(f, "Piecewise({ends:?}, {betas:?})"),
            BetaSchedule::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl BetaSchedule {
    pub fn beta(&self, t: f64, horizon: f64) -> f64 {
        match self {
            BetaSchedule::Constant(b) => *b,
            BetaSchedule::Linear => t / horizon,
            BetaSchedule::Piecewise { ends, betas } => {
                let u = t / horizon;
                let i = ends.iter().position(|e| u <= *e).unwrap_or(ends.len() - 1);
                betas[i]
            }
            BetaSchedule::Custom(f) => f(t, horizon),
        }
    }
}

/// Exact solution over a piece of constant `beta` and length `dt`.
pub fn constant_piece(x: f64, beta: f64, dt: f64, params: &BimodalParams) -> f64 {
    let xs = params.target(beta);
    // x + (xs - x)(1 - exp(-k dt)), written to keep tiny rates accurate.
    x - (xs - x) * (-params.rate(beta) * dt).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: u64,
    pub rejected: u64,
}

/// Integrates from `x0` over `[0, horizon]` and returns `x(horizon)`.
pub fn integrate(params: &BimodalParams, schedule: &BetaSchedule, x0: f64, horizon: f64) -> Result<f64> {
    integrate_with_stats(params, schedule, x0, horizon).map(|r| r.0)
}

pub fn integrate_with_stats(
    params: &BimodalParams,
    schedule: &BetaSchedule,
    x0: f64,
    horizon: f64,
) -> Result<(f64, IntegrationStats)> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::InvalidArgument(format!("x0 must lie in [0, 1], got {x0}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("T must be finite and nonnegative, got {horizon}")));
    }
    if horizon == 0.0 {
        return Ok((x0, IntegrationStats::default()));
    }
    match schedule {
        BetaSchedule::Constant(b) => Ok((constant_piece(x0, *b, horizon, params), IntegrationStats::default())),
        BetaSchedule::Piecewise { ends, betas } => {
            if ends.is_empty()
                || ends.len() != betas.len()
                || ends.windows(2).any(|w| w[1] <= w[0])
                || ends[0] <= 0.0
                || (ends[ends.len() - 1] - 1.0).abs() > 1e-12
            {
                return Err(Error::InvalidArgument(
                    "piecewise schedule needs increasing ends in (0, 1] finishing at 1, one beta per piece".into(),
                ));
            }
            let mut x = x0;
            let mut start = 0.0;
            for (e, b) in ends.iter().zip(betas) {
                x = constant_piece(x, *b, (e - start) * horizon, params);
                start = *e;
            }
            Ok((x, IntegrationStats::default()))
        }
        _ => dormand_prince(params, schedule, x0, horizon),
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dormand_prince(
    params: &BimodalParams,
    schedule: &BetaSchedule,
    x0: f64,
    horizon: f64,
) -> Result<(f64, IntegrationStats)> {
    let f = |t: f64, x: f64| dynamics_rhs(x, schedule.beta(t, horizon), params);
    let mut stats = IntegrationStats::default();
    let mut t = 0.0;
    let mut x = x0;
    // The rate never exceeds 1, so unit steps resolve the fastest dynamics.
    let mut h = horizon.min(1e-3);
    let mut k = [0.0; 7];
    k[0] = f(t, x);
    while t < horizon {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Integration(format!(
                "step limit reached at t = {t} of {horizon} (tolerance {RTOL} not met)"
            )));
        }
        if t + h > horizon {
            h = horizon - t;
        }
        for i in 1..7 {
            let mut xi = x;
            for j in 0..i {
                xi += h * A[i][j] * k[j];
            }
            k[i] = f(t + C[i] * h, xi);
        }
        let mut x5 = x;
        let mut x4 = x;
        for i in 0..7 {
            x5 += h * B5[i] * k[i];
            x4 += h * B4[i] * k[i];
        }
        let scale = ATOL + RTOL * x.abs().max(x5.abs());
        let err = ((x5 - x4) / scale).abs();
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
        }
        if err <= 1.0 {
            t += h;
            x = x5;
            // First-same-as-last: the last stage is the next first stage.
            k[0] = k[6];
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < horizon * 1e-15 && t < horizon {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok((x.clamp(0.0, 1.0), stats))
}

/// Distance of `x` from the full-data stationary mass.
pub fn tvd_final(x: f64, params: &BimodalParams) -> f64 {
    (x - params.target(1.0)).abs()
}

/// Time for the constant `beta = 1` dynamics to bring the TVD from its value
/// at `x0` down to `eps`, with its natural logarithm for cases where the
/// time itself overflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColdTime {
    pub time: f64,
    pub log_time: f64,
}

pub fn cold_time_to_eps(params: &BimodalParams, eps: f64, x0: f64) -> Result<ColdTime> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    let gap = (x0 - params.target(1.0)).abs();
    if gap <= eps {
        return Ok(ColdTime {
            time: 0.0,
            log_time: f64::NEG_INFINITY,
        });
    }
    let l = (gap / eps).ln();
    let log_time = params.delta * params.n + l.ln();
    Ok(ColdTime {
        time: (params.delta * params.n).exp() * l,
        log_time,
    })
}

/// Duration of the linear schedule that suffices for TVD at most `eps` from
/// any initial state:
/// `N delta log(2/eps) / ((eps/2)^(delta/gamma) - exp(-N delta))`.
pub fn anneal_bound(params: &BimodalParams, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    let nd = params.n * params.delta;
    let lhs = (eps / 2.0).powf(params.delta / params.gamma);
    let rhs = (-nd).exp();
    if lhs <= rhs {
        return Err(Error::Domain(format!(
            "(eps/2)^(delta/gamma) = {lhs:.3e} does not exceed exp(-N delta) = {rhs:.3e}"
        )));
    }
    Ok(nd * (2.0 / eps).ln() / (lhs - rhs))
}

/// `log tau(t)` for the linear schedule of length `horizon`, where
/// `tau(t) = exp(-(T / (N delta)) [exp(-N delta t / T) - exp(-N delta)])`
/// is the integrating factor `exp(-int_t^T rate)`. It rises to 1 at `t = T`.
pub fn log_natural_coordinate(t: f64, params: &BimodalParams, horizon: f64) -> f64 {
    let nd = params.n * params.delta;
    -(horizon / nd) * ((-nd * t / horizon).exp() - (-nd).exp())
}

pub fn natural_coordinate(t: f64, params: &BimodalParams, horizon: f64) -> f64 {
    log_natural_coordinate(t, params, horizon).exp()
}

/// The linear schedule expressed in the natural coordinate:
/// `beta(tau) = -log(exp(-N delta) - (N delta / T) log tau) / (N delta)`.
pub fn beta_of_log_tau(log_tau: f64, params: &BimodalParams, horizon: f64) -> f64 {
    let nd = params.n * params.delta;
    -((-nd).exp() - (nd / horizon) * log_tau).ln() / nd
}

/// Parameter sweep over `(gamma, delta, N, eps)` with the linear schedule of
/// length [`anneal_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub ns: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub x0: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gammas: vec![0.5, 1.0, 2.0],
            deltas: vec![0.1, 0.3, 0.6],
            ns: vec![50.0, 100.0, 200.0],
            epsilons: vec![0.1, 0.05, 0.01],
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub delta: f64,
    pub n: f64,
    pub eps: f64,
    /// `None` when the bound's hypothesis fails.
    pub t_anneal: Option<f64>,
    pub x_final: Option<f64>,
    pub tvd: Option<f64>,
    pub cold_time: f64,
    pub log_cold_time: f64,
}

pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &gamma in &cfg.gammas {
        for &delta in &cfg.deltas {
            for &n in &cfg.ns {
                let params = BimodalParams::new(gamma, delta, n)?;
                for &eps in &cfg.epsilons {
                    let cold = cold_time_to_eps(&params, eps, cfg.x0)?;
                    let (t_anneal, x_final, tvd) = match anneal_bound(&params, eps) {
                        Ok(t) => {
                            let x = integrate(&params, &BetaSchedule::Linear, cfg.x0, t)?;
                            (Some(t), Some(x), Some(tvd_final(x, &params)))
                        }
                        Err(Error::Domain(_)) => (None, None, None),
                        Err(e) => return Err(e),
                    };
                    rows.push(SweepRow {
                        gamma,
                        delta,
                        n,
                        eps,
                        t_anneal,
                        x_final,
                        tvd,
                        cold_time: cold.time,
                        log_cold_time: cold.log_time,
                    });
                }
            }
        }
    }
    Ok(rows)
}
