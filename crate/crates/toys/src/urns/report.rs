//! Checks the closed-form single-step moments of the continuum limit against
//! the exact moment oracle.
//!
//! Each reference formula is evaluated at a handful of intrinsic states for a
//! growing number of balls, and the relative error against the exact moment
//! is tracked. A formula is reported as matching when the error vanishes as N
//! grows. The `alpha` corrections are compared with the `alpha`-attributable
//! part of the exact moment, `M(alpha) - M(alpha -> 0)`, scaled by the power
//! of N the formula carries.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::model::{UrnCounts, UrnModel, UrnModelParams};
use super::moments::{single_step_moments_exact, Convention, StepMoments};

const TINY_ALPHA: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub formula: String,
    pub convention: Convention,
    /// `(N, worst relative error over the states)`.
    pub errors: Vec<(u32, f64)>,
    pub matches: bool,
}

#[derive(Debug, Clone, Copy)]
struct Intrinsic {
    n: f64,
    x: f64,
    r: f64,
    r1: f64,
    r2: f64,
    n1: f64,
    n2: f64,
}

fn intrinsic(c: UrnCounts, p: &UrnModelParams) -> Intrinsic {
    let n = p.n() as f64;
    let (r1, b1) = (c.r1 as f64 / n, c.b1 as f64 / n);
    let r2 = (p.red - c.r1) as f64 / n;
    let b2 = (p.blue - c.b1) as f64 / n;
    Intrinsic {
        n,
        x: c.r1 as f64 / p.red as f64,
        r: p.r(),
        r1,
        r2,
        n1: r1 + b1,
        n2: r2 + b2,
    }
}

type Printed = Box<dyn Fn(&Intrinsic, f64) -> f64>;

struct Target {
    name: String,
    /// Exact counterpart from full moments: `(moments at alpha, moments at ~0)`.
    exact: Box<dyn Fn(&StepMoments, &StepMoments, f64) -> f64>,
    printed: Printed,
}

fn targets() -> Vec<Target> {
    let mut t = vec![
        Target {
            name: "E[dx_rem] = (1 - 2x) / (2N)".into(),
            exact: Box::new(|m, _, _| m.mean[0]),
            printed: Box::new(|s, _| (1.0 - 2.0 * s.x) / (2.0 * s.n)),
        },
        Target {
            name: "V[dx_rem] = x(1 - x) / (r N^2)".into(),
            exact: Box::new(|m, _, _| m.var[0]),
            printed: Box::new(|s, _| s.x * (1.0 - s.x) / (s.r * s.n * s.n)),
        },
        Target {
            name: "E[dx_add] leading: (n2 r1 - n1 r2) / (2N (n2 r1 + n1 r2))".into(),
            exact: Box::new(|m, _, _| m.mean[1]),
            printed: Box::new(|s, _| {
                (s.n2 * s.r1 - s.n1 * s.r2) / (2.0 * s.n * (s.n2 * s.r1 + s.n1 * s.r2))
            }),
        },
        Target {
            name: "V[dx_add] leading: r n2 r1 n1 r2 / (N^2 (n2 r1 + n1 r2)^2)".into(),
            exact: Box::new(|m, _, _| m.var[1]),
            printed: Box::new(|s, _| {
                let d = s.n2 * s.r1 + s.n1 * s.r2;
                s.r * s.n2 * s.r1 * s.n1 * s.r2 / (s.n * s.n * d * d)
            }),
        },
        Target {
            name: "V[dx_add] alpha term: alpha/N^3 [n1 n2 / (x n1 + (1-x) n2)^2 + 2 / (x n1 + (1-x) n2)]"
                .into(),
            exact: Box::new(|m, m0, _| m.var[1] - m0.var[1]),
            printed: Box::new(|s, a| {
                let d = s.x * s.n1 + (1.0 - s.x) * s.n2;
                a / s.n.powi(3) * (s.n1 * s.n2 / (d * d) + 2.0 / d)
            }),
        },
    ];
    let readings: [(&str, fn(&Intrinsic) -> f64); 4] = [
        ("l = 1 - r", |s| 1.0 - s.r),
        ("l = 1", |_| 1.0),
        ("l = n1", |s| s.n1),
        ("l = n2", |s| s.n2),
    ];
    for (label, l) in readings {
        t.push(Target {
            name: format!("E[dx_add] alpha term: alpha/N^2 * 2 n1 / (x r + (1-x) l), {label}"),
            exact: Box::new(|m, m0, _| m.mean[1] - m0.mean[1]),
            printed: Box::new(move |s, a| a / (s.n * s.n) * 2.0 * s.n1 / (s.x * s.r + (1.0 - s.x) * l(s))),
        });
    }
    t
}

/// Intrinsic states `(x, y)` at which formulas are compared.
pub const REPORT_STATES: [(f64, f64); 4] = [(0.3, 0.6), (0.7, 0.2), (0.55, 0.85), (0.12, 0.4)];
pub const REPORT_SIZES: [u32; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Runs every formula check with red fraction 2/5, mixing probability `p`
/// and Beta hyperparameter `alpha`.
pub fn check_formulas(p: f64, alpha: f64) -> Vec<FormulaCheck> {
    let mut out = Vec::new();
    for conv in [Convention::HalfBall, Convention::WholeBall] {
        for t in targets() {
            let mut errors = Vec::new();
            for &n in &REPORT_SIZES {
                let red = n * 2 / 5;
                let blue = n - red;
                let params = UrnModelParams::new(p, alpha, red, blue).expect("valid report parameters");
                let params0 = UrnModelParams { alpha_beta: TINY_ALPHA, ..params };
                let (model, model0) = (UrnModel::new(params), UrnModel::new(params0));
                let mut worst: f64 = 0.0;
                for &(x, y) in &REPORT_STATES {
                    let c = UrnCounts::new((x * red as f64).round() as u32, (y * blue as f64).round() as u32);
                    let m = single_step_moments_exact(c, &model, conv);
                    let m0 = single_step_moments_exact(c, &model0, conv);
                    let exact = (t.exact)(&m, &m0, alpha);
                    let printed = (t.printed)(&intrinsic(c, &params), alpha);
                    let err = if exact == 0.0 && printed == 0.0 {
                        0.0
                    } else {
                        (exact - printed).abs() / exact.abs().max(printed.abs())
                    };
                    worst = worst.max(err);
                }
                errors.push((n, worst));
            }
            let last = errors.last().map_or(f64::INFINITY, |e| e.1);
            out.push(FormulaCheck {
                formula: t.name,
                convention: conv,
                errors,
                matches: last < 1e-2,
            });
        }
    }
    out
}

/// Plain-text report of [`check_formulas`] at `p = 1/2` (the reference
/// formulas carry no `p`) and at the given `p`.
pub fn moments_report(p: f64, alpha: f64) -> String {
    let mut s = String::new();
    writeln!(s, "Single-step moment formulas versus the exact oracle").unwrap();
    writeln!(s, "red fraction 0.4, alpha = {alpha}; worst relative error over states {REPORT_STATES:?}").unwrap();
    writeln!(s, "A formula matches when the error at N = 10^6 is below 1e-2.").unwrap();
    for pp in [0.5, p] {
        writeln!(s).unwrap();
        writeln!(s, "== p = {pp} ==").unwrap();
        for c in check_formulas(pp, alpha) {
            let errs: Vec<String> = c.errors.iter().map(|(n, e)| format!("N={n}: {e:.3e}")).collect();
            writeln!(
                s,
                "[{}] {:?}: {}\n    {}",
                if c.matches { "MATCH" } else { "DIFFERS" },
                c.convention,
                c.formula,
                errs.join(", ")
            )
            .unwrap();
        }
        if pp == p {
            break;
        }
    }
    s
}
