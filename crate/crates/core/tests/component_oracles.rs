use std::f64::consts::PI;

use subanneal_core::{ComponentPrior, Datum, NixPrior};

/// Composite Simpson rule on `[a, b]` with `m` (even) intervals.
fn simpson(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Marginal likelihood of `xs` under a normal model with a
/// normal-inverse-chi^2 prior, by 2-D quadrature over (log sigma^2, mu).
fn marginal_by_quadrature(xs: &[f64], mu0: f64, kappa0: f64, s2: f64, nu0: f64) -> f64 {
    let n = xs.len() as f64;
    let center = (kappa0 * mu0 + xs.iter().sum::<f64>()) / (kappa0 + n);
    let ln_inv_chi = |v: f64| {
        (nu0 / 2.0) * (nu0 / 2.0).ln() - ln_gamma(nu0 / 2.0) + (nu0 / 2.0) * s2.ln()
            - (nu0 / 2.0 + 1.0) * v.ln()
            - nu0 * s2 / (2.0 * v)
    };
    let ln_normal = |x: f64, m: f64, v: f64| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v);
    simpson(-8.0, 14.0, 6000, |u| {
        let v = u.exp();
        let half = 14.0 * (v / (kappa0 + n)).sqrt();
        let inner = simpson(center - half, center + half, 1200, |mu| {
            let mut l = ln_normal(mu, mu0, v / kappa0);
            for x in xs {
                l += ln_normal(*x, mu, v);
            }
            l.exp()
        });
        inner * ln_inv_chi(v).exp() * v
    })
}

#[test]
fn nix_predictive_matches_quadrature() {
    let (mu0, kappa0, s2, nu0) = (0.3, 0.8, 1.5, 3.0);
    let prior = ComponentPrior::normal_inv_chi_sq(NixPrior::new(mu0, kappa0, s2, nu0).unwrap());
    let data = [0.9, -0.4];
    let mut stats = prior.empty_stats();
    for x in data {
        stats.add(&Datum::Real(x));
    }
    let z = marginal_by_quadrature(&data, mu0, kappa0, s2, nu0);
    for x in [1.7, -2.5, 0.25, 6.0] {
        let mut ext = data.to_vec();
        ext.push(x);
        let want = (marginal_by_quadrature(&ext, mu0, kappa0, s2, nu0) / z).ln();
        let got = prior.log_predictive(&stats, &Datum::Real(x)).unwrap();
        assert!((got - want).abs() < 1e-6, "x = {x}: {got} vs {want}");
    }
    let got = prior.log_marginal(&stats);
    assert!((got - z.ln()).abs() < 1e-6, "marginal {got} vs {}", z.ln());
}

#[test]
fn nix_prior_predictive_matches_quadrature() {
    let (mu0, kappa0, s2, nu0) = (-1.0, 2.0, 0.5, 1.5);
    let prior = ComponentPrior::normal_inv_chi_sq(NixPrior::new(mu0, kappa0, s2, nu0).unwrap());
    for x in [-1.0, 0.4, -4.0] {
        let want = marginal_by_quadrature(&[x], mu0, kappa0, s2, nu0).ln();
        let got = prior.log_predictive(&prior.empty_stats(), &Datum::Real(x)).unwrap();
        assert!((got - want).abs() < 1e-6, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn beta_bernoulli_examples() {
    let prior = ComponentPrior::beta_bernoulli(1.0, 1.0).unwrap();
    let mut stats = prior.empty_stats();
    assert!((prior.log_predictive(&stats, &Datum::Bool(true)).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    for x in [true, true, false, true] {
        stats.add(&Datum::Bool(x));
    }
    let got = prior.log_predictive(&stats, &Datum::Bool(true)).unwrap();
    assert!((got - (4.0f64 / 6.0).ln()).abs() < 1e-15);
    assert!(prior.log_predictive(&stats, &Datum::Real(1.0)).is_err());
}
