use proptest::prelude::*;
use rand::Rng;
use std::sync::Arc;
use subanneal_core::SeedStreams;
use subanneal_toys::bimodal::*;
use subanneal_toys::Error;

fn params(g: f64, d: f64, n: f64) -> BimodalParams {
    BimodalParams::new(g, d, n).unwrap()
}

/// Classical fixed-step RK4 on the linear schedule.
fn rk4_linear(p: &BimodalParams, x0: f64, horizon: f64, steps: usize) -> f64 {
    let h = horizon / steps as f64;
    let f = |t: f64, x: f64| dynamics_rhs(x, t / horizon, p);
    let mut x = x0;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, x);
        let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// `x(T) = x0 tau0 + int_{tau0}^1 sigma(beta(tau) gamma N) dtau`, integrated
/// by Simpson's rule in `u = log tau`.
fn natural_quadrature(p: &BimodalParams, x0: f64, horizon: f64, intervals: usize) -> f64 {
    let u0 = log_natural_coordinate(0.0, p, horizon);
    let g = |u: f64| sigmoid(beta_of_log_tau(u, p, horizon) * p.gamma * p.n) * u.exp();
    let h = -u0 / intervals as f64;
    let mut acc = g(u0) + g(0.0);
    for i in 1..intervals {
        acc += g(u0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    x0 * u0.exp() + acc * h / 3.0
}

#[test]
fn sigmoid_examples() {
    assert_eq!(sigmoid(0.0), 0.5);
    assert_eq!(sigmoid(1e6), 1.0);
    assert_eq!(sigmoid(-1e6), 0.0);
    let mut rng = SeedStreams::new(0).stream("sig", 0);
    for _ in 0..1000 {
        let t: f64 = rng.random_range(-50.0..50.0);
        assert!((sigmoid(t) + sigmoid(-t) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn rhs_examples() {
    let p = params(2.0, 1.0, 10.0);
    assert_eq!(dynamics_rhs(sigmoid(20.0), 1.0, &p), 0.0);
    assert!((dynamics_rhs(0.2, 0.0, &p) - 0.3).abs() < 1e-15);
    let p = params(0.1, 0.1, 10.0);
    assert!((dynamics_rhs(0.0, 1.0, &p) - (-1.0f64).exp() * sigmoid(1.0)).abs() < 1e-15);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(BimodalParams::new(0.0, 1.0, 1.0).is_err());
    assert!(BimodalParams::new(1.0, -1.0, 1.0).is_err());
    let p = params(1.0, 1.0, 10.0);
    assert!(integrate(&p, &BetaSchedule::Linear, 1.5, 1.0).is_err());
    assert!(integrate(&p, &BetaSchedule::Linear, 0.5, -1.0).is_err());
    assert!(cold_time_to_eps(&p, 0.0, 0.0).is_err());
}

#[test]
fn constant_schedule_matches_closed_form() {
    let p = params(1.0, 0.3, 20.0);
    let xs = sigmoid(20.0);
    for (x0, t) in [(0.0, 1.0), (0.3, 100.0), (1.0, 5000.0)] {
        let expected = xs + (x0 - xs) * (-t * (-6.0f64).exp()).exp();
        let got = integrate(&p, &BetaSchedule::Constant(1.0), x0, t).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
    }
}

#[test]
fn zero_horizon_keeps_the_initial_state() {
    let p = params(1.0, 0.3, 20.0);
    assert_eq!(integrate(&p, &BetaSchedule::Linear, 0.25, 0.0).unwrap(), 0.25);
    let x = integrate(&p, &BetaSchedule::Linear, 0.25, 1e-9).unwrap();
    assert!((x - 0.25).abs() < 1e-9);
}

#[test]
fn linear_schedule_matches_rk4_reference() {
    let p = params(2.0, 1.0, 10.0);
    let x = integrate(&p, &BetaSchedule::Linear, 0.0, 1e4).unwrap();
    let reference = rk4_linear(&p, 0.0, 1e4, 400_000);
    assert!((x - reference).abs() < 1e-8, "{x} vs {reference}");
}

#[test]
fn linear_schedule_matches_natural_coordinate_quadrature() {
    for (g, d, n, t) in [(2.0, 1.0, 10.0, 1e4), (1.0, 0.3, 50.0, 3e4), (0.5, 0.1, 100.0, 2e3)] {
        let p = params(g, d, n);
        for x0 in [0.0, 0.7] {
            let x = integrate(&p, &BetaSchedule::Linear, x0, t).unwrap();
            let q = natural_quadrature(&p, x0, t, 200_000);
            assert!((x - q).abs() < 1e-8, "({g}, {d}, {n}): {x} vs {q}");
        }
    }
}

#[test]
fn custom_linear_schedule_agrees_with_builtin() {
    let p = params(1.0, 0.5, 20.0);
    let custom = BetaSchedule::Custom(Arc::new(|t, horizon| t / horizon));
    let a = integrate(&p, &custom, 0.1, 500.0).unwrap();
    let b = integrate(&p, &BetaSchedule::Linear, 0.1, 500.0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn piecewise_schedule_composes_constant_pieces() {
    let p = params(1.0, 0.2, 30.0);
    let sched = BetaSchedule::Piecewise {
        ends: vec![0.25, 0.5, 1.0],
        betas: vec![0.2, 0.6, 1.0],
    };
    let x = integrate(&p, &sched, 0.0, 400.0).unwrap();
    let mut y = integrate(&p, &BetaSchedule::Constant(0.2), 0.0, 100.0).unwrap();
    y = integrate(&p, &BetaSchedule::Constant(0.6), y, 100.0).unwrap();
    y = integrate(&p, &BetaSchedule::Constant(1.0), y, 200.0).unwrap();
    assert!((x - y).abs() < 1e-15);
    // The same schedule through the adaptive integrator.
    let custom = BetaSchedule::Custom(Arc::new(|t, horizon| {
        let u = t / horizon;
        if u <= 0.25 {
            0.2
        } else if u <= 0.5 {
            0.6
        } else {
            1.0
        }
    }));
    let z = integrate(&p, &custom, 0.0, 400.0).unwrap();
    assert!((x - z).abs() < 1e-6, "{x} vs {z}");
    let bad = BetaSchedule::Piecewise {
        ends: vec![0.5, 0.4],
        betas: vec![1.0, 1.0],
    };
    assert!(integrate(&p, &bad, 0.0, 1.0).is_err());
}

#[test]
fn constant_beta_converges_to_its_fixed_point() {
    let p = params(0.5, 0.1, 40.0);
    for beta in [0.0, 0.3, 1.0] {
        let half_life = (p.delta * p.n * beta).exp() * std::f64::consts::LN_2;
        let target = sigmoid(beta * p.gamma * p.n);
        let e1 = (integrate(&p, &BetaSchedule::Constant(beta), 0.0, 10.0 * half_life).unwrap() - target).abs();
        let e2 = (integrate(&p, &BetaSchedule::Constant(beta), 0.0, 11.0 * half_life).unwrap() - target).abs();
        assert!((e2 / e1 - 0.5).abs() < 1e-6, "beta {beta}: {e1} -> {e2}");
    }
}

#[test]
fn cold_tvd_is_nonincreasing() {
    let p = params(1.0, 0.2, 25.0);
    let mut last = f64::INFINITY;
    let mut x = 0.0;
    for _ in 0..200 {
        x = integrate(&p, &BetaSchedule::Constant(1.0), x, 50.0).unwrap();
        let t = tvd_final(x, &p);
        assert!(t <= last);
        last = t;
    }
}

#[test]
fn cold_time_reaches_eps_exactly() {
    let p = params(1.0, 0.3, 40.0);
    for eps in [0.1, 0.05, 0.01] {
        let cold = cold_time_to_eps(&p, eps, 0.0).unwrap();
        let expected = (12.0f64).exp() * (sigmoid(40.0) / eps).ln();
        assert!((cold.time / expected - 1.0).abs() < 1e-12);
        assert!((cold.log_time - expected.ln()).abs() < 1e-12);
        let x = integrate(&p, &BetaSchedule::Constant(1.0), 0.0, cold.time).unwrap();
        assert!((tvd_final(x, &p) - eps).abs() < 1e-9);
    }
    let huge = cold_time_to_eps(&params(1.0, 1.0, 1000.0), 0.01, 0.0).unwrap();
    assert!(huge.time.is_infinite() && (huge.log_time - (1000.0 + (100.0f64).ln().ln())).abs() < 1e-9);
    assert_eq!(cold_time_to_eps(&p, 0.1, 1.0).unwrap().time, 0.0);
}

#[test]
fn anneal_bound_suffices_across_the_default_sweep() {
    let rows = sweep(&SweepConfig::default()).unwrap();
    assert_eq!(rows.len(), 81);
    let mut checked = 0;
    for r in rows {
        if let Some(tvd) = r.tvd {
            assert!(tvd <= r.eps, "{r:?}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn anneal_bound_names_the_failed_hypothesis() {
    match anneal_bound(&params(0.1, 1.0, 2.0), 0.01) {
        Err(Error::Domain(msg)) => assert!(msg.contains("exp(-N delta)")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn annealing_is_exponentially_faster_than_cold_inference() {
    for (g, d, n) in [(1.0, 1.0, 20.0), (0.5, 0.5, 60.0), (2.0, 0.4, 50.0), (1.0, 1.0, 30.0)] {
        let p = params(g, d, n);
        let bound = anneal_bound(&p, 0.05).unwrap();
        let cold = cold_time_to_eps(&p, 0.05, 0.0).unwrap();
        assert!(bound < 1e-4 * cold.time, "({g}, {d}, {n}): {bound} vs {}", cold.time);
    }
}

#[test]
fn natural_coordinate_endpoints() {
    let p = params(1.0, 0.5, 20.0);
    assert!((natural_coordinate(1e3, &p, 1e3) - 1.0).abs() < 1e-15);
    let t0 = natural_coordinate(0.0, &p, 1e3);
    assert!((t0.ln() + 1e3 / 10.0 * (1.0 - (-10.0f64).exp())).abs() < 1e-10);
}

#[test]
fn natural_coordinate_round_trips() {
    let mut rng = SeedStreams::new(11).stream("tau", 0);
    for _ in 0..1000 {
        let p = params(
            rng.random_range(0.1..3.0),
            rng.random_range(0.05..1.0),
            rng.random_range(5.0..300.0),
        );
        let horizon = 10f64.powf(rng.random_range(1.0..6.0));
        let u: f64 = rng.random();
        let lt = log_natural_coordinate(u * horizon, &p, horizon);
        let back = beta_of_log_tau(lt, &p, horizon);
        assert!((back - u).abs() < 1e-10, "{p:?} T={horizon} u={u}: {back}");
        let direct = natural_coordinate(u * horizon, &p, horizon);
        if direct > 0.0 {
            assert!((direct.ln() - lt).abs() < 1e-9 * lt.abs().max(1.0));
        }
    }
}

proptest! {
    #[test]
    fn integration_stays_in_the_unit_interval(g in 0.1f64..3.0, d in 0.05f64..1.0, n in 1.0f64..200.0,
                                             x0 in 0.0f64..=1.0, lt in 0.0f64..5.0) {
        let p = params(g, d, n);
        let x = integrate(&p, &BetaSchedule::Linear, x0, 10f64.powf(lt)).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
    }
}
