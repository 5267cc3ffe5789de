//! Small numeric helpers shared by the samplers.

use rand::Rng;

pub use statrs::function::gamma::ln_gamma;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Normalizes log-weights into probabilities in place.
///
/// Returns `None` when every weight is `-inf` (or any is NaN).
pub fn normalize_log_weights(ws: &mut [f64]) -> Option<()> {
    let max = ws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut total = 0.0;
    for w in ws.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    if !(total.is_finite() && total > 0.0) {
        return None;
    }
    for w in ws.iter_mut() {
        *w /= total;
    }
    Some(())
}

/// Draws an index with probability proportional to `exp(ws[i])`.
///
/// The slice is overwritten with unnormalized linear weights. Returns `None`
/// if no entry has positive probability.
pub fn sample_log_weights<R: Rng + ?Sized>(ws: &mut [f64], rng: &mut R) -> Option<usize> {
    let max = ws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut total = 0.0;
    for w in ws.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, w) in ws.iter().enumerate() {
        if *w > 0.0 {
            if u < *w {
                return Some(i);
            }
            u -= *w;
            last_positive = i;
        }
    }
    // u can land a hair past the end through rounding.
    Some(last_positive)
}

/// Logistic sigmoid, stable for large |t|.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp(&[-1000.0, f64::NEG_INFINITY]);
        assert!((v + 1000.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_rejects_all_neg_inf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ws = [f64::NEG_INFINITY; 3];
        assert!(sample_log_weights(&mut ws, &mut rng).is_none());
    }

    #[test]
    fn sampler_never_picks_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let mut ws = [f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY];
            assert_eq!(sample_log_weights(&mut ws, &mut rng), Some(1));
        }
    }

    #[test]
    fn binomial_coefficients() {
        assert!((ln_binomial(5, 2) - 10f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(7, 0), 0.0);
    }

    #[test]
    fn sigmoid_symmetry_and_saturation() {
        assert_eq!(sigmoid(0.0), 0.5);
        for t in [-30.0, -2.5, 0.1, 7.0, 44.0] {
            assert!((sigmoid(t) + sigmoid(-t) - 1.0).abs() < 1e-15);
        }
        assert_eq!(sigmoid(1e6), 1.0);
        assert_eq!(sigmoid(-1e6), 0.0);
        assert!(sigmoid(f64::INFINITY) == 1.0);
    }
}
