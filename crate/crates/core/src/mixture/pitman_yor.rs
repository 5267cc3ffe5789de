use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::ln_gamma;

/// Two-parameter Chinese restaurant process. `discount == 0` is the CRP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitmanYorParams {
    alpha: f64,
    discount: f64,
}

impl PitmanYorParams {
    pub fn new(alpha: f64, discount: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "concentration must be positive and finite, got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::InvalidArgument(format!(
                "discount must lie in [0, 1), got {discount}"
            )));
        }
        Ok(Self { alpha, discount })
    }

    pub fn crp(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Unnormalized log-weight of joining an existing cluster of `size` members.
    #[inline]
    pub fn ln_existing_weight(&self, size: usize) -> f64 {
        (size as f64 - self.discount).ln()
    }

    /// Unnormalized log-weight of opening a new cluster when `n_clusters` exist.
    #[inline]
    pub fn ln_new_weight(&self, n_clusters: usize) -> f64 {
        (self.alpha + self.discount * n_clusters as f64).ln()
    }

    /// Log exchangeable partition probability of a partition with the given
    /// cluster sizes.
    pub fn ln_eppf<I>(&self, sizes: I) -> f64
    where
        I: IntoIterator<Item = usize>,
    {
        let (a, d) = (self.alpha, self.discount);
        let mut n = 0usize;
        let mut k = 0usize;
        let mut acc = 0.0;
        for size in sizes {
            if size == 0 {
                continue;
            }
            if k > 0 {
                acc += (a + d * k as f64).ln();
            }
            acc += if d == 0.0 {
                ln_gamma(size as f64)
            } else {
                ln_gamma(size as f64 - d) - ln_gamma(1.0 - d)
            };
            k += 1;
            n += size;
        }
        if n == 0 {
            return 0.0;
        }
        acc - (ln_gamma(a + n as f64) - ln_gamma(a + 1.0))
    }
}
