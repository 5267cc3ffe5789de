use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random train/test split with `ceil(7N/8)` training rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl CvSplit {
    pub fn train_size(n: usize) -> usize {
        (7 * n).div_ceil(8)
    }

    pub fn new<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 rows to split, got {n}")));
        }
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let test = ids.split_off(Self::train_size(n));
        ids.sort_unstable();
        let mut test = test;
        test.sort_unstable();
        Ok(Self { train: ids, test })
    }
}
