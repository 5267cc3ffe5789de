use subanneal_core::math::log_sum_exp;
use subanneal_core::{Dataset, Datum, MixtureModel, PartitionState};

use crate::error::Result;

/// Log posterior-predictive probability of one row: the row's cluster is
/// marginalized in one step over every existing cluster and a new one, with
/// the Pitman-Yor seating weights.
pub fn row_log_predictive(state: &PartitionState, model: &MixtureModel, row: &[Datum]) -> Result<f64> {
    let scores = state.assign_scores(model, row)?;
    let total = state.n_assigned() as f64 + model.py.alpha();
    Ok(log_sum_exp(&scores) - total.ln())
}

/// Sum of [`row_log_predictive`] over the `test` rows of `data`.
pub fn heldout_log_score(state: &PartitionState, model: &MixtureModel, data: &Dataset, test: &[usize]) -> Result<f64> {
    let mut acc = 0.0;
    for &i in test {
        acc += row_log_predictive(state, model, data.row(i))?;
    }
    Ok(acc)
}
