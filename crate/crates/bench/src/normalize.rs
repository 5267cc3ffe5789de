use std::collections::HashMap;

/// Shifts and scales `scores` to zero mean and unit (population) variance.
/// Returns all zeros and `false` when the scores have no spread.
pub fn normalize_scores(scores: &[f64]) -> (Vec<f64>, bool) {
    if scores.is_empty() {
        return (Vec::new(), true);
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 1e-12 * mean.abs().max(1.0)) {
        log::warn!("scores have zero variance; normalizing to zeros");
        return (vec![0.0; scores.len()], false);
    }
    (scores.iter().map(|s| (s - mean) / sd).collect(), true)
}

/// Normalizes within each dataset across every run of every strategy.
pub fn normalize_by_dataset(datasets: &[String], scores: &[f64]) -> Vec<f64> {
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, d) in datasets.iter().enumerate() {
        groups.entry(d).or_default().push(i);
    }
    let mut out = vec![0.0; scores.len()];
    for ids in groups.values() {
        let (z, _) = normalize_scores(&ids.iter().map(|&i| scores[i]).collect::<Vec<_>>());
        for (&i, v) in ids.iter().zip(z) {
            out[i] = v;
        }
    }
    out
}
