//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

/// Every set partition of `n` items as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            if i == 0 && l > 0 {
                break;
            }
            labels[i] = l;
            rec(i + 1, if i == 0 { 0 } else { max.max(l) }, labels, out);
        }
    }
    if n > 0 {
        rec(0, 0, &mut labels, &mut out);
    } else {
        out.push(Vec::new());
    }
    out
}

/// Relabels by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut g = vec![Vec::new(); k];
    for (i, l) in labels.iter().enumerate() {
        g[*l].push(i);
    }
    g.retain(|v| !v.is_empty());
    g
}

/// Pitman-Yor partition probability by sequential seating, as a plain
/// product of ratios.
pub fn py_partition_prob(labels: &[usize], alpha: f64, d: f64) -> f64 {
    let mut sizes: Vec<usize> = Vec::new();
    let mut p = 1.0;
    for (i, l) in canonical(labels).iter().enumerate() {
        let k = sizes.len();
        if *l == k {
            p *= (alpha + d * k as f64) / (alpha + i as f64);
            sizes.push(1);
        } else {
            p *= (sizes[*l] as f64 - d) / (alpha + i as f64);
            sizes[*l] += 1;
        }
    }
    p
}

/// Beta-Bernoulli marginal of a sequence by the chain rule.
pub fn beta_bernoulli_marginal(xs: &[bool], a: f64, b: f64) -> f64 {
    let (mut h, mut t) = (0.0, 0.0);
    let mut p = 1.0;
    for x in xs {
        if *x {
            p *= (a + h) / (a + b + h + t);
            h += 1.0;
        } else {
            p *= (b + t) / (a + b + h + t);
            t += 1.0;
        }
    }
    p
}

/// Joint probability of a partition and boolean data (one or more features)
/// under a Pitman-Yor mixture of Beta-Bernoulli components.
pub fn joint_prob(labels: &[usize], rows: &[Vec<bool>], alpha: f64, d: f64, a: f64, b: f64) -> f64 {
    let mut p = py_partition_prob(labels, alpha, d);
    let n_feat = rows.first().map_or(0, |r| r.len());
    for g in groups(labels) {
        for f in 0..n_feat {
            let xs: Vec<bool> = g.iter().map(|&i| rows[i][f]).collect();
            p *= beta_bernoulli_marginal(&xs, a, b);
        }
    }
    p
}

/// Exact posterior over partitions (in `set_partitions` order).
pub fn posterior(rows: &[Vec<bool>], alpha: f64, d: f64, a: f64, b: f64) -> (Vec<Vec<usize>>, Vec<f64>) {
    let parts = set_partitions(rows.len());
    let mut ps: Vec<f64> = parts.iter().map(|l| joint_prob(l, rows, alpha, d, a, b)).collect();
    let z: f64 = ps.iter().sum();
    ps.iter_mut().for_each(|p| *p /= z);
    (parts, ps)
}

pub fn tvd(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
