mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subanneal_core::hyper::alpha_conditional;
use subanneal_core::{
    gibbs_hyper_step, ComponentPrior, Dataset, FeatureGrid, GridAxis, HyperGrid, MixtureModel,
    PartitionState, PitmanYorParams,
};

fn model(alpha: f64) -> MixtureModel {
    MixtureModel::new(
        PitmanYorParams::crp(alpha).unwrap(),
        vec![ComponentPrior::beta_bernoulli(1.0, 1.0).unwrap()],
    )
}

fn within_4se(counts: &[u64], probs: &[f64], draws: u64) {
    for (c, p) in counts.iter().zip(probs) {
        let f = *c as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt().max(1e-12);
        assert!((f - p).abs() < 4.0 * se, "frequency {f} vs {p} (se {se})");
    }
}

#[test]
fn single_cell_grid_is_fixed() {
    let data = Dataset::booleans(&[true, false, true]);
    let mut m = model(0.3);
    let state = PartitionState::from_labels(&data, &m, &[Some(0), Some(1), Some(0)]).unwrap();
    let grid = HyperGrid::alpha_only(GridAxis::new(vec![2.5]).unwrap(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        gibbs_hyper_step(&state, &mut m, &grid, &mut rng).unwrap();
        assert_eq!(m.py.alpha(), 2.5);
    }
}

#[test]
fn symmetric_two_cell_grid_is_balanced() {
    // Both scales give the same likelihood when the cluster holds no data.
    let data = Dataset::booleans(&[true]);
    let mut m = model(1.0);
    let state = PartitionState::new(1, &m);
    let grid = HyperGrid {
        alpha: None,
        discount: None,
        features: vec![Some(FeatureGrid::Scale {
            scale: GridAxis::new(vec![0.5, 3.0]).unwrap(),
            base: vec![1.0, 1.0],
        })],
    };
    let _ = &data;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 100_000u64;
    let mut hits = [0u64; 2];
    for _ in 0..draws {
        gibbs_hyper_step(&state, &mut m, &grid, &mut rng).unwrap();
        match &m.priors()[0] {
            ComponentPrior::BetaBernoulli { a, .. } if *a == 0.5 => hits[0] += 1,
            _ => hits[1] += 1,
        }
    }
    within_4se(&hits, &[0.5, 0.5], draws);
}

#[test]
fn conditional_alpha_frequencies_match_exact() {
    let rows = vec![vec![true], vec![false], vec![true]];
    let data = Dataset::booleans(&[true, false, true]);
    let values = vec![0.1, 1.0, 10.0];
    let axis = GridAxis::new(values.clone()).unwrap();
    let grid = HyperGrid::alpha_only(axis.clone(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for labels in common::set_partitions(3) {
        let mut m = model(1.0);
        let opt: Vec<Option<usize>> = labels.iter().map(|l| Some(*l)).collect();
        let state = PartitionState::from_labels(&data, &m, &opt).unwrap();
        let mut exact: Vec<f64> = values
            .iter()
            .map(|a| common::joint_prob(&labels, &rows, *a, 0.0, 1.0, 1.0))
            .collect();
        let z: f64 = exact.iter().sum();
        exact.iter_mut().for_each(|p| *p /= z);
        let computed = alpha_conditional(&state, &m, &axis);
        for (c, e) in computed.iter().zip(&exact) {
            assert!((c - e).abs() < 1e-12, "{c} vs {e}");
        }
        let draws = 100_000u64;
        let mut hits = vec![0u64; values.len()];
        for _ in 0..draws {
            gibbs_hyper_step(&state, &mut m, &grid, &mut rng).unwrap();
            hits[values.iter().position(|v| *v == m.py.alpha()).unwrap()] += 1;
        }
        within_4se(&hits, &exact, draws);
        assert_eq!(state.canonical_labels(), opt);
    }
}

#[test]
fn joint_chain_alpha_marginal_matches_enumeration() {
    let rows = vec![vec![true], vec![false], vec![true]];
    let data = Dataset::booleans(&[true, false, true]);
    let values = vec![0.1, 1.0, 10.0];
    let grid = HyperGrid::alpha_only(GridAxis::new(values.clone()).unwrap(), 1);
    let mut exact: Vec<f64> = values
        .iter()
        .map(|a| {
            common::set_partitions(3)
                .iter()
                .map(|l| common::joint_prob(l, &rows, *a, 0.0, 1.0, 1.0))
                .sum()
        })
        .collect();
    let z: f64 = exact.iter().sum();
    exact.iter_mut().for_each(|p| *p /= z);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut m = model(1.0);
    let mut state = PartitionState::new(3, &m);
    state.draw_from_prior(&data, &m, &mut rng).unwrap();
    let batches = 200usize;
    let per_batch = 1_000usize;
    let mut batch_freq = vec![vec![0.0; values.len()]; batches];
    for b in batch_freq.iter_mut() {
        for _ in 0..per_batch {
            state.gibbs_sweep(&data, &m, &mut rng).unwrap();
            gibbs_hyper_step(&state, &mut m, &grid, &mut rng).unwrap();
            b[values.iter().position(|v| *v == m.py.alpha()).unwrap()] += 1.0 / per_batch as f64;
        }
    }
    for (j, e) in exact.iter().enumerate() {
        let xs: Vec<f64> = batch_freq.iter().map(|b| b[j]).collect();
        let mean = xs.iter().sum::<f64>() / batches as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!((mean - e).abs() < 4.0 * se, "alpha {}: {mean} vs {e} (se {se})", values[j]);
    }
}

#[test]
fn all_impossible_candidates_are_reported() {
    assert!(GridAxis::with_log_prior(vec![1.0, 2.0], vec![f64::NEG_INFINITY; 2]).is_err());
    let data = Dataset::booleans(&[true, true]);
    let mut m = model(1.0);
    let state = PartitionState::from_labels(&data, &m, &[Some(0), Some(0)]).unwrap();
    // A zero concentration is outside the legal domain, so every cell scores -inf.
    let grid = HyperGrid::alpha_only(GridAxis::new(vec![0.0, -1.0]).unwrap(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = gibbs_hyper_step(&state, &mut m, &grid, &mut rng);
    assert!(matches!(r, Err(subanneal_core::Error::DegenerateGrid(_))), "{r:?}");
    assert_eq!(m.py.alpha(), 1.0);
}
