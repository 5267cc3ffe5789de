use subanneal_bench::score::row_log_predictive;
use subanneal_bench::*;
use subanneal_core::math::log_sum_exp;
use subanneal_core::{
    AnnealSchedule, Budget, ComponentPrior, Dataset, Datum, MixtureModel, PartitionState, PitmanYorParams,
    RunOptions, SeedStreams, Strategy,
};

fn one_cluster(xs: &[bool], alpha: f64) -> (Dataset, MixtureModel, PartitionState) {
    let data = Dataset::booleans(xs);
    let model = MixtureModel::new(
        PitmanYorParams::crp(alpha).unwrap(),
        vec![ComponentPrior::beta_bernoulli(1.0, 1.0).unwrap()],
    );
    let state = PartitionState::from_labels(&data, &model, &vec![Some(0); xs.len()]).unwrap();
    (data, model, state)
}

#[test]
fn single_cluster_score_is_the_cluster_predictive() {
    // Six heads in eight flips under a uniform prior predict heads with 0.7.
    let (_, model, state) = one_cluster(&[true, true, true, true, true, true, false, false], 1e-10);
    let s = row_log_predictive(&state, &model, &[Datum::Bool(true)]).unwrap();
    assert!((s - 0.7f64.ln()).abs() < 1e-9, "{s}");
}

#[test]
fn scores_add_over_test_rows() {
    let xs = [true, false, true, true, false, true];
    let (data, model, state) = one_cluster(&xs[..4], 0.5);
    let full = Dataset::booleans(&xs);
    let both = heldout_log_score(&state, &model, &full, &[4, 5]).unwrap();
    let a = heldout_log_score(&state, &model, &full, &[4]).unwrap();
    let b = heldout_log_score(&state, &model, &full, &[5]).unwrap();
    assert!((both - (a + b)).abs() < 1e-12);
    assert_eq!(data.n_rows(), 4);
}

#[test]
fn score_matches_joint_probability_ratios() {
    // Train on four points in two clusters; score a fifth by adding it to
    // each cluster (or a new one) and comparing joint probabilities.
    let xs = [true, true, false, true, false];
    let data = Dataset::booleans(&xs);
    let model = MixtureModel::new(
        PitmanYorParams::new(0.8, 0.3).unwrap(),
        vec![ComponentPrior::beta_bernoulli(0.7, 1.3).unwrap()],
    );
    let labels = [Some(0), Some(0), Some(1), Some(0), None];
    let state = PartitionState::from_labels(&data, &model, &labels).unwrap();
    let base = state.joint_log_prob(&model);
    let mut terms = Vec::new();
    let targets: Vec<Option<usize>> = state.cluster_ids().iter().map(|k| Some(*k)).chain([None]).collect();
    for target in targets {
        let mut s = state.clone();
        s.place(&data, 4, target).unwrap();
        terms.push(s.joint_log_prob(&model) - base);
    }
    let oracle = log_sum_exp(&terms);
    let got = heldout_log_score(&state, &model, &data, &[4]).unwrap();
    assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
}

#[test]
fn generating_mixture_scores_at_least_as_well_as_a_trained_model() {
    let cfg = SynthConfig {
        rows: 3000,
        ..Default::default()
    };
    let s = synth_dataset(&cfg, 1).unwrap();
    let data = &s.dataset;
    let split = CvSplit::new(data.n_rows(), &mut SeedStreams::new(1).stream("split", 0)).unwrap();
    let train = data.subset(&split.train);
    let model = MixtureModel::default_for(&train, PitmanYorParams::crp(1.0).unwrap());
    let sched = AnnealSchedule::build(Strategy::AnnealSubsample, train.n_rows(), 2).unwrap();
    let mut rng = SeedStreams::new(1).stream("fit", 0);
    let out = subanneal_core::run(&sched, &train, model, None, &mut rng, Budget::unlimited(), &RunOptions::default())
        .unwrap();
    let trained = heldout_log_score(&out.state, &out.model, data, &split.test).unwrap();
    let truth: f64 = split.test.iter().map(|&i| s.truth.log_density(data.row(i))).sum();
    // Allow a few nats of sampling slack per hundred test rows.
    assert!(truth + 0.03 * split.test.len() as f64 >= trained, "truth {truth} vs trained {trained}");
    // Clustering must beat lumping every training row together.
    let lumped = PartitionState::from_labels(&train, &out.model, &vec![Some(0); train.n_rows()]).unwrap();
    let baseline = heldout_log_score(&lumped, &out.model, data, &split.test).unwrap();
    assert!(trained > baseline, "trained {trained} vs one cluster {baseline}");
}

fn small_manifest(strategy: &str, budget: BudgetSpec, data: &Dataset) -> RunManifest {
    RunManifest {
        strategy: strategy.into(),
        budget,
        seed: 3,
        chain: 1,
        dataset_fingerprint: fingerprint(data),
        config: InferenceConfig {
            grid_points: 7,
            discount_points: 4,
            ..Default::default()
        },
    }
}

#[test]
fn assignment_budgeted_runs_are_bit_exact() {
    let data = synth_dataset(
        &SynthConfig {
            rows: 300,
            ..Default::default()
        },
        2,
    )
    .unwrap()
    .dataset;
    for strategy in ["prior-gibbs", "seq-gibbs", "anneal"] {
        let m = small_manifest(strategy, BudgetSpec::Assigns(1500), &data);
        let a = m.run(&data).unwrap();
        let b = m.run(&data).unwrap();
        assert_eq!(a.raw_score.to_bits(), b.raw_score.to_bits(), "{strategy}");
        assert_eq!(a.assigns, b.assigns);
        assert!(a.raw_score.is_finite());
        let json = serde_json::to_string(&m).unwrap();
        let again: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(again.run(&data).unwrap().raw_score.to_bits(), a.raw_score.to_bits());
    }
}

#[test]
fn manifests_reject_other_datasets() {
    let cfg = SynthConfig {
        rows: 50,
        ..Default::default()
    };
    let a = synth_dataset(&cfg, 1).unwrap().dataset;
    let b = synth_dataset(&cfg, 2).unwrap().dataset;
    let m = small_manifest("anneal", BudgetSpec::Assigns(100), &a);
    assert!(m.run(&b).is_err());
    assert_ne!(fingerprint(&a), fingerprint(&b));
    assert_eq!(fingerprint(&a), fingerprint(&a.clone()));
}

#[test]
fn wall_clock_budgets_are_respected() {
    let data = synth_dataset(
        &SynthConfig {
            rows: 2000,
            ..Default::default()
        },
        5,
    )
    .unwrap()
    .dataset;
    for strategy in ["prior-gibbs", "seq-gibbs", "anneal"] {
        let r = small_manifest(strategy, BudgetSpec::Secs(0.2), &data).run(&data).unwrap();
        assert!(r.wall_secs < 0.6, "{strategy}: {}", r.wall_secs);
        assert!(r.raw_score.is_finite());
    }
}

#[test]
fn comparison_table_is_normalized_per_dataset() {
    let data = synth_dataset(
        &SynthConfig {
            rows: 200,
            ..Default::default()
        },
        6,
    )
    .unwrap()
    .dataset;
    let cfg = CompareConfig {
        budgets: vec![BudgetSpec::Assigns(400), BudgetSpec::Assigns(800)],
        chains: 3,
        seed: 9,
        inference: InferenceConfig {
            grid_points: 7,
            discount_points: 4,
            ..Default::default()
        },
        ..Default::default()
    };
    let r = compare_strategies(&data, "tiny", &cfg).unwrap();
    assert_eq!(r.rows.len(), 18);
    assert_eq!(r.cells.len(), 6);
    let z: Vec<f64> = r.rows.iter().map(|x| x.norm_score).collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    assert!(mean.abs() < 1e-9);
    let cell = r.cell("anneal", &BudgetSpec::Assigns(800)).unwrap();
    assert_eq!(cell.chains, 3);
    assert!(cell.min <= cell.mean && cell.mean <= cell.max);
    // Re-tabulating the same chains reproduces the summary.
    let again = compare_strategies(&data, "tiny", &cfg).unwrap();
    assert_eq!(again.cells, r.cells);
    let raw = |x: &CompareResult| x.rows.iter().map(|r| r.raw_score.to_bits()).collect::<Vec<_>>();
    assert_eq!(raw(&again), raw(&r));
}
