use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_oneof, proptest, Just};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subanneal_core::{
    run, run_source, AnnealAction, AnnealSchedule, Budget, Dataset, GridAxis, HyperGrid, InitialState,
    MixtureModel, PacedAnneal, PitmanYorParams, RunOptions, Strategy,
};

use AnnealAction::{AssignRandomUnassigned as A, HyperSweep as H, RemoveRandomAssigned as R};

#[test]
fn anneal_n2_t1_unrolls() {
    let s = AnnealSchedule::build(Strategy::AnnealSubsample, 2, 1).unwrap();
    assert_eq!(s.stream().collect::<Vec<_>>(), vec![A, R, A, A, R, A]);
    assert_eq!(s.size_trace(), vec![1, 0, 1, 2, 1, 2]);
    let h = s.clone().with_hyper(true);
    assert_eq!(h.stream().collect::<Vec<_>>(), vec![A, R, A, H, A, R, A, H]);
    assert_eq!(h.size_trace(), vec![1, 0, 1, 2, 1, 2]);
}

#[test]
fn prior_gibbs_n3_t2() {
    let s = AnnealSchedule::build(Strategy::PriorGibbs, 3, 2).unwrap();
    let actions: Vec<_> = s.stream().collect();
    assert_eq!(actions.len(), 12);
    assert!(actions.chunks(2).all(|c| c == [R, A]));
    assert_eq!(s.initial_state(), InitialState::PriorDraw);
    let trace = s.size_trace();
    assert!(trace.chunks(2).all(|c| c == [2, 3]));
}

#[test]
fn sequential_gibbs_layout() {
    let s = AnnealSchedule::build(Strategy::SequentialGibbs, 4, 3).unwrap();
    let actions: Vec<_> = s.stream().collect();
    assert_eq!(&actions[..4], &[A, A, A, A]);
    assert_eq!(actions.len(), 4 + 2 * 2 * 4);
    assert_eq!(s.assign_count(), 12);
}

#[test]
fn hyper_sweeps_track_subsample_size() {
    let s = AnnealSchedule::build(Strategy::PriorGibbs, 5, 3).unwrap().with_hyper(true);
    let summary = s.validate().unwrap();
    assert_eq!(summary.hyper_sweeps, 3);
    // Early in an anneal the subsample is small, so sweeps are frequent.
    let a = AnnealSchedule::build(Strategy::AnnealSubsample, 5, 3).unwrap().with_hyper(true);
    let actions: Vec<_> = a.stream().collect();
    let first_h = actions.iter().position(|x| *x == H).unwrap();
    assert_eq!(first_h, 3);
    assert!(a.validate().unwrap().hyper_sweeps > 3);
}

#[test]
fn invalid_arguments() {
    assert!(AnnealSchedule::build(Strategy::PriorGibbs, 0, 1).is_err());
    assert!(AnnealSchedule::build(Strategy::AnnealSubsample, 3, 0).is_err());
    assert!(AnnealSchedule::build(Strategy::Custom, 3, 1).is_err());
    assert!(AnnealSchedule::custom(2, vec![0, 2]).is_err());
    assert!(AnnealSchedule::custom(2, vec![1, 2]).is_err());
    assert!(AnnealSchedule::custom(2, vec![0, 1, 0, 1]).is_err());
    assert!(AnnealSchedule::custom(2, vec![0, 1, 2, 3]).is_err());
    let ok = AnnealSchedule::custom(2, vec![0, 1, 0, 1, 2]).unwrap();
    assert_eq!(ok.stream().collect::<Vec<_>>(), vec![A, R, A, A]);
}

#[test]
fn fractional_churn_is_spread_evenly() {
    let s = AnnealSchedule::anneal_with_churn(4, 6).unwrap();
    let v = s.validate().unwrap();
    assert_eq!(v.assigns, 10);
    assert_eq!(s.assign_count(), 10);
    let exact = AnnealSchedule::anneal_with_churn(5, 15).unwrap();
    let built = AnnealSchedule::build(Strategy::AnnealSubsample, 5, 3).unwrap();
    assert_eq!(exact.stream().collect::<Vec<_>>(), built.stream().collect::<Vec<_>>());
}

fn booleans(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<bool> = (0..n).map(|_| rand::Rng::random_bool(&mut rng, 0.4)).collect();
    Dataset::booleans(&xs)
}

#[test]
fn runs_are_deterministic() {
    let data = booleans(40, 1);
    let model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0).unwrap());
    let grid = HyperGrid::alpha_only(GridAxis::geometric(0.1, 10.0, 9).unwrap(), 1);
    for strategy in [Strategy::PriorGibbs, Strategy::SequentialGibbs, Strategy::AnnealSubsample] {
        let s = AnnealSchedule::build(strategy, 40, 4).unwrap().with_hyper(true);
        let go = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            run(&s, &data, model.clone(), Some(&grid), &mut rng, Budget::unlimited(), &RunOptions::default())
                .unwrap()
        };
        let (a, b) = (go(), go());
        assert_eq!(a.state.canonical_labels(), b.state.canonical_labels());
        assert_eq!(a.model.py, b.model.py);
        assert_eq!(a.assigns, s.assign_count());
        assert!(a.reached_full_data && !a.budget_exhausted);
        assert!(a.hyper_sweeps > 0);
        a.state.check_consistency(&data, &a.model).unwrap();
    }
}

#[test]
fn budget_exhaustion_completes_the_state() {
    let data = booleans(30, 2);
    let model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0).unwrap());
    let s = AnnealSchedule::build(Strategy::AnnealSubsample, 30, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let out = run(&s, &data, model, None, &mut rng, Budget::assigns(20), &RunOptions { trace_every: 7, ..Default::default() })
        .unwrap();
    assert!(out.budget_exhausted);
    assert!(!out.reached_full_data);
    assert_eq!(out.assigns, 20);
    assert_eq!(out.state.n_unassigned(), 0);
    assert!(out.completion_assigns > 0);
    let last = out.trace.last().unwrap();
    assert_eq!(last.subsample_size, 30);
    assert!(out.trace.windows(2).all(|w| w[0].step <= w[1].step));
}

#[test]
fn wrong_dataset_size_is_rejected() {
    let data = booleans(10, 4);
    let model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0).unwrap());
    let s = AnnealSchedule::build(Strategy::PriorGibbs, 11, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(run(&s, &data, model, None, &mut rng, Budget::unlimited(), &RunOptions::default()).is_err());
}

#[test]
fn paced_anneal_reaches_full_data() {
    let data = booleans(200, 5);
    let model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0).unwrap());
    let mut src = PacedAnneal::new(200, 0.05, 0.9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let out = run_source(
        &mut src,
        InitialState::Empty,
        &data,
        model,
        None,
        &mut rng,
        Budget::secs(0.05),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(out.state.n_unassigned(), 0);
    assert!(out.assigns >= 200 || out.completion_assigns > 0);
}

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop_oneof![
        Just(Strategy::PriorGibbs),
        Just(Strategy::SequentialGibbs),
        Just(Strategy::AnnealSubsample)
    ]
}

proptest! {
    #[test]
    fn built_schedules_validate(n in 1usize..=50, t in 1usize..=20, st in strategy(), hyper in any::<bool>()) {
        let s = AnnealSchedule::build(st, n, t).unwrap().with_hyper(hyper);
        let summary = s.validate().unwrap();
        prop_assert_eq!(summary.final_size, n);
        prop_assert_eq!(summary.assigns, s.assign_count());
        let trace = s.size_trace();
        prop_assert_eq!(*trace.last().unwrap(), n);
        let mut prev = s.initial_size();
        for x in &trace {
            prop_assert_eq!(prev.abs_diff(*x), 1);
            prev = *x;
        }
        match st {
            Strategy::PriorGibbs => {
                prop_assert!(trace.iter().all(|x| *x == n || *x == n - 1));
                prop_assert!(trace.chunks(2).all(|c| c == [n - 1, n]));
            }
            Strategy::AnnealSubsample => {
                prop_assert_eq!(summary.assigns, (n * (t + 1)) as u64);
                // Sizes after each completed churn pair never decrease.
                let mut high = 0;
                for x in &trace {
                    prop_assert!(*x + 1 >= high);
                    high = high.max(*x);
                }
            }
            _ => {}
        }
    }

    #[test]
    fn prior_gibbs_reassigns_the_removed_point(n in 1usize..=12, seed in any::<u64>()) {
        let data = booleans(n, seed);
        let model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = subanneal_core::PartitionState::new(n, &model);
        state.draw_from_prior(&data, &model, &mut rng).unwrap();
        for _ in 0..3 * n {
            let r = state.remove_random(&data, &mut rng).unwrap();
            let a = state.assign_random(&data, &model, &mut rng).unwrap();
            prop_assert_eq!(r, a);
        }
    }
}
