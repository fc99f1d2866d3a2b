mod common;

use std::collections::BTreeMap;

use common::auc_pairs;

use kunits::learner::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

#[test]
fn auc_matches_pairwise_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64 / 10.0).collect();
        match roc_auc(&labels, &scores) {
            Ok(a) => {
                assert!((a - auc_pairs(&labels, &scores)).abs() < 1e-12);
                checked += 1;
            }
            Err(e) => assert_eq!(e, LearnError::SingleClassInEval),
        }
    }
    assert!(checked > 900);
}

#[test]
fn oob_fraction_approaches_one_over_e() {
    let plan = bootstrap_plan(1000, 7).unwrap();
    assert_eq!(plan.rounds.len(), 100);
    let mean = plan.rounds.iter().map(|r| r.out_of_bag.len() as f64 / 1000.0).sum::<f64>() / 100.0;
    assert!((mean - (-1.0f64).exp()).abs() < 0.03, "{mean}");
}

fn planted(rng: &mut ChaCha8Rng, n: usize, noise: f64) -> Samples {
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let y = x.iter().map(|r| (r[1] + noise * (rng.random::<f64>() - 0.5) > 0.5) as u8).collect();
    Samples { features: names(4), x, y }
}

#[test]
fn planted_signal_reaches_high_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = planted(&mut rng, 200, 0.1);
    let plan = bootstrap_plan(s.len(), 11).unwrap();
    let r = out_of_sample_evaluate("rel", "set", &s, Params::RandomForest { n_estimators: 30, max_depth: None }, &plan)
        .unwrap();
    assert_eq!(r.slots.len(), 100);
    assert!(r.median().unwrap() >= 0.9);
}

#[test]
fn permuted_labels_give_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut s = planted(&mut rng, 300, 0.1);
    let mut y = s.y.clone();
    rand::seq::SliceRandom::shuffle(&mut y[..], &mut rng);
    s.y = y;
    let plan = bootstrap_plan(s.len(), 2).unwrap();
    let r = out_of_sample_evaluate("rel", "set", &s, Params::RandomForest { n_estimators: 30, max_depth: None }, &plan)
        .unwrap();
    let m = r.median().unwrap();
    assert!((0.45..=0.55).contains(&m), "{m}");
}

#[test]
fn evaluation_is_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = planted(&mut rng, 120, 0.6);
    let plan = bootstrap_plan(s.len(), 99).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            out_of_sample_evaluate("r", "s", &s, Params::RandomForest { n_estimators: 20, max_depth: None }, &plan)
                .unwrap()
        })
    };
    let (a, b) = (run(1), run(4));
    let bits = |r: &EvalResult| r.slots.iter().map(|s| s.map(f64::to_bits)).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn single_class_out_of_bag_rounds_are_skipped() {
    // Two positive rows: any round drawing both leaves a one-class
    // out-of-bag set.
    let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
    let mut y = vec![0u8; 12];
    y[11] = 1;
    y[10] = 1;
    let s = Samples { features: names(1), x, y };
    let plan = bootstrap_plan(12, 0).unwrap();
    let r = out_of_sample_evaluate("r", "s", &s, Params::GaussianNb { var_smoothing: 1e-9 }, &plan).unwrap();
    assert_eq!(r.slots.len(), 100);
    assert!(r.skipped() > 0);
    assert_eq!(r.aucs().len() + r.skipped(), 100);
}

#[test]
fn depth_one_tree_matches_a_hand_trace() {
    // The best Gini cut is x <= 1: left {0, 1} all 0, right {2, 3, 4} all 1.
    let s = Samples { features: names(1), x: (0..5).map(|i| vec![i as f64]).collect(), y: vec![0, 0, 1, 1, 1] };
    let m =
        train(&s, Params::DecisionTree { criterion: Criterion::Gini, max_depth: Some(1), ccp_alpha: 0.0 }, 0).unwrap();
    let p = predict_proba(&m, &[vec![0.0], vec![4.0]]).unwrap();
    assert_eq!(p, vec![0.0, 1.0]);
}

#[test]
fn grid_search_edge_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = planted(&mut rng, 60, 0.3);
    let only = [Params::Knn { n_neighbors: 9 }];
    assert_eq!(grid_search_cv(&s, &only, 1).unwrap().0, only[0]);
    assert!(matches!(
        grid_search_cv(&s.subset(&(0..15).collect::<Vec<_>>()), &only, 1),
        Err(LearnError::InsufficientRows { .. })
    ));
}

#[test]
fn grid_search_prefers_smoothing_on_noisy_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..200 {
        let c = (i % 2) as f64;
        x.push(vec![c * 1.5 + rng.random::<f64>() * 2.0, c * 1.5 + rng.random::<f64>() * 2.0]);
        y.push(if rng.random::<f64>() < 0.15 { 1 - (i % 2) as u8 } else { (i % 2) as u8 });
    }
    let s = Samples { features: names(2), x, y };
    let (best, _) = grid_search_cv(&s, &param_grid(ClassifierKind::Knn), 3).unwrap();
    assert!(matches!(best, Params::Knn { n_neighbors } if n_neighbors > 1));
}

#[test]
fn grid_search_never_picks_a_stump_when_a_split_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = planted(&mut rng, 120, 0.0);
    let (best, scores) = grid_search_cv(&s, &param_grid(ClassifierKind::DecisionTree), 5).unwrap();
    assert!(matches!(best, Params::DecisionTree { ccp_alpha, .. } if ccp_alpha < 0.5));
    assert_eq!(scores.len(), 45);
}

#[test]
fn rank_models_delegates_to_scott_knott() {
    let pools: BTreeMap<String, Vec<f64>> = [
        ("KUCLS".to_string(), (0..60).map(|i| 0.80 + (i % 7) as f64 * 0.003).collect::<Vec<f64>>()),
        ("CC".to_string(), (0..60).map(|i| 0.81 + (i % 5) as f64 * 0.003).collect()),
        ("KUCLS+CC".to_string(), (0..60).map(|i| 0.90 + (i % 6) as f64 * 0.003).collect()),
    ]
    .into();
    let ranks = rank_models(&pools);
    assert_eq!(ranks, kunits::stats::scott_knott_esd(&pools));
    assert_eq!(ranks["KUCLS+CC"], 1);
}

#[test]
fn shifted_results_compare_as_a_large_win() {
    let base: Vec<Slot> = (0..100).map(|i| Some(0.6 + (i % 13) as f64 * 0.01)).collect();
    let r2 = EvalResult {
        release: "r".into(),
        feature_set: "a".into(),
        classifier: ClassifierKind::RandomForest,
        slots: base,
    };
    let r1 = EvalResult { slots: r2.slots.iter().map(|s| s.map(|v| v + 0.05)).collect(), ..r2.clone() };
    let c = compare_models(&r1, &r2).unwrap();
    assert!(c.p < 0.05);
    assert!(c.delta > 0.0);
    assert!(c.mean_improvement > 0.0);
}

#[test]
fn eval_results_round_trip_through_json() {
    let r = EvalResult {
        release: "r".into(),
        feature_set: "KUCLS".into(),
        classifier: ClassifierKind::Knn,
        slots: vec![Some(0.1 + 0.2), None, Some(0.75)],
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.json");
    write_eval_json(std::slice::from_ref(&r), &p).unwrap();
    assert_eq!(read_eval_json(&p).unwrap(), vec![r.clone()]);
    let c = dir.path().join("e.csv");
    write_eval_csv(&[r], &c).unwrap();
    let text = std::fs::read_to_string(c).unwrap();
    assert!(text.starts_with("release,model,classifier,slot,auc,skipped\n"));
    assert!(text.contains("r,KUCLS,KNN,1,,true"));
}

proptest! {
    #[test]
    fn auc_is_rank_invariant_and_reflects(
        pairs in prop::collection::vec((0u8..2, -100.0f64..100.0), 2..50),
    ) {
        let labels: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let scores: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let a = roc_auc(&labels, &scores).unwrap();
        let squashed: Vec<f64> = scores.iter().map(|s| (s / 50.0).tanh() * 3.0 + 1.0).collect();
        let moved = roc_auc(&labels, &squashed).unwrap();
        // tanh can merge distinct extreme scores; compare only if it did not.
        let distinct = |v: &[f64]| { let mut w = v.to_vec(); w.sort_by(f64::total_cmp); w.dedup(); w.len() };
        if distinct(&squashed) == distinct(&scores) {
            prop_assert!((a - moved).abs() < 1e-12);
        }
        if distinct(&scores) == scores.len() {
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert!((a - (1.0 - roc_auc(&labels, &neg).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn bootstrap_rounds_partition_rows(n in 10usize..200, seed in any::<u64>()) {
        let plan = bootstrap_plan(n, seed).unwrap();
        for r in &plan.rounds {
            prop_assert_eq!(r.in_bag.len(), n);
            let mut seen = vec![false; n];
            for i in &r.in_bag { seen[*i] = true; }
            let oob: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
            prop_assert_eq!(&oob, &r.out_of_bag);
        }
    }
}
