use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_proba, train, ClassifierKind, LearnError, Model, Params, Samples};
use crate::stats::{average_ranks, cliffs_delta, scott_knott_esd, wilcoxon_signed_rank, EffectMagnitude};

pub const BOOTSTRAP_ROUNDS: usize = 100;

/// Area under the ROC curve from the rank-sum formula; tied scores count
/// one half.
pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<f64, LearnError> {
    if labels.len() != scores.len() {
        return Err(LearnError::Invalid(format!("{} labels for {} scores", labels.len(), scores.len())));
    }
    let pos = labels.iter().filter(|l| **l == 1).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(LearnError::SingleClassInEval);
    }
    let ranks = average_ranks(scores);
    let r: f64 = ranks.iter().zip(labels).filter(|(_, l)| **l == 1).map(|(r, _)| r).sum();
    Ok((r - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// Drawn with replacement; as long as the table.
    pub in_bag: Vec<usize>,
    /// Rows never drawn, ascending.
    pub out_of_bag: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub master_seed: u64,
    pub n_rows: usize,
    pub rounds: Vec<Round>,
}

/// 100 resamples; round `i` draws from a generator seeded with
/// `master_seed ^ i` and redraws while its out-of-bag set is empty.
pub fn bootstrap_plan(n_rows: usize, master_seed: u64) -> Result<BootstrapPlan, LearnError> {
    if n_rows < 10 {
        return Err(LearnError::TooFewRows { need: 10, got: n_rows });
    }
    let rounds = (0..BOOTSTRAP_ROUNDS as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ i);
            loop {
                let in_bag: Vec<usize> = (0..n_rows).map(|_| rng.random_range(0..n_rows)).collect();
                let mut seen = vec![false; n_rows];
                for r in &in_bag {
                    seen[*r] = true;
                }
                let out_of_bag: Vec<usize> = (0..n_rows).filter(|r| !seen[*r]).collect();
                if !out_of_bag.is_empty() {
                    return Round { in_bag, out_of_bag };
                }
            }
        })
        .collect();
    Ok(BootstrapPlan { master_seed, n_rows, rounds })
}

/// One AUC per bootstrap round; None marks a skipped round.
pub type Slot = Option<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub release: String,
    pub feature_set: String,
    pub classifier: ClassifierKind,
    pub slots: Vec<Slot>,
}

impl EvalResult {
    pub fn aucs(&self) -> Vec<f64> {
        self.slots.iter().flatten().copied().collect()
    }

    pub fn skipped(&self) -> usize {
        self.slots.iter().filter(|s| s.is_none()).count()
    }

    pub fn median(&self) -> Option<f64> {
        let mut v = self.aucs();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
    }
}

fn round_seed(master: u64, round: usize) -> u64 {
    (master ^ round as u64).wrapping_mul(0xD134_2543_DE82_EF95).rotate_left(17)
}

/// Trains on every in-bag sample and scores its out-of-bag rows. `extra` is
/// called with each round's index, model, and in-bag samples. Rounds whose
/// in-bag or out-of-bag rows hold a single class are skipped.
pub fn out_of_sample_map<T, F>(
    samples: &Samples,
    params: Params,
    plan: &BootstrapPlan,
    extra: F,
) -> Result<(Vec<Slot>, Vec<Option<T>>), LearnError>
where
    T: Send,
    F: Fn(usize, &Model, &Samples) -> T + Sync,
{
    run_rounds(samples, plan, |_, _| Ok(params), extra)
}

fn run_rounds<T, P, F>(
    samples: &Samples,
    plan: &BootstrapPlan,
    choose: P,
    extra: F,
) -> Result<(Vec<Slot>, Vec<Option<T>>), LearnError>
where
    T: Send,
    P: Fn(usize, &Samples) -> Result<Params, LearnError> + Sync,
    F: Fn(usize, &Model, &Samples) -> T + Sync,
{
    if plan.n_rows != samples.len() {
        return Err(LearnError::Invalid(format!("plan for {} rows, table has {}", plan.n_rows, samples.len())));
    }
    let outcomes: Vec<Result<(Slot, Option<T>), LearnError>> = plan
        .rounds
        .par_iter()
        .enumerate()
        .map(|(i, round)| {
            let test = samples.subset(&round.out_of_bag);
            let (neg, pos) = test.class_counts();
            if neg == 0 || pos == 0 {
                return Ok((None, None));
            }
            let bag = samples.subset(&round.in_bag);
            let model = match choose(i, &bag).and_then(|p| train(&bag, p, round_seed(plan.master_seed, i))) {
                Ok(m) => m,
                Err(LearnError::SingleClass | LearnError::InsufficientRows { .. }) => return Ok((None, None)),
                Err(e) => return Err(e),
            };
            let auc = roc_auc(&test.y, &predict_proba(&model, &test.x)?)?;
            Ok((Some(auc), Some(extra(i, &model, &bag))))
        })
        .collect();
    let mut slots = Vec::with_capacity(outcomes.len());
    let mut extras = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (s, e) = o?;
        slots.push(s);
        extras.push(e);
    }
    Ok((slots, extras))
}

/// Like [`out_of_sample_evaluate`], but each round first grid-searches its
/// own in-bag sample. Also returns the settings chosen per round.
pub fn out_of_sample_tuned(
    release: &str,
    feature_set: &str,
    samples: &Samples,
    grid: &[Params],
    plan: &BootstrapPlan,
) -> Result<(EvalResult, Vec<Option<Params>>), LearnError> {
    let first = grid.first().ok_or_else(|| LearnError::Invalid("empty grid".into()))?;
    let choose = |i: usize, bag: &Samples| grid_search_cv(bag, grid, round_seed(plan.master_seed, i)).map(|r| r.0);
    let (slots, chosen) = run_rounds(samples, plan, choose, |_, m, _| m.params)?;
    let result =
        EvalResult { release: release.into(), feature_set: feature_set.into(), classifier: first.kind(), slots };
    Ok((result, chosen))
}

pub fn out_of_sample_evaluate(
    release: &str,
    feature_set: &str,
    samples: &Samples,
    params: Params,
    plan: &BootstrapPlan,
) -> Result<EvalResult, LearnError> {
    let (slots, _) = out_of_sample_map(samples, params, plan, |_, _, _| ())?;
    Ok(EvalResult { release: release.into(), feature_set: feature_set.into(), classifier: params.kind(), slots })
}

/// Stratified k-fold assignment: each class is shuffled and dealt round-robin.
fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|i| y[*i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % folds;
            next += 1;
        }
    }
    fold
}

/// Mean out-of-fold AUC of every configuration; the first best one in grid
/// order wins. Ten folds, or five below 50 rows.
pub fn grid_search_cv(samples: &Samples, grid: &[Params], seed: u64) -> Result<(Params, Vec<f64>), LearnError> {
    if samples.len() < 20 {
        return Err(LearnError::InsufficientRows { need: 20, got: samples.len() });
    }
    if grid.is_empty() {
        return Err(LearnError::Invalid("empty grid".into()));
    }
    let (neg, pos) = samples.class_counts();
    if neg == 0 || pos == 0 {
        return Err(LearnError::SingleClass);
    }
    let folds = if samples.len() < 50 {
        log::warn!("{} rows: using 5 folds", samples.len());
        5
    } else {
        10
    };
    let assignment = stratified_folds(&samples.y, folds, seed);
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|params| {
            let mut aucs = Vec::new();
            for f in 0..folds {
                let train_rows: Vec<usize> = (0..samples.len()).filter(|i| assignment[*i] != f).collect();
                let test_rows: Vec<usize> = (0..samples.len()).filter(|i| assignment[*i] == f).collect();
                let test = samples.subset(&test_rows);
                let Ok(model) = train(&samples.subset(&train_rows), *params, round_seed(seed, f)) else {
                    continue;
                };
                if let Ok(auc) = predict_proba(&model, &test.x).and_then(|s| roc_auc(&test.y, &s)) {
                    aucs.push(auc);
                }
            }
            if aucs.is_empty() {
                f64::NEG_INFINITY
            } else {
                aucs.iter().sum::<f64>() / aucs.len() as f64
            }
        })
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok((grid[best], scores))
}

/// (model − baseline) / (1 − baseline) × 100.
pub fn normalized_auc_improvement(auc_model: f64, auc_baseline: f64) -> Result<f64, LearnError> {
    if auc_baseline >= 1.0 {
        return Err(LearnError::BaselinePerfect);
    }
    Ok((auc_model - auc_baseline) / (1.0 - auc_baseline) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Two-sided Wilcoxon signed-rank p over paired rounds.
    pub p: f64,
    pub delta: f64,
    pub magnitude: EffectMagnitude,
    /// Mean per-round normalized improvement of the first result, percent.
    pub mean_improvement: f64,
    pub paired: usize,
}

/// Pairs rounds by index, dropping those skipped in either result.
pub fn compare_models(r1: &EvalResult, r2: &EvalResult) -> Result<Comparison, LearnError> {
    let (a, b): (Vec<f64>, Vec<f64>) = r1.slots.iter().zip(&r2.slots).filter_map(|(x, y)| Some(((*x)?, (*y)?))).unzip();
    if a.is_empty() {
        return Err(LearnError::NoPairedSlots);
    }
    let w = wilcoxon_signed_rank(&a, &b).map_err(|e| LearnError::Invalid(e.to_string()))?;
    let (delta, magnitude) = cliffs_delta(&a, &b).map_err(|e| LearnError::Invalid(e.to_string()))?;
    let gains: Vec<f64> = a.iter().zip(&b).filter_map(|(x, y)| normalized_auc_improvement(*x, *y).ok()).collect();
    let mean_improvement = if gains.is_empty() { 0.0 } else { gains.iter().sum::<f64>() / gains.len() as f64 };
    Ok(Comparison { p: w.p, delta, magnitude, mean_improvement, paired: a.len() })
}

/// Scott-Knott ESD ranks of pooled AUC distributions, 1 = best.
pub fn rank_models(results: &BTreeMap<String, Vec<f64>>) -> BTreeMap<String, usize> {
    scott_knott_esd(results)
}

#[derive(Serialize, Deserialize)]
struct EvalRecord {
    release: String,
    model: String,
    classifier: String,
    slot: usize,
    auc: Option<f64>,
    skipped: bool,
}

/// One line per round: release, model, classifier, slot, auc, skipped.
pub fn write_eval_csv(results: &[EvalResult], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        for (slot, auc) in r.slots.iter().enumerate() {
            w.serialize(EvalRecord {
                release: r.release.clone(),
                model: r.feature_set.clone(),
                classifier: r.classifier.short_name().into(),
                slot,
                auc: *auc,
                skipped: auc.is_none(),
            })?;
        }
    }
    w.flush()
}

pub fn write_eval_json(results: &[EvalResult], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(results)? + "\n")
}

pub fn read_eval_json(path: &Path) -> std::io::Result<Vec<EvalResult>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
