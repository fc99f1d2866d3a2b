use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::GridMode;
use super::{
    load_tables, prepare_run_dir, read_json, release_seed, table_path, write_json, ReleaseFailure, StudyConfig,
    StudyError, MODEL_CC, MODEL_CC_PROD, MODEL_COMBINED, MODEL_COST_EFF, MODEL_KUCLS,
};
use crate::dataset::{full_schema, import_csv};
use crate::explain::{
    final_feature_ranks_with, global_importance, local_report, per_release_feature_ranks_with, shap_table,
    FeatureRankTable, LocalReport, ShapRows,
};
use crate::learner::{
    bootstrap_plan, compare_models, grid_search_cv, out_of_sample_evaluate, out_of_sample_map, out_of_sample_tuned,
    param_grid, rank_models, train, write_eval_csv, write_eval_json, BootstrapPlan, ClassifierKind, EvalResult, Model,
    Params, Samples,
};
use crate::stats::{auto_spearman, EffectMagnitude};

/// Research questions answered by [`run_study`]. The local explanation of a
/// single file is [`explain_file`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rq {
    Rq1,
    Rq2,
    Rq4,
    Rq5,
    Rq6,
}

impl Rq {
    pub const ALL: [Rq; 5] = [Rq::Rq1, Rq::Rq2, Rq::Rq4, Rq::Rq5, Rq::Rq6];

    pub fn name(self) -> &'static str {
        match self {
            Rq::Rq1 => "rq1",
            Rq::Rq2 => "rq2",
            Rq::Rq4 => "rq4",
            Rq::Rq5 => "rq5",
            Rq::Rq6 => "rq6",
        }
    }
}

impl std::str::FromStr for Rq {
    type Err = StudyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("rq").unwrap_or(&t);
        Rq::ALL.into_iter().find(|r| &r.name()[2..] == t).ok_or_else(|| {
            StudyError::Config(format!("unknown research question {s}; expected rq1, rq2, rq4, rq5 or rq6"))
        })
    }
}

impl std::fmt::Display for Rq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One release-level model comparison, as in a p-value / effect-size table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub release: String,
    pub subject: String,
    pub baseline: String,
    pub subject_median: Option<f64>,
    pub baseline_median: Option<f64>,
    pub p: f64,
    pub delta: f64,
    pub magnitude: EffectMagnitude,
    /// Mean per-round normalized AUC improvement of the subject, percent.
    pub improvement: f64,
}

impl ComparisonRow {
    /// `L(0.59)` style effect label.
    pub fn effect_label(&self) -> String {
        let letter = match self.magnitude {
            EffectMagnitude::Negligible => 'N',
            EffectMagnitude::Small => 'S',
            EffectMagnitude::Medium => 'M',
            EffectMagnitude::Large => 'L',
        };
        format!("{letter}({:.2})", self.delta)
    }
}

/// Compares `subject` against each baseline within every release that has
/// both. Results are matched on their labels.
pub fn comparison_rows(results: &[(String, EvalResult)], subject: &str, baselines: &[&str]) -> Vec<ComparisonRow> {
    let find =
        |release: &str, label: &str| results.iter().find(|(l, r)| l == label && r.release == release).map(|x| &x.1);
    let mut out = Vec::new();
    for (label, s) in results.iter().filter(|(l, _)| l == subject) {
        for b in baselines {
            let Some(base) = find(&s.release, b) else { continue };
            match compare_models(s, base) {
                Ok(c) => out.push(ComparisonRow {
                    release: s.release.clone(),
                    subject: label.clone(),
                    baseline: b.to_string(),
                    subject_median: s.median(),
                    baseline_median: base.median(),
                    p: c.p,
                    delta: c.delta,
                    magnitude: c.magnitude,
                    improvement: c.mean_improvement,
                }),
                Err(e) => log::warn!("{}: {subject} vs {b}: {e}", s.release),
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RqSummary {
    pub rq: Option<Rq>,
    pub releases: Vec<String>,
    /// Label → release → median AUC.
    pub medians: BTreeMap<String, BTreeMap<String, Option<f64>>>,
    pub comparisons: Vec<ComparisonRow>,
    /// Scott-Knott ESD rank of each label over AUCs pooled across releases.
    pub model_ranks: BTreeMap<String, usize>,
    /// Model → feature ranks.
    pub feature_ranks: BTreeMap<String, FeatureRankTable>,
    /// Model → release → columns after selection.
    pub features: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Release → classifier → tuned settings (per-release tuning only).
    pub tuned: BTreeMap<String, BTreeMap<String, Params>>,
    pub failures: Vec<ReleaseFailure>,
}

struct Release {
    id: String,
    samples: Samples,
    plan: BootstrapPlan,
    seed: u64,
    /// Short digest of the table file; keys the evaluation cache.
    table_digest: String,
}

struct Ctx<'a> {
    cfg: &'a StudyConfig,
    dir: PathBuf,
}

const DEFAULT_RF: Params = Params::RandomForest { n_estimators: 100, max_depth: None };

impl Ctx<'_> {
    /// Model columns after AutoSpearman; the cost-effective set is used as is.
    fn columns(&self, r: &Release, model: &str) -> Result<Vec<String>, StudyError> {
        let cols = self.cfg.model_columns(model)?;
        if model == MODEL_COST_EFF {
            return Ok(cols);
        }
        let s = r.samples.select(&cols)?;
        let by_column: Vec<Vec<f64>> = (0..cols.len()).map(|j| s.x.iter().map(|row| row[j]).collect()).collect();
        let kept = auto_spearman(&by_column, self.cfg.thresholds.auto_spearman())?;
        Ok(kept.into_iter().map(|i| cols[i].clone()).collect())
    }

    fn cache_path(&self, r: &Release, label: &str) -> PathBuf {
        self.dir.join("evals").join(format!("{}-{}", r.id, r.table_digest)).join(format!("{label}.json"))
    }

    fn cached(&self, r: &Release, label: &str) -> Option<EvalResult> {
        let text = std::fs::read_to_string(self.cache_path(r, label)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn store(&self, r: &Release, label: &str, e: &EvalResult) -> Result<(), StudyError> {
        write_json(&self.cache_path(r, label), e)
    }

    /// Out-of-sample evaluation, reusing an earlier identical run.
    fn evaluate(
        &self,
        r: &Release,
        model: &str,
        cols: &[String],
        params: Params,
        label: &str,
    ) -> Result<EvalResult, StudyError> {
        if let Some(e) = self.cached(r, label) {
            return Ok(e);
        }
        let e = out_of_sample_evaluate(&r.id, model, &r.samples.select(cols)?, params, &r.plan)?;
        self.store(r, label, &e)?;
        Ok(e)
    }

    /// Default random forest evaluation plus the per-round SHAP importance.
    fn evaluate_with_shap(
        &self,
        r: &Release,
        model: &str,
        cols: &[String],
    ) -> Result<(EvalResult, Vec<Vec<f64>>), StudyError> {
        let s = r.samples.select(cols)?;
        let opts = &self.cfg.study;
        let limit = |rows: &Samples| -> Samples {
            match opts.shap_max_rows {
                Some(m) if m > 0 && rows.len() > m => {
                    let picks: Vec<usize> = (0..m).map(|i| i * rows.len() / m).collect();
                    rows.subset(&picks)
                }
                _ => rows.clone(),
            }
        };
        let (slots, extras) = out_of_sample_map(&s, DEFAULT_RF, &r.plan, |_, m: &Model, bag: &Samples| {
            let rows = match opts.shap_rows {
                ShapRows::Full => limit(&s),
                ShapRows::InBag => limit(bag),
            };
            shap_table(m, &rows).and_then(|t| global_importance(&t))
        })?;
        let importances = extras.into_iter().flatten().collect::<Result<Vec<_>, _>>()?;
        let e = EvalResult {
            release: r.id.clone(),
            feature_set: model.into(),
            classifier: ClassifierKind::RandomForest,
            slots,
        };
        self.store(r, &rf_label(model), &e)?;
        Ok((e, importances))
    }

    /// Default random forest on the whole release, kept for explanations.
    fn persist_model(&self, r: &Release, model: &str, cols: &[String]) -> Result<(), StudyError> {
        let m = train(&r.samples.select(cols)?, DEFAULT_RF, r.seed)?;
        write_json(&model_path(&self.dir, &r.id, model), &m)
    }
}

fn rf_label(model: &str) -> String {
    format!("{model}_RF")
}

fn model_path(dir: &Path, release: &str, model: &str) -> PathBuf {
    dir.join("models").join(release).join(format!("{model}.json"))
}

fn digest_file(path: &Path) -> Result<String, StudyError> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes)[..6].iter().map(|b| format!("{b:02x}")).collect())
}

/// Feature names and one importance vector per bootstrap round.
type Importances = (Vec<String>, Vec<Vec<f64>>);

/// Everything one release contributes to a research question.
#[derive(Default)]
struct ReleaseOut {
    results: Vec<(String, EvalResult)>,
    importances: BTreeMap<String, Importances>,
    features: BTreeMap<String, Vec<String>>,
    tuned: BTreeMap<String, Params>,
    tuned_rounds: BTreeMap<String, Vec<Option<Params>>>,
}

fn models_of(rq: Rq) -> &'static [&'static str] {
    match rq {
        Rq::Rq1 => &[MODEL_KUCLS, MODEL_CC_PROD, MODEL_CC],
        Rq::Rq2 => &[MODEL_KUCLS],
        Rq::Rq4 => &[MODEL_KUCLS, MODEL_CC_PROD, MODEL_CC, MODEL_COMBINED],
        Rq::Rq5 => &[MODEL_COMBINED],
        Rq::Rq6 => &[MODEL_COST_EFF, MODEL_KUCLS, MODEL_CC, MODEL_COMBINED],
    }
}

/// Models whose SHAP importance is ranked.
fn explained_models(rq: Rq) -> &'static [&'static str] {
    match rq {
        Rq::Rq2 => &[MODEL_KUCLS],
        Rq::Rq4 => &[MODEL_COMBINED],
        _ => &[],
    }
}

fn run_release(ctx: &Ctx, r: &Release, rq: Rq) -> Result<ReleaseOut, StudyError> {
    let mut out = ReleaseOut::default();
    for model in models_of(rq) {
        let cols = ctx.columns(r, model)?;
        out.features.insert(model.to_string(), cols.clone());
        if rq == Rq::Rq5 {
            for kind in ClassifierKind::ALL {
                let grid = param_grid(kind);
                let e = match ctx.cfg.study.grid_search {
                    GridMode::PerRelease => {
                        let (best, _) = grid_search_cv(&r.samples.select(&cols)?, &grid, r.seed)?;
                        out.tuned.insert(kind.short_name().into(), best);
                        ctx.evaluate(r, model, &cols, best, &format!("{model}_{}_tuned", kind.short_name()))?
                    }
                    GridMode::PerBootstrap => {
                        let (e, chosen) = out_of_sample_tuned(&r.id, model, &r.samples.select(&cols)?, &grid, &r.plan)?;
                        out.tuned_rounds.insert(kind.short_name().into(), chosen);
                        e
                    }
                };
                out.results.push((kind.short_name().to_string(), e));
            }
            let e = ctx.evaluate(r, model, &cols, DEFAULT_RF, &rf_label(model))?;
            out.results.push(("RF(default)".to_string(), e));
            continue;
        }
        let e = if explained_models(rq).contains(model) {
            let (e, imp) = ctx.evaluate_with_shap(r, model, &cols)?;
            out.importances.insert(model.to_string(), (cols.clone(), imp));
            e
        } else {
            ctx.evaluate(r, model, &cols, DEFAULT_RF, &rf_label(model))?
        };
        if rq != Rq::Rq2 {
            ctx.persist_model(r, model, &cols)?;
        }
        out.results.push((model.to_string(), e));
    }
    Ok(out)
}

fn comparisons_of(rq: Rq) -> Option<(&'static str, &'static [&'static str])> {
    match rq {
        Rq::Rq1 => Some((MODEL_KUCLS, &[MODEL_CC_PROD, MODEL_CC])),
        Rq::Rq4 => Some((MODEL_COMBINED, &[MODEL_KUCLS, MODEL_CC])),
        Rq::Rq6 => Some((MODEL_COST_EFF, &[MODEL_CC, MODEL_KUCLS, MODEL_COMBINED])),
        _ => None,
    }
}

fn write_comparisons(path: &Path, rows: &[ComparisonRow]) -> Result<(), StudyError> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record([
        "release",
        "subject",
        "baseline",
        "subject_median",
        "baseline_median",
        "p",
        "effect",
        "improvement_pct",
    ])
    .map_err(std::io::Error::from)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
    for r in rows {
        w.write_record([
            r.release.clone(),
            r.subject.clone(),
            r.baseline.clone(),
            opt(r.subject_median),
            opt(r.baseline_median),
            format!("{:.3e}", r.p),
            r.effect_label(),
            format!("{:.2}", r.improvement),
        ])
        .map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_ranks(path: &Path, ranks: &BTreeMap<String, usize>) -> Result<(), StudyError> {
    let mut v: Vec<(&String, &usize)> = ranks.iter().collect();
    v.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)));
    let mut text = String::from("model,rank\n");
    for (m, r) in v {
        text.push_str(&format!("{m},{r}\n"));
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn file_label(model: &str) -> String {
    model.replace('+', "_")
}

/// Runs one research question over every extracted release and writes its
/// tables under `<run>/<rq>/`. Releases that fail are listed in the summary.
pub fn run_study(cfg: &StudyConfig, rq: Rq) -> Result<RqSummary, StudyError> {
    let dir = prepare_run_dir(cfg)?;
    let out_dir = dir.join(rq.name());
    std::fs::create_dir_all(&out_dir)?;
    let (tables, mut failures) = load_tables(cfg);
    if tables.is_empty() {
        return Err(StudyError::Missing("no extracted tables".into()));
    }
    let ctx = Ctx { cfg, dir: dir.clone() };
    let outcomes: Vec<(String, Result<ReleaseOut, StudyError>)> = tables
        .par_iter()
        .map(|(id, table)| {
            let run = || -> Result<ReleaseOut, StudyError> {
                let samples = Samples::from_table(table);
                let seed = release_seed(cfg.seed, id);
                let plan = bootstrap_plan(samples.len(), seed)?;
                let table_digest = digest_file(&table_path(&dir, id))?;
                let r = Release { id: id.clone(), samples, plan, seed, table_digest };
                run_release(&ctx, &r, rq)
            };
            (id.clone(), run())
        })
        .collect();

    let mut summary = RqSummary { rq: Some(rq), ..RqSummary::default() };
    let mut results: Vec<(String, EvalResult)> = Vec::new();
    let mut importances: BTreeMap<String, BTreeMap<String, Importances>> = BTreeMap::new();
    let mut tuned_rounds = BTreeMap::new();
    for (id, o) in outcomes {
        match o {
            Ok(out) => {
                summary.releases.push(id.clone());
                results.extend(out.results);
                for (m, v) in out.importances {
                    importances.entry(m).or_default().insert(id.clone(), v);
                }
                for (m, cols) in out.features {
                    summary.features.entry(m).or_default().insert(id.clone(), cols);
                }
                if !out.tuned.is_empty() {
                    summary.tuned.insert(id.clone(), out.tuned);
                }
                if !out.tuned_rounds.is_empty() {
                    tuned_rounds.insert(id.clone(), out.tuned_rounds);
                }
            }
            Err(e) => {
                log::error!("{rq} {id}: {e}");
                failures.push(ReleaseFailure { release: id, error: e.to_string() });
            }
        }
    }
    summary.failures = failures;

    for (label, e) in &results {
        summary.medians.entry(label.clone()).or_default().insert(e.release.clone(), e.median());
    }
    let evals: Vec<EvalResult> = results.iter().map(|x| x.1.clone()).collect();
    write_eval_csv(&evals, &out_dir.join("eval.csv"))?;
    write_eval_json(&evals, &out_dir.join("eval.json"))?;

    if let Some((subject, baselines)) = comparisons_of(rq) {
        summary.comparisons = comparison_rows(&results, subject, baselines);
        write_comparisons(&out_dir.join("comparison.csv"), &summary.comparisons)?;
    }
    if matches!(rq, Rq::Rq4 | Rq::Rq5 | Rq::Rq6) {
        let mut pools: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (label, e) in &results {
            pools.entry(label.clone()).or_default().extend(e.aucs());
        }
        pools.retain(|_, v| !v.is_empty());
        if pools.len() >= 2 {
            summary.model_ranks = rank_models(&pools);
            write_ranks(&out_dir.join("model_ranks.csv"), &summary.model_ranks)?;
        }
    }
    let sk = cfg.thresholds.sk();
    for (model, per_release) in importances {
        let mut ranks = BTreeMap::new();
        for (id, (cols, imp)) in &per_release {
            if imp.is_empty() {
                continue;
            }
            ranks.insert(id.clone(), per_release_feature_ranks_with(cols, imp, sk)?);
        }
        let table = match ranks.len() {
            0 => continue,
            // One release: its own ranks are final.
            1 => {
                FeatureRankTable { final_rank: ranks.values().next().cloned().unwrap_or_default(), per_release: ranks }
            }
            _ => final_feature_ranks_with(&ranks, sk)?,
        };
        table.write_csv(&out_dir.join(format!("feature_ranks_{}.csv", file_label(&model))))?;
        summary.feature_ranks.insert(model, table);
    }
    if !tuned_rounds.is_empty() {
        write_json(&out_dir.join("tuned_rounds.json"), &tuned_rounds)?;
    }
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainOutcome {
    pub release: String,
    pub path: String,
    pub reports: BTreeMap<String, LocalReport>,
}

impl ExplainOutcome {
    pub fn render(&self) -> String {
        let mut out = format!("{} {}\n", self.release, self.path);
        for (model, r) in &self.reports {
            out.push_str(&format!("\n[{model}] "));
            out.push_str(&r.render());
        }
        out
    }
}

/// Local SHAP explanation of one file by the persisted release models. With
/// no model given, the KU and code-metric models are both used.
pub fn explain_file(
    cfg: &StudyConfig,
    release: &str,
    path: &str,
    model: Option<&str>,
    top_n: usize,
) -> Result<ExplainOutcome, StudyError> {
    if cfg.release(release).is_none() {
        return Err(StudyError::Config(format!("release {release} is not configured")));
    }
    let dir = prepare_run_dir(cfg)?;
    let table = import_csv(&table_path(&dir, release), Some(&full_schema()))?;
    let wanted = crate::java::normalize_path(path);
    let row = table
        .usable_rows()
        .find(|r| r.path == wanted)
        .ok_or_else(|| StudyError::UnknownPath { release: release.into(), path: wanted.clone() })?;
    let models: Vec<&str> = match model {
        Some(m) => vec![m],
        None => vec![MODEL_KUCLS, MODEL_CC],
    };
    let mut reports = BTreeMap::new();
    for m in models {
        let p = model_path(&dir, release, m);
        if !p.exists() {
            return Err(StudyError::ModelMissing { release: release.into(), model: m.into() });
        }
        let fitted: Model = read_json(&p)?;
        let values: Vec<f64> = fitted
            .features
            .iter()
            .map(|f| {
                let i = table
                    .column_index(f)
                    .ok_or_else(|| StudyError::Config(format!("model column {f} not in table")))?;
                let v = row.values[i];
                Ok(if v.is_nan() { 0.0 } else { v })
            })
            .collect::<Result<_, StudyError>>()?;
        let n = top_n.clamp(1, fitted.features.len().max(1));
        reports.insert(m.to_string(), local_report(&fitted, &values, n)?);
    }
    let outcome = ExplainOutcome { release: release.into(), path: wanted.clone(), reports };
    let stem = wanted.replace('/', "__");
    let out_dir = dir.join("explain").join(release);
    write_json(&out_dir.join(format!("{stem}.json")), &outcome)?;
    std::fs::write(out_dir.join(format!("{stem}.txt")), outcome.render())?;
    Ok(outcome)
}
