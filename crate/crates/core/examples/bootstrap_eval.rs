//! Out-of-sample bootstrap evaluation of four classifiers on one synthetic
//! release, followed by a paired comparison and a Scott-Knott ESD ranking.
//!
//!     cargo run --release --example bootstrap_eval

use std::collections::BTreeMap;

use kunits::learner::{
    bootstrap_plan, compare_models, out_of_sample_evaluate, rank_models, ClassifierKind, Params, Samples,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Defects follow the first two columns; the third is noise.
pub fn synthetic(n: usize, seed: u64) -> Samples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let size: f64 = rng.random_range(0.0..10.0);
        let loops: f64 = (size * 0.6 + rng.random_range(-1.5..1.5)).max(0.0);
        let noise: f64 = rng.random_range(0.0..10.0);
        let risk = 0.4 * size + 0.3 * loops + rng.random_range(-1.5..1.5);
        x.push(vec![size, loops, noise]);
        y.push((risk > 3.5) as u8);
    }
    Samples { features: vec!["size".into(), "loops".into(), "noise".into()], x, y }
}

pub fn run_example() -> anyhow::Result<String> {
    let samples = synthetic(200, 1);
    let plan = bootstrap_plan(samples.len(), 42)?;
    let mut out = String::new();
    let mut results = BTreeMap::new();
    for kind in ClassifierKind::ALL {
        let params = match kind {
            ClassifierKind::RandomForest => Params::RandomForest { n_estimators: 30, max_depth: None },
            k => k.default_params(),
        };
        let r = out_of_sample_evaluate("synthetic", "all", &samples, params, &plan)?;
        out.push_str(&format!(
            "{:<4} median AUC {:.3} over {} rounds ({} skipped)\n",
            kind.short_name(),
            r.median().unwrap_or(f64::NAN),
            r.slots.len(),
            r.skipped()
        ));
        results.insert(kind.short_name().to_string(), r);
    }

    let c = compare_models(&results["RF"], &results["NB"])?;
    out.push_str(&format!(
        "RF vs NB: p = {:.2e}, delta = {:.2} ({:?}), mean improvement {:.1}%\n",
        c.p, c.delta, c.magnitude, c.mean_improvement
    ));
    let pooled: BTreeMap<String, Vec<f64>> = results.iter().map(|(k, r)| (k.clone(), r.aucs())).collect();
    let mut ranks: Vec<(String, usize)> = rank_models(&pooled).into_iter().collect();
    ranks.sort_by_key(|(_, r)| *r);
    for (model, rank) in ranks {
        out.push_str(&format!("rank {rank}: {model}\n"));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
