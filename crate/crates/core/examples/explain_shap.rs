//! Train a random forest, attribute its predictions with TreeSHAP, rank the
//! features, and explain one file.
//!
//!     cargo run --release --example explain_shap

use kunits::explain::{global_importance, local_report, shap_table};
use kunits::learner::{train, Params, Samples};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(n: usize, seed: u64) -> Samples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["K4", "K8", "CountLineCode", "COMM"];
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..names.len()).map(|_| rng.random_range(0.0..10.0)).collect();
        // Loops (K4) and churn (COMM) drive defects; the rest is noise.
        y.push((row[0] + 0.5 * row[3] + rng.random_range(-1.0..1.0) > 7.5) as u8);
        x.push(row);
    }
    Samples { features: names.map(String::from).to_vec(), x, y }
}

pub fn run_example() -> anyhow::Result<String> {
    let samples = synthetic(300, 3);
    let model = train(&samples, Params::RandomForest { n_estimators: 50, max_depth: Some(6) }, 9)?;
    let shap = shap_table(&model, &samples)?;
    let importance = global_importance(&shap)?;

    let mut out = format!("base value {:.3}\n", shap.base_value);
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|a, b| importance[*b].total_cmp(&importance[*a]));
    for i in order {
        out.push_str(&format!("{:<16}sum |phi| = {:.2}\n", shap.features[i], importance[i]));
    }
    let riskiest = (0..samples.len())
        .max_by(|a, b| model.predict_row(&samples.x[*a]).total_cmp(&model.predict_row(&samples.x[*b])))
        .unwrap_or(0);
    out.push_str(&local_report(&model, &samples.x[riskiest], 3)?.render());
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
