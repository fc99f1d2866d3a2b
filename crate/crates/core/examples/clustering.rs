//! Reduce two feature spaces with PCA, cluster each with k-means, and measure
//! how far the two partitions agree.
//!
//!     cargo run --example clustering

use kunits::stats::{adjusted_rand_index, choose_k, cluster_overlap_report, pca_reduce};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows of `d` columns; row `i` is drawn around the random center of
/// group `group(i)`.
fn blobs(rng: &mut ChaCha8Rng, n: usize, d: usize, group: impl Fn(usize) -> usize) -> Vec<Vec<f64>> {
    let centers: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
    (0..n).map(|i| centers[group(i)].iter().map(|c| c + rng.random_range(-1.5..1.5)).collect()).collect()
}

pub fn run_example() -> anyhow::Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ku = blobs(&mut rng, 120, 6, |i| i % 3);
    // Same grouping for the first 60 rows, scrambled after that.
    let cm = blobs(&mut rng, 120, 4, |i| if i < 60 { i % 3 } else { (i * 7 / 3) % 3 });

    let mut out = String::new();
    let mut parts = Vec::new();
    for (name, rows) in [("KU", &ku), ("CM", &cm)] {
        let pca = pca_reduce(rows, 0.90)?;
        let chosen = choose_k(&pca.scores, 2..=8, 11)?;
        out.push_str(&format!(
            "{name}: {} component(s) explain {:.1}%, k = {}\n",
            pca.n_components,
            100.0 * pca.explained[..pca.n_components].iter().sum::<f64>(),
            chosen.k
        ));
        parts.push(chosen.clustering.assignment);
    }
    let ari = adjusted_rand_index(&parts[0], &parts[1])?;
    let overlap = cluster_overlap_report(&parts[0], &parts[1])?;
    out.push_str(&format!("ARI {ari:.3}; non-overlapped KU clusters {:.1}%\n", overlap.non_overlapped_pct));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
