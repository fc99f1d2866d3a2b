use serde::{Deserialize, Serialize};

use super::StatsError;

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[idx[k]] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// One series was constant; `rho` is 0.
    pub degenerate: bool,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of the average-rank vectors.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<Spearman, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooShort { need: 3, got: x.len() });
    }
    Ok(match pearson(&average_ranks(x), &average_ranks(y)) {
        Some(rho) => Spearman { rho, degenerate: false },
        None => Spearman { rho: 0.0, degenerate: true },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CorrelationStrength {
    VeryWeak,
    Weak,
    Moderate,
    Strong,
    Large,
}

impl CorrelationStrength {
    pub const ALL: [CorrelationStrength; 5] = [
        CorrelationStrength::VeryWeak,
        CorrelationStrength::Weak,
        CorrelationStrength::Moderate,
        CorrelationStrength::Strong,
        CorrelationStrength::Large,
    ];
}

/// Category of |ρ| after rounding to two decimals.
pub fn strength_of(rho: f64) -> CorrelationStrength {
    let hundredths = (rho.abs() * 100.0).round() as i64;
    match hundredths {
        ..=19 => CorrelationStrength::VeryWeak,
        20..=39 => CorrelationStrength::Weak,
        40..=59 => CorrelationStrength::Moderate,
        60..=79 => CorrelationStrength::Strong,
        _ => CorrelationStrength::Large,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        let r = |x: &[f64], y: &[f64]| spearman_rho(x, y).unwrap().rho;
        assert!((r(&[1., 2., 3.], &[10., 20., 30.]) - 1.0).abs() < 1e-12);
        assert!((r(&[1., 2., 3.], &[3., 2., 1.]) + 1.0).abs() < 1e-12);
        assert!((r(&[1., 2., 3., 4.], &[2., 1., 4., 3.]) - 0.6).abs() < 1e-12);
        let d = spearman_rho(&[1., 1., 1.], &[1., 2., 3.]).unwrap();
        assert!(d.degenerate && d.rho == 0.0);
        assert!(matches!(spearman_rho(&[1., 2.], &[1., 2.]), Err(StatsError::TooShort { .. })));
    }

    #[test]
    fn strength_boundaries() {
        assert_eq!(strength_of(0.195), CorrelationStrength::Weak);
        assert_eq!(strength_of(0.194), CorrelationStrength::VeryWeak);
        assert_eq!(strength_of(0.80), CorrelationStrength::Large);
        assert_eq!(strength_of(0.79), CorrelationStrength::Strong);
        assert_eq!(strength_of(-0.45), CorrelationStrength::Moderate);
        assert_eq!(strength_of(0.0), CorrelationStrength::VeryWeak);
    }
}
