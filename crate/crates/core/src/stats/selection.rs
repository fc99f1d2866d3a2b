use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::correlation::spearman_rho;
use super::StatsError;

fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

/// 1 / (1 − R²) of the least-squares fit of `columns[target]` on the other
/// columns plus an intercept. Infinite under perfect collinearity.
pub fn variance_inflation(columns: &[Vec<f64>], target: usize) -> Result<f64, StatsError> {
    if columns.len() < 2 {
        return Err(StatsError::TooShort { need: 2, got: columns.len() });
    }
    let n = columns[0].len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(StatsError::LengthMismatch(n, c.len()));
    }
    let y = &columns[target];
    if is_constant(y) {
        return Err(StatsError::ConstantColumn(target));
    }
    let others: Vec<&Vec<f64>> = columns.iter().enumerate().filter(|(i, _)| *i != target).map(|(_, c)| c).collect();
    let x = DMatrix::from_fn(n, others.len() + 1, |r, c| if c == 0 { 1.0 } else { others[c - 1][r] });
    let yv = DVector::from_column_slice(y);
    let beta = x.clone().svd(true, true).solve(&yv, 1e-12).map_err(|e| StatsError::Invalid(e.to_string()))?;
    let residual = &yv - &x * beta;
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ratio = residual.norm_squared() / ss_tot;
    if ratio < 1e-10 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoSpearmanConfig {
    pub rho_max: f64,
    pub vif_max: f64,
}

impl Default for AutoSpearmanConfig {
    fn default() -> Self {
        AutoSpearmanConfig { rho_max: 0.7, vif_max: 5.0 }
    }
}

/// Indices of the columns kept, in input order.
///
/// First, while some pair has |ρ| ≥ `rho_max`, the most correlated pair loses
/// the member with the higher mean |ρ| to the other remaining columns. Then,
/// while some VIF ≥ `vif_max`, the column with the highest VIF is dropped.
/// Constant columns never conflict and are not used in VIF fits. Ties go to
/// the earlier column for pairs and to the later column for drops.
pub fn auto_spearman(columns: &[Vec<f64>], config: AutoSpearmanConfig) -> Result<Vec<usize>, StatsError> {
    let m = columns.len();
    let mut rho = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let r = spearman_rho(&columns[i], &columns[j])?.rho.abs();
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    let mut alive: Vec<usize> = (0..m).collect();
    loop {
        let mut worst: Option<(usize, usize, f64)> = None;
        for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                if rho[i][j] >= config.rho_max && worst.is_none_or(|(_, _, r)| rho[i][j] > r) {
                    worst = Some((i, j, rho[i][j]));
                }
            }
        }
        let Some((i, j, _)) = worst else { break };
        let mean_rho = |c: usize| {
            let others: Vec<f64> = alive.iter().filter(|o| **o != c).map(|o| rho[c][*o]).collect();
            others.iter().sum::<f64>() / others.len().max(1) as f64
        };
        let drop = if mean_rho(i) > mean_rho(j) { i } else { j };
        alive.retain(|c| *c != drop);
    }

    loop {
        let fitted: Vec<usize> = alive.iter().copied().filter(|c| !is_constant(&columns[*c])).collect();
        if fitted.len() < 2 {
            break;
        }
        let subset: Vec<Vec<f64>> = fitted.iter().map(|c| columns[*c].clone()).collect();
        let mut worst: Option<(usize, f64)> = None;
        for (k, &c) in fitted.iter().enumerate() {
            let v = variance_inflation(&subset, k)?;
            if v >= config.vif_max && worst.is_none_or(|(_, w)| v >= w) {
                worst = Some((c, v));
            }
        }
        match worst {
            Some((c, _)) => alive.retain(|x| *x != c),
            None => break,
        }
    }
    Ok(alive)
}
