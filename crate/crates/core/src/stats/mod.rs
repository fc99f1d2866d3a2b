//! Nonparametric statistics, feature selection, ranking, and clustering.

mod cluster;
mod correlation;
mod scott_knott;
mod selection;

pub use cluster::{
    adjusted_rand_index, choose_k, cluster_overlap_report, kmeans_cluster, mean_silhouette, pca_reduce, ChooseK,
    ClusterComposition, Clustering, OverlapReport, Pca,
};
pub use correlation::{average_ranks, spearman_rho, strength_of, CorrelationStrength, Spearman};
pub use rank_test::{
    cliffs_delta, magnitude_of, mann_whitney_u, wilcoxon_signed_rank, EffectMagnitude, Wilcoxon, WILCOXON_EXACT_MAX_N,
};
pub use scott_knott::{scott_knott_esd, scott_knott_esd_with, SkConfig};
pub use selection::{auto_spearman, variance_inflation, AutoSpearmanConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("every column is constant")]
    AllConstant,
    #[error("only {distinct} distinct points for {k} clusters")]
    DegenerateData { distinct: usize, k: usize },
    #[error("column {0} is constant")]
    ConstantColumn(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
