//! Knowledge units and code metrics for Java defect prediction.

pub mod dataset;
pub mod explain;
pub mod java;
pub mod ku;
pub mod learner;
pub mod metrics;
pub mod stats;
pub mod study;
