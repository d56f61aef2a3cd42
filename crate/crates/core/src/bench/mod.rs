//! Datasets, imbalance construction, oversampling, classifiers and metrics.

pub mod classifier;
pub mod coverage;
pub mod data;
pub mod imbalance;
pub mod pipeline;

pub use classifier::{evaluate, train_classifier, ClassMetrics, Classifier, ClassifierConfig, Metrics};
pub use coverage::{mode_coverage, Coverage};
pub use data::{gaussian_grid, gaussian_ring, interleaved_rings, ring_means, Dataset, MixtureSpec};
pub use imbalance::{
    balance_with_generator, make_imbalanced, multiclass_balance, oversample_with_generator, random_oversample,
};
pub use pipeline::{aggregate_means, metrics_csv, run_method, BenchOptions, BenchTask, Method, MetricsRow, METRICS_HEADER};
