//! Descriptive statistics, outlier subjects, rank correlations and
//! forward-model patterns.

mod correlation;
mod outliers;
mod patterns;
pub(crate) mod stats;

pub use correlation::{average_ranks, correlation_table, spearman, CorrelationRow, Spearman, COVARIATES};
pub use outliers::{detect_outliers, outliers_from_means, subject_means, OutlierReport};
pub use patterns::{
    band_patterns, covariance, forward_model_pattern, write_band_patterns, BandPattern, ClassPattern,
};
pub use stats::{descriptive_stats, welch_t_test, DescriptiveRow, Summary};
