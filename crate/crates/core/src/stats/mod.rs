//! Monte Carlo campaigns and distributional statistics of the costs.

mod campaign;
mod reports;
mod summary;

pub use campaign::{independent_set_counts, run_campaign, run_campaign_samples, CampaignSpec, GridSamples, MIN_REPLICATES};
pub use reports::{
    calibrate_ks, exact_moment_trend, normality_report, shrinking, x_vs_y_variance, z_limit_report, zeta_shape, ExactMomentTrend, KsCalibration,
    NormalityReport, VarianceRatioRow, VarianceRatioTable, ZLimitReport, ZLimitRow, DEFAULT_KS_THRESHOLD,
};
pub use summary::{ks_distance_normal, normal_cdf, write_summaries_csv, SampleMoments, SimulationSummary, SUMMARY_CSV_HEADER};
