//! V2V multilink shadowing model library.
//!
//! The pipeline mirrors how highway convoy measurements turn into channel
//! models for network simulators:
//!
//! 1. [`ingest`] parses packet logs, compensates RSSI into channel gain,
//!    marks censored observations and averages them into 0.4 s bins.
//! 2. [`models`] provides the deterministic pathloss: a two-ray
//!    ground-reflection model for line-of-sight links and a log-distance
//!    single slope for obstructed ones.
//! 3. [`estimate`] fits model parameters by censored maximum likelihood
//!    (Tobit) or ordinary least squares.
//! 4. [`correlate`] estimates the autocorrelation of the large-scale fading
//!    over traveled distance, the cross-correlation between concurrent
//!    links versus receiver separation, and fits the exponential and
//!    clipped-linear models for both.
//! 5. [`fadesim`] generates correlated shadowing realizations and extracts
//!    fading-dip-duration statistics for single and simultaneous links.

pub mod config;
pub mod correlate;
pub mod estimate;
pub mod fadesim;
pub mod ingest;
pub mod models;
pub mod optim;
pub mod reference;
pub mod stats;

pub use correlate::{
    autocorrelation, cross_correlation, fit_double_exp, fit_linear_cross, fit_single_exp,
    residuals, AutocorrFit, AutocorrModel, AutocorrSeries, CrossCorrSeries, LinearCrossModel,
    ResidualSeries,
};
pub use estimate::{
    censored_loglik, fit_single_slope_ml, fit_single_slope_ols, fit_two_ray_ml, FitResult,
    FittedParams,
};
pub use fadesim::{
    dip_durations, gain_trace, gen_multilink, gen_shadow, gen_shadow_double_exp,
    gen_shadow_single_exp, simultaneous_dip_durations, DipStats, Scenario, ShadowModel,
    ShadowSpec, ShadowTrace,
};
pub use ingest::{
    bin_samples, censor_threshold_gain, channel_gain, parse_log, quality_check,
    segment_by_condition, BinnedSample, Condition, LinkConfig, PacketRecord, QualityReport,
};
pub use models::{
    deterministic_channel_gain, ground_distance, los_distance, pathloss, reflection_coefficient,
    single_slope_pathloss, two_ray_pathloss, LinkGeometry, PathlossModel, Polarization,
    SingleSlopeParams, TwoRayParams,
};
