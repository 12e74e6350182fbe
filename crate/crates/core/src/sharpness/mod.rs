//! Epsilon sweeps for the weighted multiplier inequalities: bump inputs,
//! pointwise lower bounds, both sides of the weighted estimate and the
//! sharp-maximal pointwise ratio.

mod bump;
mod experiment;
mod maximal_ratio;
mod pointwise;

pub use bump::{bump_function, epsilon_grid, GridPolicy};
pub use experiment::{
    run_sharpness_experiment, ExperimentRecord, ExperimentReport, Mode, Regime, SharpnessConfig, SlopeCheck, Tolerance,
    Witness,
};
pub use maximal_ratio::{maximal_ratio_sample, maximal_ratio_sweep, MaximalRatioConfig, MaximalRatioRecord, MaximalRatioReport};
pub use pointwise::{pointwise_lower_check, PointwiseRecord, PointwiseReport, ProbeRegion};
