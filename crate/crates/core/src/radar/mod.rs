//! Radar range-pulse data as point clouds, synthetic clutter, optimal
//! fractional-domain filtering and detection experiments.

mod clutter;
mod cube;
mod detection;
mod filter;

pub use clutter::ClutterModel;
pub use cube::{
    cube_to_cloud, estimate_reference, inject_target, inject_target_with_phase, normalized_power_db,
    steering_vector, target_amplitude, RadarCube, SteeringVector,
};
pub use detection::{
    block_signal, cell_statistic, cfar_threshold, make_realization, monte_carlo_detection, radar_transform,
    sweep_alpha, sweep_with_transform, wilson_interval, ClutterSource, DetectionPoint, DetectionReport, Detector,
    FilterSignal, Protocol, ReferenceSource, SweepResult, ThresholdPolicy,
};
pub use filter::{
    apply_filter, apply_gains, design_filter, filter_objective, pooled_nmse, DesignMode, FilterDesign, Realization,
    SystemMatrix, TIKHONOV,
};
