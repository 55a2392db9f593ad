//! Soft-mode potentials, the optical instability threshold, and pump-power
//! hysteresis of the linear and zigzag structures.

mod soft_mode;
mod sweep;

pub use soft_mode::{instability_threshold, soft_mode_potential_finite, SoftModeCurve, Threshold, UniformSoftMode};
pub use sweep::{
    bistable_window, hysteresis_sweep, reference_intensity, BistableWindow, SweepDirection, SweepOptions, SweepPoint,
    SweepResult,
};
