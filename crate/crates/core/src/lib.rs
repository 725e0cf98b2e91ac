//! 6D object pose tracking under fast motion, without any learned
//! components in the loop.
//!
//! The tracking pipeline combines three ideas:
//!
//! * **Ego-motion compensation** — per-frame camera motion (as a
//!   visual-inertial odometry delta) transports the previous object pose
//!   into the current camera frame, and a depth-informed 2D detection
//!   re-anchors translation directly.
//! * **A world-frame orientation filter** — a per-axis Kalman filter on
//!   Tait-Bryan angles predicts object orientation with process noise
//!   scaled by observed angular acceleration, so uncertainty grows exactly
//!   when the motion stops being smooth.
//! * **Adaptive multi-hypothesis refinement** — the filter's per-axis
//!   uncertainty decides how many orientation candidates to sample, and a
//!   hierarchical cascade refines them, keeping the candidates whose
//!   rotation updates are smallest.
//!
//! The refiner itself is a pluggable contract ([`refine::Refiner`]); the
//! built-in implementation is a basin-limited synthetic stand-in that is
//! only informative near the true pose, which reproduces the convergence
//! behaviour the cascade relies on while keeping the crate free of model
//! weights. A deterministic scenario simulator ([`simulation`]) and
//! standard pose-error metrics ([`metrics`]) close the loop for
//! experiments.

pub mod candidates;
pub mod geometry;
pub mod kalman;
pub mod metrics;
pub mod refine;
pub mod simulation;
pub mod tracker;

mod scalar;

pub use scalar::Real;

/// Double-precision aliases for the core currency types.
pub type Rotation64 = geometry::Rotation<f64>;
pub type Pose64 = geometry::Pose<f64>;
pub type TaitBryan64 = geometry::TaitBryan<f64>;
pub type Intrinsics64 = geometry::CameraIntrinsics<f64>;
pub type SensorFrame64 = simulation::SensorFrame<f64>;

/// Single-precision aliases for callers that trade accuracy for footprint.
pub type Rotation32 = geometry::Rotation<f32>;
pub type Pose32 = geometry::Pose<f32>;
pub type TaitBryan32 = geometry::TaitBryan<f32>;
pub type Intrinsics32 = geometry::CameraIntrinsics<f32>;
