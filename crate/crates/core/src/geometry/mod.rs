//! Rigid-body transforms, rotation parameterizations, and the pinhole
//! camera model.
//!
//! Poses carry explicit [`Frame`] labels and composition is only permitted
//! when the labels chain; getting the bookkeeping wrong is a [`GeometryError`]
//! instead of a silently wrong transform. Frames are indexed by time step
//! because the tracking loop continually relates "the object at frame `t-1`"
//! to "the camera at frame `t`".

mod camera;
mod euler;
mod pose;
mod rotation;

pub use camera::{project_region, BoundingBox, CameraIntrinsics};
pub use euler::{wrap_angle, TaitBryan};
pub use pose::{compensate_camera_motion, Pose};
pub use rotation::Rotation;

use std::fmt;

/// Label for the coordinate frame a quantity is expressed in.
///
/// `Camera` and `Object` carry the frame index of the time step they refer
/// to; the world frame is unique and timeless.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Frame {
    /// The fixed inertial frame.
    World,
    /// The camera frame at a given time step.
    Camera(u64),
    /// The object body frame at a given time step.
    Object(u64),
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::World => write!(f, "world"),
            Frame::Camera(t) => write!(f, "camera({t})"),
            Frame::Object(t) => write!(f, "object({t})"),
        }
    }
}

/// Errors from transform composition and camera projection.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Two poses were chained whose frame labels do not line up.
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: Frame, found: Frame },
    /// A depth measurement must be strictly positive to back-project.
    #[error("non-positive depth: {0}")]
    NonPositiveDepth(f64),
    /// A point with `z <= 0` in the camera frame cannot be projected.
    #[error("point behind camera: z = {0}")]
    BehindCamera(f64),
    /// Focal lengths and image dimensions must be strictly positive.
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
}
