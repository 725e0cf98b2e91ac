use nalgebra::Vector3;

use super::{Frame, GeometryError, Rotation};
use crate::Real;

/// A rigid transform that maps points expressed in `from_frame` into
/// `to_frame`: `p_to = R * p_from + t`.
///
/// Equivalently, it is the pose of `from_frame` relative to `to_frame`.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(bound(serialize = "T: serde::Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Pose<T: Real> {
    pub rotation: Rotation<T>,
    pub translation: Vector3<T>,
    pub from_frame: Frame,
    pub to_frame: Frame,
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Rotation<T>, translation: Vector3<T>, from: Frame, to: Frame) -> Self {
        Self {
            rotation,
            translation,
            from_frame: from,
            to_frame: to,
        }
    }

    /// The identity transform between two (possibly distinct) frames.
    pub fn identity(from: Frame, to: Frame) -> Self {
        Self::new(Rotation::identity(), Vector3::zeros(), from, to)
    }

    /// Chains two transforms: `self ∘ rhs` first applies `rhs`, then `self`.
    ///
    /// The labels must chain: `rhs.to_frame` has to equal `self.from_frame`,
    /// and the result maps `rhs.from_frame` into `self.to_frame`.
    pub fn compose(&self, rhs: &Pose<T>) -> Result<Pose<T>, GeometryError> {
        if rhs.to_frame != self.from_frame {
            return Err(GeometryError::FrameMismatch {
                expected: self.from_frame,
                found: rhs.to_frame,
            });
        }
        Ok(Pose::new(
            self.rotation.compose(&rhs.rotation),
            self.rotation.rotate(&rhs.translation) + self.translation,
            rhs.from_frame,
            self.to_frame,
        ))
    }

    /// The inverse transform, with swapped frame labels.
    pub fn invert(&self) -> Pose<T> {
        let inv_rot = self.rotation.inverse();
        Pose::new(
            inv_rot,
            -(inv_rot.rotate(&self.translation)),
            self.to_frame,
            self.from_frame,
        )
    }

    /// Maps a point from `from_frame` coordinates into `to_frame` coordinates.
    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation.rotate(p) + self.translation
    }

    /// The same numeric transform under new frame labels.
    ///
    /// The tracking loop needs this to re-index time: a refined hypothesis
    /// for "object at frame t" reuses the numeric pose predicted from
    /// "object at frame t-1".
    pub fn with_frames(&self, from: Frame, to: Frame) -> Pose<T> {
        Pose::new(self.rotation, self.translation, from, to)
    }
}

/// Transports the previous object pose into the current camera frame using
/// the relative camera motion.
///
/// `object_prev` maps `object(t-1) -> camera(t-1)` and `camera_delta` maps
/// `camera(t-1) -> camera(t)`; the result maps `object(t-1) -> camera(t)`.
/// When the object is static in the world this *is* the true object pose in
/// the new camera frame, which is what makes ego-motion-induced image motion
/// vanish from the translation estimate.
pub fn compensate_camera_motion<T: Real>(
    object_prev: &Pose<T>,
    camera_delta: &Pose<T>,
) -> Result<Pose<T>, GeometryError> {
    camera_delta.compose(object_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rz(angle: f64) -> Rotation<f64> {
        Rotation::about_z(angle)
    }

    #[test]
    fn compose_rotates_then_offsets() {
        let a = Pose::new(
            rz(std::f64::consts::FRAC_PI_2),
            Vector3::new(1.0, 0.0, 0.0),
            Frame::Camera(0),
            Frame::World,
        );
        let b = Pose::new(
            Rotation::identity(),
            Vector3::new(1.0, 0.0, 0.0),
            Frame::Object(0),
            Frame::Camera(0),
        );
        let c = a.compose(&b).unwrap();
        assert_relative_eq!(c.translation, Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-12);
        assert_eq!(c.from_frame, Frame::Object(0));
        assert_eq!(c.to_frame, Frame::World);
    }

    #[test]
    fn compose_rejects_mismatched_frames() {
        let a = Pose::<f64>::identity(Frame::Camera(1), Frame::World);
        let b = Pose::<f64>::identity(Frame::Object(0), Frame::Camera(0));
        match a.compose(&b) {
            Err(GeometryError::FrameMismatch { expected, found }) => {
                assert_eq!(expected, Frame::Camera(1));
                assert_eq!(found, Frame::Camera(0));
            }
            other => panic!("expected frame mismatch, got {other:?}"),
        }
    }

    #[test]
    fn invert_swaps_labels_and_undoes_transform() {
        let p = Pose::new(
            rz(std::f64::consts::FRAC_PI_2),
            Vector3::new(1.0, 0.0, 0.0),
            Frame::Object(3),
            Frame::Camera(3),
        );
        let inv = p.invert();
        assert_relative_eq!(inv.translation, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
        assert_eq!(inv.from_frame, Frame::Camera(3));
        assert_eq!(inv.to_frame, Frame::Object(3));
        let id = p.compose(&inv).unwrap();
        assert!(id.rotation.angle() < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }

    #[test]
    fn static_object_compensation_is_exact() {
        // Independent construction: object fixed in world, camera moves.
        let object_world = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(0.2, 1.0, -0.4), 1.2),
            Vector3::new(0.3, -0.2, 2.5),
            Frame::Object(0),
            Frame::World,
        );
        let cam_prev = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(1.0, 0.1, 0.0), 0.4),
            Vector3::new(0.1, 0.0, -0.3),
            Frame::Camera(0),
            Frame::World,
        );
        let cam_now = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(0.0, 1.0, 0.6), -0.7),
            Vector3::new(-0.2, 0.15, 0.1),
            Frame::Camera(1),
            Frame::World,
        );
        let object_prev_cam = cam_prev.invert().compose(&object_world).unwrap();
        let delta = cam_now.invert().compose(&cam_prev).unwrap();
        let compensated = compensate_camera_motion(&object_prev_cam, &delta).unwrap();
        let truth_now = cam_now
            .invert()
            .compose(&object_world)
            .unwrap();
        assert!((compensated.translation - truth_now.translation).norm() < 1e-12);
        assert!(compensated.rotation.geodesic_angle(&truth_now.rotation) < 1e-12);
        assert_eq!(compensated.to_frame, Frame::Camera(1));
    }
}
