//! Uncertainty-adaptive orientation candidate sampling, plus the static
//! viewpoint templates used to bootstrap a track.
//!
//! Sampling is driven by the orientation filter's per-axis standard
//! deviation: a confident axis contributes the single filtered mean, an
//! uncertain axis contributes `{mean - sigma, mean, mean + sigma}`. The
//! Cartesian product over the three axes yields 1, 3, 9, or 27 candidates.

use nalgebra::{Matrix3, Vector3};

use crate::geometry::{Frame, Pose, Rotation, TaitBryan};
use crate::kalman::{per_axis_sigma, KalmanState};
use crate::Real;

/// Configuration for the adaptive sampler.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(
    default,
    bound(serialize = "T: serde::Serialize", deserialize = "T: serde::de::DeserializeOwned + Real")
)]
pub struct SamplerConfig<T> {
    /// Per-axis standard deviation (radians) above which that axis is
    /// expanded into three offsets.
    pub sigma_threshold: T,
}

impl<T: Real> Default for SamplerConfig<T> {
    fn default() -> Self {
        Self {
            sigma_threshold: T::lit(0.1),
        }
    }
}

/// A batch of world-frame orientation hypotheses sharing one translation.
#[derive(Clone, Debug)]
pub struct CandidateSet<T: Real> {
    /// World-frame candidate rotations, offset-major with roll slowest.
    pub rotations: Vec<Rotation<T>>,
    /// Per-candidate offsets in sigma units, `(roll, pitch, yaw)`, each in
    /// `{-1, 0, +1}`. Exactly one candidate is `(0, 0, 0)`.
    pub offsets: Vec<[i8; 3]>,
    /// Camera-frame translation shared by every candidate, filled in by the
    /// tracking loop after ego-motion compensation.
    pub translation: Vector3<T>,
}

impl<T: Real> CandidateSet<T> {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Index of the zero-offset candidate (the filter mean itself).
    pub fn center_index(&self) -> usize {
        self.offsets
            .iter()
            .position(|o| *o == [0, 0, 0])
            .expect("candidate sets always contain the zero offset")
    }
}

/// Samples orientation candidates around the filter mean.
///
/// Each axis whose standard deviation is below `sigma_threshold` uses only
/// the mean; others use `{-sigma, 0, +sigma}` offsets in angle space. The
/// candidate count is therefore in `{1, 3, 9, 27}`.
pub fn sample_candidates<T: Real>(
    state: &KalmanState<T>,
    config: &SamplerConfig<T>,
) -> CandidateSet<T> {
    let sigma = per_axis_sigma(state);
    let mean = state.theta;

    let axis_offsets = |s: T| -> Vec<i8> {
        if s < config.sigma_threshold {
            vec![0]
        } else {
            vec![-1, 0, 1]
        }
    };
    let roll_offsets = axis_offsets(sigma.x);
    let pitch_offsets = axis_offsets(sigma.y);
    let yaw_offsets = axis_offsets(sigma.z);

    let mut rotations = Vec::with_capacity(roll_offsets.len() * pitch_offsets.len() * yaw_offsets.len());
    let mut offsets = Vec::with_capacity(rotations.capacity());
    for &orr in &roll_offsets {
        for &opp in &pitch_offsets {
            for &oyy in &yaw_offsets {
                let angles = TaitBryan::new(
                    mean.roll + T::from_i8(orr).unwrap() * sigma.x,
                    mean.pitch + T::from_i8(opp).unwrap() * sigma.y,
                    mean.yaw + T::from_i8(oyy).unwrap() * sigma.z,
                )
                .normalized();
                rotations.push(angles.to_rotation());
                offsets.push([orr, opp, oyy]);
            }
        }
    }
    CandidateSet {
        rotations,
        offsets,
        translation: Vector3::zeros(),
    }
}

/// Expresses world-frame candidate rotations as full camera-frame poses.
///
/// `cam_pose_world` maps `camera(t) -> world`; each candidate becomes
/// `R_cam^T * R_world` paired with the set's shared translation. The output
/// poses map `object(t) -> camera(t)`, with `t` taken from the camera label.
pub fn to_camera_frame<T: Real>(set: &CandidateSet<T>, cam_pose_world: &Pose<T>) -> Vec<Pose<T>> {
    let cam_frame = cam_pose_world.from_frame;
    let object_frame = match cam_frame {
        Frame::Camera(t) => Frame::Object(t),
        _ => Frame::Object(0),
    };
    let world_to_cam = cam_pose_world.rotation.inverse();
    set.rotations
        .iter()
        .map(|r| {
            Pose::new(
                world_to_cam.compose(r),
                set.translation,
                object_frame,
                cam_frame,
            )
        })
        .collect()
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum TemplateError {
    /// Only the icosahedron (12) and its first subdivision (42) are
    /// supported viewpoint counts.
    #[error("unsupported viewpoint count {0}; expected 12 or 42")]
    UnsupportedViewCount(usize),
    #[error("in-plane rotation count must be >= 1, got {0}")]
    UnsupportedInPlaneCount(usize),
}

/// Unit viewing directions distributed as icosahedron vertices (12) or the
/// once-subdivided icosphere vertices (42).
pub fn icosahedron_vertices<T: Real>(n_views: usize) -> Result<Vec<Vector3<T>>, TemplateError> {
    let phi = (T::one() + T::lit(5.0).sqrt()) / T::lit(2.0);
    let one = T::one();
    let zero = T::zero();
    let mut verts: Vec<Vector3<T>> = Vec::with_capacity(12);
    for &s1 in &[one, -one] {
        for &s2 in &[phi, -phi] {
            verts.push(Vector3::new(zero, s1, s2).normalize());
            verts.push(Vector3::new(s1, s2, zero).normalize());
            verts.push(Vector3::new(s2, zero, s1).normalize());
        }
    }
    match n_views {
        12 => Ok(verts),
        42 => {
            // Adjacent vertices are the pairs with positive dot product
            // (1/sqrt(5)); normalize each edge midpoint onto the sphere.
            let mut mids = Vec::with_capacity(30);
            for i in 0..verts.len() {
                for j in (i + 1)..verts.len() {
                    if verts[i].dot(&verts[j]) > T::lit(0.2) {
                        mids.push((verts[i] + verts[j]).normalize());
                    }
                }
            }
            debug_assert_eq!(mids.len(), 30);
            verts.extend(mids);
            Ok(verts)
        }
        other => Err(TemplateError::UnsupportedViewCount(other)),
    }
}

/// Viewpoint-template rotations: every icosahedron viewing direction is
/// lifted to a rotation by a fixed-up look-at, then combined with
/// `n_inplane` in-plane rolls spaced `2*pi / n_inplane` apart.
///
/// The up-vector is `+z`, falling back to `+x` for the two pole-aligned
/// viewpoints.
pub fn icosahedron_templates<T: Real>(
    n_views: usize,
    n_inplane: usize,
) -> Result<Vec<Rotation<T>>, TemplateError> {
    if n_inplane == 0 {
        return Err(TemplateError::UnsupportedInPlaneCount(n_inplane));
    }
    let verts = icosahedron_vertices::<T>(n_views)?;
    let mut out = Vec::with_capacity(n_views * n_inplane);
    let step = T::two_pi() / T::from_usize(n_inplane).unwrap();
    for dir in &verts {
        let up = if dir.z.abs() > T::one() - T::lit(1e-9) {
            Vector3::x()
        } else {
            Vector3::z()
        };
        let z_axis = *dir;
        let x_axis = up.cross(&z_axis).normalize();
        let y_axis = z_axis.cross(&x_axis);
        let look = Rotation::from_matrix(&Matrix3::from_columns(&[x_axis, y_axis, z_axis]));
        for k in 0..n_inplane {
            let roll = step * T::from_usize(k).unwrap();
            out.push(look.compose(&Rotation::about_z(roll)));
        }
    }
    Ok(out)
}
