use nalgebra::Vector3;

use super::{GeometryError, Pose};
use crate::Real;

/// Pinhole camera intrinsics.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: u32,
    pub height: u32,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: u32, height: u32) -> Result<Self, GeometryError> {
        if fx <= T::zero() || fy <= T::zero() {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                fx.as_f64(),
                fy.as_f64()
            )));
        }
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "image dimensions must be positive ({width} x {height})"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Projects a camera-frame point to pixel coordinates.
    pub fn project(&self, p_cam: &Vector3<T>) -> Result<(T, T), GeometryError> {
        if p_cam.z <= T::zero() {
            return Err(GeometryError::BehindCamera(p_cam.z.as_f64()));
        }
        Ok((
            self.fx * p_cam.x / p_cam.z + self.cx,
            self.fy * p_cam.y / p_cam.z + self.cy,
        ))
    }

    /// Lifts a pixel at a known depth back into the camera frame:
    /// `t = depth * K^-1 [u, v, 1]^T`.
    pub fn backproject(&self, u: T, v: T, depth: T) -> Result<Vector3<T>, GeometryError> {
        if depth <= T::zero() {
            return Err(GeometryError::NonPositiveDepth(depth.as_f64()));
        }
        Ok(Vector3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ))
    }
}

/// An axis-aligned image-space region: `(u, v)` is the center, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox<T> {
    pub u: T,
    pub v: T,
    pub width: T,
    pub height: T,
}

/// Projects a model point cloud under `pose` (object frame -> camera frame)
/// and returns the image-space region it covers.
///
/// The center is the projection of the point-cloud centroid — the same
/// convention the simulated detector uses — and the extent is the spread of
/// the projected points. Fails if any point lands behind the camera.
pub fn project_region<T: Real>(
    intrinsics: &CameraIntrinsics<T>,
    pose: &Pose<T>,
    points: &[Vector3<T>],
) -> Result<BoundingBox<T>, GeometryError> {
    assert!(!points.is_empty(), "cannot project an empty point cloud");
    let mut centroid = Vector3::zeros();
    for p in points {
        centroid += p;
    }
    centroid /= T::from_usize(points.len()).expect("point count fits scalar");
    let (cu, cv) = intrinsics.project(&pose.transform_point(&centroid))?;

    let mut min_u = T::max_value().unwrap();
    let mut max_u = -min_u;
    let mut min_v = min_u;
    let mut max_v = -min_u;
    for p in points {
        let (u, v) = intrinsics.project(&pose.transform_point(p))?;
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    Ok(BoundingBox {
        u: cu,
        v: cv,
        width: max_u - min_u,
        height: max_v - min_v,
    })
}
