use nalgebra::{Matrix3, Quaternion, Unit, UnitQuaternion, Vector3};
use serde::de::Error as _;

use crate::Real;

/// A rotation in SO(3), stored as a unit quaternion.
///
/// The quaternion is renormalized after every composition so that long
/// chains of incremental updates (thousands of frames) cannot drift away
/// from the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation<T: Real>(UnitQuaternion<T>);

impl<T: Real> Rotation<T> {
    /// The identity rotation.
    pub fn identity() -> Self {
        Self(UnitQuaternion::identity())
    }

    /// Builds a rotation from quaternion components, normalizing them.
    pub fn from_quaternion(w: T, x: T, y: T, z: T) -> Self {
        Self(UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z)))
    }

    /// Rotation by `angle` radians about an arbitrary (non-zero) axis.
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Self {
        Self(UnitQuaternion::from_axis_angle(
            &Unit::new_normalize(*axis),
            angle,
        ))
    }

    /// Rotation about the x axis.
    pub fn about_x(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::x(), angle)
    }

    /// Rotation about the y axis.
    pub fn about_y(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::y(), angle)
    }

    /// Rotation about the z axis.
    pub fn about_z(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle)
    }

    /// Exponential map: builds a rotation from an axis-angle vector.
    pub fn exp(rotvec: &Vector3<T>) -> Self {
        Self(UnitQuaternion::from_scaled_axis(*rotvec))
    }

    /// Logarithmic map: the axis-angle vector of this rotation.
    pub fn log(&self) -> Vector3<T> {
        self.0.scaled_axis()
    }

    /// The underlying unit quaternion.
    pub fn quaternion(&self) -> &UnitQuaternion<T> {
        &self.0
    }

    /// Quaternion components in `[w, x, y, z]` order.
    pub fn wxyz(&self) -> [T; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// The 3x3 rotation matrix.
    pub fn matrix(&self) -> Matrix3<T> {
        self.0.to_rotation_matrix().into_inner()
    }

    /// Builds a rotation from an orthonormal, right-handed matrix.
    pub fn from_matrix(m: &Matrix3<T>) -> Self {
        let r = nalgebra::Rotation3::from_matrix_unchecked(*m);
        Self(UnitQuaternion::from_rotation_matrix(&r))
    }

    /// The inverse rotation.
    pub fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    /// Composes `self * rhs` and renormalizes the result.
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut q = self.0 * rhs.0;
        q.renormalize();
        Self(q)
    }

    /// Rotates a vector.
    pub fn rotate(&self, v: &Vector3<T>) -> Vector3<T> {
        self.0 * v
    }

    /// The rotation angle in `[0, pi]`.
    pub fn angle(&self) -> T {
        let q = self.0.quaternion();
        let vec_norm = Vector3::new(q.i, q.j, q.k).norm();
        (T::one() + T::one()) * vec_norm.atan2(q.w.abs())
    }

    /// Geodesic distance to another rotation, in radians.
    ///
    /// Equals `arccos((trace(A^T B) - 1) / 2)` but is evaluated through the
    /// relative quaternion, which stays well-conditioned near zero.
    pub fn geodesic_angle(&self, other: &Self) -> T {
        Self(self.0.inverse() * other.0).angle()
    }
}

impl<T: Real> Default for Rotation<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> std::ops::Mul for Rotation<T> {
    type Output = Rotation<T>;

    fn mul(self, rhs: Self) -> Self::Output {
        self.compose(&rhs)
    }
}

impl<T: Real> std::ops::Mul<Vector3<T>> for Rotation<T> {
    type Output = Vector3<T>;

    fn mul(self, rhs: Vector3<T>) -> Self::Output {
        self.rotate(&rhs)
    }
}

// Serialized as the `[w, x, y, z]` component array so record files stay
// readable and independent of the internal storage layout.
impl<T: Real + serde::Serialize> serde::Serialize for Rotation<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.wxyz().serialize(serializer)
    }
}

impl<'de, T: Real + serde::Deserialize<'de>> serde::Deserialize<'de> for Rotation<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [w, x, y, z] = <[T; 4]>::deserialize(deserializer)?;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if norm <= T::lit(1e-12) {
            return Err(D::Error::custom("quaternion has zero norm"));
        }
        // Components written by `serialize` are already unit-norm; keep
        // their exact bits so serialization round-trips losslessly.
        if (norm - T::one()).abs() < T::lit(1e-9) {
            return Ok(Self(UnitQuaternion::new_unchecked(q)));
        }
        Ok(Self::from_quaternion(w, x, y, z))
    }
}
