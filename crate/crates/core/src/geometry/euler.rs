use nalgebra::Vector3;

use super::Rotation;
use crate::Real;

/// Wraps an angle into the interval `(-pi, pi]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let two_pi = T::two_pi();
    angle - two_pi * ((angle - T::pi()) / two_pi).ceil()
}

/// Tait-Bryan angles: extrinsic rotations about the fixed x, y, and z axes,
/// applied in that order, so `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
///
/// This is the parameterization the orientation filter runs on; each field
/// is kept in `(-pi, pi]` by [`TaitBryan::normalized`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaitBryan<T> {
    /// Rotation about x, radians.
    pub roll: T,
    /// Rotation about y, radians.
    pub pitch: T,
    /// Rotation about z, radians.
    pub yaw: T,
}

impl<T: Real> TaitBryan<T> {
    pub fn new(roll: T, pitch: T, yaw: T) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Each angle wrapped into `(-pi, pi]`.
    pub fn normalized(&self) -> Self {
        Self::new(
            wrap_angle(self.roll),
            wrap_angle(self.pitch),
            wrap_angle(self.yaw),
        )
    }

    /// View as a `(roll, pitch, yaw)` vector for per-axis filter math.
    pub fn as_vector(&self) -> Vector3<T> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }

    pub fn from_vector(v: &Vector3<T>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    /// The rotation `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn to_rotation(&self) -> Rotation<T> {
        Rotation::about_z(self.yaw)
            .compose(&Rotation::about_y(self.pitch).compose(&Rotation::about_x(self.roll)))
    }

    /// Decomposes a rotation into Tait-Bryan angles, each in `(-pi, pi]`.
    ///
    /// At gimbal lock (`|pitch| = pi/2`) only the sum or difference of roll
    /// and yaw is observable; the convention here is `roll = 0` with the
    /// remainder absorbed into yaw. Use [`TaitBryan::gimbal_lock`] on the
    /// result to detect that the decomposition was degenerate.
    pub fn from_rotation(rotation: &Rotation<T>) -> Self {
        let m = rotation.matrix();
        let sin_pitch = -m[(2, 0)];
        let one = T::one();
        if sin_pitch.abs() >= one - T::lit(1e-12) {
            // Degenerate: cos(pitch) ~ 0. With roll fixed to zero,
            // m01 = -sin(yaw) and m11 = cos(yaw) for either pitch sign.
            let pitch = sin_pitch.clamp(-one, one).asin();
            let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
            return Self::new(T::zero(), pitch, wrap_angle(yaw));
        }
        Self::new(
            m[(2, 1)].atan2(m[(2, 2)]),
            sin_pitch.clamp(-one, one).asin(),
            m[(1, 0)].atan2(m[(0, 0)]),
        )
    }

    /// True when pitch is within `1e-6` of `±pi/2`, i.e. when roll and yaw
    /// were not separately observable in [`TaitBryan::from_rotation`].
    pub fn gimbal_lock(&self) -> bool {
        (self.pitch.abs() - T::frac_pi_2()).abs() < T::lit(1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_maps_into_half_open_interval() {
        assert_relative_eq!(wrap_angle(3.0 * std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(0.5), 0.5);
        assert_relative_eq!(wrap_angle(-3.3), -3.3 + std::f64::consts::TAU, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(7.0), 7.0 - std::f64::consts::TAU, epsilon = 1e-12);
    }

    #[test]
    fn pure_roll_rotates_y_to_z() {
        let r = TaitBryan::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0).to_rotation();
        let v = r * Vector3::new(0.0, 1.0, 0.0);
        assert_relative_eq!(v, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn axis_order_is_z_y_x() {
        let composed = Rotation::about_z(0.1) * Rotation::about_y(0.2) * Rotation::about_x(0.3);
        let angles = TaitBryan::from_rotation(&composed);
        assert_relative_eq!(angles.roll, 0.3, epsilon = 1e-12);
        assert_relative_eq!(angles.pitch, 0.2, epsilon = 1e-12);
        assert_relative_eq!(angles.yaw, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_away_from_gimbal_lock() {
        // Exact recovery for |pitch| < pi/2 - 0.05.
        let pitch_bound = std::f64::consts::FRAC_PI_2 - 0.05;
        let mut k = 0u32;
        for i in 0..20 {
            for j in 0..20 {
                let roll = -3.0 + 6.0 * (i as f64) / 19.0;
                let pitch = -pitch_bound + 2.0 * pitch_bound * (j as f64) / 19.0;
                let yaw = wrap_angle(1.7 + 0.31 * f64::from(k));
                k += 1;
                let src = TaitBryan::new(roll, pitch, yaw);
                let back = TaitBryan::from_rotation(&src.to_rotation());
                assert_relative_eq!(back.roll, roll, epsilon = 1e-9);
                assert_relative_eq!(back.pitch, pitch, epsilon = 1e-9);
                assert_relative_eq!(back.yaw, yaw, epsilon = 1e-9);
                assert!(!back.gimbal_lock());
            }
        }
    }

    #[test]
    fn gimbal_lock_pins_roll_to_zero() {
        for pitch in [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2] {
            let src = TaitBryan::new(0.4, pitch, 0.9);
            let back = TaitBryan::from_rotation(&src.to_rotation());
            assert!(back.gimbal_lock());
            assert_eq!(back.roll, 0.0);
            // The same rotation must be reproduced even though the angle
            // split differs.
            let err = src.to_rotation().geodesic_angle(&back.to_rotation());
            assert!(err < 1e-9, "gimbal reconstruction error {err}");
        }
    }
}
