//! Parametric rigid-body trajectories used to script scenarios.
//!
//! Orientation follows `R(t) = exp(axis * theta(t)) * R0` where `axis` is
//! the normalized angular-velocity direction and `theta(t)` is a scalar
//! profile per trajectory kind; the configured angular speed is the *peak*
//! rate of that profile. Positions use the same profile shapes per axis.

use nalgebra::Vector3;

use crate::geometry::{Rotation, TaitBryan};

use super::SimulationError;

/// Shape of the motion profile over time.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// Constant linear and angular velocity.
    ConstantVelocity,
    /// Velocities oscillate sinusoidally; configured speeds are the peaks.
    Sinusoidal { frequency_hz: f64 },
    /// Velocity flips sign every half period (triangle-wave positions).
    StepChange { period_s: f64 },
    /// Position follows a Catmull-Rom spline through `waypoints` over
    /// `duration_s`; rotation stays at the constant configured rate.
    /// `start_position` is ignored for this kind.
    WaypointSpline {
        waypoints: Vec<[f64; 3]>,
        duration_s: f64,
    },
}

/// One body's scripted motion.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectorySpec {
    #[serde(flatten)]
    pub kind: TrajectoryKind,
    pub start_position: [f64; 3],
    /// Initial orientation as roll/pitch/yaw, radians.
    pub start_rpy: [f64; 3],
    /// Peak linear velocity per axis, m/s.
    pub linear_velocity: [f64; 3],
    /// Peak angular velocity (axis direction times rate), rad/s.
    pub angular_velocity: [f64; 3],
}

impl TrajectorySpec {
    pub fn stationary(position: [f64; 3]) -> Self {
        Self {
            kind: TrajectoryKind::ConstantVelocity,
            start_position: position,
            start_rpy: [0.0; 3],
            linear_velocity: [0.0; 3],
            angular_velocity: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.start_position)
            && finite(&self.start_rpy)
            && finite(&self.linear_velocity)
            && finite(&self.angular_velocity))
        {
            return Err(SimulationError::InvalidConfig(
                "trajectory parameters must be finite".into(),
            ));
        }
        match &self.kind {
            TrajectoryKind::ConstantVelocity => Ok(()),
            TrajectoryKind::Sinusoidal { frequency_hz } if *frequency_hz > 0.0 => Ok(()),
            TrajectoryKind::Sinusoidal { frequency_hz } => Err(SimulationError::InvalidConfig(
                format!("sinusoidal frequency must be positive, got {frequency_hz}"),
            )),
            TrajectoryKind::StepChange { period_s } if *period_s > 0.0 => Ok(()),
            TrajectoryKind::StepChange { period_s } => Err(SimulationError::InvalidConfig(
                format!("step-change period must be positive, got {period_s}"),
            )),
            TrajectoryKind::WaypointSpline {
                waypoints,
                duration_s,
            } => {
                if waypoints.len() < 2 {
                    return Err(SimulationError::InvalidConfig(
                        "waypoint spline needs at least two waypoints".into(),
                    ));
                }
                if *duration_s <= 0.0 {
                    return Err(SimulationError::InvalidConfig(
                        "waypoint spline duration must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Scalar time-integral of the velocity profile, normalized so the peak
    /// derivative is 1.
    fn profile(&self, t: f64) -> f64 {
        match &self.kind {
            TrajectoryKind::ConstantVelocity | TrajectoryKind::WaypointSpline { .. } => t,
            TrajectoryKind::Sinusoidal { frequency_hz } => {
                let w = std::f64::consts::TAU * frequency_hz;
                (w * t).sin() / w
            }
            TrajectoryKind::StepChange { period_s } => {
                let tau = t.rem_euclid(*period_s);
                if tau < period_s / 2.0 {
                    tau
                } else {
                    period_s - tau
                }
            }
        }
    }

    /// Pose of the body at time `t` (body frame -> world, unlabeled parts).
    pub fn pose_at(&self, t: f64) -> (Rotation<f64>, Vector3<f64>) {
        let s = self.profile(t);
        let omega = Vector3::from(self.angular_velocity);
        let r0 = TaitBryan::new(self.start_rpy[0], self.start_rpy[1], self.start_rpy[2])
            .to_rotation();
        let rotation = if omega.norm() > 0.0 {
            Rotation::exp(&(omega * s)).compose(&r0)
        } else {
            r0
        };
        let position = match &self.kind {
            TrajectoryKind::WaypointSpline {
                waypoints,
                duration_s,
            } => {
                let pts: Vec<Vector3<f64>> = waypoints.iter().map(|w| Vector3::from(*w)).collect();
                catmull_rom(&pts, t / duration_s)
            }
            _ => Vector3::from(self.start_position) + Vector3::from(self.linear_velocity) * s,
        };
        (rotation, position)
    }
}

/// Interpolates a point chain with a centripetal-free (uniform) Catmull-Rom
/// spline; `u` spans the whole chain on `[0, 1]` and is clamped outside.
/// The curve passes through every control point.
fn catmull_rom(pts: &[Vector3<f64>], u: f64) -> Vector3<f64> {
    debug_assert!(pts.len() >= 2);
    let segs = pts.len() - 1;
    let x = u.clamp(0.0, 1.0) * segs as f64;
    let i = (x.floor() as usize).min(segs - 1);
    let s = x - i as f64;
    let at = |k: isize| pts[k.clamp(0, segs as isize) as usize];
    let (p0, p1, p2, p3) = (
        at(i as isize - 1),
        at(i as isize),
        at(i as isize + 1),
        at(i as isize + 2),
    );
    let m1 = (p2 - p0) * 0.5;
    let m2 = (p3 - p1) * 0.5;
    let (s2, s3) = (s * s, s * s * s);
    p1 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m1 * (s3 - 2.0 * s2 + s)
        + p2 * (-2.0 * s3 + 3.0 * s2)
        + m2 * (s3 - s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spinning(kind: TrajectoryKind, omega: [f64; 3]) -> TrajectorySpec {
        TrajectorySpec {
            kind,
            start_position: [0.0, 0.0, 2.0],
            start_rpy: [0.1, -0.2, 0.3],
            linear_velocity: [0.4, 0.0, -0.1],
            angular_velocity: omega,
        }
    }

    #[test]
    fn constant_velocity_is_linear_in_time() {
        let spec = spinning(TrajectoryKind::ConstantVelocity, [0.0, 0.0, 0.5]);
        let (r1, p1) = spec.pose_at(2.0);
        assert_relative_eq!(p1.x, 0.8, epsilon = 1e-12);
        assert_relative_eq!(p1.z, 1.8, epsilon = 1e-12);
        let r0 = spec.pose_at(0.0).0;
        assert_relative_eq!(r0.geodesic_angle(&r1), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sinusoidal_peak_rate_matches_configured_speed() {
        let omega = [0.9, 0.7, 2.0];
        let rate = Vector3::from(omega).norm();
        let spec = spinning(TrajectoryKind::Sinusoidal { frequency_hz: 0.5 }, omega);
        // The profile derivative peaks at t = 0.
        let h = 1e-6;
        let (ra, _) = spec.pose_at(0.0);
        let (rb, _) = spec.pose_at(h);
        assert_relative_eq!(ra.geodesic_angle(&rb) / h, rate, epsilon = 1e-4);
        // And the position never drifts: one full period returns home.
        let (_, p0) = spec.pose_at(0.0);
        let (_, p2) = spec.pose_at(2.0);
        assert_relative_eq!((p0 - p2).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn step_change_retraces_its_path() {
        let spec = spinning(TrajectoryKind::StepChange { period_s: 1.0 }, [0.0, 1.0, 0.0]);
        let (_, fwd) = spec.pose_at(0.3);
        let (_, back) = spec.pose_at(0.7); // mirrored around the half period
        assert_relative_eq!((fwd - back).norm(), 0.0, epsilon = 1e-12);
        let (r_start, p_start) = spec.pose_at(0.0);
        let (r_end, p_end) = spec.pose_at(1.0);
        assert_relative_eq!((p_start - p_end).norm(), 0.0, epsilon = 1e-12);
        assert!(r_start.geodesic_angle(&r_end) < 1e-9);
    }

    #[test]
    fn spline_passes_through_every_waypoint() {
        let waypoints = vec![
            [0.0, 0.0, 2.0],
            [0.5, 0.2, 2.2],
            [1.0, -0.1, 1.8],
            [1.5, 0.0, 2.0],
        ];
        let spec = TrajectorySpec {
            kind: TrajectoryKind::WaypointSpline {
                waypoints: waypoints.clone(),
                duration_s: 3.0,
            },
            start_position: [9.0, 9.0, 9.0], // ignored for splines
            start_rpy: [0.0; 3],
            linear_velocity: [0.0; 3],
            angular_velocity: [0.0, 0.0, 1.0],
        };
        for (i, w) in waypoints.iter().enumerate() {
            let t = 3.0 * i as f64 / (waypoints.len() - 1) as f64;
            let (_, p) = spec.pose_at(t);
            assert_relative_eq!((p - Vector3::from(*w)).norm(), 0.0, epsilon = 1e-12);
        }
        // Clamped beyond the end.
        let (_, p) = spec.pose_at(10.0);
        assert_relative_eq!((p - Vector3::from(waypoints[3])).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(spinning(TrajectoryKind::Sinusoidal { frequency_hz: 0.0 }, [0.0; 3])
            .validate()
            .is_err());
        assert!(spinning(TrajectoryKind::StepChange { period_s: -1.0 }, [0.0; 3])
            .validate()
            .is_err());
        let mut spec = spinning(TrajectoryKind::ConstantVelocity, [0.0; 3]);
        spec.linear_velocity[1] = f64::NAN;
        assert!(spec.validate().is_err());
        assert!(TrajectorySpec {
            kind: TrajectoryKind::WaypointSpline {
                waypoints: vec![[0.0; 3]],
                duration_s: 1.0
            },
            ..TrajectorySpec::stationary([0.0; 3])
        }
        .validate()
        .is_err());
    }
}
