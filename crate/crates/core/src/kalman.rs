//! A per-axis Kalman filter on world-frame Tait-Bryan angles.
//!
//! The three axes are filtered independently (diagonal covariance). The
//! state advances with a constant-rate motion model whose process noise is
//! the norm of the observed angular acceleration, so the filter trusts its
//! prediction during smooth motion and hands weight back to measurements
//! the moment the motion profile changes. All angle arithmetic is wrapped
//! into `(-pi, pi]`, which keeps a trajectory crossing `±pi` seamless.

use nalgebra::Vector3;

use crate::geometry::{wrap_angle, TaitBryan};
use crate::Real;

/// Noise configuration for the orientation filter.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(
    default,
    bound(serialize = "T: serde::Serialize", deserialize = "T: serde::de::DeserializeOwned + Real")
)]
pub struct FilterNoiseConfig<T> {
    /// Variance of each observed angle, rad^2.
    pub measurement_variance: T,
    /// Lower bound on the per-step process noise, rad^2. Keeps the
    /// covariance from collapsing to exactly zero under constant-rate
    /// motion, so the candidate sampler stays responsive later.
    pub q_floor: T,
    /// Multiplier on the acceleration-driven process noise term.
    pub process_scale: T,
    /// Initial per-axis variance, rad^2.
    pub initial_variance: T,
}

impl<T: Real> Default for FilterNoiseConfig<T> {
    fn default() -> Self {
        Self {
            measurement_variance: T::lit(0.05),
            q_floor: T::lit(1e-6),
            process_scale: T::one(),
            initial_variance: T::lit(0.05),
        }
    }
}

impl<T: Real> FilterNoiseConfig<T> {
    pub fn validate(&self) -> Result<(), KalmanError> {
        if self.measurement_variance <= T::zero() {
            return Err(KalmanError::InvalidConfig(
                "measurement_variance must be > 0".into(),
            ));
        }
        if self.q_floor < T::zero()
            || self.process_scale < T::zero()
            || self.initial_variance < T::zero()
        {
            return Err(KalmanError::InvalidConfig(
                "q_floor, process_scale, and initial_variance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum KalmanError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("invalid filter config: {0}")]
    InvalidConfig(String),
}

/// Filter state: angle mean, diagonal covariance, and the cached angular
/// rates that drive the adaptive process noise.
#[derive(Clone, Copy, Debug)]
pub struct KalmanState<T: Real> {
    /// Posterior (or, right after [`predict`], prior) angle mean.
    pub theta: TaitBryan<T>,
    /// Diagonal of the 3x3 covariance, rad^2, ordered (roll, pitch, yaw).
    pub covariance: Vector3<T>,
    /// Latest angular-velocity estimate, rad/s.
    pub omega: Vector3<T>,
    /// Previous angular-velocity estimate, rad/s.
    pub omega_prev: Vector3<T>,
    /// Time of the most recent prediction, seconds.
    pub last_update_time: T,
    // Posterior mean at the previous update; the velocity re-estimate in
    // `update` differences against this.
    prev_theta: TaitBryan<T>,
    // Time step of the most recent `predict`.
    last_dt: T,
}

impl<T: Real> KalmanState<T> {
    /// A fresh state at a known orientation with isotropic uncertainty.
    pub fn new(theta: TaitBryan<T>, initial_variance: T, time: T) -> Self {
        Self {
            theta,
            covariance: Vector3::repeat(initial_variance),
            omega: Vector3::zeros(),
            omega_prev: Vector3::zeros(),
            last_update_time: time,
            prev_theta: theta,
            last_dt: T::zero(),
        }
    }
}

/// Per-axis angular velocity between two angle snapshots, with wrapped
/// differences so a `±pi` crossing reads as a small motion.
pub fn estimate_omega<T: Real>(
    theta_now: &TaitBryan<T>,
    theta_prev: &TaitBryan<T>,
    dt: T,
) -> Result<Vector3<T>, KalmanError> {
    if dt <= T::zero() {
        return Err(KalmanError::NonPositiveDt(dt.as_f64()));
    }
    let delta = wrap_vector(&(theta_now.as_vector() - theta_prev.as_vector()));
    Ok(delta / dt)
}

/// Advances the mean by the current angular velocity and inflates the
/// covariance by `max(process_scale * |omega_dot|, q_floor)` on every axis,
/// where `omega_dot` differences the two cached velocity estimates.
pub fn predict<T: Real>(
    state: &mut KalmanState<T>,
    dt: T,
    noise: &FilterNoiseConfig<T>,
) -> Result<(), KalmanError> {
    if dt <= T::zero() {
        return Err(KalmanError::NonPositiveDt(dt.as_f64()));
    }
    let omega_dot = (state.omega - state.omega_prev) / dt;
    let q = (noise.process_scale * omega_dot.norm()).max(noise.q_floor);

    state.prev_theta = state.theta;
    state.last_dt = dt;
    state.theta = TaitBryan::from_vector(&wrap_vector(
        &(state.theta.as_vector() + state.omega * dt),
    ));
    state.covariance += Vector3::repeat(q);
    state.last_update_time += dt;
    Ok(())
}

/// Folds an observed orientation into the state with independent scalar
/// updates per axis, then re-estimates the angular velocity from the
/// updated mean.
pub fn update<T: Real>(state: &mut KalmanState<T>, theta_obs: &TaitBryan<T>, noise: &FilterNoiseConfig<T>) {
    let r = noise.measurement_variance;
    let obs = theta_obs.as_vector();
    let mut mean = state.theta.as_vector();
    for axis in 0..3 {
        let p = state.covariance[axis];
        let gain = p / (p + r);
        let innovation = wrap_angle(obs[axis] - mean[axis]);
        mean[axis] = wrap_angle(mean[axis] + gain * innovation);
        state.covariance[axis] = (T::one() - gain) * p;
    }
    state.theta = TaitBryan::from_vector(&mean);

    state.omega_prev = state.omega;
    if state.last_dt > T::zero() {
        state.omega = estimate_omega(&state.theta, &state.prev_theta, state.last_dt)
            .expect("last_dt is positive");
    }
}

/// Per-axis standard deviations, the quantity the candidate sampler reads.
pub fn per_axis_sigma<T: Real>(state: &KalmanState<T>) -> Vector3<T> {
    state.covariance.map(|p| p.sqrt())
}

fn wrap_vector<T: Real>(v: &Vector3<T>) -> Vector3<T> {
    v.map(wrap_angle)
}
