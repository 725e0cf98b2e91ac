//! Pose refinement contract and the coarse-to-fine candidate cascade.
//!
//! A [`Refiner`] proposes a corrective [`PoseUpdate`] for one candidate pose
//! against one frame's imagery; the cascade runs rounds of refinement over a
//! candidate set, keeps the candidates whose proposed corrections are
//! smallest (a converged candidate asks for little), and narrows the set
//! until a single winner remains.
//!
//! [`BasinRefiner`] is a measurement-faithful stand-in for an image-based
//! refiner: inside a configurable convergence basin around the true pose it
//! contracts the error by a fixed gain (plus residual noise); outside the
//! basin it returns bounded, direction-random corrections that carry no
//! information about the truth. Every call derives its randomness from the
//! call's identity (seed, frame, candidate pose), so refinement is
//! deterministic, thread-safe, and independent of call order.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use sha2::{Digest, Sha256};

use crate::geometry::{GeometryError, Pose, Rotation};
use crate::simulation::SensorFrame;
use crate::Real;

#[derive(thiserror::Error, Debug)]
pub enum RefineError {
    #[error("refiner configuration invalid: {0}")]
    InvalidConfig(String),
    #[error("cascade requires at least one candidate")]
    EmptyCandidates,
    #[error("cascade schedule must be non-increasing and end at 1, got {0:?}")]
    InvalidSchedule(Vec<usize>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A corrective increment: `rotation` is applied on the left of the
/// candidate's rotation, `translation` adds in the camera frame.
#[derive(Clone, Debug)]
pub struct PoseUpdate<T: Real> {
    pub rotation: Rotation<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> PoseUpdate<T> {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Angle of the rotational part — the cascade's primary ranking key.
    pub fn rotation_magnitude(&self) -> T {
        self.rotation.angle()
    }
}

/// Applies a [`PoseUpdate`] to a candidate pose, preserving frame labels.
pub fn apply_update<T: Real>(pose: &Pose<T>, update: &PoseUpdate<T>) -> Pose<T> {
    Pose::new(
        update.rotation.compose(&pose.rotation),
        pose.translation + update.translation,
        pose.from_frame,
        pose.to_frame,
    )
}

/// One refinement stage. Implementations must be cheap to call many times
/// per frame and safe to share across threads.
pub trait Refiner<T: Real>: Send + Sync {
    /// Proposes a correction for `candidate` given the frame's measurements.
    fn refine(&self, candidate: &Pose<T>, frame: &SensorFrame<T>)
        -> Result<PoseUpdate<T>, RefineError>;
}

/// Behavior envelope for [`BasinRefiner`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned + Real"
))]
pub struct BasinRefinerConfig<T: Real> {
    /// Rotation radius of the convergence basin, radians.
    pub basin_angle_rad: T,
    /// Translation radius of the convergence basin, meters.
    pub basin_translation_m: T,
    /// Fraction of the in-basin error removed per call, in [0, 1].
    pub gain: T,
    /// Residual rotation noise after an in-basin refinement, radians.
    pub residual_rot_sigma: T,
    /// Residual translation noise after an in-basin refinement, meters.
    pub residual_trans_sigma: T,
    /// Magnitude cap for out-of-basin rotation corrections, radians.
    /// Draws land in `[0.75, 1.0]` of the cap so that lost candidates
    /// always ask for visibly larger corrections than converging ones.
    pub out_of_basin_rot: T,
    /// Magnitude cap for out-of-basin translation corrections, meters.
    pub out_of_basin_trans: T,
    /// Stream seed mixed into every per-call random state.
    pub seed: u64,
}

impl<T: Real> Default for BasinRefinerConfig<T> {
    fn default() -> Self {
        Self {
            basin_angle_rad: T::lit(0.2),
            basin_translation_m: T::lit(0.05),
            gain: T::lit(0.8),
            residual_rot_sigma: T::lit(0.01),
            residual_trans_sigma: T::lit(0.002),
            out_of_basin_rot: T::lit(0.3),
            out_of_basin_trans: T::lit(0.1),
            seed: 0,
        }
    }
}

impl<T: Real> BasinRefinerConfig<T> {
    pub fn validate(&self) -> Result<(), RefineError> {
        if !(self.gain >= T::zero() && self.gain <= T::one()) {
            return Err(RefineError::InvalidConfig(format!(
                "gain must lie in [0, 1], got {}",
                self.gain.as_f64()
            )));
        }
        if self.basin_angle_rad <= T::zero() || self.basin_translation_m <= T::zero() {
            return Err(RefineError::InvalidConfig(
                "basin radii must be positive".into(),
            ));
        }
        for (name, v) in [
            ("residual_rot_sigma", self.residual_rot_sigma),
            ("residual_trans_sigma", self.residual_trans_sigma),
            ("out_of_basin_rot", self.out_of_basin_rot),
            ("out_of_basin_trans", self.out_of_basin_trans),
        ] {
            if v < T::zero() {
                return Err(RefineError::InvalidConfig(format!(
                    "{name} must be non-negative, got {}",
                    v.as_f64()
                )));
            }
        }
        Ok(())
    }

    /// Noise-free ideal: every in-basin call recovers the truth exactly.
    pub fn exact() -> Self {
        Self {
            gain: T::one(),
            residual_rot_sigma: T::zero(),
            residual_trans_sigma: T::zero(),
            ..Self::default()
        }
    }
}

/// Synthetic refinement stage with an explicit convergence basin.
#[derive(Clone, Debug)]
pub struct BasinRefiner<T: Real> {
    config: BasinRefinerConfig<T>,
}

impl<T: Real> BasinRefiner<T> {
    pub fn new(config: BasinRefinerConfig<T>) -> Result<Self, RefineError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &BasinRefinerConfig<T> {
        &self.config
    }

    /// Random state unique to (seed, frame, candidate pose). Quaternions are
    /// sign-canonicalized first so `q` and `-q` (the same rotation) hash
    /// identically.
    fn call_rng(&self, candidate: &Pose<T>, frame: &SensorFrame<T>) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.config.seed.to_le_bytes());
        hasher.update(frame.index.to_le_bytes());
        hasher.update(frame.timestamp_s.as_f64().to_bits().to_le_bytes());
        let mut wxyz = candidate.rotation.wxyz().map(Real::as_f64);
        let flip = wxyz
            .iter()
            .find(|c| **c != 0.0)
            .is_some_and(|first| *first < 0.0);
        if flip {
            for c in &mut wxyz {
                *c = -*c;
            }
        }
        for c in wxyz {
            hasher.update(c.to_bits().to_le_bytes());
        }
        for c in [
            candidate.translation.x,
            candidate.translation.y,
            candidate.translation.z,
        ] {
            hasher.update(c.as_f64().to_bits().to_le_bytes());
        }
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }
}

impl<T: Real> Refiner<T> for BasinRefiner<T> {
    fn refine(
        &self,
        candidate: &Pose<T>,
        frame: &SensorFrame<T>,
    ) -> Result<PoseUpdate<T>, RefineError> {
        let truth = frame.truth().object_in_camera()?;
        let rot_error = candidate.rotation.geodesic_angle(&truth.rotation);
        let trans_error = (truth.translation - candidate.translation).norm();
        let mut rng = self.call_rng(candidate, frame);
        let cfg = &self.config;

        if rot_error < cfg.basin_angle_rad && trans_error < cfg.basin_translation_m {
            // Contract the pose error by `gain`, exactly, then blur with the
            // residual noise floor.
            let correction = truth
                .rotation
                .compose(&candidate.rotation.inverse())
                .log()
                * cfg.gain;
            let noise_angle: f64 = Normal::new(0.0, cfg.residual_rot_sigma.as_f64())
                .expect("validated sigma")
                .sample(&mut rng);
            let axis: [f64; 3] = UnitSphere.sample(&mut rng);
            let rot_noise = Rotation::exp(&(Vector3::from(axis).map(T::lit) * T::lit(noise_angle)));
            let trans_noise = Normal::new(0.0, cfg.residual_trans_sigma.as_f64())
                .expect("validated sigma");
            let jitter = Vector3::new(
                T::lit(trans_noise.sample(&mut rng)),
                T::lit(trans_noise.sample(&mut rng)),
                T::lit(trans_noise.sample(&mut rng)),
            );
            Ok(PoseUpdate {
                rotation: rot_noise.compose(&Rotation::exp(&correction)),
                translation: (truth.translation - candidate.translation) * cfg.gain + jitter,
            })
        } else {
            // Lost: return a bounded correction with a random direction.
            // Magnitudes sit in the top quarter of the cap so these always
            // rank behind any converging candidate's shrinking corrections.
            use rand::Rng;
            let angle = cfg.out_of_basin_rot * T::lit(0.75 + 0.25 * rng.random::<f64>());
            let axis: [f64; 3] = UnitSphere.sample(&mut rng);
            let magnitude = cfg.out_of_basin_trans * T::lit(rng.random::<f64>());
            let direction: [f64; 3] = UnitSphere.sample(&mut rng);
            Ok(PoseUpdate {
                rotation: Rotation::exp(&(Vector3::from(axis).map(T::lit) * angle)),
                translation: Vector3::from(direction).map(T::lit) * magnitude,
            })
        }
    }
}

/// Candidate counts kept after each round, e.g. `[27, 9, 3, 1]`: start from
/// at most 27 candidates, then three refine-and-prune rounds.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct CascadeSchedule {
    keep: Vec<usize>,
}

impl Default for CascadeSchedule {
    fn default() -> Self {
        Self {
            keep: vec![27, 9, 3, 1],
        }
    }
}

impl CascadeSchedule {
    pub fn new(keep: Vec<usize>) -> Result<Self, RefineError> {
        let valid = keep.len() >= 2
            && keep.last() == Some(&1)
            && keep.iter().all(|&k| k >= 1)
            && keep.windows(2).all(|w| w[0] >= w[1]);
        if valid {
            Ok(Self { keep })
        } else {
            Err(RefineError::InvalidSchedule(keep))
        }
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn rounds(&self) -> usize {
        self.keep.len() - 1
    }
}

impl TryFrom<Vec<usize>> for CascadeSchedule {
    type Error = RefineError;

    fn try_from(keep: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(keep)
    }
}

impl From<CascadeSchedule> for Vec<usize> {
    fn from(schedule: CascadeSchedule) -> Self {
        schedule.keep
    }
}

/// Per-round cascade measurements.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct RoundDiagnostics {
    pub candidates_in: usize,
    pub kept: usize,
    /// Smallest / largest proposed rotation correction this round, radians.
    pub best_update_angle: f64,
    pub worst_update_angle: f64,
}

/// Final cascade result: the surviving pose and where it came from.
#[derive(Clone, Debug)]
pub struct CascadeOutcome<T: Real> {
    pub winner: Pose<T>,
    /// Index of the winner in the input candidate list.
    pub winner_index: usize,
    pub rounds: Vec<RoundDiagnostics>,
}

/// Runs refine-rank-prune rounds until one candidate remains.
///
/// Ranking is by proposed rotation correction, then proposed translation
/// correction, then input index — a strict total order, so the outcome is
/// deterministic regardless of iteration strategy.
pub fn run_cascade<T: Real, R: Refiner<T> + ?Sized>(
    refiner: &R,
    candidates: &[Pose<T>],
    frame: &SensorFrame<T>,
    schedule: &CascadeSchedule,
) -> Result<CascadeOutcome<T>, RefineError> {
    if candidates.is_empty() {
        return Err(RefineError::EmptyCandidates);
    }
    let keep = schedule.keep();
    let mut pool: Vec<(usize, Pose<T>)> = candidates
        .iter()
        .take(keep[0])
        .cloned()
        .enumerate()
        .collect();
    let mut rounds = Vec::with_capacity(schedule.rounds());

    for target in &keep[1..] {
        let candidates_in = pool.len();
        let mut scored = Vec::with_capacity(pool.len());
        for (origin, pose) in pool {
            let update = refiner.refine(&pose, frame)?;
            let angle = update.rotation_magnitude();
            let shift = update.translation.norm();
            scored.push((angle, shift, origin, apply_update(&pose, &update)));
        }
        scored.sort_by(|a, b| {
            (a.0, a.1, a.2)
                .partial_cmp(&(b.0, b.1, b.2))
                .expect("update magnitudes are finite")
        });
        rounds.push(RoundDiagnostics {
            candidates_in,
            kept: (*target).min(scored.len()),
            best_update_angle: scored.first().map(|s| s.0.as_f64()).unwrap_or(0.0),
            worst_update_angle: scored.last().map(|s| s.0.as_f64()).unwrap_or(0.0),
        });
        scored.truncate(*target);
        pool = scored.into_iter().map(|(_, _, o, p)| (o, p)).collect();
    }

    let (winner_index, winner) = pool.into_iter().next().expect("schedule ends at 1");
    Ok(CascadeOutcome {
        winner,
        winner_index,
        rounds,
    })
}
