//! The per-frame tracking loop.
//!
//! Each step chains: odometry-based ego-motion compensation of the last
//! pose, translation re-anchoring from the gated 2D detection (center plus
//! median depth backprojected through the intrinsics), orientation
//! prediction and uncertainty-adaptive candidate sampling from the
//! world-frame filter, the refine-rank-prune cascade, and finally a filter
//! update with the winning orientation mapped back to the world frame.
//!
//! "World" here is the odometry anchor: the camera frame at initialization.
//! Filtering orientation in that fixed frame is what decouples object spin
//! from camera spin — camera rotation is removed by the compensation stage
//! before it can masquerade as object motion.

use std::time::Instant;

use crate::candidates::{sample_candidates, to_camera_frame, SamplerConfig};
use crate::geometry::{
    compensate_camera_motion, project_region, BoundingBox, CameraIntrinsics, Frame, GeometryError,
    Pose, TaitBryan,
};
use crate::kalman::{self, FilterNoiseConfig, KalmanError, KalmanState};
use crate::metrics::ObjectModel;
use crate::refine::{
    run_cascade, BasinRefiner, BasinRefinerConfig, CascadeSchedule, RefineError, Refiner,
    RoundDiagnostics,
};
use crate::simulation::SensorFrame;
use crate::Real;

#[derive(thiserror::Error, Debug)]
pub enum TrackerError {
    #[error("tracker is not initialized")]
    NotInitialized,
    #[error("frame {got} does not advance time past frame {last}")]
    OutOfOrderFrame { last: u64, got: u64 },
    #[error("no frames to track")]
    EmptySequence,
    #[error("tracker configuration invalid: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Filter(#[from] KalmanError),
    #[error(transparent)]
    Refine(#[from] RefineError),
}

/// Switches that disable one subsystem at a time for ablation studies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AblationFlags {
    /// Skip prediction, sampling, and filtering: the cascade sees a single
    /// candidate carrying the compensated previous orientation.
    pub disable_rotation_tracking: bool,
    /// Ignore detections: translation comes from compensation alone.
    pub disable_translation_update: bool,
}

/// Named ablation variants, as used by the evaluation tooling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Full,
    NoRotation,
    NoTranslation,
}

impl Variant {
    pub fn all() -> [Variant; 3] {
        [Variant::Full, Variant::NoRotation, Variant::NoTranslation]
    }

    pub fn flags(self) -> AblationFlags {
        match self {
            Variant::Full => AblationFlags::default(),
            Variant::NoRotation => AblationFlags {
                disable_rotation_tracking: true,
                ..AblationFlags::default()
            },
            Variant::NoTranslation => AblationFlags {
                disable_translation_update: true,
                ..AblationFlags::default()
            },
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = TrackerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Variant::Full),
            "no-rotation" => Ok(Variant::NoRotation),
            "no-translation" => Ok(Variant::NoTranslation),
            other => Err(TrackerError::InvalidConfig(format!(
                "unknown variant {other:?} (expected full, no-rotation, or no-translation)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::NoRotation => "no-rotation",
            Variant::NoTranslation => "no-translation",
        })
    }
}

/// Tunables for the whole loop.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned + Real"
))]
pub struct TrackerConfig<T: Real> {
    pub filter: FilterNoiseConfig<T>,
    pub sampler: SamplerConfig<T>,
    pub refiner: BasinRefinerConfig<T>,
    pub schedule: CascadeSchedule,
    /// Maximum pixel distance between the detected box center and the
    /// predicted template box center before a detection is distrusted.
    pub bbox_gate_px: T,
    pub ablation: AblationFlags,
}

impl<T: Real> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            filter: FilterNoiseConfig::default(),
            sampler: SamplerConfig::default(),
            refiner: BasinRefinerConfig::default(),
            schedule: CascadeSchedule::default(),
            bbox_gate_px: T::lit(150.0),
            ablation: AblationFlags::default(),
        }
    }
}

impl<T: Real> TrackerConfig<T> {
    pub fn validate(&self) -> Result<(), TrackerError> {
        self.filter
            .validate()
            .map_err(|e| TrackerError::InvalidConfig(e.to_string()))?;
        self.refiner.validate()?;
        if self.sampler.sigma_threshold <= T::zero() {
            return Err(TrackerError::InvalidConfig(
                "sampler sigma_threshold must be positive".into(),
            ));
        }
        if self.bbox_gate_px <= T::zero() {
            return Err(TrackerError::InvalidConfig(
                "bbox_gate_px must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.ablation = variant.flags();
        self
    }
}

/// Where the frame's translation estimate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationSource {
    /// Backprojected from the detection center and median depth.
    Detection,
    /// Carried over from ego-motion compensation (no usable detection).
    Compensated,
}

/// Everything observable about one tracking step.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct TrackResult<T: Real> {
    pub frame_index: u64,
    pub timestamp_s: T,
    /// Estimated pose, object(k) -> camera(k).
    pub object_cam: Pose<T>,
    pub translation_source: TranslationSource,
    /// True when a detection arrived but failed the gate or backprojection.
    pub detection_rejected: bool,
    /// True when every hypothesis stayed outside the refiner's convergence
    /// basin: the pose falls back to the prediction and the orientation
    /// filter coasts instead of ingesting the measurement.
    pub refinement_rejected: bool,
    pub cascade: Vec<RoundDiagnostics>,
    /// Filter orientation sigma after the update, radians per axis.
    pub filter_sigma: [f64; 3],
    /// Wall-clock step cost. Excluded from serialized logs so that output
    /// artifacts stay identical across machines and reruns.
    #[serde(skip, default)]
    pub step_seconds: f64,
}

/// Mutable tracking state between frames.
#[derive(Clone, Debug)]
pub struct TrackerState<T: Real> {
    /// camera(k) -> world (odometry anchor frame).
    pub camera_world: Pose<T>,
    /// Latest estimate, object(k) -> camera(k).
    pub object_cam: Pose<T>,
    /// World-frame orientation filter.
    pub filter: KalmanState<T>,
    /// Predicted detection box for gating, if the object projects.
    pub template_bbox: Option<BoundingBox<T>>,
    pub frame_index: u64,
    pub last_timestamp: T,
}

/// The tracking loop. Generic over the refinement stage so synthetic and
/// real refiners interchange freely.
pub struct Tracker<T: Real, R: Refiner<T>> {
    config: TrackerConfig<T>,
    intrinsics: CameraIntrinsics<T>,
    model: ObjectModel<T>,
    refiner: R,
    state: Option<TrackerState<T>>,
}

impl<T: Real> Tracker<T, BasinRefiner<T>> {
    /// Builds a tracker whose refinement stage is the built-in synthetic
    /// refiner configured by `config.refiner`.
    pub fn new(
        config: TrackerConfig<T>,
        intrinsics: CameraIntrinsics<T>,
        model: ObjectModel<T>,
    ) -> Result<Self, TrackerError> {
        let refiner = BasinRefiner::new(config.refiner)?;
        Self::with_refiner(config, intrinsics, model, refiner)
    }
}

impl<T: Real, R: Refiner<T>> Tracker<T, R> {
    pub fn with_refiner(
        config: TrackerConfig<T>,
        intrinsics: CameraIntrinsics<T>,
        model: ObjectModel<T>,
        refiner: R,
    ) -> Result<Self, TrackerError> {
        config.validate()?;
        Ok(Self {
            config,
            intrinsics,
            model,
            refiner,
            state: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig<T> {
        &self.config
    }

    pub fn state(&self) -> Option<&TrackerState<T>> {
        self.state.as_ref()
    }

    /// Starts tracking from a known pose at `frame`. The odometry anchor
    /// ("world") is defined as this frame's camera frame.
    pub fn initialize(
        &mut self,
        frame: &SensorFrame<T>,
        object_cam: Pose<T>,
    ) -> Result<(), TrackerError> {
        let object_cam =
            object_cam.with_frames(Frame::Object(frame.index), Frame::Camera(frame.index));
        let camera_world = Pose::identity(Frame::Camera(frame.index), Frame::World);
        let world_rotation = camera_world.rotation.compose(&object_cam.rotation);
        let filter = KalmanState::new(
            TaitBryan::from_rotation(&world_rotation),
            self.config.filter.initial_variance,
            frame.timestamp_s,
        );
        let template_bbox = project_region(&self.intrinsics, &object_cam, &self.model.points).ok();
        self.state = Some(TrackerState {
            camera_world,
            object_cam,
            filter,
            template_bbox,
            frame_index: frame.index,
            last_timestamp: frame.timestamp_s,
        });
        Ok(())
    }

    /// Advances the estimate by one frame.
    pub fn step(&mut self, frame: &SensorFrame<T>) -> Result<TrackResult<T>, TrackerError> {
        let started = Instant::now();
        let state = self.state.as_mut().ok_or(TrackerError::NotInitialized)?;
        let dt = frame.timestamp_s - state.last_timestamp;
        if dt <= T::zero() {
            return Err(TrackerError::OutOfOrderFrame {
                last: state.frame_index,
                got: frame.index,
            });
        }

        // Ego-motion: fold the odometry increment into the camera anchor
        // pose and move the previous object pose into the new camera frame.
        state.camera_world = state.camera_world.compose(&frame.vio_delta.invert())?;
        let compensated = compensate_camera_motion(&state.object_cam, &frame.vio_delta)?
            .with_frames(Frame::Object(frame.index), Frame::Camera(frame.index));

        // Translation: prefer the detection (backprojected center at median
        // depth) when it passes the template gate.
        let mut translation = compensated.translation;
        let mut translation_source = TranslationSource::Compensated;
        let mut detection_rejected = false;
        if !self.config.ablation.disable_translation_update {
            if let Some(obs) = &frame.bbox {
                let gate_ok = match &state.template_bbox {
                    Some(template) => {
                        let du = obs.bbox.u - template.u;
                        let dv = obs.bbox.v - template.v;
                        (du * du + dv * dv).sqrt() <= self.config.bbox_gate_px
                    }
                    None => true,
                };
                if gate_ok {
                    match self
                        .intrinsics
                        .backproject(obs.bbox.u, obs.bbox.v, obs.median_depth_m)
                    {
                        Ok(point) => {
                            translation = point;
                            translation_source = TranslationSource::Detection;
                        }
                        Err(_) => detection_rejected = true,
                    }
                } else {
                    detection_rejected = true;
                }
            }
        }

        // Orientation hypotheses. The center candidate doubles as the
        // fallback estimate when refinement fails to converge.
        let (candidates, center_index) = if self.config.ablation.disable_rotation_tracking {
            let carried = Pose::new(
                compensated.rotation,
                translation,
                Frame::Object(frame.index),
                Frame::Camera(frame.index),
            );
            (vec![carried], 0)
        } else {
            kalman::predict(&mut state.filter, dt, &self.config.filter)?;
            let mut set = sample_candidates(&state.filter, &self.config.sampler);
            set.translation = translation;
            let center = set.center_index();
            (to_camera_frame(&set, &state.camera_world), center)
        };
        let fallback = candidates[center_index];

        let outcome = run_cascade(&self.refiner, &candidates, frame, &self.config.schedule)?;

        // Divergence gate: in-basin refinements ask for corrections below
        // gain * basin_angle (plus residual noise), while lost candidates ask
        // for at least 0.75 * out_of_basin_rot — disjoint ranges under the
        // defaults. A winner at the out-of-basin floor means no hypothesis
        // converged, so its pose is noise: keep the prediction as the
        // estimate instead.
        let reject_floor = T::lit(0.75) * self.config.refiner.out_of_basin_rot;
        let refinement_rejected = reject_floor > T::zero()
            && outcome
                .rounds
                .last()
                .is_some_and(|round| round.best_update_angle >= reject_floor.as_f64());
        let estimate = if refinement_rejected {
            fallback
        } else {
            outcome.winner
        };

        if !self.config.ablation.disable_rotation_tracking {
            if refinement_rejected {
                // Coast. There is no usable orientation measurement, so the
                // mean stays at the prediction, and three adjustments keep
                // the next frames recoverable: the rate estimate halves (a
                // wrong rate is what drives the prediction away; decaying it
                // degrades toward carry-forward, which a periodic motion
                // re-enters), the previous rate is aligned so the decay is
                // not mistaken for acceleration, and the sampling variance
                // is capped at its initialization level — wider brackets
                // wrap around the circle and stop meaning anything.
                let half = T::lit(0.5);
                state.filter.omega *= half;
                state.filter.omega_prev = state.filter.omega;
                let cap = self.config.filter.initial_variance;
                state.filter.covariance = state.filter.covariance.map(|p| p.min(cap));
            } else {
                let world_rotation = state.camera_world.rotation.compose(&estimate.rotation);
                kalman::update(
                    &mut state.filter,
                    &TaitBryan::from_rotation(&world_rotation),
                    &self.config.filter,
                );
            }
        }

        state.object_cam = estimate;
        state.template_bbox =
            project_region(&self.intrinsics, &estimate, &self.model.points).ok();
        state.frame_index = frame.index;
        state.last_timestamp = frame.timestamp_s;

        let sigma = kalman::per_axis_sigma(&state.filter);
        Ok(TrackResult {
            frame_index: frame.index,
            timestamp_s: frame.timestamp_s,
            object_cam: estimate,
            translation_source,
            detection_rejected,
            refinement_rejected,
            cascade: outcome.rounds,
            filter_sigma: [sigma.x.as_f64(), sigma.y.as_f64(), sigma.z.as_f64()],
            step_seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// Tracks a whole sequence: initializes on the first frame with the
    /// supplied pose, then steps through the rest.
    pub fn run_sequence(
        &mut self,
        frames: &[SensorFrame<T>],
        initial_object_cam: Pose<T>,
    ) -> Result<Vec<TrackResult<T>>, TrackerError> {
        let first = frames.first().ok_or(TrackerError::EmptySequence)?;
        self.initialize(first, initial_object_cam)?;
        let mut results = Vec::with_capacity(frames.len());
        for frame in &frames[1..] {
            results.push(self.step(frame)?);
        }
        Ok(results)
    }
}

/// Serializes results as JSON lines. Wall-clock timings are omitted, so the
/// log depends only on inputs and configuration.
pub fn results_to_jsonl<T: Real + serde::Serialize>(
    results: &[TrackResult<T>],
) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for result in results {
        out.push_str(&serde_json::to_string(result)?);
        out.push('\n');
    }
    Ok(out)
}
