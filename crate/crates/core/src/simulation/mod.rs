//! Scenario scripting and synthetic sensor generation.
//!
//! A [`ScenarioConfig`] scripts an object and a camera trajectory, picks an
//! object model, and sets sensor noise levels. [`generate_scenario`] rolls
//! the script into per-frame [`SensorFrame`]s: an odometry increment for the
//! camera, an optional detector output (2D box plus median depth), and the
//! ground truth kept aside for oracles and scoring. All randomness flows
//! from one seeded stream in a fixed draw order, so a config reproduces its
//! frames byte for byte.

mod io;
mod trajectory;

pub use io::{read_scenario, scenario_from_jsonl, scenario_to_jsonl, write_scenario};
pub use trajectory::{TrajectoryKind, TrajectorySpec};

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use sha2::{Digest, Sha256};

use crate::geometry::{
    project_region, BoundingBox, CameraIntrinsics, Frame, GeometryError, Pose, Rotation,
};
use crate::metrics::{MetricsError, ObjectModel};
use crate::Real;

#[derive(thiserror::Error, Debug)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("unknown object model {0:?} (not a built-in id or readable vertex file)")]
    UnknownModel(String),
    #[error("object is behind the camera at frame {frame}")]
    ObjectBehindCamera { frame: u64 },
    #[error("scenario file is malformed at line {line}: {msg}")]
    ParseScenario { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Standard deviations (and one probability) for the synthetic sensors.
/// All values may be zero for exact measurements.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Rotation noise on each odometry increment, radians.
    pub vio_rot_sigma: f64,
    /// Translation noise on each odometry increment, meters per axis.
    pub vio_trans_sigma: f64,
    /// Detector box-center jitter, pixels per axis.
    pub bbox_pixel_sigma: f64,
    /// Depth noise, meters.
    pub depth_sigma: f64,
    /// Systematic depth offset, meters.
    pub depth_bias: f64,
    /// Probability that the detector misses a frame entirely.
    pub dropout_prob: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            vio_rot_sigma: 0.0,
            vio_trans_sigma: 0.0,
            bbox_pixel_sigma: 0.0,
            depth_sigma: 0.0,
            depth_bias: 0.0,
            dropout_prob: 0.0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let sigmas = [
            ("vio_rot_sigma", self.vio_rot_sigma),
            ("vio_trans_sigma", self.vio_trans_sigma),
            ("bbox_pixel_sigma", self.bbox_pixel_sigma),
            ("depth_sigma", self.depth_sigma),
        ];
        for (name, value) in sigmas {
            if !value.is_finite() || value < 0.0 {
                return Err(SimulationError::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if !self.depth_bias.is_finite() {
            return Err(SimulationError::InvalidConfig(
                "depth_bias must be finite".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(SimulationError::InvalidConfig(format!(
                "dropout_prob must lie in [0, 1], got {}",
                self.dropout_prob
            )));
        }
        Ok(())
    }
}

/// Complete recipe for one synthetic sequence.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub frame_rate_hz: f64,
    pub duration_s: f64,
    /// Built-in model id (`box`, `cylinder`, `tetrahedron`) or a vertex
    /// file path.
    pub object_model: String,
    pub object: TrajectorySpec,
    pub camera: TrajectorySpec,
    pub intrinsics: CameraIntrinsics<f64>,
    pub noise: NoiseSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioPreset::Slow.config()
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.frame_rate_hz.is_finite() && self.frame_rate_hz > 0.0) {
            return Err(SimulationError::InvalidConfig(format!(
                "frame_rate_hz must be positive, got {}",
                self.frame_rate_hz
            )));
        }
        if !(self.duration_s.is_finite() && self.duration_s * self.frame_rate_hz >= 1.0) {
            return Err(SimulationError::InvalidConfig(
                "duration_s must cover at least one frame interval".into(),
            ));
        }
        self.object.validate()?;
        self.camera.validate()?;
        self.noise.validate()?;
        CameraIntrinsics::new(
            self.intrinsics.fx,
            self.intrinsics.fy,
            self.intrinsics.cx,
            self.intrinsics.cy,
            self.intrinsics.width,
            self.intrinsics.height,
        )
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    /// Number of frames the scenario generates (inclusive endpoints).
    pub fn frame_count(&self) -> u64 {
        (self.duration_s * self.frame_rate_hz + 1e-9).floor() as u64 + 1
    }

    pub fn to_toml(&self) -> Result<String, SimulationError> {
        toml::to_string_pretty(self)
            .map_err(|e| SimulationError::InvalidConfig(format!("config does not serialize: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self, SimulationError> {
        toml::from_str(text)
            .map_err(|e| SimulationError::InvalidConfig(format!("bad config file: {e}")))
    }

    /// Hex SHA-256 of the canonical (JSON) form; identifies a scenario in
    /// reports and output names.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario config always serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut acc, byte| {
                use std::fmt::Write;
                let _ = write!(acc, "{byte:02x}");
                acc
            })
    }
}

/// Ready-made scenario difficulty tiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioPreset {
    /// Gentle constant-rate drift, noise-free sensors.
    Slow,
    /// Oscillating object and camera beyond typical handheld speeds.
    Fast,
    /// Near the breaking point: large relative rates plus heavy sensor
    /// noise and detector dropouts.
    Stress,
}

impl std::str::FromStr for ScenarioPreset {
    type Err = SimulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slow" => Ok(Self::Slow),
            "fast" => Ok(Self::Fast),
            "stress" => Ok(Self::Stress),
            other => Err(SimulationError::InvalidConfig(format!(
                "unknown preset {other:?} (expected slow, fast, or stress)"
            ))),
        }
    }
}

impl std::fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Slow => "slow",
            Self::Fast => "fast",
            Self::Stress => "stress",
        })
    }
}

impl ScenarioPreset {
    pub fn config(self) -> ScenarioConfig {
        let intrinsics = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480)
            .expect("preset intrinsics are valid");
        match self {
            Self::Slow => ScenarioConfig {
                seed: 7,
                frame_rate_hz: 30.0,
                duration_s: 5.0,
                object_model: "box".into(),
                object: TrajectorySpec {
                    kind: TrajectoryKind::ConstantVelocity,
                    start_position: [0.3, -0.2, 2.0],
                    start_rpy: [0.2, -0.1, 0.4],
                    linear_velocity: [0.05, 0.02, 0.01],
                    angular_velocity: [0.1, 0.05, 0.2],
                },
                camera: TrajectorySpec::stationary([0.0; 3]),
                intrinsics,
                noise: NoiseSpec::default(),
            },
            Self::Fast => ScenarioConfig {
                seed: 11,
                frame_rate_hz: 30.0,
                duration_s: 5.0,
                object_model: "box".into(),
                object: TrajectorySpec {
                    kind: TrajectoryKind::Sinusoidal { frequency_hz: 0.5 },
                    start_position: [0.0, 0.0, 2.0],
                    start_rpy: [0.3, -0.1, 0.2],
                    linear_velocity: [1.1, 0.7, 0.3],
                    angular_velocity: [0.8, 0.5, 2.4],
                },
                camera: TrajectorySpec {
                    kind: TrajectoryKind::Sinusoidal { frequency_hz: 0.5 },
                    start_position: [0.0; 3],
                    start_rpy: [0.0; 3],
                    linear_velocity: [-1.3, 0.2, -0.2],
                    angular_velocity: [-0.6, 0.4, -0.6],
                },
                intrinsics,
                noise: NoiseSpec {
                    vio_rot_sigma: 0.002,
                    vio_trans_sigma: 0.002,
                    bbox_pixel_sigma: 2.0,
                    depth_sigma: 0.01,
                    depth_bias: 0.005,
                    dropout_prob: 0.05,
                },
            },
            Self::Stress => ScenarioConfig {
                seed: 13,
                frame_rate_hz: 30.0,
                duration_s: 5.0,
                object_model: "box".into(),
                object: TrajectorySpec {
                    kind: TrajectoryKind::Sinusoidal { frequency_hz: 1.0 },
                    start_position: [0.0, 0.0, 2.0],
                    start_rpy: [0.3, -0.1, 0.2],
                    linear_velocity: [1.7, 1.0, 0.4],
                    angular_velocity: [1.2, 0.9, 5.5],
                },
                camera: TrajectorySpec {
                    kind: TrajectoryKind::Sinusoidal { frequency_hz: 1.0 },
                    start_position: [0.0; 3],
                    start_rpy: [0.0; 3],
                    linear_velocity: [-2.8, -1.4, 0.3],
                    angular_velocity: [-0.8, 0.6, -4.2],
                },
                intrinsics,
                noise: NoiseSpec {
                    vio_rot_sigma: 0.005,
                    vio_trans_sigma: 0.005,
                    bbox_pixel_sigma: 3.0,
                    depth_sigma: 0.02,
                    depth_bias: 0.01,
                    dropout_prob: 0.1,
                },
            },
        }
    }
}

/// True poses for one frame, kept out of the estimator's reach.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct GroundTruth<T: Real> {
    /// object(k) -> world.
    pub object_world: Pose<T>,
    /// camera(k) -> world.
    pub camera_world: Pose<T>,
}

impl<T: Real> GroundTruth<T> {
    /// True object pose expressed in the camera frame of the same instant.
    pub fn object_in_camera(&self) -> Result<Pose<T>, GeometryError> {
        self.camera_world.invert().compose(&self.object_world)
    }
}

/// Detector output: a 2D box plus the median depth inside it.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct BboxObservation<T: Real> {
    pub bbox: BoundingBox<T>,
    pub median_depth_m: T,
}

/// Everything the tracker receives for one frame, plus sealed ground truth.
///
/// The truth is deliberately behind an accessor rather than a public field:
/// estimator code paths take measurements from the public fields, while
/// oracles and scoring reach the truth explicitly through
/// [`SensorFrame::truth`].
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: serde::Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct SensorFrame<T: Real> {
    pub index: u64,
    pub timestamp_s: T,
    /// Odometry increment camera(index-1) -> camera(index); identity on the
    /// first frame.
    pub vio_delta: Pose<T>,
    /// Detector output, `None` when the detector dropped the frame.
    pub bbox: Option<BboxObservation<T>>,
    truth: GroundTruth<T>,
}

impl<T: Real> SensorFrame<T> {
    pub fn new(
        index: u64,
        timestamp_s: T,
        vio_delta: Pose<T>,
        bbox: Option<BboxObservation<T>>,
        truth: GroundTruth<T>,
    ) -> Self {
        Self {
            index,
            timestamp_s,
            vio_delta,
            bbox,
            truth,
        }
    }

    pub fn truth(&self) -> &GroundTruth<T> {
        &self.truth
    }
}

/// Resolves a model id: built-in name first, then a vertex file path.
pub fn resolve_model(id: &str) -> Result<ObjectModel<f64>, SimulationError> {
    if let Some(model) = ObjectModel::by_id(id) {
        return Ok(model);
    }
    if std::path::Path::new(id).exists() {
        return Ok(ObjectModel::from_vertex_file(id, false)?);
    }
    Err(SimulationError::UnknownModel(id.to_string()))
}

/// Perturbs the true camera increment `camera(k-1) -> camera(k)` with the
/// configured odometry noise. Draw order is fixed: rotation angle, rotation
/// axis, then translation x/y/z.
pub fn measure_vio(
    prev_camera_world: &Pose<f64>,
    camera_world: &Pose<f64>,
    noise: &NoiseSpec,
    rng: &mut impl Rng,
) -> Result<Pose<f64>, SimulationError> {
    let truth_delta = camera_world.invert().compose(prev_camera_world)?;
    let rot_noise = Normal::new(0.0, noise.vio_rot_sigma)
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    let trans_noise = Normal::new(0.0, noise.vio_trans_sigma)
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    let angle = rot_noise.sample(rng);
    let axis: [f64; 3] = UnitSphere.sample(rng);
    let jitter = Vector3::new(
        trans_noise.sample(rng),
        trans_noise.sample(rng),
        trans_noise.sample(rng),
    );
    let perturb = Pose::new(
        Rotation::exp(&(Vector3::from(axis) * angle)),
        jitter,
        truth_delta.to_frame,
        truth_delta.to_frame,
    );
    Ok(perturb.compose(&truth_delta)?)
}

/// Projects the model under the true object-in-camera pose and jitters the
/// detection. Returns `Ok(None)` when the dropout draw discards the frame.
/// Draw order is fixed: dropout, center u, center v, depth.
pub fn measure_bbox(
    object_cam: &Pose<f64>,
    model: &ObjectModel<f64>,
    intrinsics: &CameraIntrinsics<f64>,
    noise: &NoiseSpec,
    rng: &mut impl Rng,
) -> Result<Option<BboxObservation<f64>>, SimulationError> {
    let mut bbox = project_region(intrinsics, object_cam, &model.points)?;
    let mut depths: Vec<f64> = model
        .points
        .iter()
        .map(|p| object_cam.transform_point(p).z)
        .collect();
    depths.sort_by(|a, b| a.partial_cmp(b).expect("finite depths"));
    let mid = depths.len() / 2;
    let median_depth = if depths.len() % 2 == 0 {
        (depths[mid - 1] + depths[mid]) / 2.0
    } else {
        depths[mid]
    };

    let pixel_noise = Normal::new(0.0, noise.bbox_pixel_sigma)
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    let depth_noise = Normal::new(0.0, noise.depth_sigma)
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    let dropped = rng.random::<f64>() < noise.dropout_prob;
    let du = pixel_noise.sample(rng);
    let dv = pixel_noise.sample(rng);
    let dz = depth_noise.sample(rng);
    if dropped {
        return Ok(None);
    }
    bbox.u += du;
    bbox.v += dv;
    Ok(Some(BboxObservation {
        bbox,
        median_depth_m: median_depth + noise.depth_bias + dz,
    }))
}

/// Rolls a scenario into its frame sequence. Deterministic in the config:
/// the same config (seed included) always produces identical frames.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Vec<SensorFrame<f64>>, SimulationError> {
    config.validate()?;
    let model = resolve_model(&config.object_model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let count = config.frame_count();
    let mut frames = Vec::with_capacity(count as usize);
    let mut prev_camera_world: Option<Pose<f64>> = None;

    for k in 0..count {
        let t = k as f64 / config.frame_rate_hz;
        let (obj_r, obj_t) = config.object.pose_at(t);
        let (cam_r, cam_t) = config.camera.pose_at(t);
        let object_world = Pose::new(obj_r, obj_t, Frame::Object(k), Frame::World);
        let camera_world = Pose::new(cam_r, cam_t, Frame::Camera(k), Frame::World);

        let vio_delta = match &prev_camera_world {
            None => Pose::identity(Frame::Camera(k), Frame::Camera(k)),
            Some(prev) => measure_vio(prev, &camera_world, &config.noise, &mut rng)?,
        };

        let object_cam = camera_world.invert().compose(&object_world)?;
        if object_cam.translation.z <= 0.0 {
            return Err(SimulationError::ObjectBehindCamera { frame: k });
        }
        let bbox = measure_bbox(&object_cam, &model, &config.intrinsics, &config.noise, &mut rng)?;

        frames.push(SensorFrame::new(
            k,
            t,
            vio_delta,
            bbox,
            GroundTruth {
                object_world,
                camera_world,
            },
        ));
        prev_camera_world = Some(camera_world);
    }
    Ok(frames)
}
