//! The acceptance gate: ten numbered end-to-end checks, one test each.
//!
//! Every test prints a single `ACCEPTANCE <n> (<slug>): PASS|FAIL` line
//! (visible with `cargo test --test acceptance -- --show-output`) and then
//! asserts, so a red run also names each violated bound. Tolerances are
//! pinned here, in code, on purpose: loosening one is a visible diff.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use kinetrack::candidates::{sample_candidates, SamplerConfig};
use kinetrack::geometry::{
    compensate_camera_motion, wrap_angle, Frame, Pose, Rotation, TaitBryan,
};
use kinetrack::kalman::{self, FilterNoiseConfig, KalmanState};
use kinetrack::metrics::{
    add_distance, adds_distance, adds_distance_brute, auc, ObjectModel,
};
use kinetrack::refine::{run_cascade, BasinRefiner, BasinRefinerConfig, CascadeSchedule};
use kinetrack::simulation::{generate_scenario, ScenarioPreset};
use kinetrack::tracker::{Tracker, TrackerConfig};

/// Collects violations so the verdict line always prints before any panic.
struct Criterion {
    number: u8,
    slug: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: u8, slug: &'static str) -> Self {
        Self {
            number,
            slug,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    fn conclude(self) {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("ACCEPTANCE {} ({}): {verdict}", self.number, self.slug);
        assert!(
            self.failures.is_empty(),
            "acceptance {} ({}) failed:\n{}",
            self.number,
            self.slug,
            self.failures.join("\n")
        );
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation<f64> {
    let axis: [f64; 3] = UnitSphere.sample(rng);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    Rotation::from_axis_angle(&Vector3::from(axis), angle)
}

fn random_translation(rng: &mut ChaCha8Rng, scale: f64) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kinetrack"));
    cmd.env_remove(kinetrack_cli::run::OUT_ROOT_ENV);
    cmd
}

fn sha256_file(path: &Path) -> String {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// 1. The published hardware-scale accuracy numbers of the system this
///    artifact models depend on pretrained perception networks and a
///    photorealistic renderer, neither of which ships here; the refinement
///    stage is a measurement-faithful synthetic stand-in. Absolute scores
///    are therefore out of scope by declaration, and the binding checks are
///    the property-based criteria below. This test documents that decision
///    and verifies that the substitute pipeline actually produces scores.
#[test]
fn criterion_01_absolute_benchmark_scores_are_out_of_scope() {
    let mut c = Criterion::new(1, "absolute-benchmark-out-of-scope");

    let config = ScenarioPreset::Slow.config();
    let frames = generate_scenario(&config).unwrap();
    let outcome = kinetrack_cli::run::run_tracking(&config, &frames, TrackerConfig::default());
    match outcome {
        Ok(run) => {
            for (name, value) in [
                ("auc_add", run.report.auc_add),
                ("auc_adds", run.report.auc_adds),
                ("success_rate", run.report.success_rate),
            ] {
                c.check(value.is_finite() && (0.0..=1.0).contains(&value), || {
                    format!("substitute pipeline produced {name} = {value}")
                });
            }
        }
        Err(e) => c.check(false, || format!("substitute pipeline failed: {e}")),
    }
    c.conclude();
}

/// 2. Moving the camera while the object stays put in the world must be
///    invisible to the compensated object pose: 1000 random camera motions,
///    every translation error below 1e-9 m, inside one second.
#[test]
fn criterion_02_camera_motion_compensation_is_exact() {
    let mut c = Criterion::new(2, "ego-motion-compensation-exact");
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let started = Instant::now();

    for case in 0..1000 {
        let object_world = Pose::new(
            random_rotation(&mut rng),
            random_translation(&mut rng, 2.0),
            Frame::Object(0),
            Frame::World,
        );
        let cam_prev = Pose::new(
            random_rotation(&mut rng),
            random_translation(&mut rng, 2.0),
            Frame::Camera(0),
            Frame::World,
        );
        let cam_now = Pose::new(
            random_rotation(&mut rng),
            random_translation(&mut rng, 2.0),
            Frame::Camera(1),
            Frame::World,
        );

        let delta = cam_now.invert().compose(&cam_prev).unwrap();
        let object_prev = cam_prev.invert().compose(&object_world).unwrap();
        let truth_now = cam_now.invert().compose(&object_world).unwrap();

        let compensated = compensate_camera_motion(&object_prev, &delta).unwrap();
        let err = (compensated.translation - truth_now.translation).norm();
        c.check(err < 1e-9, || {
            format!("case {case}: compensated translation off by {err} m")
        });
    }

    let elapsed = started.elapsed().as_secs_f64();
    c.check(elapsed < 1.0, || {
        format!("1000 compensations took {elapsed:.3} s (budget 1 s)")
    });
    c.conclude();
}

/// 3. The pinhole model must invert itself: project(backproject(u, v, z))
///    returns (u, v) within 1e-9 px on 1000 random samples, and the
///    principal-point / one-focal-length-offset hand cases are exact.
#[test]
fn criterion_03_pinhole_projection_round_trips() {
    let mut c = Criterion::new(3, "pinhole-round-trip");
    let intrinsics = ScenarioPreset::Slow.config().intrinsics;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);

    for case in 0..1000 {
        let u = rng.random_range(0.0..intrinsics.width as f64);
        let v = rng.random_range(0.0..intrinsics.height as f64);
        let z = rng.random_range(0.1..10.0);
        let point = intrinsics.backproject(u, v, z).unwrap();
        let (u2, v2) = intrinsics.project(&point).unwrap();
        c.check((u2 - u).abs() < 1e-9 && (v2 - v).abs() < 1e-9, || {
            format!("case {case}: ({u}, {v}, z={z}) round-tripped to ({u2}, {v2})")
        });
    }

    // A point on the optical axis lands exactly on the principal point.
    let (u0, v0) = intrinsics.project(&Vector3::new(0.0, 0.0, 3.0)).unwrap();
    c.check(u0 == intrinsics.cx && v0 == intrinsics.cy, || {
        format!("principal point projected to ({u0}, {v0})")
    });
    // One focal length of pixel offset at depth 2 is exactly 2 m of lateral
    // offset (the ratios cancel without rounding).
    let p = intrinsics
        .backproject(intrinsics.cx + intrinsics.fx, intrinsics.cy + intrinsics.fy, 2.0)
        .unwrap();
    c.check(p == Vector3::new(2.0, 2.0, 2.0), || {
        format!("offset-pixel backprojection gave {p:?}")
    });
    c.conclude();
}

/// 4. Orientation filter contracts: (a) exact lock onto constant-rate motion
///    by frame 2, (b) zero process noise under constant velocity, (c) exact
///    mean invariance on zero innovation, (d) updates never grow variance,
///    (e) no transient when the trajectory crosses the angle seam.
#[test]
fn criterion_04_orientation_filter_contracts_hold() {
    let mut c = Criterion::new(4, "orientation-filter-contracts");
    let dt = 1.0 / 30.0;

    // (a) Constant rate, noise-free measurements: exact after frame 2.
    let noise = FilterNoiseConfig {
        measurement_variance: 1e-12,
        ..FilterNoiseConfig::default()
    };
    let theta0 = TaitBryan::new(0.2, -0.4, 1.0);
    let rate = Vector3::new(0.7, -0.3, 0.5);
    let mut state = KalmanState::new(theta0, 0.05, 0.0);
    for k in 1..=90u32 {
        let t = f64::from(k) * dt;
        let truth = TaitBryan::from_vector(&Vector3::new(
            wrap_angle(theta0.roll + rate.x * t),
            wrap_angle(theta0.pitch + rate.y * t),
            wrap_angle(theta0.yaw + rate.z * t),
        ));
        kalman::predict(&mut state, dt, &noise).unwrap();
        kalman::update(&mut state, &truth, &noise);
        if k >= 2 {
            let err = (state.theta.as_vector() - truth.as_vector())
                .map(wrap_angle)
                .norm();
            c.check(err < 1e-9, || {
                format!("(a) frame {k}: constant-rate error {err}")
            });
        }
    }

    // (b) Constant velocity with a zero floor adds exactly no process noise.
    let no_floor = FilterNoiseConfig {
        q_floor: 0.0,
        ..FilterNoiseConfig::default()
    };
    let mut state = KalmanState::new(TaitBryan::zero(), 0.125, 0.0);
    state.omega = Vector3::new(1.0, 2.0, 3.0);
    state.omega_prev = state.omega;
    kalman::predict(&mut state, dt, &no_floor).unwrap();
    c.check(state.covariance == Vector3::repeat(0.125), || {
        format!("(b) covariance changed to {:?}", state.covariance)
    });

    // (c) Observing exactly the predicted mean moves nothing, bitwise.
    let defaults = FilterNoiseConfig::default();
    let mean = TaitBryan::new(0.3, -1.2, 2.9);
    let mut state = KalmanState::new(mean, 0.7, 0.0);
    kalman::update(&mut state, &mean, &defaults);
    c.check(
        state.theta.roll == mean.roll
            && state.theta.pitch == mean.pitch
            && state.theta.yaw == mean.yaw,
        || format!("(c) zero innovation moved the mean to {:?}", state.theta),
    );

    // (d) A measurement update can only shrink each axis variance.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
    for case in 0..200 {
        let p = 10f64.powf(rng.random_range(-8.0..4.0));
        let mut state = KalmanState::new(TaitBryan::zero(), p, 0.0);
        let obs = TaitBryan::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.5..1.5),
            rng.random_range(-3.0..3.0),
        );
        kalman::update(&mut state, &obs, &defaults);
        for axis in 0..3 {
            c.check(state.covariance[axis] <= p && state.covariance[axis] >= 0.0, || {
                format!("(d) case {case}: variance {} from prior {p}", state.covariance[axis])
            });
        }
    }

    // (e) Crossing the angle seam produces no error spike.
    let start = TaitBryan::new(0.0, 0.0, std::f64::consts::PI - 0.05);
    let mut state = KalmanState::new(start, 0.05, 0.0);
    let mut crossed = false;
    let mut prev_yaw = start.yaw;
    for k in 1..=60u32 {
        let t = f64::from(k) * dt;
        let truth = TaitBryan::new(0.0, 0.0, wrap_angle(start.yaw + 0.5 * t));
        kalman::predict(&mut state, dt, &noise).unwrap();
        kalman::update(&mut state, &truth, &noise);
        if k >= 2 {
            let err = wrap_angle(state.theta.yaw - truth.yaw).abs();
            c.check(err < 1e-9, || format!("(e) frame {k}: seam error {err}"));
        }
        if prev_yaw > 0.0 && truth.yaw < 0.0 {
            crossed = true;
        }
        prev_yaw = truth.yaw;
    }
    c.check(crossed, || "(e) the trajectory never crossed the seam".into());
    c.conclude();
}

/// 5. The candidate count follows the per-axis uncertainty pattern exactly
///    (1 or 3 per axis, multiplied out), and the zero-offset candidate IS
///    the filter mean, bitwise.
#[test]
fn criterion_05_adaptive_sampling_counts_follow_uncertainty() {
    let mut c = Criterion::new(5, "adaptive-candidate-counts");
    let config = SamplerConfig::default(); // threshold 0.1 rad
    let mean = TaitBryan::new(0.4, -0.2, 2.2);

    for pattern in 0..8u8 {
        let sigma = |bit: u8| if pattern >> bit & 1 == 1 { 0.3f64 } else { 0.05 };
        let mut state = KalmanState::new(mean, 0.0, 0.0);
        state.covariance = Vector3::new(
            sigma(0) * sigma(0),
            sigma(1) * sigma(1),
            sigma(2) * sigma(2),
        );
        let set = sample_candidates(&state, &config);

        let expected: usize = (0..3u8)
            .map(|axis| if pattern >> axis & 1 == 1 { 3 } else { 1 })
            .product();
        c.check(set.len() == expected, || {
            format!("pattern {pattern:03b}: {} candidates, expected {expected}", set.len())
        });

        let zero_offsets = set.offsets.iter().filter(|o| **o == [0, 0, 0]).count();
        c.check(zero_offsets == 1, || {
            format!("pattern {pattern:03b}: {zero_offsets} zero-offset candidates")
        });

        let center = set.rotations[set.center_index()];
        let mean_rotation = mean.to_rotation();
        c.check(center.wxyz() == mean_rotation.wxyz(), || {
            format!("pattern {pattern:03b}: center candidate differs from the filter mean")
        });
    }
    c.conclude();
}

/// 6. With one convergent hypothesis hidden among 26 lost ones, the cascade
///    must carry it to the final round and land within 0.05 rad in at least
///    95% of 200 refiner seeds; the noise-free unit-gain setting recovers
///    the pose to numerical precision.
#[test]
fn criterion_06_cascade_keeps_the_only_convergent_hypothesis() {
    let mut c = Criterion::new(6, "cascade-selects-convergent");
    let config = ScenarioPreset::Slow.config();
    let frames = generate_scenario(&config).unwrap();
    let frame = &frames[1];
    let truth = frame.truth().object_in_camera().unwrap();
    let schedule = CascadeSchedule::default();

    let build_candidates = |rng: &mut ChaCha8Rng| -> (Vec<Pose<f64>>, usize) {
        let slot = rng.random_range(0..27);
        let mut candidates = Vec::with_capacity(27);
        for index in 0..27 {
            let rotation = if index == slot {
                // 0.06 rad of error: inside the 0.2 rad basin.
                let axis: [f64; 3] = UnitSphere.sample(rng);
                Rotation::from_axis_angle(&Vector3::from(axis), 0.06).compose(&truth.rotation)
            } else {
                // Far outside the basin, and far enough that three rounds of
                // bounded 0.3 rad kicks cannot wander back inside it.
                let axis: [f64; 3] = UnitSphere.sample(rng);
                let angle = rng.random_range(1.2..2.8);
                Rotation::from_axis_angle(&Vector3::from(axis), angle).compose(&truth.rotation)
            };
            candidates.push(Pose::new(
                rotation,
                truth.translation,
                truth.from_frame,
                truth.to_frame,
            ));
        }
        (candidates, slot)
    };

    let mut hits = 0u32;
    let trials = 200u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    for seed in 0..trials {
        let refiner = BasinRefiner::new(BasinRefinerConfig {
            seed: u64::from(seed),
            ..BasinRefinerConfig::default()
        })
        .unwrap();
        let (candidates, slot) = build_candidates(&mut rng);
        let outcome = run_cascade(&refiner, &candidates, frame, &schedule).unwrap();
        let err = outcome.winner.rotation.geodesic_angle(&truth.rotation);
        if outcome.winner_index == slot && err < 0.05 {
            hits += 1;
        }
    }
    c.check(hits >= 190, || {
        format!("convergent hypothesis won with <0.05 rad in only {hits}/{trials} seeds")
    });

    // Unit gain, no residual noise: the winner reproduces the truth.
    let refiner = BasinRefiner::new(BasinRefinerConfig::exact()).unwrap();
    let (candidates, slot) = build_candidates(&mut rng);
    let outcome = run_cascade(&refiner, &candidates, frame, &schedule).unwrap();
    let err = outcome.winner.rotation.geodesic_angle(&truth.rotation);
    c.check(outcome.winner_index == slot, || {
        format!("exact refiner picked candidate {} over {slot}", outcome.winner_index)
    });
    c.check(err < 1e-9, || format!("exact refiner left {err} rad of error"));
    c.conclude();
}

/// 7. Distance metrics agree with a brute-force oracle to 1e-12 over 1000
///    random cases, the closest-point variant never exceeds the paired one,
///    and the two hand cases come out exact.
#[test]
fn criterion_07_distance_metrics_match_brute_force() {
    let mut c = Criterion::new(7, "metrics-match-oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC7);

    for case in 0..1000 {
        let count = rng.random_range(10..30);
        let points: Vec<Vector3<f64>> = (0..count)
            .map(|_| random_translation(&mut rng, 0.2))
            .collect();
        let model = match ObjectModel::new("random", points, false) {
            Ok(m) => m,
            Err(_) => continue, // coincident-point draws are not the subject here
        };
        let gt = Pose::new(
            random_rotation(&mut rng),
            random_translation(&mut rng, 1.0),
            Frame::Object(0),
            Frame::Camera(0),
        );
        let est = Pose::new(
            random_rotation(&mut rng),
            random_translation(&mut rng, 1.0),
            Frame::Object(0),
            Frame::Camera(0),
        );
        let add = add_distance(&model, &gt, &est);
        let adds = adds_distance(&model, &gt, &est);
        let brute = adds_distance_brute(&model, &gt, &est);
        c.check((adds - brute).abs() < 1e-12, || {
            format!("case {case}: sweep {adds} vs brute {brute}")
        });
        c.check(adds <= add + 1e-12, || {
            format!("case {case}: closest-point {adds} exceeded paired {add}")
        });
    }

    // A two-point bar flipped by half a turn: paired distance is the full
    // bar length, closest-point distance vanishes. Built from exact
    // quaternion components so the comparison can demand equality.
    let bar = ObjectModel::new(
        "bar",
        vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(-1.0, 0.0, 0.0)],
        true,
    )
    .unwrap();
    let gt = Pose::new(
        Rotation::identity(),
        Vector3::zeros(),
        Frame::Object(0),
        Frame::Camera(0),
    );
    let est = Pose::new(
        Rotation::from_quaternion(0.0, 0.0, 0.0, 1.0),
        Vector3::zeros(),
        Frame::Object(0),
        Frame::Camera(0),
    );
    let add = add_distance(&bar, &gt, &est);
    let adds = adds_distance(&bar, &gt, &est);
    c.check(add == 2.0, || format!("flipped bar paired distance {add}"));
    c.check(adds == 0.0, || format!("flipped bar closest distance {adds}"));

    let half = auc(&[0.05f64], 0.1);
    c.check(half == 0.5, || format!("auc of a half-threshold miss: {half}"));
    c.conclude();
}

/// 8. The comparative claim, end to end: on the stress motion profile the
///    complete loop must beat both single-subsystem ablations over 20 seeds
///    — strictly on the area under the accuracy curve, and by at least 0.1
///    absolute on median frame success — inside a 10 minute budget.
#[test]
fn criterion_08_full_loop_beats_ablations_under_stress() {
    let mut c = Criterion::new(8, "stress-ablation-margins");
    let started = Instant::now();

    // Premise: the stress profile actually stresses. Peak relative speed
    // above 3 m/s, peak angular speed above 8 rad/s, and the inter-frame
    // rotation exceeds the refiner basin on at least 30% of frames.
    let config = ScenarioPreset::Stress.config();
    let frames = generate_scenario(&config).unwrap();
    let (speed, angular) =
        kinetrack_cli::run::relative_peaks(&frames, config.frame_rate_hz).unwrap();
    c.check(speed > 3.0, || format!("peak relative speed {speed} m/s"));
    c.check(angular > 8.0, || format!("peak angular speed {angular} rad/s"));

    let basin = BasinRefinerConfig::<f64>::default().basin_angle_rad;
    let mut over_basin = 0usize;
    let mut prev: Option<Pose<f64>> = None;
    for frame in &frames {
        let rel = frame.truth().object_in_camera().unwrap();
        if let Some(p) = &prev {
            if rel.rotation.geodesic_angle(&p.rotation) > basin {
                over_basin += 1;
            }
        }
        prev = Some(rel);
    }
    let fraction = over_basin as f64 / (frames.len() - 1) as f64;
    c.check(fraction >= 0.30, || {
        format!("only {fraction:.2} of frames exceed the basin per frame")
    });

    // The grid itself, through the real command.
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("grid");
    let seeds: Vec<String> = (1..=20).map(|s| s.to_string()).collect();
    fs::write(
        dir.path().join("grid.toml"),
        format!(
            "scenario = \"stress\"\nseeds = [{}]\nvariants = [\"full\", \"no-rotation\", \"no-translation\"]\nout_dir = {:?}\n",
            seeds.join(", "),
            out_dir
        ),
    )
    .unwrap();
    let out = bin()
        .arg("ablate")
        .arg("--manifest")
        .arg(dir.path().join("grid.toml"))
        .output()
        .unwrap();
    c.check(out.status.code() == Some(0), || {
        format!(
            "grid run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let median = |variant: &str, metric: &str| -> f64 {
        summary["medians"]
            .as_array()
            .unwrap()
            .iter()
            .find(|m| m["variant"] == variant)
            .unwrap_or_else(|| panic!("missing {variant} in summary"))[metric]
            .as_f64()
            .unwrap()
    };
    let full_auc = median("full", "median_auc_add");
    let full_success = median("full", "median_success_rate");
    for ablation in ["no-rotation", "no-translation"] {
        let auc = median(ablation, "median_auc_add");
        let success = median(ablation, "median_success_rate");
        c.check(full_auc > auc, || {
            format!("median AUC: full {full_auc:.3} vs {ablation} {auc:.3}")
        });
        c.check(full_success >= success + 0.1, || {
            format!("median success: full {full_success:.3} vs {ablation} {success:.3} (needs +0.1)")
        });
    }

    let elapsed = started.elapsed().as_secs_f64();
    c.check(elapsed < 600.0, || {
        format!("stress grid took {elapsed:.1} s (budget 600 s)")
    });
    c.conclude();
}

/// 9. Throughput: a single tracker sustains at least 100 frames/s while
///    refining 27 candidates through 3 cascade rounds against a
///    1000-point model.
#[test]
fn criterion_09_throughput_sustains_realtime_budgets() {
    let mut c = Criterion::new(9, "throughput-budget");
    let config = ScenarioPreset::Fast.config();
    let frames = generate_scenario(&config).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC9);
    let points: Vec<Vector3<f64>> = (0..1000)
        .map(|_| random_translation(&mut rng, 0.15))
        .collect();
    let model = ObjectModel::new("dense", points, false).unwrap();
    c.check(model.points.len() == 1000, || "model is not 1000 points".into());

    // A microscopic sigma threshold keeps every axis in its wide branch, so
    // each frame refines the full 27-candidate grid.
    let tracker_config = TrackerConfig {
        sampler: SamplerConfig { sigma_threshold: 1e-9 },
        ..TrackerConfig::default()
    };
    let mut tracker = Tracker::new(tracker_config, config.intrinsics, model).unwrap();
    let initial = frames[0].truth().object_in_camera().unwrap();
    let results = tracker.run_sequence(&frames, initial).unwrap();

    for result in &results {
        c.check(result.cascade[0].candidates_in == 27, || {
            format!(
                "frame {}: {} candidates instead of 27",
                result.frame_index, result.cascade[0].candidates_in
            )
        });
        c.check(result.cascade.len() == 3, || {
            format!("frame {}: {} cascade rounds", result.frame_index, result.cascade.len())
        });
    }

    let total: f64 = results.iter().map(|r| r.step_seconds).sum();
    let fps = results.len() as f64 / total;
    c.check(fps >= 100.0, || {
        format!("sustained only {fps:.1} frames/s over {} frames", results.len())
    });
    c.conclude();
}

/// 10. Rerunning any command with the same inputs and seeds must reproduce
///     every output file digest-for-digest.
#[test]
fn criterion_10_artifact_outputs_are_digest_identical() {
    let mut c = Criterion::new(10, "rerun-digest-identical");
    let dir = tempfile::tempdir().unwrap();

    // simulate
    let scenario_a = dir.path().join("a.jsonl");
    let scenario_b = dir.path().join("b.jsonl");
    for path in [&scenario_a, &scenario_b] {
        let out = bin()
            .args(["simulate", "--preset", "fast", "--seed", "7"])
            .arg("--out")
            .arg(path)
            .output()
            .unwrap();
        c.check(out.status.code() == Some(0), || "simulate failed".into());
    }
    c.check(sha256_file(&scenario_a) == sha256_file(&scenario_b), || {
        "simulate outputs differ between reruns".into()
    });

    // track
    let run_a = dir.path().join("run-a");
    let run_b = dir.path().join("run-b");
    for out_dir in [&run_a, &run_b] {
        let out = bin()
            .arg("track")
            .arg("--scenario")
            .arg(&scenario_a)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        c.check(out.status.code() == Some(0), || "track failed".into());
    }
    for artifact in ["results.jsonl", "report.json", "frames.csv"] {
        c.check(
            sha256_file(&run_a.join(artifact)) == sha256_file(&run_b.join(artifact)),
            || format!("track artifact {artifact} differs between reruns"),
        );
    }

    // ablate
    let grid_a = dir.path().join("grid-a");
    let grid_b = dir.path().join("grid-b");
    for (manifest, out_dir) in [("grid-a.toml", &grid_a), ("grid-b.toml", &grid_b)] {
        let path = dir.path().join(manifest);
        fs::write(
            &path,
            format!(
                "scenario = \"slow\"\nseeds = [1, 2]\nvariants = [\"full\", \"no-rotation\"]\nout_dir = {:?}\n",
                out_dir
            ),
        )
        .unwrap();
        let out = bin().arg("ablate").arg("--manifest").arg(&path).output().unwrap();
        c.check(out.status.code() == Some(0), || "ablate failed".into());
    }
    for artifact in ["ablation.csv", "summary.json"] {
        c.check(
            sha256_file(&grid_a.join(artifact)) == sha256_file(&grid_b.join(artifact)),
            || format!("ablation artifact {artifact} differs between reruns"),
        );
    }
    c.conclude();
}
