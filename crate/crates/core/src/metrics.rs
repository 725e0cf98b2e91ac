//! Pose-error metrics and evaluation reports.
//!
//! Distances follow the standard model-point conventions: ADD averages
//! point-to-point error under the two poses, ADD-S averages the distance to
//! the *closest* transformed model point and is the appropriate measure for
//! symmetric objects. The area under the accuracy-threshold curve is
//! integrated exactly from the sorted distances rather than sampled on a
//! grid.

use std::io::Read;
use std::path::Path;

use nalgebra::Vector3;

use crate::geometry::Pose;
use crate::Real;

#[derive(thiserror::Error, Debug)]
pub enum MetricsError {
    #[error("object model has no points")]
    EmptyModel,
    #[error("object model is degenerate: {0}")]
    DegenerateModel(String),
    #[error("pose sequences differ in length: {gt} ground truth vs {est} estimates")]
    LengthMismatch { gt: usize, est: usize },
    #[error("no frames to evaluate")]
    EmptyTrajectory,
    #[error("model file parse error at line {line}: {msg}")]
    ParseModel { line: usize, msg: String },
    #[error("metrics CSV parse error at line {line}: {msg}")]
    ParseCsv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rigid object represented by sampled surface points.
#[derive(Clone, Debug)]
pub struct ObjectModel<T: Real> {
    pub name: String,
    pub points: Vec<Vector3<T>>,
    /// Largest pairwise point distance, meters.
    pub diameter: T,
    /// Whether the object has a symmetry that makes ADD-S the fair metric.
    pub symmetric: bool,
}

impl<T: Real> ObjectModel<T> {
    /// Builds a model and computes its diameter by exhaustive pairwise
    /// search.
    pub fn new(
        name: impl Into<String>,
        points: Vec<Vector3<T>>,
        symmetric: bool,
    ) -> Result<Self, MetricsError> {
        if points.is_empty() {
            return Err(MetricsError::EmptyModel);
        }
        let mut diameter_sq = T::zero();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                diameter_sq = diameter_sq.max((points[i] - points[j]).norm_squared());
            }
        }
        let diameter = diameter_sq.sqrt();
        if diameter <= T::zero() {
            return Err(MetricsError::DegenerateModel(
                "all points coincide (diameter 0)".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            points,
            diameter,
            symmetric,
        })
    }

    pub fn centroid(&self) -> Vector3<T> {
        let mut c = Vector3::zeros();
        for p in &self.points {
            c += p;
        }
        c / T::from_usize(self.points.len()).unwrap()
    }

    /// Parses whitespace-separated `x y z` vertex lines. Empty lines and
    /// `#` comments are skipped.
    pub fn from_vertex_text(
        name: impl Into<String>,
        text: &str,
        symmetric: bool,
    ) -> Result<Self, MetricsError> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(MetricsError::ParseModel {
                    line: idx + 1,
                    msg: format!("expected 3 coordinates, found {}", fields.len()),
                });
            }
            let mut coords = [T::zero(); 3];
            for (slot, field) in coords.iter_mut().zip(&fields) {
                let value: f64 = field.parse().map_err(|e| MetricsError::ParseModel {
                    line: idx + 1,
                    msg: format!("bad coordinate {field:?}: {e}"),
                })?;
                *slot = T::lit(value);
            }
            points.push(Vector3::new(coords[0], coords[1], coords[2]));
        }
        Self::new(name, points, symmetric)
    }

    /// Loads a vertex file (see [`ObjectModel::from_vertex_text`]).
    pub fn from_vertex_file(path: impl AsRef<Path>, symmetric: bool) -> Result<Self, MetricsError> {
        let path = path.as_ref();
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string());
        Self::from_vertex_text(name, &text, symmetric)
    }

    /// Axis-aligned box shell sampled on a `per_face x per_face` grid per
    /// face. `extents` are full side lengths, centered on the origin.
    pub fn box_grid(extents: [f64; 3], per_face: usize) -> Self {
        assert!(per_face >= 2, "need at least the corner grid");
        let h: Vec<T> = extents.iter().map(|e| T::lit(e / 2.0)).collect();
        let steps = |axis: usize| -> Vec<T> {
            (0..per_face)
                .map(|i| {
                    let s = -1.0 + 2.0 * (i as f64) / ((per_face - 1) as f64);
                    T::lit(s) * h[axis]
                })
                .collect()
        };
        let (xs, ys, zs) = (steps(0), steps(1), steps(2));
        let mut points = Vec::with_capacity(6 * per_face * per_face);
        for &x in &xs {
            for &y in &ys {
                points.push(Vector3::new(x, y, h[2]));
                points.push(Vector3::new(x, y, -h[2]));
            }
        }
        for &x in &xs {
            for &z in &zs {
                points.push(Vector3::new(x, h[1], z));
                points.push(Vector3::new(x, -h[1], z));
            }
        }
        for &y in &ys {
            for &z in &zs {
                points.push(Vector3::new(h[0], y, z));
                points.push(Vector3::new(-h[0], y, z));
            }
        }
        Self::new("box", points, false).expect("box extents are non-degenerate")
    }

    /// Lateral surface of a cylinder (no caps), rotationally symmetric
    /// about z.
    pub fn cylinder_shell(radius: f64, height: f64, rings: usize, segments: usize) -> Self {
        assert!(rings >= 2 && segments >= 3);
        let mut points = Vec::with_capacity(rings * segments);
        for ring in 0..rings {
            let z = -height / 2.0 + height * (ring as f64) / ((rings - 1) as f64);
            for seg in 0..segments {
                let phi = std::f64::consts::TAU * (seg as f64) / (segments as f64);
                points.push(Vector3::new(
                    T::lit(radius * phi.cos()),
                    T::lit(radius * phi.sin()),
                    T::lit(z),
                ));
            }
        }
        Self::new("cylinder", points, true).expect("cylinder dims are non-degenerate")
    }

    /// An asymmetric tetrahedron (vertices, edge midpoints, face centroids),
    /// centered on its centroid.
    pub fn tetrahedron(scale: f64) -> Self {
        let verts = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 0.8, 0.0),
            Vector3::new(0.2, 0.3, 0.9),
        ];
        let mut raw: Vec<Vector3<f64>> = verts.to_vec();
        for i in 0..4 {
            for j in (i + 1)..4 {
                raw.push((verts[i] + verts[j]) / 2.0);
            }
        }
        for skip in 0..4 {
            let mut c = Vector3::zeros();
            for (i, v) in verts.iter().enumerate() {
                if i != skip {
                    c += v;
                }
            }
            raw.push(c / 3.0);
        }
        let centroid: Vector3<f64> = raw.iter().sum::<Vector3<f64>>() / raw.len() as f64;
        let points = raw
            .iter()
            .map(|p| {
                let q = (p - centroid) * scale;
                Vector3::new(T::lit(q.x), T::lit(q.y), T::lit(q.z))
            })
            .collect();
        Self::new("tetrahedron", points, false).expect("tetrahedron is non-degenerate")
    }

    /// Resolves a built-in model by identifier.
    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "box" => Some(Self::box_grid([0.2, 0.15, 0.1], 8)),
            "cylinder" => Some(Self::cylinder_shell(0.04, 0.12, 10, 24)),
            "tetrahedron" => Some(Self::tetrahedron(0.25)),
            _ => None,
        }
    }
}

/// Average distance between corresponding model points under two poses.
pub fn add_distance<T: Real>(model: &ObjectModel<T>, gt: &Pose<T>, est: &Pose<T>) -> T {
    let mut sum = T::zero();
    for p in &model.points {
        sum += (gt.transform_point(p) - est.transform_point(p)).norm();
    }
    sum / T::from_usize(model.points.len()).unwrap()
}

/// Average distance from each ground-truth-posed point to the *closest*
/// estimated-pose point (symmetric-aware ADD-S).
///
/// Uses a sorted sweep over one axis with distance pruning; the result is
/// exact and matches [`adds_distance_brute`] to floating-point noise.
pub fn adds_distance<T: Real>(model: &ObjectModel<T>, gt: &Pose<T>, est: &Pose<T>) -> T {
    let gt_pts: Vec<Vector3<T>> = model.points.iter().map(|p| gt.transform_point(p)).collect();
    let mut est_pts: Vec<Vector3<T>> = model.points.iter().map(|p| est.transform_point(p)).collect();
    est_pts.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite coordinates"));

    let mut sum = T::zero();
    for g in &gt_pts {
        let start = est_pts.partition_point(|q| q.x < g.x);
        let mut best = T::max_value().unwrap();
        // Expand outward from the insertion point; once the x gap alone
        // exceeds the best distance, nothing farther can win.
        let mut left = start;
        let mut right = start;
        loop {
            let left_gap = if left > 0 {
                Some(g.x - est_pts[left - 1].x)
            } else {
                None
            };
            let right_gap = if right < est_pts.len() {
                Some(est_pts[right].x - g.x)
            } else {
                None
            };
            let take_left = match (left_gap, right_gap) {
                (Some(l), Some(r)) => l <= r,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            let (gap, idx) = if take_left {
                left -= 1;
                (left_gap.unwrap(), left)
            } else {
                right += 1;
                (right_gap.unwrap(), right - 1)
            };
            if gap * gap >= best {
                break;
            }
            best = best.min((est_pts[idx] - g).norm_squared());
        }
        sum += best.sqrt();
    }
    sum / T::from_usize(gt_pts.len()).unwrap()
}

/// Reference ADD-S: exhaustive nearest-neighbor search, O(n^2).
pub fn adds_distance_brute<T: Real>(model: &ObjectModel<T>, gt: &Pose<T>, est: &Pose<T>) -> T {
    let est_pts: Vec<Vector3<T>> = model.points.iter().map(|p| est.transform_point(p)).collect();
    let mut sum = T::zero();
    for p in &model.points {
        let g = gt.transform_point(p);
        let mut best = T::max_value().unwrap();
        for q in &est_pts {
            best = best.min((q - g).norm_squared());
        }
        sum += best.sqrt();
    }
    sum / T::from_usize(model.points.len()).unwrap()
}

/// Area under the accuracy-threshold curve for thresholds in
/// `[0, max_threshold]`, normalized to `[0, 1]`.
///
/// The empirical accuracy curve is a step function, so the integral reduces
/// exactly to the mean of `max(0, 1 - d / max_threshold)` over the
/// distances — no grid discretization is involved.
pub fn auc<T: Real>(distances: &[T], max_threshold: T) -> T {
    assert!(!distances.is_empty(), "auc needs at least one distance");
    assert!(max_threshold > T::zero(), "auc threshold must be positive");
    let mut sum = T::zero();
    for &d in distances {
        sum += (T::one() - d / max_threshold).max(T::zero()).min(T::one());
    }
    sum / T::from_usize(distances.len()).unwrap()
}

/// Fraction of frames whose ADD is below `0.1 * diameter`.
pub fn success_rate<T: Real>(add_values: &[T], diameter: T) -> T {
    assert!(!add_values.is_empty(), "success rate needs at least one frame");
    let threshold = T::lit(0.1) * diameter;
    let hits = add_values.iter().filter(|&&d| d < threshold).count();
    T::from_usize(hits).unwrap() / T::from_usize(add_values.len()).unwrap()
}

/// Per-frame distances, as serialized to the metrics CSV.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrameMetrics {
    pub frame_index: u64,
    pub add_m: f64,
    pub adds_m: f64,
}

/// Evaluation summary for one tracking run.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub object: String,
    pub seed: u64,
    /// Digest of the scenario/tracker configuration that produced the run.
    pub config_digest: String,
    pub auc_add: f64,
    pub auc_adds: f64,
    pub success_rate: f64,
    pub frames: Vec<FrameMetrics>,
}

/// Maximum distance threshold (meters) for the accuracy-curve area.
pub const AUC_MAX_THRESHOLD_M: f64 = 0.1;

/// Computes per-frame ADD / ADD-S and the summary statistics for a tracked
/// sequence. Both pose slices map object -> camera, frame by frame.
pub fn build_report(
    model: &ObjectModel<f64>,
    gt: &[Pose<f64>],
    est: &[Pose<f64>],
    seed: u64,
    config_digest: impl Into<String>,
) -> Result<MetricsReport, MetricsError> {
    if gt.len() != est.len() {
        return Err(MetricsError::LengthMismatch {
            gt: gt.len(),
            est: est.len(),
        });
    }
    if gt.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    let mut frames = Vec::with_capacity(gt.len());
    for (idx, (g, e)) in gt.iter().zip(est).enumerate() {
        frames.push(FrameMetrics {
            frame_index: idx as u64,
            add_m: add_distance(model, g, e),
            adds_m: adds_distance(model, g, e),
        });
    }
    let adds: Vec<f64> = frames.iter().map(|f| f.add_m).collect();
    let adds_s: Vec<f64> = frames.iter().map(|f| f.adds_m).collect();
    Ok(MetricsReport {
        object: model.name.clone(),
        seed,
        config_digest: config_digest.into(),
        auc_add: auc(&adds, AUC_MAX_THRESHOLD_M),
        auc_adds: auc(&adds_s, AUC_MAX_THRESHOLD_M),
        success_rate: success_rate(&adds, model.diameter),
        frames,
    })
}

/// Renders the per-frame distances as CSV (`frame_index,add_m,adds_m`).
pub fn frames_to_csv(frames: &[FrameMetrics]) -> String {
    let mut out = String::from("frame_index,add_m,adds_m\n");
    for f in frames {
        out.push_str(&format!("{},{},{}\n", f.frame_index, f.add_m, f.adds_m));
    }
    out
}

/// Parses the CSV produced by [`frames_to_csv`]. Round-trips exactly:
/// formatting a parsed file reproduces it byte for byte.
pub fn frames_from_csv(text: &str) -> Result<Vec<FrameMetrics>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "frame_index,add_m,adds_m")) => {}
        other => {
            return Err(MetricsError::ParseCsv {
                line: 1,
                msg: format!("unexpected header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut frames = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(MetricsError::ParseCsv {
                line: idx + 1,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let parse_err = |msg: String| MetricsError::ParseCsv { line: idx + 1, msg };
        frames.push(FrameMetrics {
            frame_index: fields[0]
                .parse()
                .map_err(|e| parse_err(format!("bad frame index: {e}")))?,
            add_m: fields[1]
                .parse()
                .map_err(|e| parse_err(format!("bad add_m: {e}")))?,
            adds_m: fields[2]
                .parse()
                .map_err(|e| parse_err(format!("bad adds_m: {e}")))?,
        });
    }
    Ok(frames)
}

/// Formats a summary table, one row per report, preserving input order.
pub fn report_table(reports: &[MetricsReport]) -> String {
    let name_w = reports
        .iter()
        .map(|r| r.object.len())
        .max()
        .unwrap_or(6)
        .max("object".len());
    let mut out = format!(
        "{:<name_w$}  {:>8}  {:>8}  {:>8}\n",
        "object", "auc_add", "auc_adds", "success"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<name_w$}  {:>8.3}  {:>8.3}  {:>8.3}\n",
            r.object, r.auc_add, r.auc_adds, r.success_rate
        ));
    }
    out
}
