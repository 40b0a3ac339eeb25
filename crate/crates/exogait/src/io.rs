//! Strict file ingestion and export: model and task JSON, gait control-point
//! JSON, trajectory CSV, reference-gait CSV, crutch force logs, and the
//! ground-reaction-force integral metric.
//!
//! Ingestion rejects unknown fields and malformed values outright. Angles in
//! files are radians, except the model's `joint_limits_deg` block which is
//! in degrees. CSV exports carry 17 significant digits so a reload is
//! bit-identical.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::bezier::Vec2;
use crate::error::{Error, Result};
use crate::gait::{AnkleProfile, GaitControlPoints, GaitTask, TrajectoryTable};
use crate::model::{BodyModel, JointLimits, LinkParams, Vec5};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    l: f64,
    d: f64,
    m: f64,
    #[serde(rename = "I")]
    inertia: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointLimitsFile {
    hip_flexion: f64,
    hip_extension: f64,
    knee_flexion: f64,
    knee_extension: f64,
    ankle_dorsiflexion: f64,
    ankle_plantarflexion: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    links: Vec<LinkFile>,
    joint_limits_deg: Option<JointLimitsFile>,
    gravity: Option<f64>,
}

/// Loads a body model from JSON and validates its invariants.
pub fn load_body_model<P: AsRef<Path>>(path: P) -> Result<BodyModel> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("model: {e}")))?;
    if file.links.len() != 5 {
        return Err(Error::Parse(format!("model: expected 5 links, got {}", file.links.len())));
    }
    let links: Vec<LinkParams> = file
        .links
        .iter()
        .map(|l| LinkParams { length: l.l, com_offset: l.d, mass: l.m, inertia: l.inertia })
        .collect();
    let joint_limits = match file.joint_limits_deg {
        Some(deg) => JointLimits {
            hip_flexion: deg.hip_flexion.to_radians(),
            hip_extension: deg.hip_extension.to_radians(),
            knee_flexion: deg.knee_flexion.to_radians(),
            knee_extension: deg.knee_extension.to_radians(),
            ankle_dorsiflexion: deg.ankle_dorsiflexion.to_radians(),
            ankle_plantarflexion: deg.ankle_plantarflexion.to_radians(),
        },
        None => JointLimits::default(),
    };
    let model = BodyModel {
        links: links.try_into().expect("length checked above"),
        joint_limits,
        gravity: file.gravity.unwrap_or(9.81),
    };
    model.validate()?;
    Ok(model)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnkleProfileFile {
    phi1_start: f64,
    phi1_end: f64,
    kappa: Option<f64>,
    t_mid: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    start: [f64; 2],
    land: [f64; 2],
    step_time: f64,
    r2_start: f64,
    phi3_start: f64,
    ankle_profile: AnkleProfileFile,
    samples: Option<usize>,
    penalty_weight: f64,
    contact_radius: Option<f64>,
    lookup_resolution: Option<usize>,
}

/// Loads a gait task from JSON, fills the defaults and validates.
pub fn load_task<P: AsRef<Path>>(path: P) -> Result<GaitTask> {
    let text = fs::read_to_string(path)?;
    let file: TaskFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("task: {e}")))?;
    let task = GaitTask {
        start: Vec2::new(file.start[0], file.start[1]),
        land: Vec2::new(file.land[0], file.land[1]),
        step_time: file.step_time,
        r2_start: file.r2_start,
        phi3_start: file.phi3_start,
        ankle: AnkleProfile {
            phi1_start: file.ankle_profile.phi1_start,
            phi1_end: file.ankle_profile.phi1_end,
            steepness: file
                .ankle_profile
                .kappa
                .unwrap_or_else(|| GaitTask::default_steepness(file.step_time)),
            midpoint: file.ankle_profile.t_mid.unwrap_or(file.step_time / 2.0),
        },
        samples: file.samples.unwrap_or(GaitTask::DEFAULT_SAMPLES),
        penalty_weight: file.penalty_weight,
        contact_radius: file.contact_radius.unwrap_or(GaitTask::DEFAULT_CONTACT_RADIUS),
        lookup_resolution: file.lookup_resolution.unwrap_or(GaitTask::DEFAULT_LOOKUP_RESOLUTION),
    };
    task.validate()?;
    Ok(task)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaitFile {
    pr: [[f64; 2]; 5],
    pphi: [[f64; 2]; 5],
    pp: [[f64; 2]; 5],
    pz: [[f64; 2]; 4],
}

/// Loads gait control points from JSON.
pub fn load_gait_points<P: AsRef<Path>>(path: P) -> Result<GaitControlPoints> {
    let text = fs::read_to_string(path)?;
    let file: GaitFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("gait: {e}")))?;
    let point = |pair: [f64; 2]| Vec2::new(pair[0], pair[1]);
    Ok(GaitControlPoints {
        ratio: file.pr.map(point),
        torso: file.pphi.map(point),
        path: file.pp.map(point),
        pace: file.pz.map(point),
    })
}

/// Writes gait control points as JSON.
pub fn save_gait_points<P: AsRef<Path>>(points: &GaitControlPoints, path: P) -> Result<()> {
    let pair = |p: &Vec2| vec![p.x, p.y];
    let value = serde_json::json!({
        "pr": points.ratio.iter().map(pair).collect::<Vec<_>>(),
        "pphi": points.torso.iter().map(pair).collect::<Vec<_>>(),
        "pp": points.path.iter().map(pair).collect::<Vec<_>>(),
        "pz": points.pace.iter().map(pair).collect::<Vec<_>>(),
    });
    fs::write(path, format!("{:#}\n", value))?;
    Ok(())
}

/// Header of the trajectory CSV export.
pub const TRAJECTORY_HEADER: &str =
    "t,theta1,theta2,theta3,theta4,theta5,phi1,phi2,phi3,phi4,phi5,x5,y5,vx5,vy5,T1,T2,T3,T4,T5";

fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Exports a trajectory table as CSV with 17 significant digits per value.
pub fn export_trajectory<P: AsRef<Path>>(table: &TrajectoryTable, path: P) -> Result<()> {
    let mut out = String::with_capacity(64 * 20 * (table.rows.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in &table.rows {
        let mut fields = Vec::with_capacity(20);
        fields.push(full_precision(row.t));
        fields.extend(row.theta.iter().map(|&v| full_precision(v)));
        fields.extend(row.phi.iter().map(|&v| full_precision(v)));
        fields.push(full_precision(row.foot.x));
        fields.push(full_precision(row.foot.y));
        fields.push(full_precision(row.foot_velocity.x));
        fields.push(full_precision(row.foot_velocity.y));
        fields.extend(row.torque.iter().map(|&v| full_precision(v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// The exported subset of a trajectory row, as written by
/// [`export_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub theta: Vec5,
    pub phi: Vec5,
    pub foot: Vec2,
    pub foot_velocity: Vec2,
    pub torque: Vec5,
}

/// Reads a trajectory CSV back; values reload bit-identically.
pub fn load_trajectory<P: AsRef<Path>>(path: P) -> Result<Vec<TrajectoryRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRAJECTORY_HEADER => {}
        other => return Err(Error::Parse(format!("trajectory: bad header {other:?}"))),
    }
    let mut records = Vec::new();
    for (index, line) in lines.enumerate() {
        let fields = parse_numeric_row(line, 20, index + 2, "trajectory")?;
        records.push(TrajectoryRecord {
            t: fields[0],
            theta: Vec5::from_row_slice(&fields[1..6]),
            phi: Vec5::from_row_slice(&fields[6..11]),
            foot: Vec2::new(fields[11], fields[12]),
            foot_velocity: Vec2::new(fields[13], fields[14]),
            torque: Vec5::from_row_slice(&fields[15..20]),
        });
    }
    Ok(records)
}

fn parse_numeric_row(line: &str, count: usize, line_no: usize, what: &str) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != count {
        return Err(Error::Parse(format!(
            "{what}: line {line_no} has {} fields, expected {count}",
            fields.len()
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{what}: line {line_no}: {f:?}: {e}")))
        })
        .collect()
}

/// Header of a reference-gait CSV.
pub const REFERENCE_HEADER: &str = "t,theta1,theta2,theta3,theta4,theta5";

/// A recorded joint-angle gait used as a baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGait {
    /// Strictly increasing timestamps, seconds.
    pub times: Vec<f64>,
    /// Relative joint angles per timestamp, radians.
    pub angles: Vec<Vec5>,
}

impl ReferenceGait {
    /// Linearly interpolates the joint angles at the query times. Queries
    /// may exceed the recorded span by at most 1e-9 s.
    pub fn sample_at(&self, times: &[f64]) -> Result<Vec<Vec5>> {
        let first = *self.times.first().expect("non-empty by construction");
        let last = *self.times.last().expect("non-empty by construction");
        times
            .iter()
            .map(|&t| {
                if t < first - 1e-9 || t > last + 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "query time {t} outside recorded span [{first}, {last}]"
                    )));
                }
                let t = t.clamp(first, last);
                let upper = self.times.partition_point(|&x| x <= t).min(self.times.len() - 1);
                let lower = upper.saturating_sub(1);
                let width = self.times[upper] - self.times[lower];
                if width <= 0.0 {
                    return Ok(self.angles[lower]);
                }
                let w = ((t - self.times[lower]) / width).clamp(0.0, 1.0);
                Ok((1.0 - w) * self.angles[lower] + w * self.angles[upper])
            })
            .collect()
    }
}

/// Loads a reference gait CSV with header `t,theta1,...,theta5` and strictly
/// increasing timestamps.
pub fn load_reference_gait<P: AsRef<Path>>(path: P) -> Result<ReferenceGait> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == REFERENCE_HEADER => {}
        other => return Err(Error::Parse(format!("reference gait: bad header {other:?}"))),
    }
    let mut times = Vec::new();
    let mut angles = Vec::new();
    for (index, line) in lines.enumerate() {
        let fields = parse_numeric_row(line, 6, index + 2, "reference gait")?;
        if let Some(&previous) = times.last() {
            if fields[0] <= previous {
                return Err(Error::Parse(format!(
                    "reference gait: time {} at line {} does not increase past {previous}",
                    fields[0],
                    index + 2
                )));
            }
        }
        times.push(fields[0]);
        angles.push(Vec5::from_row_slice(&fields[1..6]));
    }
    if times.len() < 2 {
        return Err(Error::Parse("reference gait: need at least 2 rows".into()));
    }
    Ok(ReferenceGait { times, angles })
}

/// A crutch force log: one force sample per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTrace {
    /// Non-negative force magnitudes, newtons.
    pub samples: Vec<f64>,
    /// Sampling interval, seconds.
    pub sample_time: f64,
}

/// Loads a single-column force CSV with header `f`.
pub fn load_force_trace<P: AsRef<Path>>(path: P, sample_time: f64) -> Result<ForceTrace> {
    if !(sample_time > 0.0) {
        return Err(Error::InvalidInput(format!("sample time {sample_time} must be > 0")));
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("f") => {}
        other => return Err(Error::Parse(format!("force trace: bad header {other:?}"))),
    }
    let mut samples = Vec::new();
    for (index, line) in lines.enumerate() {
        let value = parse_numeric_row(line, 1, index + 2, "force trace")?[0];
        if !(value >= 0.0) {
            return Err(Error::Parse(format!(
                "force trace: negative force {value} at line {}",
                index + 2
            )));
        }
        samples.push(value);
    }
    Ok(ForceTrace { samples, sample_time })
}

/// Time integral of the summed left and right crutch forces,
/// `F = Ts * sum_k (f_l(k) + f_r(k))`, in newton-seconds.
pub fn grf_metric(left: &ForceTrace, right: &ForceTrace) -> Result<f64> {
    if left.samples.len() != right.samples.len() {
        return Err(Error::InvalidInput(format!(
            "trace lengths differ: {} vs {}",
            left.samples.len(),
            right.samples.len()
        )));
    }
    if left.sample_time != right.sample_time {
        return Err(Error::InvalidInput(format!(
            "sample times differ: {} vs {}",
            left.sample_time, right.sample_time
        )));
    }
    let sum: f64 = left.samples.iter().zip(right.samples.iter()).map(|(l, r)| l + r).sum();
    Ok(left.sample_time * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::sample_gait;
    use crate::optimizer::{build_bounds, initial_points};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fixture(name: &str) -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
    }

    #[test]
    fn model_fixture_carries_the_published_parameters() {
        let model = load_body_model(fixture("model_table2.json")).unwrap();
        let lengths: Vec<f64> = model.links.iter().map(|l| l.length).collect();
        let offsets: Vec<f64> = model.links.iter().map(|l| l.com_offset).collect();
        let masses: Vec<f64> = model.links.iter().map(|l| l.mass).collect();
        let inertias: Vec<f64> = model.links.iter().map(|l| l.inertia).collect();
        assert_eq!(lengths, vec![0.441, 0.395, 0.714, 0.395, 0.441]);
        assert_eq!(offsets, vec![0.269, 0.228, 0.342, 0.167, 0.172]);
        assert_eq!(masses, vec![7.05, 10.5, 57.7, 11.5, 6.05]);
        assert_eq!(inertias, vec![0.226, 0.626, 9.44, 0.626, 0.226]);
        assert_eq!(model.gravity, 9.81);
        assert_relative_eq!(model.joint_limits.knee_flexion, 100f64.to_radians());
    }

    #[test]
    fn model_schema_violations_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let missing_link = dir.path().join("four_links.json");
        std::fs::write(
            &missing_link,
            r#"{"links": [
                {"l": 0.441, "d": 0.269, "m": 7.05, "I": 0.226},
                {"l": 0.395, "d": 0.228, "m": 10.5, "I": 0.626},
                {"l": 0.714, "d": 0.342, "m": 57.7, "I": 9.44},
                {"l": 0.395, "d": 0.167, "m": 11.5, "I": 0.626}
            ]}"#,
        )
        .unwrap();
        assert!(matches!(load_body_model(&missing_link), Err(Error::Parse(_))));

        let unknown_field = dir.path().join("unknown.json");
        std::fs::write(
            &unknown_field,
            r#"{"links": [], "color": "red"}"#,
        )
        .unwrap();
        match load_body_model(&unknown_field) {
            Err(Error::Parse(msg)) => assert!(msg.contains("color"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn model_invariant_violations_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let bad_com = dir.path().join("bad_com.json");
        std::fs::write(
            &bad_com,
            r#"{"links": [
                {"l": 0.441, "d": 0.5, "m": 7.05, "I": 0.226},
                {"l": 0.395, "d": 0.228, "m": 10.5, "I": 0.626},
                {"l": 0.714, "d": 0.342, "m": 57.7, "I": 9.44},
                {"l": 0.395, "d": 0.167, "m": 11.5, "I": 0.626},
                {"l": 0.441, "d": 0.172, "m": 6.05, "I": 0.226}
            ]}"#,
        )
        .unwrap();
        assert!(matches!(load_body_model(&bad_com), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn reference_gait_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.csv");
        std::fs::write(
            &path,
            "t,theta1,theta2,theta3,theta4,theta5\n0.0,1.5,0.0,0.0,0.1,-0.1\n0.5,1.4,0.1,0.0,0.2,-0.2\n1.0,1.3,0.2,0.0,0.3,-0.3\n",
        )
        .unwrap();
        let gait = load_reference_gait(&path).unwrap();
        assert_eq!(gait.times.len(), 3);

        let duplicated = dir.path().join("dup.csv");
        std::fs::write(
            &duplicated,
            "t,theta1,theta2,theta3,theta4,theta5\n0.0,1.5,0.0,0.0,0.1,-0.1\n0.0,1.4,0.1,0.0,0.2,-0.2\n",
        )
        .unwrap();
        assert!(matches!(load_reference_gait(&duplicated), Err(Error::Parse(_))));

        let narrow = dir.path().join("narrow.csv");
        std::fs::write(&narrow, "t,theta1,theta2,theta3,theta4,theta5\n0.0,1.5,0.0\n").unwrap();
        assert!(matches!(load_reference_gait(&narrow), Err(Error::Parse(_))));
    }

    #[test]
    fn resampling_a_linear_ramp_is_exact() {
        let times: Vec<f64> = (0..8).map(|k| 0.35 * k as f64).collect();
        let angles: Vec<Vec5> =
            times.iter().map(|&t| Vec5::from_fn(|i, _| t * (i as f64 + 0.5))).collect();
        let gait = ReferenceGait { times: times.clone(), angles };
        let queries: Vec<f64> = (0..=100).map(|k| 2.45 * k as f64 / 100.0).collect();
        let resampled = gait.sample_at(&queries).unwrap();
        for (t, row) in queries.iter().zip(resampled.iter()) {
            for i in 0..5 {
                assert_relative_eq!(row[i], t * (i as f64 + 0.5), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_export_reloads_bitwise() {
        let model = load_body_model(fixture("model_table2.json")).unwrap();
        let task = load_task(fixture("task_ground.json")).unwrap();
        let points = initial_points(&task, &build_bounds(&task).unwrap());
        let table = sample_gait(&points, &task, &model).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        export_trajectory(&table, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(TRAJECTORY_HEADER));
        assert_eq!(text.lines().count(), table.rows.len() + 1);

        let records = load_trajectory(&path).unwrap();
        assert_eq!(records.len(), table.rows.len());
        for (record, row) in records.iter().zip(table.rows.iter()) {
            assert_eq!(record.t.to_bits(), row.t.to_bits());
            for i in 0..5 {
                assert_eq!(record.theta[i].to_bits(), row.theta[i].to_bits());
                assert_eq!(record.phi[i].to_bits(), row.phi[i].to_bits());
                assert_eq!(record.torque[i].to_bits(), row.torque[i].to_bits());
            }
            assert_eq!(record.foot.x.to_bits(), row.foot.x.to_bits());
            assert_eq!(record.foot_velocity.y.to_bits(), row.foot_velocity.y.to_bits());
        }
    }

    #[test]
    fn gait_points_round_trip_through_json() {
        let task = load_task(fixture("task_ground.json")).unwrap();
        let points = initial_points(&task, &build_bounds(&task).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gait.json");
        save_gait_points(&points, &path).unwrap();
        let reloaded = load_gait_points(&path).unwrap();
        assert_eq!(points, reloaded);
    }

    #[test]
    fn constant_force_metric_is_two_newton_seconds() {
        let trace = ForceTrace { samples: vec![1.0; 100], sample_time: 0.01 };
        assert_eq!(grf_metric(&trace, &trace.clone()).unwrap(), 2.0);
    }

    #[test]
    fn mismatched_traces_are_rejected() {
        let a = ForceTrace { samples: vec![1.0; 100], sample_time: 0.01 };
        let b = ForceTrace { samples: vec![1.0; 99], sample_time: 0.01 };
        assert!(grf_metric(&a, &b).is_err());
        let c = ForceTrace { samples: vec![1.0; 100], sample_time: 0.02 };
        assert!(grf_metric(&a, &c).is_err());
    }

    #[test]
    fn negative_forces_are_rejected_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("force.csv");
        std::fs::write(&path, "f\n1.0\n-0.5\n").unwrap();
        assert!(matches!(load_force_trace(&path, 0.01), Err(Error::Parse(_))));
    }

    proptest! {
        #[test]
        fn grf_metric_is_linear_in_the_traces(
            a in proptest::collection::vec(0.0f64..50.0, 40),
            b in proptest::collection::vec(0.0f64..50.0, 40),
        ) {
            let zero = ForceTrace { samples: vec![0.0; 40], sample_time: 0.01 };
            let ta = ForceTrace { samples: a.clone(), sample_time: 0.01 };
            let tb = ForceTrace { samples: b.clone(), sample_time: 0.01 };
            let sum = ForceTrace {
                samples: a.iter().zip(b.iter()).map(|(x, y)| x + y).collect(),
                sample_time: 0.01,
            };
            let fa = grf_metric(&ta, &zero).unwrap();
            let fb = grf_metric(&tb, &zero).unwrap();
            let fsum = grf_metric(&sum, &zero).unwrap();
            prop_assert!((fsum - (fa + fb)).abs() < 1e-9);
        }
    }
}
