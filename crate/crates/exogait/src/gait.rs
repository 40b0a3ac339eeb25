//! Gait representation: Bezier control-point blocks, the assumed ankle
//! profile, backward finite differences, and sampling of a full joint-space
//! trajectory with torques.

use crate::bezier::{BezierCurve, CurveTable, Vec2};
use crate::dynamics::CouplingCoefficients;
use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, inverse_kinematics, IkInput};
use crate::model::{AbsolutePose, BodyModel, Vec5};

/// The four control-point blocks of one gait: interpolation ratio over time
/// (quartic), torso angle over time (quartic), end-point path over pace
/// (quartic), and pace over time (cubic). 19 points, 38 coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitControlPoints {
    /// (t seconds, r2) control points.
    pub ratio: [Vec2; 5],
    /// (t seconds, phi3 radians) control points.
    pub torso: [Vec2; 5],
    /// (x5 meters, y5 meters) control points.
    pub path: [Vec2; 5],
    /// (t seconds, z) control points.
    pub pace: [Vec2; 4],
}

/// Number of scalar coordinates in a flattened gait parameter vector.
pub const FLAT_LEN: usize = 38;

impl GaitControlPoints {
    /// Flattens to the fixed row order [ratio; torso; path; pace], each row
    /// contributing (abscissa, ordinate).
    pub fn flatten(&self) -> [f64; FLAT_LEN] {
        let mut flat = [0.0; FLAT_LEN];
        for (row, point) in self
            .ratio
            .iter()
            .chain(self.torso.iter())
            .chain(self.path.iter())
            .chain(self.pace.iter())
            .enumerate()
        {
            flat[2 * row] = point.x;
            flat[2 * row + 1] = point.y;
        }
        flat
    }

    pub fn from_flat(flat: &[f64; FLAT_LEN]) -> Self {
        let row = |i: usize| Vec2::new(flat[2 * i], flat[2 * i + 1]);
        GaitControlPoints {
            ratio: std::array::from_fn(|i| row(i)),
            torso: std::array::from_fn(|i| row(5 + i)),
            path: std::array::from_fn(|i| row(10 + i)),
            pace: std::array::from_fn(|i| row(15 + i)),
        }
    }

    pub fn ratio_curve(&self) -> BezierCurve {
        BezierCurve::new(self.ratio.to_vec()).expect("five control points")
    }

    pub fn torso_curve(&self) -> BezierCurve {
        BezierCurve::new(self.torso.to_vec()).expect("five control points")
    }

    pub fn path_curve(&self) -> BezierCurve {
        BezierCurve::new(self.path.to_vec()).expect("five control points")
    }

    pub fn pace_curve(&self) -> BezierCurve {
        BezierCurve::new(self.pace.to_vec()).expect("four control points")
    }
}

/// Logistic stance-ankle angle profile over the step.
///
/// The ankle is spring-driven rather than actuated, so its trajectory is
/// assumed rather than optimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnkleProfile {
    /// Angle approached at the start of the step, radians.
    pub phi1_start: f64,
    /// Angle approached at the end of the step, radians.
    pub phi1_end: f64,
    /// Logistic steepness, 1/s.
    pub steepness: f64,
    /// Time of the logistic midpoint, seconds.
    pub midpoint: f64,
}

impl AnkleProfile {
    /// `phi1(t) = phi1_start + (phi1_end - phi1_start) * sigma(k (t - t_mid))`.
    pub fn eval(&self, t: f64) -> f64 {
        let sigma = 1.0 / (1.0 + (-self.steepness * (t - self.midpoint)).exp());
        self.phi1_start + (self.phi1_end - self.phi1_start) * sigma
    }
}

/// One swing-phase planning problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitTask {
    /// Swing-foot position at lift-off, meters.
    pub start: Vec2,
    /// Swing-foot position at landing, meters.
    pub land: Vec2,
    /// Step time, seconds.
    pub step_time: f64,
    /// Initial interpolation ratio r2(0).
    pub r2_start: f64,
    /// Initial torso angle phi3(0), radians.
    pub phi3_start: f64,
    pub ankle: AnkleProfile,
    /// Number of sampling intervals N; the table has N + 1 rows.
    pub samples: usize,
    /// Weight of the peak foot-speed penalty.
    pub penalty_weight: f64,
    /// Ground-contact radius around the endpoints, meters.
    pub contact_radius: f64,
    /// Parameter subdivisions for curve lookup tables.
    pub lookup_resolution: usize,
}

impl GaitTask {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.step_time > 0.0) {
            return fail(format!("step_time {} must be > 0", self.step_time));
        }
        if self.samples < 10 {
            return fail(format!("samples {} must be >= 10", self.samples));
        }
        if !(self.contact_radius > 0.0) {
            return fail(format!("contact_radius {} must be > 0", self.contact_radius));
        }
        if !(0.0..=1.0).contains(&self.r2_start) {
            return fail(format!("r2_start {} outside [0, 1]", self.r2_start));
        }
        if !(self.penalty_weight >= 0.0) {
            return fail(format!("penalty_weight {} must be >= 0", self.penalty_weight));
        }
        if !(self.ankle.steepness > 0.0) {
            return fail(format!("ankle steepness {} must be > 0", self.ankle.steepness));
        }
        if !(0.0 < self.ankle.midpoint && self.ankle.midpoint < self.step_time) {
            return fail(format!(
                "ankle midpoint {} outside (0, {})",
                self.ankle.midpoint, self.step_time
            ));
        }
        if self.lookup_resolution < 2 {
            return fail(format!("lookup_resolution {} must be >= 2", self.lookup_resolution));
        }
        for v in [self.start.x, self.start.y, self.land.x, self.land.y] {
            if !v.is_finite() {
                return fail("start/land coordinates must be finite".into());
            }
        }
        Ok(())
    }

    /// Defaults for the fields the planning problem does not pin down.
    pub fn default_steepness(step_time: f64) -> f64 {
        8.0 / step_time
    }

    pub const DEFAULT_SAMPLES: usize = 100;
    pub const DEFAULT_CONTACT_RADIUS: f64 = 0.002;
    pub const DEFAULT_LOOKUP_RESOLUTION: usize = crate::bezier::DEFAULT_LOOKUP_RESOLUTION;
}

/// Backward differences per the sampling scheme: `v_k = (x_k - x_{k-1}) / K`
/// and `a_k = (v_k - v_{k-1}) / K`, with the gait starting at rest so
/// `v_0 = a_0 = 0` (and hence `a_1 = v_1 / K`).
///
/// The samples carry their timestamps; non-uniform spacing is an error.
pub fn finite_diff(samples: &[(f64, f64)], step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "finite differences need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step {step} must be > 0")));
    }
    for i in 1..samples.len() {
        let dt = samples[i].0 - samples[i - 1].0;
        if (dt - step).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::NonUniformSpacing { index: i });
        }
    }
    let values: Vec<f64> = samples.iter().map(|&(_, x)| x).collect();
    let (first, second) = backward_differences(&values, step);
    Ok((first, second))
}

/// Backward differences of an implicitly uniform series; boundary policy as
/// in [`finite_diff`].
fn backward_differences(values: &[f64], step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut first = vec![0.0; n];
    for k in 1..n {
        first[k] = (values[k] - values[k - 1]) / step;
    }
    let mut second = vec![0.0; n];
    for k in 1..n {
        second[k] = (first[k] - first[k - 1]) / step;
    }
    (first, second)
}

fn backward_differences_vec5(values: &[Vec5], step: f64) -> (Vec<Vec5>, Vec<Vec5>) {
    let n = values.len();
    let mut first = vec![Vec5::zeros(); n];
    for k in 1..n {
        first[k] = (values[k] - values[k - 1]) / step;
    }
    let mut second = vec![Vec5::zeros(); n];
    for k in 1..n {
        second[k] = (first[k] - first[k - 1]) / step;
    }
    (first, second)
}

fn backward_differences_vec2(values: &[Vec2], step: f64) -> Vec<Vec2> {
    let n = values.len();
    let mut first = vec![Vec2::zeros(); n];
    for k in 1..n {
        first[k] = (values[k] - values[k - 1]) / step;
    }
    first
}

/// One sampled instant of a gait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    /// Time, seconds.
    pub t: f64,
    pub theta: Vec5,
    pub dtheta: Vec5,
    pub ddtheta: Vec5,
    pub phi: Vec5,
    pub dphi: Vec5,
    pub ddphi: Vec5,
    /// Swing-foot position, meters.
    pub foot: Vec2,
    /// Swing-foot velocity, m/s.
    pub foot_velocity: Vec2,
    /// Joint torques in relative angles, N m.
    pub torque: Vec5,
}

/// Time-indexed gait samples with joint angles, derivatives and torques.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryTable {
    pub fn step_time(&self) -> f64 {
        self.rows.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Samples a gait on the uniform grid `t_k = k t_s / N`.
///
/// Per sample: the ratio, torso and pace values come from curve lookups, the
/// end-point from the path curve at the pace value, the ankle angle from the
/// logistic profile, and the full pose from inverse kinematics. Derivatives
/// are backward differences with `K = t_s / N`, torques follow from the
/// closed-form dynamics. Sampling errors carry the failing sample index.
pub fn sample_gait(
    points: &GaitControlPoints,
    task: &GaitTask,
    model: &BodyModel,
) -> Result<TrajectoryTable> {
    let n = task.samples;
    let step = task.step_time / n as f64;

    let ratio_table = CurveTable::build(&points.ratio_curve(), task.lookup_resolution)?;
    let torso_table = CurveTable::build(&points.torso_curve(), task.lookup_resolution)?;
    let pace_table = CurveTable::build(&points.pace_curve(), task.lookup_resolution)?;
    let path_curve = points.path_curve();

    let mut times = Vec::with_capacity(n + 1);
    let mut feet = Vec::with_capacity(n + 1);
    let mut phis = Vec::with_capacity(n + 1);
    let mut previous_pace = f64::NEG_INFINITY;
    for k in 0..=n {
        let t = task.step_time * k as f64 / n as f64;
        let pace = pace_table.value_at(t);
        if pace < previous_pace - 1e-12 {
            return Err(Error::NonMonotoneTime { grid_index: k });
        }
        previous_pace = previous_pace.max(pace);

        let wrap = |e: Error| Error::Sample { index: k, source: Box::new(e) };
        // Interpolated pace values stay within the control ordinates; the
        // clamp only absorbs round-off at the 0/1 boundaries. A genuinely
        // out-of-range pace keeps its value and fails curve evaluation.
        let pace = if (-1e-9..=1.0 + 1e-9).contains(&pace) { pace.clamp(0.0, 1.0) } else { pace };
        let foot_point = path_curve.eval(pace).map_err(wrap)?;
        let input = IkInput {
            target: foot_point,
            phi1: task.ankle.eval(t),
            phi3: torso_table.value_at(t),
            r2: ratio_table.value_at(t),
        };
        let phi = inverse_kinematics(model, &input)
            .map_err(|e| Error::Sample { index: k, source: Box::new(e) })?;
        times.push(t);
        feet.push(foot_point);
        phis.push(phi);
    }

    if (feet[0] - task.start).norm() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "sampled start {:?} does not match task start {:?}",
            feet[0], task.start
        )));
    }
    if (feet[n] - task.land).norm() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "sampled landing {:?} does not match task landing {:?}",
            feet[n], task.land
        )));
    }

    Ok(assemble_table(model, &times, &phis, &feet, step))
}

/// Builds a trajectory table from externally supplied joint angles on a
/// uniform grid, e.g. a replayed reference gait. Foot positions come from
/// forward kinematics; derivatives and torques use the same scheme as
/// [`sample_gait`].
pub fn trajectory_from_joint_series(
    model: &BodyModel,
    times: &[f64],
    theta: &[Vec5],
    step: f64,
) -> TrajectoryTable {
    let phis: Vec<Vec5> = theta
        .iter()
        .map(|th| crate::model::RelativePose::at_rest(*th).to_absolute().phi)
        .collect();
    let feet: Vec<Vec2> =
        phis.iter().map(|phi| forward_kinematics(model, phi).swing_foot()).collect();
    assemble_table(model, times, &phis, &feet, step)
}

fn assemble_table(
    model: &BodyModel,
    times: &[f64],
    phis: &[Vec5],
    feet: &[Vec2],
    step: f64,
) -> TrajectoryTable {
    let coeffs = CouplingCoefficients::from_model(model);
    let (dphi, ddphi) = backward_differences_vec5(phis, step);
    let foot_velocity = backward_differences_vec2(feet, step);

    let rows = (0..times.len())
        .map(|k| {
            let pose = AbsolutePose::new(phis[k], dphi[k], ddphi[k]);
            let relative = pose.to_relative();
            let torque = coeffs.torque_relative(&pose).values;
            TrajectoryRow {
                t: times[k],
                theta: relative.theta,
                dtheta: relative.dtheta,
                ddtheta: relative.ddtheta,
                phi: pose.phi,
                dphi: pose.dphi,
                ddphi: pose.ddphi,
                foot: feet[k],
                foot_velocity: foot_velocity[k],
                torque,
            }
        })
        .collect();
    TrajectoryTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table2_model() -> BodyModel {
        crate::io::load_body_model(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/model_table2.json"
        ))
        .unwrap()
    }

    fn ground_task() -> GaitTask {
        crate::io::load_task(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/task_ground.json"
        ))
        .unwrap()
    }

    fn feasible_points(task: &GaitTask) -> GaitControlPoints {
        crate::optimizer::initial_points(task, &crate::optimizer::build_bounds(task).unwrap())
    }

    #[test]
    fn flatten_round_trips_in_fixed_row_order() {
        let task = ground_task();
        let points = feasible_points(&task);
        let flat = points.flatten();
        assert_eq!(flat[0], points.ratio[0].x);
        assert_eq!(flat[1], points.ratio[0].y);
        assert_eq!(flat[10], points.torso[0].x);
        assert_eq!(flat[20], points.path[0].x);
        assert_eq!(flat[30], points.pace[0].x);
        assert_eq!(GaitControlPoints::from_flat(&flat), points);
    }

    #[test]
    fn ankle_profile_midpoint_and_saturation() {
        let profile = AnkleProfile {
            phi1_start: 0.03,
            phi1_end: 0.25,
            steepness: 10.0,
            midpoint: 2.0,
        };
        assert_relative_eq!(profile.eval(2.0), (0.03 + 0.25) / 2.0, epsilon = 1e-15);
        // kappa * t_mid = 20: saturated to within 1e-6 of the plateaus.
        assert_relative_eq!(profile.eval(0.0), 0.03, epsilon = 1e-6);
        assert_relative_eq!(profile.eval(4.0), 0.25, epsilon = 1e-6);
        let mut last = f64::NEG_INFINITY;
        for k in 0..=40 {
            let value = profile.eval(4.0 * k as f64 / 40.0);
            assert!(value > last);
            last = value;
        }
    }

    #[test]
    fn finite_diff_constant_series_is_zero() {
        let samples: Vec<(f64, f64)> = (0..10).map(|k| (0.1 * k as f64, 3.5)).collect();
        let (first, second) = finite_diff(&samples, 0.1).unwrap();
        assert!(first.iter().all(|&v| v == 0.0));
        assert!(second.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn finite_diff_linear_series_recovers_slope() {
        let slope = -1.7;
        let samples: Vec<(f64, f64)> = (0..10).map(|k| {
            let t = 0.05 * k as f64;
            (t, slope * t + 0.4)
        }).collect();
        let (first, second) = finite_diff(&samples, 0.05).unwrap();
        for k in 1..10 {
            assert_relative_eq!(first[k], slope, epsilon = 1e-12);
        }
        for k in 2..10 {
            assert!(second[k].abs() < 1e-10);
        }
    }

    #[test]
    fn finite_diff_quadratic_series_recovers_curvature() {
        let accel = 2.4;
        let step = 0.02;
        let samples: Vec<(f64, f64)> = (0..20).map(|k| {
            let t = step * k as f64;
            (t, 0.5 * accel * t * t)
        }).collect();
        let (first, second) = finite_diff(&samples, step).unwrap();
        for k in 2..20 {
            assert_relative_eq!(second[k], accel, epsilon = 1e-9);
        }
        // Backward first differences lag by O(K).
        let t_last = step * 19.0;
        assert!((first[19] - accel * t_last).abs() < accel * step);
    }

    #[test]
    fn finite_diff_rejects_non_uniform_spacing() {
        let mut samples: Vec<(f64, f64)> = (0..10).map(|k| (0.1 * k as f64, 1.0)).collect();
        samples[4].0 += 0.03;
        assert!(matches!(
            finite_diff(&samples, 0.1),
            Err(Error::NonUniformSpacing { .. })
        ));
    }

    #[test]
    fn ground_fixture_has_matching_grid() {
        let model = table2_model();
        let task = ground_task();
        let table = sample_gait(&feasible_points(&task), &task, &model).unwrap();
        assert_eq!(table.rows.len(), 101);
        assert_eq!(table.rows[0].t, 0.0);
        assert_eq!(table.rows[100].t, 2.24);
        assert!((table.rows[0].foot - task.start).norm() <= 1e-9);
        assert!((table.rows[100].foot - task.land).norm() <= 1e-9);
    }

    #[test]
    fn sampled_rows_are_consistent_with_forward_kinematics() {
        let model = table2_model();
        let task = ground_task();
        let table = sample_gait(&feasible_points(&task), &task, &model).unwrap();
        for row in &table.rows {
            let foot = forward_kinematics(&model, &row.phi).swing_foot();
            assert!((foot - row.foot).norm() <= 1e-9, "t = {}", row.t);
        }
    }

    #[test]
    fn degenerate_gait_holds_the_foot_still() {
        let model = table2_model();
        let mut task = ground_task();
        task.land = task.start;
        let bounds = crate::optimizer::build_bounds(&task).unwrap();
        let mut points = crate::optimizer::initial_points(&task, &bounds);
        points.path = [Vec2::new(task.start.x, task.start.y); 5];
        let table = sample_gait(&points, &task, &model).unwrap();
        for row in &table.rows {
            // Curve evaluation blends equal control points by convex
            // combinations, exact only up to an ulp.
            assert!((row.foot - task.start).norm() <= 1e-15);
            assert!(row.foot_velocity.norm() <= 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = table2_model();
        let task = ground_task();
        let points = feasible_points(&task);
        let a = sample_gait(&points, &task, &model).unwrap();
        let b = sample_gait(&points, &task, &model).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn angle_increments_shrink_with_denser_sampling() {
        let model = table2_model();
        let mut task = ground_task();
        let points = feasible_points(&task);
        let max_increment = |task: &GaitTask| {
            let table = sample_gait(&points, task, &model).unwrap();
            table
                .rows
                .windows(2)
                .map(|w| (w[1].phi - w[0].phi).amax())
                .fold(0.0f64, f64::max)
        };
        let mut increments = Vec::new();
        for n in [50, 100, 200, 400] {
            task.samples = n;
            increments.push(max_increment(&task));
        }
        for pair in increments.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        assert!(increments[3] < 0.5 * increments[0]);
    }

    #[test]
    fn non_monotone_lookup_time_is_rejected() {
        let model = table2_model();
        let task = ground_task();
        let mut points = feasible_points(&task);
        // In-box time coordinates that sweep forward, back, and forward
        // again make the ratio lookup abscissa dip mid-curve.
        points.ratio[1] = Vec2::new(task.step_time, 0.5);
        points.ratio[2] = Vec2::new(0.0, 0.5);
        points.ratio[3] = Vec2::new(0.0, 0.5);
        match sample_gait(&points, &task, &model) {
            Err(Error::NonMonotoneTime { .. }) => {}
            other => panic!("expected non-monotone time, got {other:?}"),
        }
    }
}
