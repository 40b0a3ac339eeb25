//! Box constraints on the gait control points, the swing-phase ankle-torque
//! cost, and the bounded derivative-free minimization.

mod nelder_mead;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bezier::Vec2;
use crate::error::{Error, Result};
use crate::gait::{sample_gait, GaitControlPoints, GaitTask, TrajectoryTable, FLAT_LEN};
use crate::model::BodyModel;

/// Rows of the bound matrices, matching the flattened control-point order.
pub const BOUND_ROWS: usize = 19;

/// Control points above the endpoints must clear them by this margin, meters.
const ENDPOINT_LIFT: f64 = 0.3;
/// Absolute ceiling for end-point path control points, meters.
const PATH_CEILING: f64 = 0.6;
/// Half-width of the torso-angle band, radians.
const TORSO_BAND: f64 = PI / 12.0;

/// Elementwise lower and upper bounds on the 19 control points. Rows where
/// both coordinates coincide are pinned by the task's initial and final
/// conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: [[f64; 2]; BOUND_ROWS],
    pub upper: [[f64; 2]; BOUND_ROWS],
}

impl Bounds {
    pub fn lower_flat(&self) -> [f64; FLAT_LEN] {
        let mut flat = [0.0; FLAT_LEN];
        for (row, pair) in self.lower.iter().enumerate() {
            flat[2 * row] = pair[0];
            flat[2 * row + 1] = pair[1];
        }
        flat
    }

    pub fn upper_flat(&self) -> [f64; FLAT_LEN] {
        let mut flat = [0.0; FLAT_LEN];
        for (row, pair) in self.upper.iter().enumerate() {
            flat[2 * row] = pair[0];
            flat[2 * row + 1] = pair[1];
        }
        flat
    }

    /// Number of rows pinned on both coordinates.
    pub fn pinned_rows(&self) -> usize {
        (0..BOUND_ROWS)
            .filter(|&r| self.lower[r][0] == self.upper[r][0] && self.lower[r][1] == self.upper[r][1])
            .count()
    }

    pub fn clamp_flat(&self, flat: &mut [f64; FLAT_LEN]) {
        let lower = self.lower_flat();
        let upper = self.upper_flat();
        for i in 0..FLAT_LEN {
            flat[i] = flat[i].clamp(lower[i], upper[i]);
        }
    }
}

/// Ground-contact gate of the cost function: 0 when the swing foot is within
/// `radius` of the start or landing point (boundary inclusive), 1 otherwise.
pub fn contact_indicator(foot: Vec2, start: Vec2, land: Vec2, radius: f64) -> f64 {
    if (foot - start).norm() <= radius || (foot - land).norm() <= radius {
        0.0
    } else {
        1.0
    }
}

/// Builds the 19-row bound matrices for a task. Millimeter constants of the
/// underlying constraint set are expressed in meters (0.3 lift, 0.6 ceiling).
pub fn build_bounds(task: &GaitTask) -> Result<Bounds> {
    let ts = task.step_time;
    let (x0, y0) = (task.start.x, task.start.y);
    let (xs, ys) = (task.land.x, task.land.y);
    let y_floor = y0.min(ys);

    let lower: [[f64; 2]; BOUND_ROWS] = [
        // Interpolation ratio r2 over time: first point pinned at lift-off.
        [0.0, task.r2_start],
        [0.0, 0.0],
        [0.0, 0.0],
        [0.0, 0.0],
        [ts, 0.0],
        // Torso angle over time: first point pinned, band of +-15 degrees.
        [0.0, task.phi3_start],
        [0.0, -TORSO_BAND],
        [0.0, -TORSO_BAND],
        [0.0, -TORSO_BAND],
        [ts, -TORSO_BAND],
        // End-point path: endpoints pinned, neighbors lifted above them.
        [x0, y0],
        [x0, y0 + ENDPOINT_LIFT],
        [x0, y_floor],
        [xs, ys + ENDPOINT_LIFT],
        [xs, ys],
        // Pace over time: fixed 0 -> 1 sweep.
        [0.0, 0.0],
        [0.0, 0.0],
        [0.0, 0.0],
        [ts, 1.0],
    ];
    let upper: [[f64; 2]; BOUND_ROWS] = [
        [0.0, task.r2_start],
        [ts, 1.0],
        [ts, 1.0],
        [ts, 1.0],
        [ts, 1.0],
        [0.0, task.phi3_start],
        [ts, TORSO_BAND],
        [ts, TORSO_BAND],
        [ts, TORSO_BAND],
        [ts, TORSO_BAND],
        [x0, y0],
        [x0, PATH_CEILING],
        [xs, PATH_CEILING],
        [xs, PATH_CEILING],
        [xs, ys],
        [0.0, 0.0],
        [ts, 1.0],
        [ts, 1.0],
        [ts, 1.0],
    ];

    for row in 0..BOUND_ROWS {
        for coord in 0..2 {
            if lower[row][coord] > upper[row][coord] {
                return Err(Error::InfeasibleTask(format!(
                    "bound row {} coordinate {}: lower {} exceeds upper {}",
                    row + 1,
                    coord,
                    lower[row][coord],
                    upper[row][coord]
                )));
            }
        }
    }
    Ok(Bounds { lower, upper })
}

/// Feasible-by-construction starting point: pinned rows as required, free
/// points on straight-line interpolants between their pinned neighbors,
/// lifted onto the lower bounds where needed.
pub fn initial_points(task: &GaitTask, bounds: &Bounds) -> GaitControlPoints {
    let ts = task.step_time;
    let quarter = |i: usize| ts * i as f64 / 4.0;
    let mid = 0.5 * (task.start + task.land);

    let points = GaitControlPoints {
        ratio: std::array::from_fn(|i| Vec2::new(quarter(i), task.r2_start)),
        torso: std::array::from_fn(|i| Vec2::new(quarter(i), task.phi3_start)),
        path: [
            task.start,
            Vec2::new(task.start.x, task.start.y + ENDPOINT_LIFT),
            mid,
            Vec2::new(task.land.x, task.land.y + ENDPOINT_LIFT),
            task.land,
        ],
        pace: std::array::from_fn(|i| Vec2::new(ts * i as f64 / 3.0, i as f64 / 3.0)),
    };
    let mut flat = points.flatten();
    bounds.clamp_flat(&mut flat);
    GaitControlPoints::from_flat(&flat)
}

/// The cost of one sampled gait, split into its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// Contact-gated mean squared stance-ankle torque, (N m)^2.
    pub torque_term: f64,
    /// `penalty_weight * max_foot_speed`.
    pub penalty_term: f64,
    /// Peak swing-foot speed over the step, m/s.
    pub max_foot_speed: f64,
    pub total: f64,
}

/// Evaluates the cost terms on an already sampled trajectory.
pub fn cost_of_table(table: &TrajectoryTable, task: &GaitTask) -> CostBreakdown {
    let mut torque_term = 0.0;
    let mut max_foot_speed = 0.0f64;
    for row in &table.rows {
        let gate = contact_indicator(row.foot, task.start, task.land, task.contact_radius);
        torque_term += gate * row.torque[0] * row.torque[0];
        max_foot_speed = max_foot_speed.max(row.foot_velocity.norm());
    }
    torque_term /= table.rows.len() as f64;
    let penalty_term = task.penalty_weight * max_foot_speed;
    CostBreakdown { torque_term, penalty_term, max_foot_speed, total: torque_term + penalty_term }
}

/// Cost terms of a gait described by control points.
pub fn cost_breakdown(
    points: &GaitControlPoints,
    task: &GaitTask,
    model: &BodyModel,
) -> Result<CostBreakdown> {
    let table = sample_gait(points, task, model)?;
    Ok(cost_of_table(&table, task))
}

/// The scalar objective: contact-gated mean squared ankle torque plus the
/// peak-speed penalty. Any sampling failure (unreachable target, joint
/// limits, non-monotone reparameterization) makes the candidate infeasible
/// with an infinite cost.
pub fn cost(points: &GaitControlPoints, task: &GaitTask, model: &BodyModel) -> f64 {
    match cost_breakdown(points, task, model) {
        Ok(breakdown) => breakdown.total,
        Err(_) => f64::INFINITY,
    }
}

/// Search settings. The defaults favor robustness over speed; the search is
/// deterministic for a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Total evaluation budget across all starts.
    pub max_evaluations: usize,
    /// Extra seeded random starts after the deterministic one.
    pub restarts: usize,
    pub seed: u64,
    /// Relative cost-spread tolerance for simplex convergence.
    pub tolerance: f64,
    /// Initial simplex offset as a fraction of the box width.
    pub step_scale: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_evaluations: 24_000,
            restarts: 2,
            seed: 0,
            tolerance: 1e-9,
            step_scale: 0.25,
        }
    }
}

/// Per-run diagnostics of one optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub evaluations: usize,
    /// Best cost reached by each start, in order.
    pub restart_best_costs: Vec<f64>,
    /// Evaluations that saw an out-of-bounds candidate; stays 0 because
    /// candidates are clipped before evaluation.
    pub bound_violations: usize,
    /// Largest elementwise bound violation observed at evaluation time.
    pub max_bound_violation: f64,
    /// Cost of the feasible starting point.
    pub initial_cost: f64,
    pub breakdown: CostBreakdown,
}

/// An optimized gait with its diagnostics and sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub points: GaitControlPoints,
    pub cost: f64,
    pub trajectory: TrajectoryTable,
    pub report: OptimizeReport,
}

fn random_point(
    rng: &mut ChaCha8Rng,
    lower: &[f64; FLAT_LEN],
    upper: &[f64; FLAT_LEN],
) -> Vec<f64> {
    (0..FLAT_LEN)
        .map(|i| {
            if upper[i] > lower[i] {
                lower[i] + rng.random_range(0.0..1.0) * (upper[i] - lower[i])
            } else {
                lower[i]
            }
        })
        .collect()
}

/// Minimizes the gait cost inside the box constraints.
///
/// The first start is the deterministic feasible initializer; additional
/// starts draw uniformly from the box with the seeded generator. The result
/// never costs more than the starting point, and two runs with the same seed
/// produce bit-identical gaits.
pub fn optimize(
    task: &GaitTask,
    model: &BodyModel,
    options: &OptimizerOptions,
) -> Result<OptimizeResult> {
    task.validate()?;
    let bounds = build_bounds(task)?;
    let lower = bounds.lower_flat();
    let upper = bounds.upper_flat();
    let free: Vec<usize> = (0..FLAT_LEN).filter(|&i| upper[i] > lower[i]).collect();

    let mut evaluations = 0usize;
    let mut bound_violations = 0usize;
    let mut max_bound_violation = 0.0f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut objective = |flat: &[f64]| -> f64 {
        evaluations += 1;
        let mut violation = 0.0f64;
        for i in 0..FLAT_LEN {
            violation = violation.max(lower[i] - flat[i]).max(flat[i] - upper[i]);
        }
        if violation > 0.0 {
            bound_violations += 1;
            max_bound_violation = max_bound_violation.max(violation);
        }
        let array: &[f64; FLAT_LEN] = flat.try_into().expect("candidate has 38 coordinates");
        let value = cost(&GaitControlPoints::from_flat(array), task, model);
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if best.as_ref().map_or(true, |(_, best_cost)| value < *best_cost) {
            best = Some((flat.to_vec(), value));
        }
        value
    };

    let initial = initial_points(task, &bounds).flatten();
    let initial_cost = objective(&initial);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut first_start = initial.to_vec();
    if !initial_cost.is_finite() {
        const RETRIES: usize = 64;
        let mut found = false;
        for _ in 0..RETRIES {
            let draw = random_point(&mut rng, &lower, &upper);
            if objective(&draw).is_finite() {
                first_start = draw;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::InitializationFailed { attempts: RETRIES });
        }
    }

    let budget_each = (options.max_evaluations / (options.restarts + 1)).max(50);
    let mut restart_best_costs = Vec::with_capacity(options.restarts + 1);
    let (_, start_best) = nelder_mead::minimize(
        &mut objective,
        &lower,
        &upper,
        &first_start,
        &free,
        options.step_scale,
        options.tolerance,
        budget_each,
    );
    restart_best_costs.push(start_best);
    for _ in 0..options.restarts {
        let draw = random_point(&mut rng, &lower, &upper);
        let (_, restart_best) = nelder_mead::minimize(
            &mut objective,
            &lower,
            &upper,
            &draw,
            &free,
            options.step_scale,
            options.tolerance,
            budget_each,
        );
        restart_best_costs.push(restart_best);
    }

    let (best_flat, best_cost) = best.expect("at least one evaluation happened");
    let array: [f64; FLAT_LEN] = best_flat.as_slice().try_into().expect("38 coordinates");
    let points = GaitControlPoints::from_flat(&array);
    let trajectory = sample_gait(&points, task, model)?;
    let breakdown = cost_of_table(&trajectory, task);

    Ok(OptimizeResult {
        points,
        cost: best_cost,
        trajectory,
        report: OptimizeReport {
            evaluations,
            restart_best_costs,
            bound_violations,
            max_bound_violation,
            initial_cost: if initial_cost.is_finite() { initial_cost } else { f64::INFINITY },
            breakdown,
        },
    })
}
