//! Command-line surface for the five-link exoskeleton gait tools.
//!
//! Exit codes: 0 on success, 1 for validation or file errors, 2 when the
//! optimization task is infeasible.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use exogait::dynamics::DEFAULT_ORACLE_STEP;
use exogait::model::Vec5;
use exogait::{
    cost_of_table, AbsolutePose, Error, IkInput, OptimizeResult, OptimizerOptions,
    TrajectoryTable,
};

#[derive(Parser)]
#[command(name = "exogait", version, about = "Swing-phase gait generation for a five-link exoskeleton")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the stance-ankle torque of a swing-phase gait.
    Optimize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        task: PathBuf,
        /// Output path for the optimized control points (JSON).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional diagnostics report (JSON) with the sampled trajectory.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = OptimizerOptions::default().max_evaluations)]
        max_evals: usize,
        #[arg(long, default_value_t = OptimizerOptions::default().restarts)]
        restarts: usize,
    },
    /// Sample a gait's trajectory table and export it as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        gait: PathBuf,
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Feed recorded joint angles through the dynamics as a baseline.
    Replay {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the analytic inverse kinematics for one gait state.
    Ik {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        x5: f64,
        #[arg(long)]
        y5: f64,
        #[arg(long)]
        phi1: f64,
        #[arg(long)]
        phi3: f64,
        #[arg(long)]
        r2: f64,
    },
    /// Compare the closed-form torques against the energy-based oracle on
    /// random states.
    CheckDynamics {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate a pair of crutch force logs into the load metric.
    Grf {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Sampling interval of both logs, seconds.
        #[arg(long, default_value_t = 0.01)]
        ts: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            match error {
                Error::InfeasibleTask(_) | Error::InitializationFailed { .. } => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Optimize { model, task, out, seed, report, max_evals, restarts } => {
            let model = exogait::load_body_model(model)?;
            let task = exogait::load_task(task)?;
            let options = OptimizerOptions {
                seed,
                max_evaluations: max_evals,
                restarts,
                ..OptimizerOptions::default()
            };
            let result = exogait::optimize(&task, &model, &options)?;
            exogait::save_gait_points(&result.points, &out)?;
            println!(
                "optimized: cost {:.6} (initial {:.6}), torque term {:.6}, peak foot speed {:.4} m/s, {} evaluations",
                result.cost,
                result.report.initial_cost,
                result.report.breakdown.torque_term,
                result.report.breakdown.max_foot_speed,
                result.report.evaluations
            );
            if let Some(path) = report {
                write_report(&result, seed, &path)?;
            }
            Ok(())
        }
        Command::Simulate { model, gait, task, out } => {
            let model = exogait::load_body_model(model)?;
            let task = exogait::load_task(task)?;
            let points = exogait::load_gait_points(gait)?;
            let table = exogait::sample_gait(&points, &task, &model)?;
            let breakdown = cost_of_table(&table, &task);
            exogait::export_trajectory(&table, &out)?;
            println!(
                "simulated {} rows: cost {:.6}, torque term {:.6}, peak foot speed {:.4} m/s",
                table.rows.len(),
                breakdown.total,
                breakdown.torque_term,
                breakdown.max_foot_speed
            );
            Ok(())
        }
        Command::Replay { model, reference, task, out } => {
            let model = exogait::load_body_model(model)?;
            let task = exogait::load_task(task)?;
            let reference = exogait::load_reference_gait(reference)?;
            let n = task.samples;
            let times: Vec<f64> =
                (0..=n).map(|k| task.step_time * k as f64 / n as f64).collect();
            let angles = reference.sample_at(&times)?;
            let step = task.step_time / n as f64;
            let table = exogait::trajectory_from_joint_series(&model, &times, &angles, step);
            let breakdown = cost_of_table(&table, &task);
            exogait::export_trajectory(&table, &out)?;
            println!(
                "replayed {} rows: cost {:.6}, torque term {:.6}, peak foot speed {:.4} m/s",
                table.rows.len(),
                breakdown.total,
                breakdown.torque_term,
                breakdown.max_foot_speed
            );
            Ok(())
        }
        Command::Ik { model, x5, y5, phi1, phi3, r2 } => {
            let model = exogait::load_body_model(model)?;
            let input = IkInput { target: Vector2::new(x5, y5), phi1, phi3, r2 };
            let (phi2_min, phi2_max) = exogait::phi2_range(&model, phi1, input.target)?;
            let phi = exogait::inverse_kinematics(&model, &input)?;
            let theta = AbsolutePose::at_rest(phi).to_relative().theta;
            let joints = exogait::forward_kinematics(&model, &phi);
            let vec = |v: &Vec5| v.iter().copied().collect::<Vec<f64>>();
            let output = serde_json::json!({
                "phi": vec(&phi),
                "theta": vec(&theta),
                "phi2_min": phi2_min,
                "phi2_max": phi2_max,
                "joints": joints.p.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>(),
            });
            println!("{output:#}");
            Ok(())
        }
        Command::CheckDynamics { model, trials, seed } => {
            let model = exogait::load_body_model(model)?;
            let coeffs = exogait::CouplingCoefficients::from_model(&model);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst_ratio = 0.0f64;
            for _ in 0..trials {
                let pose = AbsolutePose::new(
                    Vec5::from_fn(|_, _| rng.random_range(-PI..PI)),
                    Vec5::from_fn(|_, _| rng.random_range(-5.0..5.0)),
                    Vec5::from_fn(|_, _| rng.random_range(-20.0..20.0)),
                );
                let closed = coeffs.torque_absolute(&pose).values;
                let oracle =
                    exogait::lagrangian_oracle(&model, &pose, DEFAULT_ORACLE_STEP).values;
                for i in 0..5 {
                    let tolerance = (1e-4 * oracle[i].abs()).max(1e-6);
                    worst_ratio = worst_ratio.max((closed[i] - oracle[i]).abs() / tolerance);
                }
            }
            println!(
                "checked {trials} random states: worst error at {:.3e} of tolerance",
                worst_ratio
            );
            if worst_ratio > 1.0 {
                return Err(Error::InvalidInput(
                    "closed-form torques disagree with the energy oracle".into(),
                ));
            }
            Ok(())
        }
        Command::Grf { left, right, ts } => {
            let left = exogait::load_force_trace(left, ts)?;
            let right = exogait::load_force_trace(right, ts)?;
            let metric = exogait::grf_metric(&left, &right)?;
            println!("F = {metric:.17} N s over {} samples", left.samples.len());
            Ok(())
        }
    }
}

fn trajectory_json(table: &TrajectoryTable) -> serde_json::Value {
    let columns: Vec<&str> = exogait::io::TRAJECTORY_HEADER.split(',').collect();
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|row| {
            let mut values = Vec::with_capacity(20);
            values.push(row.t);
            values.extend(row.theta.iter());
            values.extend(row.phi.iter());
            values.push(row.foot.x);
            values.push(row.foot.y);
            values.push(row.foot_velocity.x);
            values.push(row.foot_velocity.y);
            values.extend(row.torque.iter());
            values
        })
        .collect();
    serde_json::json!({ "columns": columns, "rows": rows })
}

fn write_report(result: &OptimizeResult, seed: u64, path: &PathBuf) -> Result<(), Error> {
    let report = &result.report;
    let value = serde_json::json!({
        "seed": seed,
        "best_cost": result.cost,
        "initial_cost": report.initial_cost,
        "evaluations": report.evaluations,
        "restart_best_costs": report.restart_best_costs,
        "bound_violations": report.bound_violations,
        "max_bound_violation": report.max_bound_violation,
        "torque_term": report.breakdown.torque_term,
        "penalty_term": report.breakdown.penalty_term,
        "max_foot_speed": report.breakdown.max_foot_speed,
        "trajectory": trajectory_json(&result.trajectory),
    });
    std::fs::write(path, format!("{value:#}\n"))?;
    Ok(())
}
