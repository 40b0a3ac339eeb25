//! Swing-phase gait generation for a planar five-link lower-limb
//! exoskeleton.
//!
//! The chain is stance shank, stance thigh, torso, swing thigh and swing
//! shank in the sagittal plane. A gait is described by Bezier control points
//! for the swing-foot path, its pace, the torso angle, and the stance-thigh
//! interpolation ratio; analytic inverse kinematics turns those into joint
//! angles, the closed-form Lagrangian dynamics turns angles into joint
//! torques, and a bounded derivative-free search shapes the gait to minimize
//! the stance-ankle torque while the swing foot is airborne.
//!
//! The crate exposes:
//!
//! - [`model`]: link parameters, joint limits, and the relative/absolute
//!   angle transform;
//! - [`dynamics`]: coupling coefficients, joint torques, mechanical energy,
//!   and a finite-difference torque oracle;
//! - [`kinematics`]: forward kinematics and the analytic inverse;
//! - [`bezier`] and [`gait`]: curve evaluation, lookup tables, and gait
//!   sampling into trajectory tables;
//! - [`optimizer`]: bound construction, the ankle-torque cost, and the
//!   seeded simplex search;
//! - [`io`]: strict JSON/CSV ingestion and export plus the crutch
//!   ground-reaction-force metric.

pub mod bezier;
pub mod dynamics;
pub mod error;
pub mod gait;
pub mod io;
pub mod kinematics;
pub mod model;
pub mod optimizer;

pub use bezier::{curve_lookup, BezierCurve, CurveTable, Vec2};
pub use dynamics::{
    lagrangian_oracle, mechanical_energy, torque_absolute, torque_relative,
    CouplingCoefficients, Frame, JointTorques,
};
pub use error::{Error, Result};
pub use gait::{
    finite_diff, sample_gait, trajectory_from_joint_series, AnkleProfile, GaitControlPoints,
    GaitTask, TrajectoryRow, TrajectoryTable,
};
pub use io::{
    export_trajectory, grf_metric, load_body_model, load_force_trace, load_gait_points,
    load_reference_gait, load_task, load_trajectory, save_gait_points, ForceTrace,
    ReferenceGait, TrajectoryRecord,
};
pub use kinematics::{
    forward_kinematics, inverse_kinematics, phi2_range, segment_angle, IkInput, JointPositions,
};
pub use model::{
    AbsolutePose, BodyModel, JointLimits, LimitViolation, LinkParams, RelativePose, Vec5,
};
pub use optimizer::{
    build_bounds, contact_indicator, cost, cost_breakdown, cost_of_table, initial_points,
    optimize, Bounds, CostBreakdown, OptimizeReport, OptimizeResult, OptimizerOptions,
};
