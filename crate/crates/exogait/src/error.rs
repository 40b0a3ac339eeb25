//! Error type shared across the crate.

use std::fmt;

use crate::model::LimitViolation;

/// Errors produced by kinematics, gait sampling, optimization and file I/O.
#[derive(Debug)]
pub enum Error {
    /// Two joint positions coincide, so no segment angle exists.
    ZeroLengthSegment,
    /// The two-circle intersection for the stance thigh has no solution.
    NoCircleIntersection { distance: f64 },
    /// The swing-leg target cannot be reached from the current hip position.
    Unreachable(String),
    /// The admissible thigh-angle interval is empty for this target.
    EmptyThighRange { phi2_min: f64, phi2_max: f64 },
    /// A pose violates the configured joint limits.
    JointLimits(Vec<LimitViolation>),
    /// A Bezier curve parameter fell outside [0, 1].
    CurveParam(f64),
    /// A Bezier curve must have 4 (cubic) or 5 (quartic) control points.
    InvalidCurve(usize),
    /// The time component of a lookup curve decreases along the sample grid.
    NonMonotoneTime { grid_index: usize },
    /// A sample series is not uniformly spaced.
    NonUniformSpacing { index: usize },
    /// Gait sampling failed at a specific sample.
    Sample { index: usize, source: Box<Error> },
    /// A model, task or gait definition violates an invariant.
    InvalidInput(String),
    /// Bounds construction produced a lower bound above an upper bound.
    InfeasibleTask(String),
    /// No feasible starting point could be found for the optimizer.
    InitializationFailed { attempts: usize },
    /// A file could not be read or written.
    Io(std::io::Error),
    /// A file has the wrong schema or an unparsable value.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroLengthSegment => write!(f, "zero-length segment"),
            Error::NoCircleIntersection { distance } => {
                write!(f, "no circle intersection at joint distance {distance}")
            }
            Error::Unreachable(what) => write!(f, "swing leg unreachable: {what}"),
            Error::EmptyThighRange { phi2_min, phi2_max } => write!(
                f,
                "no admissible thigh angle reaches the target (range [{phi2_min}, {phi2_max}])"
            ),
            Error::JointLimits(violations) => {
                write!(f, "joint limits violated:")?;
                for v in violations {
                    write!(f, " {v};")?;
                }
                Ok(())
            }
            Error::CurveParam(u) => write!(f, "curve parameter {u} outside [0, 1]"),
            Error::InvalidCurve(n) => {
                write!(f, "Bezier curve needs 4 or 5 control points, got {n}")
            }
            Error::NonMonotoneTime { grid_index } => write!(
                f,
                "time reparameterization not monotone at grid index {grid_index}"
            ),
            Error::NonUniformSpacing { index } => {
                write!(f, "non-uniform sample spacing at index {index}")
            }
            Error::Sample { index, source } => write!(f, "sample {index}: {source}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InfeasibleTask(msg) => write!(f, "infeasible task: {msg}"),
            Error::InitializationFailed { attempts } => {
                write!(f, "initialization failed after {attempts} attempts")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Sample { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
