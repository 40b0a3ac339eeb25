//! Physical parameters of the five-link mechanism, angle conventions, and the
//! linear map between relative and absolute joint angles.
//!
//! Link numbering on the sagittal plane: 1 = stance shank, 2 = stance thigh,
//! 3 = torso, 4 = swing thigh, 5 = swing shank. The absolute angle `phi_i` is
//! measured clockwise from the vertical-up direction; the relative angle
//! `theta_i` is measured anti-clockwise between link `i` and link `i-1`
//! (ground for `i = 1`). The two systems are related by the affine map
//! `phi = A * theta + b` with `A` lower-triangular of -1 entries and
//! `b = [pi/2, pi/2, pi/2, 3pi/2, 3pi/2]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{Matrix5, Vector5};

use crate::error::{Error, Result};

pub type Vec5 = Vector5<f64>;
pub type Mat5 = Matrix5<f64>;

/// Geometry and inertia of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Link length in meters.
    pub length: f64,
    /// Distance from the proximal joint to the link's center of mass, meters.
    pub com_offset: f64,
    /// Link mass in kilograms.
    pub mass: f64,
    /// Moment of inertia about the center of mass, kg m^2.
    pub inertia: f64,
}

/// Joint range limits, stored in radians as non-negative magnitudes.
///
/// The anatomical angle of a joint is valid when it lies in
/// `[-extension, +flexion]` (for the ankle: `[-plantarflexion,
/// +dorsiflexion]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub hip_flexion: f64,
    pub hip_extension: f64,
    pub knee_flexion: f64,
    pub knee_extension: f64,
    pub ankle_dorsiflexion: f64,
    pub ankle_plantarflexion: f64,
}

impl Default for JointLimits {
    /// Platform limits: hip flexion/extension 100/80 degrees, knee 100/0,
    /// ankle dorsiflexion/plantarflexion 20/0.
    fn default() -> Self {
        JointLimits {
            hip_flexion: 100f64.to_radians(),
            hip_extension: 80f64.to_radians(),
            knee_flexion: 100f64.to_radians(),
            knee_extension: 0.0,
            ankle_dorsiflexion: 20f64.to_radians(),
            ankle_plantarflexion: 0.0,
        }
    }
}

/// Full model of the exoskeleton plus pilot as a planar five-link chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel {
    /// Links indexed 0..5 for links 1..5.
    pub links: [LinkParams; 5],
    pub joint_limits: JointLimits,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
}

impl BodyModel {
    /// Checks the physical invariants: positive lengths and masses,
    /// non-negative inertias, COM offsets inside the link, non-empty joint
    /// ranges, positive gravity.
    pub fn validate(&self) -> Result<()> {
        for (i, link) in self.links.iter().enumerate() {
            let n = i + 1;
            if !(link.length > 0.0) {
                return Err(Error::InvalidInput(format!("link {n}: length must be > 0")));
            }
            if !(link.mass > 0.0) {
                return Err(Error::InvalidInput(format!("link {n}: mass must be > 0")));
            }
            if !(link.inertia >= 0.0) {
                return Err(Error::InvalidInput(format!("link {n}: inertia must be >= 0")));
            }
            if !(0.0 <= link.com_offset && link.com_offset <= link.length) {
                return Err(Error::InvalidInput(format!(
                    "link {n}: com offset {} outside [0, {}]",
                    link.com_offset, link.length
                )));
            }
        }
        let lim = &self.joint_limits;
        for (name, flexion, extension) in [
            ("hip", lim.hip_flexion, lim.hip_extension),
            ("knee", lim.knee_flexion, lim.knee_extension),
            ("ankle", lim.ankle_dorsiflexion, lim.ankle_plantarflexion),
        ] {
            if !(flexion + extension >= 0.0) || !flexion.is_finite() || !extension.is_finite() {
                return Err(Error::InvalidInput(format!("{name}: empty joint range")));
            }
        }
        if !(self.gravity > 0.0) {
            return Err(Error::InvalidInput("gravity must be > 0".into()));
        }
        Ok(())
    }

    /// Sum of the masses of links `i+1..5` (1-based `i`), the payload carried
    /// past the distal end of link `i`.
    pub fn mass_beyond(&self, i: usize) -> f64 {
        self.links[i..].iter().map(|l| l.mass).sum()
    }

    /// Checks the relative angles of a pose against the joint limits and
    /// reports every violation. An empty report means the pose is valid.
    pub fn joint_limit_violations(&self, theta: &Vec5) -> Vec<LimitViolation> {
        // Sign conventions mapping relative angles to anatomical angles; the
        // straight stand theta = [pi/2, 0, 0, 0, 0] maps to all zeros.
        let lim = &self.joint_limits;
        let checks = [
            (
                "stance ankle",
                FRAC_PI_2 - theta[0],
                lim.ankle_dorsiflexion,
                lim.ankle_plantarflexion,
                ("dorsiflexion", "plantarflexion"),
            ),
            (
                "stance knee",
                theta[1],
                lim.knee_flexion,
                lim.knee_extension,
                ("flexion", "extension"),
            ),
            (
                "stance hip",
                -theta[2],
                lim.hip_flexion,
                lim.hip_extension,
                ("flexion", "extension"),
            ),
            (
                "swing hip",
                theta[3],
                lim.hip_flexion,
                lim.hip_extension,
                ("flexion", "extension"),
            ),
            (
                "swing knee",
                -theta[4],
                lim.knee_flexion,
                lim.knee_extension,
                ("flexion", "extension"),
            ),
        ];

        // Small slack absorbs round-off on poses sitting exactly on a limit.
        const EPS: f64 = 1e-9;
        let mut report = Vec::new();
        for (joint, angle, upper, lower, (pos_name, neg_name)) in checks {
            if angle > upper + EPS {
                report.push(LimitViolation {
                    joint,
                    direction: pos_name,
                    angle_deg: angle.to_degrees(),
                    limit_deg: upper.to_degrees(),
                });
            } else if angle < -lower - EPS {
                report.push(LimitViolation {
                    joint,
                    direction: neg_name,
                    angle_deg: (-angle).to_degrees(),
                    limit_deg: lower.to_degrees(),
                });
            }
        }
        report
    }
}

/// One joint whose anatomical angle falls outside its configured range.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitViolation {
    pub joint: &'static str,
    /// Which side of the range was exceeded, e.g. "flexion".
    pub direction: &'static str,
    /// Magnitude of the anatomical angle, degrees.
    pub angle_deg: f64,
    /// The exceeded limit, degrees.
    pub limit_deg: f64,
}

impl fmt::Display for LimitViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:.2} deg exceeds limit {:.2} deg",
            self.joint, self.direction, self.angle_deg, self.limit_deg
        )
    }
}

/// Pose in absolute angles (clockwise from vertical-up) with time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsolutePose {
    pub phi: Vec5,
    pub dphi: Vec5,
    pub ddphi: Vec5,
}

/// Pose in relative joint angles with time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub theta: Vec5,
    pub dtheta: Vec5,
    pub ddtheta: Vec5,
}

impl RelativePose {
    pub fn new(theta: Vec5, dtheta: Vec5, ddtheta: Vec5) -> Self {
        RelativePose { theta, dtheta, ddtheta }
    }

    pub fn at_rest(theta: Vec5) -> Self {
        RelativePose::new(theta, Vec5::zeros(), Vec5::zeros())
    }

    /// Maps to absolute angles: `phi = A theta + b`; the offset drops from
    /// the derivatives, so `dphi = A dtheta` and `ddphi = A ddtheta`.
    pub fn to_absolute(&self) -> AbsolutePose {
        let a = transform::matrix_a();
        AbsolutePose {
            phi: a * self.theta + transform::offset_b(),
            dphi: a * self.dtheta,
            ddphi: a * self.ddtheta,
        }
    }
}

impl AbsolutePose {
    pub fn new(phi: Vec5, dphi: Vec5, ddphi: Vec5) -> Self {
        AbsolutePose { phi, dphi, ddphi }
    }

    pub fn at_rest(phi: Vec5) -> Self {
        AbsolutePose::new(phi, Vec5::zeros(), Vec5::zeros())
    }

    /// Inverse of [`RelativePose::to_absolute`]: `theta = A^-1 (phi - b)`.
    pub fn to_relative(&self) -> RelativePose {
        let a_inv = transform::matrix_a_inv();
        RelativePose {
            theta: a_inv * (self.phi - transform::offset_b()),
            dtheta: a_inv * self.dphi,
            ddtheta: a_inv * self.ddphi,
        }
    }
}

/// The fixed affine transform between relative and absolute angles.
pub mod transform {
    use super::{Mat5, Vec5, FRAC_PI_2, PI};

    /// Lower-triangular matrix of -1 entries; `phi = A theta + b`.
    pub fn matrix_a() -> Mat5 {
        let mut a = Mat5::zeros();
        for i in 0..5 {
            for j in 0..=i {
                a[(i, j)] = -1.0;
            }
        }
        a
    }

    /// Offset vector `b = [pi/2, pi/2, pi/2, 3pi/2, 3pi/2]`.
    pub fn offset_b() -> Vec5 {
        Vec5::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, PI + FRAC_PI_2, PI + FRAC_PI_2)
    }

    /// Exact inverse of `A`: -1 on the diagonal, +1 on the subdiagonal.
    pub fn matrix_a_inv() -> Mat5 {
        let mut inv = Mat5::zeros();
        for i in 0..5 {
            inv[(i, i)] = -1.0;
            if i > 0 {
                inv[(i, i - 1)] = 1.0;
            }
        }
        inv
    }
}
