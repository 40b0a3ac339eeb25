//! Joint torques of the five-link chain from the closed-form Lagrangian
//! solution, plus an independent finite-difference oracle for verification.
//!
//! In absolute angles the torque is
//!
//! ```text
//! T_phi = D(phi) ddphi + H(phi, dphi) dphi + G(phi)
//! D_ij = p_ij cos(phi_i - phi_j)
//! H_ij = p_ij sin(phi_i - phi_j) dphi_j
//! G_i  = -g_i sin(phi_i)
//! ```
//!
//! with constant coupling coefficients `p_ij` and gravity coefficients `g_i`
//! determined by the link parameters. Relative-angle joint torques follow by
//! the chain rule as `T_theta = A^T T_phi`. The torso does not extend the
//! kinematic chain: the swing leg hangs from the hip, which the
//! length-propagation flags `a = [1, 1, 0, 1, 1]` encode.

use nalgebra::Vector2;

use crate::model::{transform, AbsolutePose, BodyModel, Mat5, Vec5};

/// Which angle system a torque vector is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Absolute,
    Relative,
}

/// Joint torques in newton-meters, tagged with their angle system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTorques {
    pub values: Vec5,
    pub frame: Frame,
}

/// Whether each link propagates its length to the next anchor of the chain.
/// The torso (link 3) does not: link 4 is anchored at the hip.
pub const LENGTH_FLAGS: [f64; 5] = [1.0, 1.0, 0.0, 1.0, 1.0];

/// Constant coefficients of the closed-form torque solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCoefficients {
    /// Symmetric inertia-coupling matrix, kg m^2.
    pub p: Mat5,
    /// Gravity coefficients, N m per unit sine.
    pub gravity_coeff: Vec5,
    /// Copy of [`LENGTH_FLAGS`] for inspection.
    pub length_flags: [f64; 5],
}

impl CouplingCoefficients {
    pub fn from_model(model: &BodyModel) -> Self {
        let mut p = Mat5::zeros();
        let mut gravity_coeff = Vec5::zeros();
        for i in 0..5 {
            let li = &model.links[i];
            let ai = LENGTH_FLAGS[i];
            p[(i, i)] = li.inertia
                + li.mass * li.com_offset * li.com_offset
                + ai * li.length * li.length * model.mass_beyond(i + 1);
            for j in (i + 1)..5 {
                let lj = &model.links[j];
                // The masses carried past link j ride on both lever arms.
                let pij = ai
                    * li.length
                    * (lj.mass * lj.com_offset
                        + LENGTH_FLAGS[j] * lj.length * model.mass_beyond(j + 1));
                p[(i, j)] = pij;
                p[(j, i)] = pij;
            }
            gravity_coeff[i] = li.mass * li.com_offset * model.gravity
                + ai * li.length * model.gravity * model.mass_beyond(i + 1);
        }
        CouplingCoefficients { p, gravity_coeff, length_flags: LENGTH_FLAGS }
    }

    /// Configuration-dependent inertia matrix `D(phi)`.
    pub fn inertia_matrix(&self, phi: &Vec5) -> Mat5 {
        let mut d = Mat5::zeros();
        for i in 0..5 {
            for j in 0..5 {
                d[(i, j)] = self.p[(i, j)] * (phi[i] - phi[j]).cos();
            }
        }
        d
    }

    /// Velocity-coupling matrix `H(phi, dphi)`.
    pub fn coriolis_matrix(&self, phi: &Vec5, dphi: &Vec5) -> Mat5 {
        let mut h = Mat5::zeros();
        for i in 0..5 {
            for j in 0..5 {
                h[(i, j)] = self.p[(i, j)] * (phi[i] - phi[j]).sin() * dphi[j];
            }
        }
        h
    }

    /// Gravity torque vector `G(phi)`, the gradient of the potential energy.
    pub fn gravity_vector(&self, phi: &Vec5) -> Vec5 {
        Vec5::from_fn(|i, _| -self.gravity_coeff[i] * phi[i].sin())
    }

    /// Net torques in absolute angles.
    pub fn torque_absolute(&self, pose: &AbsolutePose) -> JointTorques {
        let values = self.inertia_matrix(&pose.phi) * pose.ddphi
            + self.coriolis_matrix(&pose.phi, &pose.dphi) * pose.dphi
            + self.gravity_vector(&pose.phi);
        JointTorques { values, frame: Frame::Absolute }
    }

    /// Joint torques in relative angles, `T_theta = A^T T_phi`. Component 0
    /// is the stance-ankle torque minimized by the gait optimizer.
    pub fn torque_relative(&self, pose: &AbsolutePose) -> JointTorques {
        let absolute = self.torque_absolute(pose);
        JointTorques {
            values: transform::matrix_a().transpose() * absolute.values,
            frame: Frame::Relative,
        }
    }
}

/// Net torques in absolute angles for a single pose.
pub fn torque_absolute(model: &BodyModel, pose: &AbsolutePose) -> JointTorques {
    CouplingCoefficients::from_model(model).torque_absolute(pose)
}

/// Joint torques in relative angles for a single pose.
pub fn torque_relative(model: &BodyModel, pose: &AbsolutePose) -> JointTorques {
    CouplingCoefficients::from_model(model).torque_relative(pose)
}

/// Kinetic and potential energy of the chain, in joules.
///
/// Center-of-mass positions come from the anchor chain: the first anchor is
/// the stance ankle at the origin and each link advances the anchor by its
/// length when its flag is set.
pub fn mechanical_energy(model: &BodyModel, phi: &Vec5, dphi: &Vec5) -> (f64, f64) {
    let mut anchor = Vector2::zeros();
    let mut anchor_vel = Vector2::zeros();
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for i in 0..5 {
        let link = &model.links[i];
        let (s, c) = phi[i].sin_cos();
        let axis = Vector2::new(s, c);
        let axis_rate = Vector2::new(c, -s) * dphi[i];
        let com = anchor + link.com_offset * axis;
        let com_vel = anchor_vel + link.com_offset * axis_rate;
        kinetic += 0.5 * link.mass * com_vel.norm_squared()
            + 0.5 * link.inertia * dphi[i] * dphi[i];
        potential += link.mass * model.gravity * com.y;
        anchor += LENGTH_FLAGS[i] * link.length * axis;
        anchor_vel += LENGTH_FLAGS[i] * link.length * axis_rate;
    }
    (kinetic, potential)
}

/// Default angle-direction step for [`lagrangian_oracle`].
pub const DEFAULT_ORACLE_STEP: f64 = 1e-6;

/// Numerical Euler-Lagrange torques from finite differences of
/// [`mechanical_energy`] alone, independent of the closed-form coefficients:
///
/// ```text
/// T_i = sum_j d2L/(dr_i dphi_j) dphi_j + sum_j d2L/(dr_i dr_j) ddphi_j - dL/dphi_i
/// ```
///
/// where `r = dphi` and `L = K - P`. All angle-direction derivatives use
/// second-order central stencils with step `step`. The kinetic energy is
/// exactly quadratic in the joint rates, so rate-direction central
/// differences are applied along whole directions with unit steps: they have
/// zero truncation error and the large step suppresses cancellation, which
/// keeps the oracle noise well below the comparison tolerances.
pub fn lagrangian_oracle(model: &BodyModel, pose: &AbsolutePose, step: f64) -> JointTorques {
    assert!(step > 0.0, "oracle step must be positive");
    const RATE_STEP: f64 = 1.0;

    let lagrangian = |phi: &Vec5, rates: &Vec5| {
        let (k, p) = mechanical_energy(model, phi, rates);
        k - p
    };
    let dl_drate = |phi: &Vec5, rates: &Vec5| -> Vec5 {
        Vec5::from_fn(|i, _| {
            let mut hi = *rates;
            let mut lo = *rates;
            hi[i] += RATE_STEP;
            lo[i] -= RATE_STEP;
            (lagrangian(phi, &hi) - lagrangian(phi, &lo)) / (2.0 * RATE_STEP)
        })
    };

    // Directional derivative of dL/dr along the joint rates in angle space.
    let ahead = pose.phi + step * pose.dphi;
    let behind = pose.phi - step * pose.dphi;
    let coriolis = (dl_drate(&ahead, &pose.dphi) - dl_drate(&behind, &pose.dphi)) / (2.0 * step);

    // dL/dr is linear in the rates, so a unit step along ddphi is exact.
    let rate_hi = pose.dphi + pose.ddphi;
    let rate_lo = pose.dphi - pose.ddphi;
    let inertial = (dl_drate(&pose.phi, &rate_hi) - dl_drate(&pose.phi, &rate_lo)) / 2.0;

    let gradient = Vec5::from_fn(|i, _| {
        let mut hi = pose.phi;
        let mut lo = pose.phi;
        hi[i] += step;
        lo[i] -= step;
        (lagrangian(&hi, &pose.dphi) - lagrangian(&lo, &pose.dphi)) / (2.0 * step)
    });

    JointTorques { values: coriolis + inertial - gradient, frame: Frame::Absolute }
}
