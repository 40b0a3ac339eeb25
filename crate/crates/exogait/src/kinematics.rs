//! Forward kinematics of the five-link chain and the analytic inverse
//! kinematics from the gait description `(x5, y5, phi1, phi3, r2)` to
//! absolute angles.
//!
//! The gait describes the swing-foot target instead of joint angles. With
//! the stance ankle angle `phi1` and torso angle `phi3` given, the stance
//! thigh angle `phi2` is the remaining freedom: a two-circle intersection
//! yields the extreme thigh angle that still reaches the target, clamped to
//! the human range `[phi1 - pi/4, phi1]`, and `r2` in [0, 1] interpolates
//! inside that interval. The swing thigh and shank then follow from a second
//! circle intersection.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::Vector2;

use crate::bezier::Vec2;
use crate::error::{Error, Result};
use crate::model::{AbsolutePose, BodyModel, Vec5};

/// Slack on reachability comparisons, meters; absorbs round-off at
/// exact-touch configurations such as a fully extended swing leg.
const REACH_SLACK: f64 = 1e-12;

/// Joint positions of the chain in the sagittal plane, meters.
///
/// `p[0]` is the stance ankle at the origin and `p[i]` the distal end of
/// link `i`. The swing thigh is anchored at the hip, so `p[4]` is measured
/// from `p[2]`, not from the torso end `p[3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPositions {
    pub p: [Vec2; 6],
}

impl JointPositions {
    /// Swing-foot position `p5`.
    pub fn swing_foot(&self) -> Vec2 {
        self.p[5]
    }

    /// Hip position `p2`.
    pub fn hip(&self) -> Vec2 {
        self.p[2]
    }
}

/// The five gait variables handed to [`inverse_kinematics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkInput {
    /// Swing-foot target `(x5, y5)`, meters.
    pub target: Vec2,
    /// Stance ankle absolute angle, radians.
    pub phi1: f64,
    /// Torso absolute angle, radians.
    pub phi3: f64,
    /// Interpolation ratio inside the admissible thigh-angle interval.
    pub r2: f64,
}

/// Unit vector at absolute angle `phi` (clockwise from vertical-up).
fn link_axis(phi: f64) -> Vec2 {
    let (s, c) = phi.sin_cos();
    Vector2::new(s, c)
}

/// Joint positions for a set of absolute angles.
pub fn forward_kinematics(model: &BodyModel, phi: &Vec5) -> JointPositions {
    let l = &model.links;
    let p0 = Vec2::zeros();
    let p1 = p0 + l[0].length * link_axis(phi[0]);
    let p2 = p1 + l[1].length * link_axis(phi[1]);
    let p3 = p2 + l[2].length * link_axis(phi[2]);
    let p4 = p2 + l[3].length * link_axis(phi[3]);
    let p5 = p4 + l[4].length * link_axis(phi[4]);
    JointPositions { p: [p0, p1, p2, p3, p4, p5] }
}

/// Absolute angle of the segment from `from` to `to`: `pi/2 - atan2(dy, dx)`,
/// clockwise from vertical-up.
pub fn segment_angle(from: Vec2, to: Vec2) -> Result<f64> {
    let delta = to - from;
    if delta == Vec2::zeros() {
        return Err(Error::ZeroLengthSegment);
    }
    Ok(FRAC_PI_2 - delta.y.atan2(delta.x))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Admissible stance-thigh angle interval `(phi2_min, phi2_max)` for a
/// swing-foot target.
///
/// Circle one has radius `l2` around the knee `p1`, circle two radius
/// `l4 + l5` around the target: the intersection is the farthest hip that
/// still reaches. When the circle centers are too close for an intersection
/// the full human range applies; that guard is evaluated first because the
/// intersection angle is undefined exactly when it fires.
pub fn phi2_range(model: &BodyModel, phi1: f64, target: Vec2) -> Result<(f64, f64)> {
    let l2 = model.links[1].length;
    let swing_reach = model.links[3].length + model.links[4].length;
    let p1 = model.links[0].length * link_axis(phi1);
    let offset = target - p1;
    let dist = offset.norm();

    if dist > l2 + swing_reach + REACH_SLACK {
        return Err(Error::Unreachable(format!(
            "target {dist:.4} m from the knee exceeds total reach {:.4} m",
            l2 + swing_reach
        )));
    }

    let (phi2_min, phi2_max) = if dist + l2 <= swing_reach {
        (phi1 - FRAC_PI_4, phi1)
    } else {
        let b1 = (l2 * l2 - swing_reach * swing_reach + dist * dist) / (2.0 * dist);
        let disc = l2 * l2 - b1 * b1;
        if disc < -REACH_SLACK {
            return Err(Error::NoCircleIntersection { distance: dist });
        }
        let b2 = sign(target.x) * disc.max(0.0).sqrt();
        let unit = offset / dist;
        let rotated = Vector2::new(b1 * unit.x - b2 * unit.y, b2 * unit.x + b1 * unit.y);
        let candidate = FRAC_PI_2 - rotated.y.atan2(rotated.x);
        let phi2_max = if target.x >= 0.0 { phi1 } else { candidate.min(phi1) };
        let phi2_min =
            if target.x <= 0.0 { phi1 - FRAC_PI_4 } else { candidate.max(phi1 - FRAC_PI_4) };
        (phi2_min, phi2_max)
    };

    if phi2_min > phi2_max {
        return Err(Error::EmptyThighRange { phi2_min, phi2_max });
    }
    Ok((phi2_min, phi2_max))
}

/// Absolute angles for a gait state. `phi1` and `phi3` pass through; `phi2`
/// interpolates the admissible interval; the swing leg solves by circle
/// intersection with the positive root, which is the physiological
/// knee-flexion branch. A pose outside the joint limits is an error rather
/// than a silent branch switch.
pub fn inverse_kinematics(model: &BodyModel, input: &IkInput) -> Result<Vec5> {
    if !(0.0..=1.0).contains(&input.r2) {
        return Err(Error::InvalidInput(format!("r2 = {} outside [0, 1]", input.r2)));
    }

    let (phi2_min, phi2_max) = phi2_range(model, input.phi1, input.target)?;
    let phi2 = input.r2 * phi2_max + (1.0 - input.r2) * phi2_min;

    let l4 = model.links[3].length;
    let l5 = model.links[4].length;
    let p1 = model.links[0].length * link_axis(input.phi1);
    let p2 = p1 + model.links[1].length * link_axis(phi2);
    let w = input.target - p2;
    let dw = w.norm();

    if dw > l4 + l5 + REACH_SLACK {
        return Err(Error::Unreachable(format!(
            "target {dw:.4} m from the hip exceeds swing reach {:.4} m",
            l4 + l5
        )));
    }
    if dw < (l4 - l5).abs() - REACH_SLACK || dw <= REACH_SLACK {
        return Err(Error::Unreachable(format!(
            "target {dw:.4} m from the hip is inside the swing annulus",
        )));
    }

    let c1 = (l4 * l4 - l5 * l5 + dw * dw) / (2.0 * dw);
    // The reach checks above bound the discriminant; clamp the round-off at
    // straight-leg configurations where it crosses zero.
    let c2 = (l4 * l4 - c1 * c1).max(0.0).sqrt();
    let unit = w / dw;
    let p4 = p2 + Vector2::new(c1 * unit.x - c2 * unit.y, c2 * unit.x + c1 * unit.y);

    let phi4 = segment_angle(p2, p4)?;
    let phi5 = segment_angle(p4, input.target)?;
    let phi = Vec5::new(input.phi1, phi2, input.phi3, phi4, phi5);

    let theta = AbsolutePose::at_rest(phi).to_relative().theta;
    let violations = model.joint_limit_violations(&theta);
    if !violations.is_empty() {
        return Err(Error::JointLimits(violations));
    }
    Ok(phi)
}
