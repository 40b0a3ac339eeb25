//! Bezier curves for gait description and their time-lookup tables.
//!
//! Curves are cubic (4 control points) or quartic (5). The first coordinate
//! of each control point is the lookup abscissa (time for the pace and
//! posture curves, pace for the end-point path) and the second is the
//! curve's payload value.

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Default number of parameter subdivisions for [`CurveTable`] sampling.
pub const DEFAULT_LOOKUP_RESOLUTION: usize = 1000;

/// A planar Bezier curve of degree 3 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    points: Vec<Vec2>,
}

impl BezierCurve {
    /// Builds a curve from 4 (cubic) or 5 (quartic) control points.
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() != 4 && points.len() != 5 {
            return Err(Error::InvalidCurve(points.len()));
        }
        Ok(BezierCurve { points })
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.points
    }

    /// Evaluates the curve at `u` in [0, 1] by de Casteljau reduction, which
    /// keeps every intermediate point inside the control polygon's hull and
    /// interpolates the endpoints exactly.
    pub fn eval(&self, u: f64) -> Result<Vec2> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::CurveParam(u));
        }
        let mut work = [Vec2::zeros(); 5];
        let n = self.points.len();
        work[..n].copy_from_slice(&self.points);
        for level in (1..n).rev() {
            for i in 0..level {
                work[i] = (1.0 - u) * work[i] + u * work[i + 1];
            }
        }
        Ok(work[0])
    }
}

/// Samples a curve on a uniform parameter grid and answers
/// abscissa-to-ordinate queries by linear interpolation.
///
/// Increasing the resolution shrinks the interpolation error. Building fails
/// when the sampled abscissa decreases along the grid; dips within 1e-12 are
/// treated as ties to absorb round-off on flat segments.
#[derive(Debug, Clone)]
pub struct CurveTable {
    abscissas: Vec<f64>,
    ordinates: Vec<f64>,
}

impl CurveTable {
    pub fn build(curve: &BezierCurve, resolution: usize) -> Result<Self> {
        assert!(resolution >= 2, "lookup resolution must be at least 2");
        let mut abscissas = Vec::with_capacity(resolution + 1);
        let mut ordinates = Vec::with_capacity(resolution + 1);
        for j in 0..=resolution {
            let u = j as f64 / resolution as f64;
            let point = curve.eval(u).expect("grid parameter is in range");
            abscissas.push(point.x);
            ordinates.push(point.y);
        }
        for j in 1..abscissas.len() {
            if abscissas[j] < abscissas[j - 1] - 1e-12 {
                return Err(Error::NonMonotoneTime { grid_index: j });
            }
            if abscissas[j] < abscissas[j - 1] {
                abscissas[j] = abscissas[j - 1];
            }
        }
        Ok(CurveTable { abscissas, ordinates })
    }

    /// Linear interpolation at `t`. Queries outside the sampled span clamp
    /// to the nearest endpoint.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.abscissas.len();
        // Index of the last sample with abscissa <= t.
        let upper = self.abscissas.partition_point(|&x| x <= t);
        if upper == 0 {
            return self.ordinates[0];
        }
        if upper == n {
            return self.ordinates[n - 1];
        }
        let (t0, t1) = (self.abscissas[upper - 1], self.abscissas[upper]);
        let (v0, v1) = (self.ordinates[upper - 1], self.ordinates[upper]);
        let width = t1 - t0;
        if width <= 0.0 {
            return v0;
        }
        let w = ((t - t0) / width).clamp(0.0, 1.0);
        (1.0 - w) * v0 + w * v1
    }

    pub fn span(&self) -> (f64, f64) {
        (self.abscissas[0], *self.abscissas.last().unwrap())
    }
}

/// One-shot lookup: samples `curve` at `resolution + 1` parameters and
/// returns the linearly interpolated ordinate at abscissa `t`.
pub fn curve_lookup(curve: &BezierCurve, t: f64, resolution: usize) -> Result<f64> {
    Ok(CurveTable::build(curve, resolution)?.value_at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quartic(points: [[f64; 2]; 5]) -> BezierCurve {
        BezierCurve::new(points.iter().map(|p| Vec2::new(p[0], p[1])).collect()).unwrap()
    }

    fn cubic(points: [[f64; 2]; 4]) -> BezierCurve {
        BezierCurve::new(points.iter().map(|p| Vec2::new(p[0], p[1])).collect()).unwrap()
    }

    /// Power-basis evaluation with the explicit coefficient matrices, used as
    /// an independent check of the de Casteljau path.
    fn matrix_eval(curve: &BezierCurve, u: f64) -> Vec2 {
        let pts = curve.control_points();
        match pts.len() {
            5 => {
                let powers = [u.powi(4), u.powi(3), u * u, u, 1.0];
                let m: [[f64; 5]; 5] = [
                    [1.0, -4.0, 6.0, -4.0, 1.0],
                    [-4.0, 12.0, -12.0, 4.0, 0.0],
                    [6.0, -12.0, 6.0, 0.0, 0.0],
                    [-4.0, 4.0, 0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0, 0.0, 0.0],
                ];
                let mut out = Vec2::zeros();
                for (i, &p) in powers.iter().enumerate() {
                    for (j, pt) in pts.iter().enumerate() {
                        out += p * m[i][j] * pt;
                    }
                }
                out
            }
            4 => {
                let powers = [u.powi(3), u * u, u, 1.0];
                let m: [[f64; 4]; 4] = [
                    [-1.0, 3.0, -3.0, 1.0],
                    [3.0, -6.0, 3.0, 0.0],
                    [-3.0, 3.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0, 0.0],
                ];
                let mut out = Vec2::zeros();
                for (i, &p) in powers.iter().enumerate() {
                    for (j, pt) in pts.iter().enumerate() {
                        out += p * m[i][j] * pt;
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rejects_wrong_control_point_count() {
        assert!(BezierCurve::new(vec![Vec2::zeros(); 3]).is_err());
        assert!(BezierCurve::new(vec![Vec2::zeros(); 6]).is_err());
    }

    #[test]
    fn endpoints_interpolate_exactly() {
        let q = quartic([[0.0, 1.0], [0.2, -3.0], [0.5, 7.0], [0.7, 2.0], [1.0, 4.0]]);
        assert_eq!(q.eval(0.0).unwrap(), Vec2::new(0.0, 1.0));
        assert_eq!(q.eval(1.0).unwrap(), Vec2::new(1.0, 4.0));
        let c = cubic([[0.0, 1.0], [0.2, -3.0], [0.7, 2.0], [1.0, 4.0]]);
        assert_eq!(c.eval(0.0).unwrap(), Vec2::new(0.0, 1.0));
        assert_eq!(c.eval(1.0).unwrap(), Vec2::new(1.0, 4.0));
    }

    #[test]
    fn constant_control_points_give_constant_curve() {
        let c = Vec2::new(0.3, -1.7);
        let curve = BezierCurve::new(vec![c; 5]).unwrap();
        for j in 0..=100 {
            let u = j as f64 / 100.0;
            assert_relative_eq!(curve.eval(u).unwrap(), c, epsilon = 1e-15);
        }
    }

    #[test]
    fn parameter_outside_unit_interval_errors() {
        let c = cubic([[0.0, 0.0], [0.3, 0.2], [0.6, 0.4], [1.0, 1.0]]);
        assert!(matches!(c.eval(-1e-9), Err(Error::CurveParam(_))));
        assert!(matches!(c.eval(1.0 + 1e-9), Err(Error::CurveParam(_))));
    }

    #[test]
    fn de_casteljau_matches_power_basis_matrices() {
        let q = quartic([[0.0, 0.5], [0.3, -0.8], [0.9, 2.2], [1.7, 0.1], [2.24, 1.0]]);
        let c = cubic([[0.0, 0.0], [0.7, 0.2], [1.5, 0.9], [2.24, 1.0]]);
        for j in 0..=257 {
            let u = j as f64 / 257.0;
            assert_relative_eq!(q.eval(u).unwrap(), matrix_eval(&q, u), epsilon = 1e-12);
            assert_relative_eq!(c.eval(u).unwrap(), matrix_eval(&c, u), epsilon = 1e-12);
        }
    }

    #[test]
    fn lookup_returns_grid_samples_exactly() {
        let q = quartic([[0.0, 0.5], [0.4, 0.9], [1.0, 0.1], [1.8, 0.4], [2.24, 1.0]]);
        let table = CurveTable::build(&q, 100).unwrap();
        let probe = q.eval(0.37).unwrap();
        // 0.37 = 37/100 lies on the grid, so the lookup hits the sample.
        assert_eq!(table.value_at(probe.x), probe.y);
    }

    #[test]
    fn lookup_reproduces_affine_control_polygons() {
        // Collinear control points degenerate to a straight line, which
        // linear interpolation reproduces.
        let q = quartic([[0.0, 2.0], [0.56, 2.7], [1.12, 3.4], [1.68, 4.1], [2.24, 4.8]]);
        let table = CurveTable::build(&q, 64).unwrap();
        for j in 0..=113 {
            let t = 2.24 * j as f64 / 113.0;
            let expected = 2.0 + 1.25 * t;
            assert_relative_eq!(table.value_at(t), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn doubling_resolution_at_least_halves_lookup_error() {
        let q = quartic([[0.0, 0.0], [0.3, 0.9], [1.4, -0.4], [1.9, 0.8], [2.24, 0.3]]);
        let reference = CurveTable::build(&q, 200_000).unwrap();
        let max_err = |resolution: usize| {
            let table = CurveTable::build(&q, resolution).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..=999 {
                let t = 2.24 * j as f64 / 999.0;
                worst = worst.max((table.value_at(t) - reference.value_at(t)).abs());
            }
            worst
        };
        let coarse = max_err(64);
        let fine = max_err(128);
        assert!(fine <= 0.5 * coarse, "error {fine} vs {coarse}");
    }

    #[test]
    fn non_monotone_time_component_is_rejected() {
        let q = quartic([[0.0, 0.0], [2.0, 0.3], [-1.0, 0.6], [2.0, 0.8], [2.24, 1.0]]);
        match CurveTable::build(&q, 100) {
            Err(Error::NonMonotoneTime { .. }) => {}
            other => panic!("expected non-monotone error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn curve_stays_in_control_polygon_box(
            xs in proptest::array::uniform5(-2.0f64..2.0),
            ys in proptest::array::uniform5(-2.0f64..2.0),
            u in 0.0f64..1.0,
        ) {
            // Axis-aligned bounding box is a cheap hull relaxation; the full
            // hull test runs in the acceptance suite.
            let pts: Vec<Vec2> = xs.iter().zip(ys.iter()).map(|(&x, &y)| Vec2::new(x, y)).collect();
            let curve = BezierCurve::new(pts.clone()).unwrap();
            let p = curve.eval(u).unwrap();
            let (xmin, xmax) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), q| (lo.min(q.x), hi.max(q.x)));
            let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), q| (lo.min(q.y), hi.max(q.y)));
            prop_assert!(p.x >= xmin - 1e-9 && p.x <= xmax + 1e-9);
            prop_assert!(p.y >= ymin - 1e-9 && p.y <= ymax + 1e-9);
        }
    }
}
