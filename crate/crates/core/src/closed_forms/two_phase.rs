//! Shifted two-phase model: rate 1 above the line `y = x - lambda`, rate
//! `r < 1` on and below it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::TOL_REGION;
use crate::geometry::Point;
use crate::optim::golden_max;
use crate::shape::{gamma_raw, Branch, Polyline, ShapeEval, TIE_TOL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPhaseConstants {
    pub r: f64,
    pub lambda: f64,
    pub k: f64,
    pub a: f64,
    pub d: f64,
    /// Optimal entry point on the line for targets above it.
    pub a1_star: f64,
}

impl TwoPhaseConstants {
    /// Exit point from the line towards the target `(x, y)`.
    pub fn b1_star(&self, x: f64, y: f64) -> f64 {
        ((x + y + self.lambda) + (x - y - self.lambda) * self.k) / 2.0
    }

    /// Whether `(x, y)` lies below the line that makes the exit point
    /// admissible.
    pub fn line_condition(&self, x: f64, y: f64) -> bool {
        let k = self.k;
        y <= (k + 1.0) / (k - 1.0) * x - 2.0 * k * self.lambda / (k - 1.0)
    }

    /// Value of the path entering at `a1*`, following the line and leaving
    /// straight to `(x, y)`.
    pub fn flat_value(&self, x: f64, y: f64) -> f64 {
        (1.0 + self.a) * x + (1.0 + 1.0 / self.a) * y - self.d
    }

    pub fn parabola(&self, x: f64, y: f64) -> f64 {
        let (a, d) = (self.a, self.d);
        let u = a * x - y / a;
        u * u - 2.0 * d * (a * x + y / a) + d * d
    }

    /// Shape value on the line `y = x - lambda` for `x >= a1*`.
    pub fn on_line_value(&self, x: f64) -> f64 {
        let (r, k, l) = (self.r, self.k, self.lambda);
        4.0 / r * x + l * (k + (k * k - 1.0).sqrt() - 2.0 / r * (1.0 + k))
    }
}

pub fn two_phase_constants(r: f64, lambda: f64) -> Result<TwoPhaseConstants> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("two-phase rate r must lie in (0, 1), got {r}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("shift lambda must be >= 0, got {lambda}")));
    }
    let s = (1.0 - r).sqrt();
    let k = (1.0 + r * r / (4.0 * (1.0 - r))).sqrt();
    Ok(TwoPhaseConstants {
        r,
        lambda,
        k,
        a: (1.0 + s) * (1.0 + s) / r,
        d: 4.0 * lambda * s / r,
        a1_star: lambda / 2.0 * (k + 1.0),
    })
}

/// `L(x, y)`: negative inside the critical parabola, zero on it.
pub fn parabola_l(r: f64, lambda: f64, x: f64, y: f64) -> Result<f64> {
    Ok(two_phase_constants(r, lambda)?.parabola(x, y))
}

fn eval(value: f64, points: Vec<Point>, branch: Branch, residuals: BTreeMap<String, f64>, non_unique: bool) -> ShapeEval {
    ShapeEval {
        value,
        maximiser: Polyline::new(points).expect("closed-form maximiser is admissible"),
        branch,
        residuals,
        non_unique,
    }
}

/// Shape function of the shifted two-phase model at `(x, y)`.
pub fn two_phase_shape(r: f64, lambda: f64, x: f64, y: f64) -> Result<ShapeEval> {
    let c = two_phase_constants(r, lambda)?;
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::domain(format!("target ({x}, {y}) must be nonnegative")));
    }
    let target = Point::new(x, y);
    let on_line = |u: f64| Point::new(u, u - lambda);
    let straight = gamma_raw(x, y);
    let gap = y - (x - lambda);
    let mut res = BTreeMap::new();

    if gap > TOL_REGION {
        let l = c.parabola(x, y);
        res.insert("parabola_L".into(), l);
        if x >= c.a1_star && c.line_condition(x, y) {
            let flat = c.flat_value(x, y);
            if flat > straight - TIE_TOL {
                let b1 = c.b1_star(x, y);
                let pts = vec![Point::ORIGIN, on_line(c.a1_star), on_line(b1), target];
                let tie = (flat - straight).abs() < TIE_TOL;
                let value = flat.max(straight);
                return Ok(eval(value, pts, Branch::Trapezoid, res, tie));
            }
        }
        return Ok(eval(straight, vec![Point::ORIGIN, target], Branch::Straight, res, false));
    }

    if gap >= -TOL_REGION {
        if x >= c.a1_star {
            let pts = vec![Point::ORIGIN, on_line(c.a1_star), target];
            return Ok(eval(c.on_line_value(x), pts, Branch::TwoSegment, res, false));
        }
        return Ok(eval(straight, vec![Point::ORIGIN, target], Branch::Straight, res, false));
    }

    // Below the line: the path meets it once at (a3, a3 - lambda) and then
    // runs straight inside the convex rate-r half plane. The objective is
    // concave in a3.
    let obj = |a3: f64| gamma_raw(a3, a3 - lambda) + gamma_raw(x - a3, y - a3 + lambda) / r;
    let (lo, hi) = (lambda, y + lambda);
    let (a3, value) = golden_max(&obj, lo, hi, 1e-12)?;
    res.insert("a3".into(), a3);
    let h = 1e-7 * (hi - lo).max(1e-12);
    if a3 - h > lo && a3 + h < hi {
        res.insert("d_value_d_a3".into(), (obj(a3 + h) - obj(a3 - h)) / (2.0 * h));
    }
    Ok(eval(value, vec![Point::ORIGIN, on_line(a3), target], Branch::TwoSegment, res, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpeedField;
    use crate::shape::functional_i;

    #[test]
    fn constants_at_half() {
        let c = two_phase_constants(0.5, 1.0).unwrap();
        // independent arithmetic: A = 3 + 2 sqrt 2, D = 4 sqrt 2, K = sqrt(1.125)
        assert!((c.a - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((c.d - 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((c.k - 1.125f64.sqrt()).abs() < 1e-15);
        assert!((c.a1_star - 1.030330085889911).abs() < 1e-12);
        assert_eq!(two_phase_constants(0.3, 0.0).unwrap().d, 0.0);
        assert!(two_phase_constants(1.0, 1.0).is_err());
    }

    #[test]
    fn constants_near_one() {
        // A -> 1 and D -> 0, while K and with it a1* grow without bound
        let c = two_phase_constants(1.0 - 1e-10, 1.0).unwrap();
        assert!((c.a - 1.0).abs() < 1e-4 && c.d < 1e-3);
        assert!(c.k > 1e4 && c.a1_star > 1e4);
        assert!((c.flat_value(2.0, 3.0) - 10.0).abs() < 1e-3);
    }

    #[test]
    fn parabola_values() {
        let l = parabola_l(0.5, 1.0, 3.0, 2.5).unwrap();
        assert!((l - 120.24285732506359).abs() < 1e-9);
        let c = two_phase_constants(0.5, 1.0).unwrap();
        assert!(c.parabola(c.a1_star, c.a1_star - 1.0).abs() < 1e-8);
        let c0 = two_phase_constants(0.5, 0.0).unwrap();
        assert!(c0.parabola(1.0, c0.a * c0.a).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_case() {
        let e = two_phase_shape(0.5, 1.0, 3.0, 2.5).unwrap();
        let a = 3.0 + 2.0 * 2f64.sqrt();
        let oracle = (1.0 + a) * 3.0 + (1.0 + 1.0 / a) * 2.5 - 4.0 * 2f64.sqrt();
        assert!((e.value - oracle).abs() < 1e-12);
        assert_eq!(e.branch, Branch::Trapezoid);
        let f = SpeedField::two_phase(0.5, 1.0).unwrap();
        assert!((functional_i(&f, &e.maximiser).unwrap() - e.value).abs() < 1e-9 * e.value);
    }

    #[test]
    fn left_of_shift_is_straight() {
        let e = two_phase_shape(0.5, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(e.value, 4.5);
        assert_eq!(e.branch, Branch::Straight);
    }

    #[test]
    fn on_line_value_continuous_at_entry() {
        let c = two_phase_constants(0.5, 1.0).unwrap();
        let a = c.a1_star;
        assert!((c.on_line_value(a) - gamma_raw(a, a - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn maximiser_value_matches_functional() {
        let f = SpeedField::two_phase(0.8, 0.5).unwrap();
        for (x, y) in [(3.0, 2.5), (2.0, 0.4), (1.0, 2.0), (4.0, 3.5), (2.5, 2.0)] {
            let e = two_phase_shape(0.8, 0.5, x, y).unwrap();
            let v = functional_i(&f, &e.maximiser).unwrap();
            assert!((v - e.value).abs() <= 1e-9 * v, "({x},{y}) {e}");
        }
    }
}
