//! Corner model: rate 1 below the convex decreasing curve `y = f(x)`, rate
//! `r` above it.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CornerCurve, SpeedField};
use crate::geometry::Point;
use crate::optim::root_bracketed;
use crate::shape::{gamma_raw, Branch, Polyline, ShapeEval, TIE_TOL};

/// Points of the crossing scan.
pub const SCAN_POINTS: usize = 4096;
const LOG_POINTS: usize = 1024;

/// Two crossings closer than this are the same crossing.
const SAME_CROSSING: f64 = 1e-6;

fn check_interior(curve: CornerCurve, a: f64) -> Result<()> {
    if a > 0.0 && a < curve.a0() {
        Ok(())
    } else {
        Err(Error::domain(format!("a = {a} outside (0, {})", curve.a0())))
    }
}

/// `D_a` for a curve given through `f(a)` and `f'(a)`.
pub(crate) fn d_from(r: f64, a: f64, f: f64, fp: f64) -> f64 {
    r * (1.0 + (f / a).sqrt()) * ((a / f).sqrt() + 1.0 / fp)
}

/// Slope of the outgoing segment of a crossing maximiser through `(a, f)`.
pub(crate) fn m2_from(r: f64, a: f64, f: f64, fp: f64) -> f64 {
    let u = -1.0 / fp - 1.0 + d_from(r, a, f, fp);
    let q = -4.0 / fp;
    let root = (u * u + q).sqrt();
    // u + root cancels when u is large and negative
    let s = if u >= 0.0 { u + root } else { q / (root - u) };
    4.0 / (s * s)
}

pub fn corner_d(curve: CornerCurve, r: f64, a: f64) -> Result<f64> {
    check_interior(curve, a)?;
    Ok(d_from(r, a, curve.eval_clamped(a), curve.deriv_unchecked(a)))
}

pub fn corner_m2(curve: CornerCurve, r: f64, a: f64) -> Result<f64> {
    check_interior(curve, a)?;
    if !(r > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {r}")));
    }
    Ok(m2_from(r, a, curve.eval_clamped(a), curve.deriv_unchecked(a)))
}

/// Left minus right side of the crossing condition at `a` for an outgoing
/// slope `m2`.
pub fn crossing_residual(curve: CornerCurve, r: f64, a: f64, m2: f64) -> f64 {
    let fp = curve.deriv_unchecked(a);
    let m1 = curve.eval_clamped(a) / a;
    let (s1, s2) = (m1.sqrt(), m2.sqrt());
    (r - 1.0) / r + s1 - s2 / r + fp / r * (r - 1.0 + r / s1 - 1.0 / s2)
}

/// [`crossing_residual`] divided by the largest of its terms, for use when
/// those terms are huge (steep curves near the origin).
pub fn crossing_residual_relative(curve: CornerCurve, r: f64, a: f64, m2: f64) -> f64 {
    let fp = curve.deriv_unchecked(a);
    let m1 = curve.eval_clamped(a) / a;
    let (s1, s2) = (m1.sqrt(), m2.sqrt());
    let scale = [(r - 1.0) / r, s1, s2 / r, fp / r * (r - 1.0), fp / s1, fp / (r * s2)]
        .iter()
        .fold(0.0f64, |m, t| m.max(t.abs()));
    crossing_residual(curve, r, a, m2) / scale
}

/// A root of the crossing equation for a given target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingSolution {
    pub a: f64,
    pub m1: f64,
    pub m2: f64,
    pub d_a: f64,
    pub residual: f64,
    pub value: f64,
}

/// All candidate maximisers of a corner target outside the rate-one region.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerCandidates {
    pub crossings: Vec<CrossingSolution>,
    /// Value through `(0, f(0))`, when `y >= f(0)`.
    pub vertical: Option<f64>,
    /// Value through `(a0, 0)`, when `x >= a0`.
    pub horizontal: Option<f64>,
}

fn corner_of(field: &SpeedField) -> Result<(CornerCurve, f64)> {
    field
        .corner_curve()
        .ok_or_else(|| Error::Unsupported(format!("{field} is not a corner field")))
}

fn check_target(field: &SpeedField, x: f64, y: f64) -> Result<()> {
    if !field.bbox().contains(x, y) {
        return Err(Error::domain(format!("target ({x}, {y}) outside the field bbox")));
    }
    Ok(())
}

/// Scan fractions in `(0, 1)`: a uniform block plus log-spaced blocks packed
/// against both ends.
fn scan_fractions(points: usize) -> Vec<f64> {
    let third = points / 3;
    let mut q: Vec<f64> = (1..=third).map(|k| k as f64 / (third + 1) as f64).collect();
    let (lo, hi) = ((1e-13f64).ln(), (0.5f64).ln());
    for k in 0..third {
        let t = (lo + (hi - lo) * k as f64 / (third - 1) as f64).exp();
        q.push(t);
        q.push(1.0 - t);
    }
    q.sort_by(f64::total_cmp);
    q.dedup();
    q.retain(|t| *t > 0.0 && *t < 1.0);
    q
}

/// Type-C roots and type-B values at `(x, y)`.
pub fn corner_candidates(field: &SpeedField, x: f64, y: f64) -> Result<CornerCandidates> {
    let (curve, r) = corner_of(field)?;
    check_target(field, x, y)?;
    let (a0, f0) = (curve.a0(), curve.f0());
    let value_at = |a: f64| {
        let fa = curve.eval_clamped(a);
        gamma_raw(a, fa) + gamma_raw(x - a, y - fa) / r
    };

    let lo = if y < f0 { curve.inverse(y) } else { 0.0 };
    let hi = x.min(a0);
    let mut crossings: Vec<CrossingSolution> = Vec::new();
    if hi > lo {
        let g = |a: f64| {
            let fa = curve.eval_clamped(a);
            (y - fa) / (x - a) - m2_from(r, a, fa, curve.deriv_unchecked(a))
        };
        // relative spacing alone cannot reach roots at a ~ lo when lo is
        // tiny, as for very steep curves, so add a grid uniform in log a
        let log_lo = lo.max(1e-300).ln();
        let mut grid: Vec<f64> = scan_fractions(SCAN_POINTS)
            .into_iter()
            .map(|t| lo + t * (hi - lo))
            .chain((1..LOG_POINTS).map(|k| (log_lo + (hi.ln() - log_lo) * k as f64 / LOG_POINTS as f64).exp()))
            .filter(|&a| a > lo && a < hi && a > 0.0 && a < a0)
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let vals: Vec<f64> = grid.iter().map(|&a| g(a)).collect();
        for k in 1..grid.len() {
            let (g0, g1) = (vals[k - 1], vals[k]);
            if !(g0.is_finite() && g1.is_finite()) || g0.signum() == g1.signum() {
                continue;
            }
            let a = root_bracketed(&g, grid[k - 1], grid[k], 1e-14)?;
            if crossings.iter().any(|c| (c.a - a).abs() < SAME_CROSSING) {
                continue;
            }
            let fa = curve.eval_clamped(a);
            let fp = curve.deriv_unchecked(a);
            let m2 = m2_from(r, a, fa, fp);
            crossings.push(CrossingSolution {
                a,
                m1: fa / a,
                m2,
                d_a: d_from(r, a, fa, fp),
                residual: crossing_residual(curve, r, a, m2),
                value: value_at(a),
            });
        }
    }
    Ok(CornerCandidates {
        crossings,
        vertical: (y >= f0).then(|| f0 + gamma_raw(x, y - f0) / r),
        horizontal: (x >= a0).then(|| a0 + gamma_raw(x - a0, y) / r),
    })
}

/// Shape function of a corner field at `(x, y)`.
pub fn corner_shape(field: &SpeedField, x: f64, y: f64) -> Result<ShapeEval> {
    let (curve, r) = corner_of(field)?;
    check_target(field, x, y)?;
    let target = Point::new(x, y);
    let (a0, f0) = (curve.a0(), curve.f0());
    if x <= a0 && y <= curve.eval_clamped(x) {
        return Ok(ShapeEval {
            value: gamma_raw(x, y),
            maximiser: Polyline::straight(Point::ORIGIN, target)?,
            branch: Branch::Straight,
            residuals: BTreeMap::new(),
            non_unique: false,
        });
    }
    let cands = corner_candidates(field, x, y)?;
    // enumeration order: crossings by increasing a, then vertical, horizontal
    let mut scored: Vec<(f64, Branch, Point, Option<CrossingSolution>)> = cands
        .crossings
        .iter()
        .map(|c| (c.value, Branch::CrossingC, Point::new(c.a, curve.eval_clamped(c.a)), Some(*c)))
        .collect();
    if let Some(v) = cands.vertical {
        scored.push((v, Branch::BoundaryBVertical, Point::new(0.0, f0), None));
    }
    if let Some(v) = cands.horizontal {
        scored.push((v, Branch::BoundaryBHorizontal, Point::new(a0, 0.0), None));
    }
    let best = scored
        .iter()
        .map(|s| s.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let win = scored
        .iter()
        .position(|s| s.0 >= best - TIE_TOL)
        .ok_or_else(|| Error::Internal(format!("no candidate maximiser at ({x}, {y})")))?;
    let non_unique = scored
        .iter()
        .enumerate()
        .any(|(k, s)| k != win && s.0 >= best - TIE_TOL && s.2.dist(scored[win].2) > SAME_CROSSING);
    let (value, branch, via, sol) = scored[win];
    let mut residuals = BTreeMap::new();
    residuals.insert("crossing_a".into(), via.x);
    if let Some(c) = sol {
        residuals.insert("explain".into(), c.residual);
        residuals.insert("explain_rel".into(), crossing_residual_relative(curve, r, c.a, c.m2));
        residuals.insert("m2".into(), c.m2);
        residuals.insert("slope_gap".into(), (y - via.y) / (x - via.x) - c.m2);
    }
    residuals.insert("candidates".into(), scored.len() as f64);
    Ok(ShapeEval {
        value,
        maximiser: Polyline::new(vec![Point::ORIGIN, via, target])?,
        branch,
        residuals,
        non_unique,
    })
}

/// Implicit form whose zero set is where the two axis routes tie; meaningful
/// for `x >= a0`, `y >= f(0)` and `r > 1`.
pub fn region_boundary_hyperbola(curve: CornerCurve, r: f64, x: f64, y: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::domain(format!("the axis-route boundary needs r > 1, got {r}")));
    }
    let (a0, f0) = (curve.a0(), curve.f0());
    let s = (a0 - f0).powi(2) * (r - 1.0).powi(2) / 2.0;
    Ok(f0 * f0 * x * x + a0 * a0 * y * y - 2.0 * x * y * (a0 * f0 + s) + s * (f0 * x + a0 * y) + s * s / 4.0)
}

/// Outcome of moving a target along the outgoing segment of its maximiser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniquenessReport {
    pub a_star: f64,
    pub kappa: f64,
    pub moved_target: Point,
    /// Crossing selected for the moved target, if it is of crossing type.
    pub moved_a: Option<f64>,
    pub same_crossing: bool,
    /// Crossing residual at `a*` with the slope towards the moved target.
    pub residual_at_a_star: f64,
}

/// Moves `target` to `P + kappa (target - P)`, `P` the crossing point of its
/// maximiser, and reports whether the crossing persists.
pub fn uniqueness_probe(field: &SpeedField, target: Point, kappa: f64) -> Result<UniquenessReport> {
    let (curve, r) = corner_of(field)?;
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let base = corner_shape(field, target.x, target.y)?;
    if base.branch != Branch::CrossingC {
        return Err(Error::domain(format!(
            "target ({}, {}) has a {} maximiser, not a crossing",
            target.x, target.y, base.branch
        )));
    }
    let p = base.maximiser.waypoints()[1];
    let moved = p.add(target.sub(p).scale(kappa));
    let moved_eval = corner_shape(field, moved.x, moved.y)?;
    let moved_a = (moved_eval.branch == Branch::CrossingC).then(|| moved_eval.maximiser.waypoints()[1].x);
    let m2 = (moved.y - p.y) / (moved.x - p.x);
    Ok(UniquenessReport {
        a_star: p.x,
        kappa,
        moved_target: moved,
        moved_a,
        same_crossing: moved_a.is_some_and(|a| (a - p.x).abs() <= 1e-8),
        residual_at_a_star: crossing_residual(curve, r, p.x, m2),
    })
}

/// Largest gap between crossing points found on an `n x n` grid of targets
/// in `(0, extent]^2`, for each `n` in `grid_sizes`. The gap includes the
/// ends `0` and `a0` of the curve.
pub fn crossing_density(field: &SpeedField, extent: f64, grid_sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    let (curve, _) = corner_of(field)?;
    let a0 = curve.a0();
    grid_sizes
        .iter()
        .map(|&n| {
            let targets: Vec<(f64, f64)> = (1..=n)
                .flat_map(|i| (1..=n).map(move |j| (extent * i as f64 / n as f64, extent * j as f64 / n as f64)))
                .collect();
            let found: Result<Vec<Option<f64>>> = targets
                .par_iter()
                .map(|&(x, y)| {
                    let e = corner_shape(field, x, y)?;
                    Ok((e.branch == Branch::CrossingC).then(|| e.maximiser.waypoints()[1].x))
                })
                .collect();
            let mut a: Vec<f64> = found?.into_iter().flatten().collect();
            a.push(0.0);
            a.push(a0);
            a.sort_by(f64::total_cmp);
            let gap = a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            Ok((n, gap))
        })
        .collect()
}
