//! Macroscopic shape functions: the homogeneous constant, the path functional
//! on polylines, and a numerical maximiser of that functional.

use std::collections::BTreeMap;
use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

use crate::closed_forms::corner::crossing_residual;
use crate::error::{Error, Result};
use crate::field::{CornerCurve, Family, SpeedField};
use crate::geometry::{dist_to_segment, Point};
use crate::optim::{golden_max, nelder_mead_max, SimplexSettings};
use crate::rng::unit_open_closed;

/// Most crossings of one segment with one discontinuity curve.
pub const MAX_SPLITS: usize = 8;

/// Candidates whose values differ by less than this are treated as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Slack allowed on negative increments produced by rounding.
const INCREMENT_SLACK: f64 = 1e-12;

/// Two maximisers closer than this are regarded as the same path.
const SAME_PATH: f64 = 1e-3;

/// `(sqrt x + sqrt y)^2`, the rate-one last-passage constant.
pub fn gamma(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::domain(format!("gamma needs x, y >= 0, got ({x}, {y})")));
    }
    Ok(gamma_raw(x, y))
}

/// `gamma` with tiny negative rounding residue clamped to zero.
pub(crate) fn gamma_raw(x: f64, y: f64) -> f64 {
    let (x, y) = (x.max(0.0), y.max(0.0));
    x + y + 2.0 * (x * y).sqrt()
}

/// Shape function of the constant field `r`.
pub fn gamma_homog(r: f64, x: f64, y: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {r}")));
    }
    Ok(gamma(x, y)? / r)
}

/// Admissible piecewise-linear path: nonnegative points with coordinatewise
/// nondecreasing waypoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    waypoints: Vec<Point>,
}

impl Polyline {
    pub fn new(waypoints: Vec<Point>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::domain("polyline needs at least one waypoint"));
        }
        if waypoints.iter().any(|p| !(p.x >= 0.0 && p.y >= 0.0)) {
            return Err(Error::domain("polyline waypoints must be nonnegative"));
        }
        for w in waypoints.windows(2) {
            let d = w[1].sub(w[0]);
            if d.x < -INCREMENT_SLACK || d.y < -INCREMENT_SLACK {
                return Err(Error::domain(format!(
                    "segment {:?} -> {:?} has a negative increment",
                    w[0], w[1]
                )));
            }
        }
        Ok(Polyline { waypoints })
    }

    pub fn straight(start: Point, end: Point) -> Result<Self> {
        Self::new(vec![start, end])
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn start(&self) -> Point {
        self.waypoints[0]
    }

    pub fn end(&self) -> Point {
        *self.waypoints.last().unwrap()
    }

    /// The same path with segment `k` split at parameter `t`.
    pub fn split_segment(&self, k: usize, t: f64) -> Polyline {
        let mut w = self.waypoints.clone();
        let p = w[k].lerp(w[k + 1], t);
        w.insert(k + 1, p);
        Polyline { waypoints: w }
    }

    /// Largest distance from a point of `self` to the path `other`, sampled
    /// at the waypoints and along each segment.
    pub fn distance_from(&self, other: &Polyline) -> f64 {
        let dist = |p: Point| {
            if other.waypoints.len() == 1 {
                return p.dist(other.waypoints[0]);
            }
            other
                .waypoints
                .windows(2)
                .map(|s| dist_to_segment(p, s[0], s[1]))
                .fold(f64::INFINITY, f64::min)
        };
        let mut worst = dist(self.waypoints[0]);
        for s in self.waypoints.windows(2) {
            for q in 1..=16 {
                worst = worst.max(dist(s[0].lerp(s[1], q as f64 / 16.0)));
            }
        }
        worst
    }

    /// Symmetric version of [`distance_from`](Self::distance_from).
    pub fn sup_distance(&self, other: &Polyline) -> f64 {
        self.distance_from(other).max(other.distance_from(self))
    }
}

/// Structure of a maximiser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Straight,
    Trapezoid,
    TwoSegment,
    CrossingC,
    BoundaryBVertical,
    BoundaryBHorizontal,
    /// Free polyline found for step-grid fields.
    Polygonal,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Straight => "straight",
            Branch::Trapezoid => "trapezoid",
            Branch::TwoSegment => "two-segment",
            Branch::CrossingC => "crossing-C",
            Branch::BoundaryBVertical => "boundary-B-vertical",
            Branch::BoundaryBHorizontal => "boundary-B-horizontal",
            Branch::Polygonal => "polygonal",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Branch::Straight,
            Branch::Trapezoid,
            Branch::TwoSegment,
            Branch::CrossingC,
            Branch::BoundaryBVertical,
            Branch::BoundaryBHorizontal,
            Branch::Polygonal,
        ]
        .into_iter()
        .find(|b| b.label() == s)
        .ok_or_else(|| Error::Parse(format!("unknown branch '{s}'")))
    }
}

/// Value of the shape function at a target with its maximiser.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeEval {
    pub value: f64,
    pub maximiser: Polyline,
    pub branch: Branch,
    /// Named diagnostics, mostly first-order optimality residuals.
    pub residuals: BTreeMap<String, f64>,
    /// Another, geometrically different maximiser ties within [`TIE_TOL`].
    pub non_unique: bool,
}

impl fmt::Display for ShapeEval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "value    {:.12}", self.value)?;
        writeln!(
            f,
            "branch   {}{}",
            self.branch,
            if self.non_unique { " (non-unique)" } else { "" }
        )?;
        write!(f, "path    ")?;
        for p in self.maximiser.waypoints() {
            write!(f, " ({:.9}, {:.9})", p.x, p.y)?;
        }
        for (k, v) in &self.residuals {
            write!(f, "\n{k:<14} {v:.3e}")?;
        }
        Ok(())
    }
}

/// Integral of `gamma(dx, dy) / c` along the polyline: every segment is cut at
/// the discontinuity curves and each piece is charged at the rate found at its
/// midpoint.
pub fn functional_i(field: &SpeedField, path: &Polyline) -> Result<f64> {
    let bbox = field.bbox();
    if let Some(p) = path.waypoints.iter().find(|p| !bbox.contains(p.x, p.y)) {
        return Err(Error::domain(format!("waypoint ({}, {}) outside the field bbox", p.x, p.y)));
    }
    let curves = field.discontinuity_curves();
    let mut total = 0.0;
    let mut cuts = Vec::new();
    for seg in path.waypoints.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        cuts.clear();
        cuts.push(0.0);
        for c in &curves {
            let t = c.crossings(p, q);
            if t.len() > MAX_SPLITS {
                return Err(Error::domain("segment crosses a discontinuity curve too often"));
            }
            cuts.extend(t);
        }
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (a, b) = (p.lerp(q, w[0]), p.lerp(q, w[1]));
            let d = b.sub(a);
            if d.x <= 0.0 && d.y <= 0.0 {
                continue;
            }
            let mid = a.lerp(b, 0.5);
            total += gamma_raw(d.x, d.y) / field.rate_unchecked(mid.x, mid.y);
        }
    }
    Ok(total)
}

/// Settings of [`optimize_polyline`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeOptions {
    /// Waypoints searched: points on the discontinuity line for two-phase
    /// fields, free interior points for step grids. Corner fields always use
    /// a single crossing point, enough because the rate-one region is left
    /// for good once exited.
    pub free_waypoints: usize,
    pub multistart: usize,
    pub rng_seed: u64,
    pub simplex: SimplexSettings,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            free_waypoints: 2,
            multistart: 16,
            rng_seed: 0,
            simplex: SimplexSettings::default(),
        }
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    branch: Branch,
    path: Polyline,
    value: f64,
    residuals: BTreeMap<String, f64>,
}

/// Numerical maximiser of the path functional from the origin to `target`.
pub fn optimize_polyline(field: &SpeedField, target: Point, opts: &OptimizeOptions) -> Result<ShapeEval> {
    optimize_between(field, Point::ORIGIN, target, opts)
}

/// As [`optimize_polyline`] with an arbitrary start point.
pub fn optimize_between(field: &SpeedField, start: Point, target: Point, opts: &OptimizeOptions) -> Result<ShapeEval> {
    if !start.le(target) {
        return Err(Error::domain(format!("start {start:?} is not below-left of target {target:?}")));
    }
    let bbox = field.bbox();
    for p in [start, target] {
        if !bbox.contains(p.x, p.y) {
            return Err(Error::domain(format!("point ({}, {}) outside the field bbox", p.x, p.y)));
        }
    }
    let mut cands = vec![straight_candidate(field, start, target)?];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    match field.family() {
        Family::Constant { .. } => {}
        Family::ShiftedTwoPhase { lambda, .. } => {
            if opts.free_waypoints > 0 {
                cands.extend(line_candidates(field, *lambda, start, target, opts, &mut rng)?);
            }
        }
        Family::Corner { curve, r } => {
            if opts.free_waypoints > 0 {
                cands.extend(corner_candidates(field, *curve, *r, start, target, opts, &mut rng)?);
            }
        }
        Family::StepGrid(_) => {
            cands.extend(grid_candidates(field, start, target, opts, &mut rng)?);
        }
    }
    select(cands)
}

fn straight_candidate(field: &SpeedField, start: Point, target: Point) -> Result<Candidate> {
    let mut path = Polyline::straight(start, target)?;
    let mut branch = Branch::Straight;
    let mut residuals = BTreeMap::new();
    // a straight path through a corner curve is a crossing maximiser
    if let Family::Corner { curve, r } = field.family() {
        let cd = field.discontinuity_curves()[0];
        if let Some(&t) = cd.crossings(start, target).first() {
            let p = start.lerp(target, t);
            path = Polyline::new(vec![start, p, target])?;
            branch = Branch::CrossingC;
            residuals.insert("crossing_a".into(), p.x);
            insert_explain(&mut residuals, *curve, *r, p.x, target);
        }
    }
    let value = functional_i(field, &path)?;
    Ok(Candidate {
        branch,
        path,
        value,
        residuals,
    })
}

fn insert_explain(res: &mut BTreeMap<String, f64>, curve: CornerCurve, r: f64, a: f64, target: Point) {
    if a > 0.0 && a < curve.a0() && target.x > a {
        let m2 = (target.y - curve.eval_clamped(a)) / (target.x - a);
        if m2 > 0.0 {
            res.insert("explain".into(), crossing_residual(curve, r, a, m2));
        }
    }
}

/// Stratified starting points in `[0, 1]^dim`, jittered within each cell.
fn stratified_starts(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let count = count.max(1);
    let per_axis = (count as f64).powf(1.0 / dim as f64).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut cell = idx;
        let mut p = Vec::with_capacity(dim);
        for _ in 0..dim {
            let k = cell % per_axis;
            cell /= per_axis;
            let jitter = unit_open_closed(rng.next_u64());
            p.push(((k as f64 + jitter) / per_axis as f64).clamp(0.0, 1.0));
        }
        out.push(p);
    }
    out
}

fn simplex_around(p: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut v = vec![p.to_vec()];
    for d in 0..p.len() {
        let mut q = p.to_vec();
        q[d] = if q[d] + step <= 1.0 { q[d] + step } else { q[d] - step };
        v.push(q);
    }
    v
}

/// Coordinate-wise golden-section sweeps on the unit cube. The simplex stalls
/// when an optimum sits very close to a face, because clamping flattens the
/// objective beyond it; this recovers such optima.
fn polish(objective: &dyn Fn(&[f64]) -> f64, mut x: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let mut v = objective(&x);
    for _ in 0..4 {
        let before = v;
        for d in 0..x.len() {
            let base = x.clone();
            let g = |t: f64| {
                let mut y = base.clone();
                y[d] = t;
                objective(&y)
            };
            let (t, gt) = golden_max(&g, 0.0, 1.0, 1e-12)?;
            if gt > v {
                x[d] = t;
                v = gt;
            }
        }
        if v - before <= 1e-15 * v.abs() {
            break;
        }
    }
    Ok((x, v))
}

/// Runs the multistart search on the unit cube and returns distinct local
/// optima found, in the order first discovered.
fn multistart(
    dim: usize,
    objective: &dyn Fn(&[f64]) -> f64,
    opts: &OptimizeOptions,
    rng: &mut ChaCha8Rng,
    same: &dyn Fn(&[f64], &[f64]) -> bool,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let clamp = |p: &Vec<f64>| p.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>();
    let f = |p: &Vec<f64>| objective(&clamp(p));
    let starts = stratified_starts(dim, opts.multistart, rng);
    let step = 0.5 / (opts.multistart.max(1) as f64).powf(1.0 / dim as f64);
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for s in starts {
        let (x, _) = nelder_mead_max(&f, simplex_around(&s, step), opts.simplex)?;
        let (x, v) = polish(objective, clamp(&x))?;
        match found.iter_mut().find(|(y, _)| same(&x, y)) {
            Some(slot) => {
                if v > slot.1 {
                    *slot = (x, v);
                }
            }
            None => found.push((x, v)),
        }
    }
    Ok(found)
}

fn line_candidates(
    field: &SpeedField,
    lambda: f64,
    start: Point,
    target: Point,
    opts: &OptimizeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    let lo = start.x.max(start.y + lambda).max(lambda);
    let hi = target.x.min(target.y + lambda);
    if !(hi >= lo) {
        return Ok(Vec::new());
    }
    let on_line = |u: f64| Point::new(u, (u - lambda).max(0.0));
    let build = |us: &[f64]| -> Polyline {
        let mut u: Vec<f64> = us.iter().map(|t| (lo + t * (hi - lo)).min(hi)).collect();
        u.sort_by(f64::total_cmp);
        let mut w = vec![start];
        w.extend(u.iter().map(|&u| on_line(u)));
        w.push(target);
        Polyline { waypoints: w }
    };
    let value = |us: &[f64]| functional_i(field, &build(us)).unwrap_or(f64::NEG_INFINITY);
    let mut out = Vec::new();
    for dim in 1..=opts.free_waypoints.min(2) {
        let same = |a: &[f64], b: &[f64]| {
            let (pa, pb) = (build(a), build(b));
            pa.sup_distance(&pb) < SAME_PATH
        };
        for (x, v) in multistart(dim, &value, opts, rng, &same)? {
            let path = build(&x);
            let mut u: Vec<f64> = x.iter().map(|t| (lo + t * (hi - lo)).min(hi)).collect();
            u.sort_by(f64::total_cmp);
            let branch = if dim == 2 && u[1] - u[0] > 1e-6 {
                Branch::Trapezoid
            } else {
                Branch::TwoSegment
            };
            let mut residuals = BTreeMap::new();
            for (k, &xk) in x.iter().enumerate() {
                let h = 1e-6;
                if xk > h && xk < 1.0 - h {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let g = (value(&xp) - value(&xm)) / (2.0 * h * (hi - lo));
                    residuals.insert(format!("d_value_d_u{k}"), g);
                }
            }
            let _ = v;
            out.push(Candidate {
                branch,
                value: functional_i(field, &path)?,
                path,
                residuals,
            });
        }
    }
    Ok(out)
}

fn corner_candidates(
    field: &SpeedField,
    curve: CornerCurve,
    r: f64,
    start: Point,
    target: Point,
    opts: &OptimizeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    let a0 = curve.a0();
    // crossing points P(a) = (a, f(a)) with start <= P(a) <= target
    let lo = start.x.max(if target.y < curve.f0() { curve.inverse(target.y) } else { 0.0 });
    let hi = target.x.min(a0).min(if start.y > 0.0 { curve.inverse(start.y) } else { a0 });
    if !(hi >= lo) || start.y > curve.eval_extended(start.x) {
        return Ok(Vec::new());
    }
    let point = |a: f64| Point::new(a, curve.eval_clamped(a));
    let a_of = |t: f64| (lo + t * (hi - lo)).min(hi);
    let build = |a: f64| Polyline {
        waypoints: vec![start, point(a), target],
    };
    let value = |t: &[f64]| functional_i(field, &build(a_of(t[0]))).unwrap_or(f64::NEG_INFINITY);
    let same = |s: &[f64], t: &[f64]| build(a_of(s[0])).sup_distance(&build(a_of(t[0]))) < SAME_PATH;
    let mut found = multistart(1, &value, opts, rng, &same)?;
    // the axis routes are always scored explicitly
    for t in [0.0, 1.0] {
        if !found.iter().any(|(x, _)| same(x, &[t])) {
            found.push((vec![t], value(&[t])));
        }
    }
    let mut out = Vec::new();
    for (t, _) in found {
        let a = a_of(t[0]);
        let path = build(a);
        let branch = if a <= 0.0 && start.x == 0.0 {
            Branch::BoundaryBVertical
        } else if a >= a0 && start.y == 0.0 {
            Branch::BoundaryBHorizontal
        } else {
            Branch::CrossingC
        };
        let mut residuals = BTreeMap::new();
        residuals.insert("crossing_a".into(), a);
        insert_explain(&mut residuals, curve, r, a, target);
        out.push(Candidate {
            branch,
            value: functional_i(field, &path)?,
            path,
            residuals,
        });
    }
    Ok(out)
}

fn grid_candidates(
    field: &SpeedField,
    start: Point,
    target: Point,
    opts: &OptimizeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for corner in [Point::new(target.x, start.y), Point::new(start.x, target.y)] {
        let path = Polyline::new(vec![start, corner, target])?;
        out.push(Candidate {
            branch: Branch::Polygonal,
            value: functional_i(field, &path)?,
            path,
            residuals: BTreeMap::new(),
        });
    }
    let m = opts.free_waypoints;
    if m == 0 {
        return Ok(out);
    }
    // coordinates of the m waypoints: sorted x fractions then sorted y fractions
    let build = |p: &[f64]| {
        let mut xs = p[..m].to_vec();
        let mut ys = p[m..].to_vec();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut w = vec![start];
        for k in 0..m {
            w.push(Point::new(
                (start.x + xs[k] * (target.x - start.x)).min(target.x),
                (start.y + ys[k] * (target.y - start.y)).min(target.y),
            ));
        }
        w.push(target);
        Polyline { waypoints: w }
    };
    let value = |p: &[f64]| functional_i(field, &build(p)).unwrap_or(f64::NEG_INFINITY);
    let same = |a: &[f64], b: &[f64]| build(a).sup_distance(&build(b)) < SAME_PATH;
    for (x, _) in multistart(2 * m, &value, opts, rng, &same)? {
        let path = build(&x);
        out.push(Candidate {
            branch: Branch::Polygonal,
            value: functional_i(field, &path)?,
            path,
            residuals: BTreeMap::new(),
        });
    }
    Ok(out)
}

/// Picks the first candidate within [`TIE_TOL`] of the best value and flags
/// ties with a geometrically different path.
fn select(cands: Vec<Candidate>) -> Result<ShapeEval> {
    let best = cands
        .iter()
        .map(|c| c.value)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let win = cands
        .iter()
        .position(|c| c.value >= best - TIE_TOL)
        .ok_or_else(|| Error::Internal("no admissible candidate".into()))?;
    let non_unique = cands.iter().enumerate().any(|(k, c)| {
        k != win && c.value >= best - TIE_TOL && c.path.sup_distance(&cands[win].path) >= SAME_PATH
    });
    let w = cands.into_iter().nth(win).unwrap();
    Ok(ShapeEval {
        value: w.value,
        maximiser: w.path,
        branch: w.branch,
        residuals: w.residuals,
        non_unique,
    })
}
