//! Macroscopic speed functions `c(x, y)`.
//!
//! Every supported field is piecewise constant with at most a handful of
//! monotone discontinuity curves. On a discontinuity the field takes the
//! smallest of the adjacent values, which makes it lower-semicontinuous.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Absolute half-width of the band around a discontinuity curve inside which a
/// point is treated as lying on the curve.
pub const TOL_REGION: f64 = 1e-9;

/// Default extent of the certified rectangle when none is given.
pub const DEFAULT_EXTENT: f64 = 1.0e4;

/// Convex decreasing boundary `y = f(x)` of the bounded rate-1 corner region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CornerCurve {
    /// `f(x) = (c - x^(b/k))^k` on `[0, c^(k/b)]`.
    Power { c: f64, b: f64, k: f64 },
    /// `f(x) = (1 - sqrt(x))^2` on `[0, 1]`.
    Sqrt,
}

/// Orders of growth of `|f'|` at both ends of the curve together with the
/// matching limiting coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderExponents {
    /// `|f'(a)| ~ c_alpha * a^(-alpha)` as `a -> 0`.
    pub alpha: f64,
    pub c_alpha: f64,
    /// `|f'(a)| ~ eta_beta * (a0 - a)^beta` as `a -> a0`.
    pub beta: f64,
    pub eta_beta: f64,
}

impl CornerCurve {
    pub fn power(c: f64, b: f64, k: f64) -> Result<Self> {
        if !(c > 0.0 && b > 0.0 && k >= 1.0 && b < k) || !(c.is_finite() && k.is_finite()) {
            return Err(Error::domain(format!(
                "corner-power needs c > 0, 0 < b < k and k >= 1 (got c={c}, b={b}, k={k})"
            )));
        }
        Ok(CornerCurve::Power { c, b, k })
    }

    /// Right end point `a0` with `f(a0) = 0`.
    pub fn a0(&self) -> f64 {
        match *self {
            CornerCurve::Power { c, b, k } => c.powf(k / b),
            CornerCurve::Sqrt => 1.0,
        }
    }

    /// `f(0)`, the height of the corner region.
    pub fn f0(&self) -> f64 {
        match *self {
            CornerCurve::Power { c, k, .. } => c.powf(k),
            CornerCurve::Sqrt => 1.0,
        }
    }

    /// `f(a)` on the closed domain `[0, a0]`.
    pub fn eval(&self, a: f64) -> Result<f64> {
        let a0 = self.a0();
        if !(0.0..=a0).contains(&a) {
            return Err(Error::domain(format!("f evaluated at {a} outside [0, {a0}]")));
        }
        Ok(self.eval_clamped(a))
    }

    /// `f'(a)` on the open domain `(0, a0)`.
    pub fn deriv(&self, a: f64) -> Result<f64> {
        let a0 = self.a0();
        if !(a > 0.0 && a < a0) {
            return Err(Error::domain(format!("f' evaluated at {a} outside (0, {a0})")));
        }
        Ok(self.deriv_unchecked(a))
    }

    pub(crate) fn eval_clamped(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return self.f0();
        }
        if a >= self.a0() {
            return 0.0;
        }
        match *self {
            CornerCurve::Power { c, b, k } => (c - a.powf(b / k)).max(0.0).powf(k),
            CornerCurve::Sqrt => {
                let s = 1.0 - a.sqrt();
                s * s
            }
        }
    }

    pub(crate) fn deriv_unchecked(&self, a: f64) -> f64 {
        match *self {
            CornerCurve::Power { c, b, k } => {
                let p = b / k;
                -b * a.powf(p - 1.0) * (c - a.powf(p)).max(0.0).powf(k - 1.0)
            }
            CornerCurve::Sqrt => {
                let s = a.sqrt();
                -(1.0 - s) / s
            }
        }
    }

    /// Strictly decreasing extension of `f` to the whole half line: beyond
    /// `a0` it continues as `a0 - x`, so the outer region stays on one side.
    pub(crate) fn eval_extended(&self, x: f64) -> f64 {
        let a0 = self.a0();
        if x > a0 {
            a0 - x
        } else {
            self.eval_clamped(x)
        }
    }

    /// The unique `a` in `[0, a0]` with `f(a) = y`, for `y` in `[0, f(0)]`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y >= self.f0() {
            return 0.0;
        }
        if y <= 0.0 {
            return self.a0();
        }
        match *self {
            CornerCurve::Power { c, b, k } => (c - y.powf(1.0 / k)).max(0.0).powf(k / b),
            CornerCurve::Sqrt => {
                let s = 1.0 - y.sqrt();
                s * s
            }
        }
    }

    pub fn order_exponents(&self) -> OrderExponents {
        match *self {
            CornerCurve::Power { c, b, k } => {
                let p = b / k;
                let a0 = self.a0();
                OrderExponents {
                    alpha: 1.0 - p,
                    c_alpha: b * c.powf(k - 1.0),
                    beta: k - 1.0,
                    eta_beta: b * p.powf(k - 1.0) * a0.powf((p - 1.0) * k),
                }
            }
            // f'(a) = -(1 - sqrt a)/sqrt a; near 1, 1 - sqrt a ~ (1 - a)/2.
            CornerCurve::Sqrt => OrderExponents {
                alpha: 0.5,
                c_alpha: 1.0,
                beta: 1.0,
                eta_beta: 0.5,
            },
        }
    }
}

/// Piecewise-constant field on a rectangular grid of cells
/// `[xs[i], xs[i+1]) x [ys[j], ys[j+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major by y: the rate of cell `(i, j)` is `rates[j * nx + i]`.
    rates: Vec<f64>,
}

impl StepGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let strictly_increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !strictly_increasing(&xs) || !strictly_increasing(&ys) {
            return Err(Error::domain("step-grid breakpoints must be strictly increasing with at least two entries"));
        }
        if xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(Error::domain("step-grid must start at the origin"));
        }
        let need = (xs.len() - 1) * (ys.len() - 1);
        if rates.len() != need {
            return Err(Error::domain(format!(
                "step-grid needs {need} rates, got {}",
                rates.len()
            )));
        }
        if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::domain("step-grid rates must be positive and finite"));
        }
        Ok(StepGrid { xs, ys, rates })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    /// Cell indices along one axis that touch coordinate `v`.
    fn touching(breaks: &[f64], v: f64) -> (usize, usize) {
        let cells = breaks.len() - 1;
        // index of the half-open cell containing v (last cell closed on top)
        let idx = match breaks.partition_point(|&b| b <= v) {
            0 => 0,
            p => (p - 1).min(cells - 1),
        };
        let mut lo = idx;
        let mut hi = idx;
        if idx > 0 && (v - breaks[idx]).abs() <= TOL_REGION {
            lo = idx - 1;
        }
        if idx + 1 < cells && (breaks[idx + 1] - v).abs() <= TOL_REGION {
            hi = idx + 1;
        }
        (lo, hi)
    }

    fn rate(&self, x: f64, y: f64) -> f64 {
        let (i0, i1) = Self::touching(&self.xs, x);
        let (j0, j1) = Self::touching(&self.ys, y);
        let mut best = f64::INFINITY;
        for j in j0..=j1 {
            for i in i0..=i1 {
                best = best.min(self.rates[j * self.nx() + i]);
            }
        }
        best
    }
}

/// Model family together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Constant { rate: f64 },
    /// Rate 1 above the line `y = x - lambda`, rate `r` on and below it.
    ShiftedTwoPhase { r: f64, lambda: f64 },
    /// Rate 1 below the graph of `curve`, rate `r` above it.
    Corner { curve: CornerCurve, r: f64 },
    StepGrid(StepGrid),
}

/// Axis-aligned certified rectangle `[0, x_max] x [0, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= self.x_max && y <= self.y_max
    }
}

/// Shape of a discontinuity curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveKind {
    /// `y = slope * x + intercept`.
    Line { slope: f64, intercept: f64 },
    /// `x = at`.
    Vertical { at: f64 },
    /// `y = f(x)` for a corner curve.
    Graph(CornerCurve),
}

/// A discontinuity curve of a field, restricted to a parameter interval
/// (the `x` range, or the `y` range for vertical lines).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveDescriptor {
    pub kind: CurveKind,
    pub domain: (f64, f64),
}

impl CurveDescriptor {
    /// Signed offset of `p` from the curve: positive above (or right of) it.
    fn offset(&self, p: Point) -> f64 {
        match self.kind {
            CurveKind::Line { slope, intercept } => p.y - (slope * p.x + intercept),
            CurveKind::Vertical { at } => p.x - at,
            CurveKind::Graph(curve) => p.y - curve.eval_extended(p.x),
        }
    }

    /// Parameters `t` in `(0, 1)` where the segment `p -> q` crosses the curve
    /// strictly from one side to the other. The segment must be admissible
    /// (`p <= q` coordinatewise); every supported curve is then crossed at
    /// most once, because the offset is monotone along the segment.
    pub fn crossings(&self, p: Point, q: Point) -> Vec<f64> {
        let h0 = self.offset(p);
        let h1 = self.offset(q);
        if !(h0 * h1 < 0.0) {
            return Vec::new();
        }
        match self.kind {
            CurveKind::Line { .. } | CurveKind::Vertical { .. } => vec![h0 / (h0 - h1)],
            CurveKind::Graph(_) => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                let neg_at_lo = h0 < 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let h = self.offset(p.lerp(q, mid));
                    if (h < 0.0) == neg_at_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                vec![0.5 * (lo + hi)]
            }
        }
    }
}

/// A macroscopic speed function together with the rectangle on which it is
/// certified.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedField {
    family: Family,
    bbox: BBox,
}

impl SpeedField {
    pub fn constant(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("constant rate must be positive, got {rate}")));
        }
        Ok(Self::with_default_bbox(Family::Constant { rate }))
    }

    pub fn two_phase(r: f64, lambda: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(format!("two-phase rate r must lie in (0, 1), got {r}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("two-phase shift must be >= 0, got {lambda}")));
        }
        Ok(Self::with_default_bbox(Family::ShiftedTwoPhase { r, lambda }))
    }

    pub fn corner(curve: CornerCurve, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("corner rate must be positive, got {r}")));
        }
        Ok(Self::with_default_bbox(Family::Corner { curve, r }))
    }

    pub fn corner_power(c: f64, b: f64, k: f64, r: f64) -> Result<Self> {
        Self::corner(CornerCurve::power(c, b, k)?, r)
    }

    pub fn corner_sqrt(r: f64) -> Result<Self> {
        Self::corner(CornerCurve::Sqrt, r)
    }

    pub fn step_grid(grid: StepGrid) -> Self {
        let bbox = BBox {
            x_max: *grid.xs.last().unwrap(),
            y_max: *grid.ys.last().unwrap(),
        };
        SpeedField {
            family: Family::StepGrid(grid),
            bbox,
        }
    }

    fn with_default_bbox(family: Family) -> Self {
        SpeedField {
            family,
            bbox: BBox {
                x_max: DEFAULT_EXTENT,
                y_max: DEFAULT_EXTENT,
            },
        }
    }

    /// Replace the certified rectangle. Step grids cannot be extended past
    /// their last breakpoints.
    pub fn with_bbox(mut self, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_max > 0.0 && y_max > 0.0) {
            return Err(Error::domain("bbox extents must be positive"));
        }
        if let Family::StepGrid(g) = &self.family {
            if x_max > *g.xs.last().unwrap() || y_max > *g.ys.last().unwrap() {
                return Err(Error::domain("bbox exceeds the step-grid extent"));
            }
        }
        self.bbox = BBox { x_max, y_max };
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Rate `c(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        if !self.bbox.contains(x, y) {
            return Err(Error::domain(format!(
                "point ({x}, {y}) outside the field bbox [0, {}] x [0, {}]",
                self.bbox.x_max, self.bbox.y_max
            )));
        }
        Ok(self.rate_unchecked(x, y))
    }

    /// Rate without the bbox check; callers validate the region once.
    pub(crate) fn rate_unchecked(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            Family::Constant { rate } => *rate,
            Family::ShiftedTwoPhase { r, lambda } => {
                let d = y - (x - lambda);
                if d > TOL_REGION {
                    1.0
                } else {
                    *r
                }
            }
            Family::Corner { curve, r } => {
                let d = y - curve.eval_extended(x);
                if d.abs() <= TOL_REGION {
                    r.min(1.0)
                } else if d < 0.0 {
                    1.0
                } else {
                    *r
                }
            }
            Family::StepGrid(g) => g.rate(x, y),
        }
    }

    /// Mean `1 / c(i/n, j/n)` of the lattice weight at site `(i, j)`.
    pub fn discretised_mean(&self, n: u32, i: u64, j: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("scale n must be positive"));
        }
        let n = f64::from(n);
        Ok(1.0 / self.evaluate(i as f64 / n, j as f64 / n)?)
    }

    /// Lower and upper bounds of the rate on the certified rectangle.
    pub fn rate_bounds(&self) -> (f64, f64) {
        match &self.family {
            Family::Constant { rate } => (*rate, *rate),
            Family::ShiftedTwoPhase { r, .. } => (*r, 1.0),
            Family::Corner { r, .. } => (r.min(1.0), r.max(1.0)),
            Family::StepGrid(g) => g
                .rates
                .iter()
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &r| (lo.min(r), hi.max(r))),
        }
    }

    /// The corner curve, when this is a corner field.
    pub fn corner_curve(&self) -> Option<(CornerCurve, f64)> {
        match self.family {
            Family::Corner { curve, r } => Some((curve, r)),
            _ => None,
        }
    }

    fn require_corner(&self) -> Result<CornerCurve> {
        self.corner_curve().map(|(c, _)| c).ok_or_else(|| {
            Error::Unsupported(format!("{self} has no corner curve f"))
        })
    }

    pub fn f_eval(&self, a: f64) -> Result<f64> {
        self.require_corner()?.eval(a)
    }

    pub fn f_prime(&self, a: f64) -> Result<f64> {
        self.require_corner()?.deriv(a)
    }

    pub fn order_exponents(&self) -> Result<OrderExponents> {
        Ok(self.require_corner()?.order_exponents())
    }

    /// All discontinuity curves of the field.
    pub fn discontinuity_curves(&self) -> Vec<CurveDescriptor> {
        match &self.family {
            Family::Constant { .. } => Vec::new(),
            Family::ShiftedTwoPhase { lambda, .. } => vec![CurveDescriptor {
                kind: CurveKind::Line {
                    slope: 1.0,
                    intercept: -lambda,
                },
                domain: (*lambda, f64::INFINITY),
            }],
            Family::Corner { curve, .. } => vec![CurveDescriptor {
                kind: CurveKind::Graph(*curve),
                domain: (0.0, curve.a0()),
            }],
            Family::StepGrid(g) => {
                let y_top = *g.ys.last().unwrap();
                let x_top = *g.xs.last().unwrap();
                let verticals = g.xs[1..g.xs.len() - 1].iter().map(|&at| CurveDescriptor {
                    kind: CurveKind::Vertical { at },
                    domain: (0.0, y_top),
                });
                let horizontals = g.ys[1..g.ys.len() - 1].iter().map(|&y| CurveDescriptor {
                    kind: CurveKind::Line {
                        slope: 0.0,
                        intercept: y,
                    },
                    domain: (0.0, x_top),
                });
                verticals.chain(horizontals).collect()
            }
        }
    }
}

impl fmt::Display for SpeedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("|")
        };
        match &self.family {
            Family::Constant { rate } => write!(f, "constant:r={rate}")?,
            Family::ShiftedTwoPhase { r, lambda } => write!(f, "two-phase:r={r},lambda={lambda}")?,
            Family::Corner {
                curve: CornerCurve::Power { c, b, k },
                r,
            } => write!(f, "corner-power:c={c},b={b},k={k},r={r}")?,
            Family::Corner {
                curve: CornerCurve::Sqrt,
                r,
            } => write!(f, "corner-sqrt:r={r}")?,
            Family::StepGrid(g) => {
                return write!(
                    f,
                    "step-grid:xs={},ys={},rates={}",
                    join(&g.xs),
                    join(&g.ys),
                    join(&g.rates)
                )
            }
        }
        if self.bbox.x_max != DEFAULT_EXTENT || self.bbox.y_max != DEFAULT_EXTENT {
            write!(f, ",xmax={},ymax={}", self.bbox.x_max, self.bbox.y_max)?;
        }
        Ok(())
    }
}

impl FromStr for SpeedField {
    type Err = Error;

    /// Parses `family:key=value,...`, for example `two-phase:r=0.5,lambda=1`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("field spec '{s}' lacks ':'")))?;
        let mut pairs: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("'{item}' is not key=value")))?;
            let k = k.trim().to_string();
            if pairs.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Parse(format!("duplicate key '{k}'")));
            }
            pairs.push((k, v.trim().to_string()));
        }
        let mut params = Params { pairs };
        let name = name.trim();
        let field = match name {
            "constant" => SpeedField::constant(params.num("r")?)?,
            "two-phase" => {
                let r = params.num("r")?;
                let lambda = params.num("lambda")?;
                SpeedField::two_phase(r, lambda)?
            }
            "corner-power" => {
                let c = params.num("c")?;
                let b = params.num("b")?;
                let k = params.num("k")?;
                let r = params.num("r")?;
                SpeedField::corner_power(c, b, k, r)?
            }
            "corner-sqrt" => SpeedField::corner_sqrt(params.num("r")?)?,
            "step-grid" => {
                let xs = params.list("xs")?;
                let ys = params.list("ys")?;
                let rates = params.list("rates")?;
                SpeedField::step_grid(StepGrid::new(xs, ys, rates)?)
            }
            other => return Err(Error::Parse(format!("unknown field family '{other}'"))),
        };
        let field = match (params.opt_num("xmax")?, params.opt_num("ymax")?) {
            (None, None) => field,
            (xm, ym) => {
                let bb = field.bbox();
                field.with_bbox(xm.unwrap_or(bb.x_max), ym.unwrap_or(bb.y_max))?
            }
        };
        if let Some((k, _)) = params.pairs.first() {
            return Err(Error::Parse(format!("unknown key '{k}' for family '{name}'")));
        }
        Ok(field)
    }
}

struct Params {
    pairs: Vec<(String, String)>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        let pos = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(pos).1)
    }

    fn parse_f64(key: &str, v: &str) -> Result<f64> {
        v.parse::<f64>()
            .map_err(|_| Error::Parse(format!("value '{v}' for '{key}' is not a number")))
    }

    fn num(&mut self, key: &str) -> Result<f64> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::Parse(format!("missing key '{key}'")))?;
        Self::parse_f64(key, &v)
    }

    fn opt_num(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| Self::parse_f64(key, &v)).transpose()
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::Parse(format!("missing key '{key}'")))?;
        v.split('|').map(|t| Self::parse_f64(key, t.trim())).collect()
    }
}
