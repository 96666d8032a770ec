//! Convergence studies, path overlays and slope sweeps.

use std::time::Instant;

use rayon::prelude::*;

use crate::closed_forms::{
    classify_m2_limit, closed_form_shape, corner_d, corner_m2, crossing_residual, expansion_check, CurveEnd,
    ExpansionParams, ExpansionPoint, M2Limit,
};
use crate::engine::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::field::SpeedField;
use crate::geometry::{dist_to_segment, Point};
use crate::harness::config::ExperimentConfig;
use crate::harness::output::{fmt_f64, parse_f64, parse_int, Chart, CsvRecord, Series, SeriesStyle};
use crate::shape::{optimize_polyline, OptimizeOptions, Polyline, ShapeEval};

/// How `solve_shape` obtains the shape function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Closed,
    Numeric,
    /// Closed form when the family has one, otherwise numeric.
    Auto,
}

pub fn solve_shape(field: &SpeedField, target: Point, method: SolveMethod, opts: &OptimizeOptions) -> Result<ShapeEval> {
    match method {
        SolveMethod::Closed => closed_form_shape(field, target.x, target.y),
        SolveMethod::Numeric => optimize_polyline(field, target, opts),
        SolveMethod::Auto => match closed_form_shape(field, target.x, target.y) {
            Err(Error::Unsupported(_)) => optimize_polyline(field, target, opts),
            other => other,
        },
    }
}

/// One simulated replica.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub model: String,
    pub target_x: f64,
    pub target_y: f64,
    pub n: u32,
    pub replica: u32,
    pub g_over_n: f64,
    pub gamma_hat: f64,
    /// `|g_over_n - gamma_hat|`
    pub abs_err: f64,
    pub wall_ms: u64,
}

impl CsvRecord for ResultRow {
    const HEADER: &'static [&'static str] = &[
        "model", "target_x", "target_y", "n", "replica", "g_over_n", "gamma_hat", "abs_err", "wall_ms",
    ];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            fmt_f64(self.target_x),
            fmt_f64(self.target_y),
            self.n.to_string(),
            self.replica.to_string(),
            fmt_f64(self.g_over_n),
            fmt_f64(self.gamma_hat),
            fmt_f64(self.abs_err),
            self.wall_ms.to_string(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != Self::HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, got {}", Self::HEADER.len(), r.len())));
        }
        Ok(ResultRow {
            model: r[0].to_string(),
            target_x: parse_f64(&r[1], "target_x")?,
            target_y: parse_f64(&r[2], "target_y")?,
            n: parse_int(&r[3], "n")?,
            replica: parse_int(&r[4], "replica")?,
            g_over_n: parse_f64(&r[5], "g_over_n")?,
            gamma_hat: parse_f64(&r[6], "gamma_hat")?,
            abs_err: parse_f64(&r[7], "abs_err")?,
            wall_ms: parse_int(&r[8], "wall_ms")?,
        })
    }
}

/// Replica averages for one `(target, n)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub target: Point,
    pub n: u32,
    pub mean_g_over_n: f64,
    pub se_g_over_n: f64,
    pub mean_abs_err: f64,
    pub se_abs_err: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergeReport {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    /// Shape value and maximiser for each target, in config order.
    pub shapes: Vec<(Point, ShapeEval)>,
    /// Per target: mean `abs_err` never rises by more than two standard
    /// errors from one `n` to the next. Reported only.
    pub trend_ok: Vec<bool>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

/// Simulates every `(target, n, replica)` cell in parallel and compares
/// `G/n` with the shape function.
pub fn converge_experiment(cfg: &ExperimentConfig) -> Result<ConvergeReport> {
    cfg.validate()?;
    let field = cfg.parse_field()?;
    let opts = cfg.optimize_options();
    let model = field.to_string();
    let targets = cfg.target_points();
    let shapes = targets
        .par_iter()
        .map(|&t| solve_shape(&field, t, SolveMethod::Auto, &opts).map(|s| (t, s)))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for ti in 0..targets.len() {
        for &n in &cfg.n_list {
            for rep in 0..cfg.replicas {
                cells.push((ti, n, rep));
            }
        }
    }
    let mut keyed = cells
        .par_iter()
        .map(|&(ti, n, rep)| {
            let t = targets[ti];
            let clock = Instant::now();
            let env = EnvironmentSpec::new(field.clone(), n, cfg.replica_seed(rep))?;
            let g = env.scaled_passage(t.x, t.y)?;
            let wall_ms = if cfg.record_wall_time { clock.elapsed().as_millis() as u64 } else { 0 };
            let gamma_hat = shapes[ti].1.value;
            Ok((
                ti,
                ResultRow {
                    model: model.clone(),
                    target_x: t.x,
                    target_y: t.y,
                    n,
                    replica: rep,
                    g_over_n: g,
                    gamma_hat,
                    abs_err: (g - gamma_hat).abs(),
                    wall_ms,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(ti, r)| (*ti, r.n, r.replica));

    let mut summary = Vec::new();
    let mut trend_ok = Vec::new();
    for (ti, &t) in targets.iter().enumerate() {
        let mut prev: Option<(f64, f64)> = None;
        let mut ok = true;
        for &n in &cfg.n_list {
            let cell: Vec<&ResultRow> = keyed
                .iter()
                .filter(|(i, r)| *i == ti && r.n == n)
                .map(|(_, r)| r)
                .collect();
            let g: Vec<f64> = cell.iter().map(|r| r.g_over_n).collect();
            let e: Vec<f64> = cell.iter().map(|r| r.abs_err).collect();
            let (mg, sg) = mean_se(&g);
            let (me, se) = mean_se(&e);
            if let Some((pm, ps)) = prev {
                if me > pm + 2.0 * (ps * ps + se * se).sqrt() {
                    ok = false;
                }
            }
            prev = Some((me, se));
            summary.push(SummaryRow {
                target: t,
                n,
                mean_g_over_n: mg,
                se_g_over_n: sg,
                mean_abs_err: me,
                se_abs_err: se,
            });
        }
        trend_ok.push(ok);
    }
    Ok(ConvergeReport {
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
        summary,
        shapes,
        trend_ok,
    })
}

impl ConvergeReport {
    /// Mean `G/n` against `n` per target, with the shape value as a dashed
    /// reference line.
    pub fn chart(&self, model: &str) -> Chart {
        let mut series = Vec::new();
        for (t, s) in &self.shapes {
            let pts: Vec<(f64, f64)> = self
                .summary
                .iter()
                .filter(|r| r.target == *t)
                .map(|r| (r.n as f64, r.mean_g_over_n))
                .collect();
            let (lo, hi) = (pts.first().map_or(0.0, |p| p.0), pts.last().map_or(1.0, |p| p.0));
            series.push(Series {
                label: format!("G/n at ({}, {})", t.x, t.y),
                points: pts,
                style: SeriesStyle::LineMarkers,
            });
            series.push(Series {
                label: format!("shape at ({}, {})", t.x, t.y),
                points: vec![(lo, s.value), (hi, s.value)],
                style: SeriesStyle::Dashed,
            });
        }
        Chart {
            title: format!("convergence of G/n, {model}"),
            x_label: "n".into(),
            y_label: "G/n".into(),
            log_x: true,
            series,
        }
    }
}

/// Whether an overlay row is a lattice site or a macroscopic waypoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlayKind {
    Micro,
    Macro,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlayRow {
    pub kind: OverlayKind,
    pub target_x: f64,
    pub target_y: f64,
    pub step_index: usize,
    pub px: f64,
    pub py: f64,
    /// Branch label of the macroscopic maximiser, or `non-unique`.
    pub branch: String,
}

impl CsvRecord for OverlayRow {
    const HEADER: &'static [&'static str] = &["kind", "target_x", "target_y", "step_index", "px", "py", "branch"];

    fn to_record(&self) -> Vec<String> {
        vec![
            match self.kind {
                OverlayKind::Micro => "micro".into(),
                OverlayKind::Macro => "macro".into(),
            },
            fmt_f64(self.target_x),
            fmt_f64(self.target_y),
            self.step_index.to_string(),
            fmt_f64(self.px),
            fmt_f64(self.py),
            self.branch.clone(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != Self::HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, got {}", Self::HEADER.len(), r.len())));
        }
        let kind = match &r[0] {
            "micro" => OverlayKind::Micro,
            "macro" => OverlayKind::Macro,
            other => return Err(Error::Parse(format!("unknown overlay kind '{other}'"))),
        };
        Ok(OverlayRow {
            kind,
            target_x: parse_f64(&r[1], "target_x")?,
            target_y: parse_f64(&r[2], "target_y")?,
            step_index: parse_int(&r[3], "step_index")?,
            px: parse_f64(&r[4], "px")?,
            py: parse_f64(&r[5], "py")?,
            branch: r[6].to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlaySummary {
    pub target: Point,
    pub n: u32,
    pub branch: String,
    pub shape_value: f64,
    pub g_over_n: f64,
    /// Symmetric sup-distance between the rescaled lattice path and the
    /// macroscopic maximiser.
    pub sup_distance: f64,
    /// Fraction of lattice sites within [`OVERLAY_BAND`] of the maximiser.
    pub band_fraction: f64,
    pub path_valid: bool,
}

pub const OVERLAY_BAND: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct OverlayReport {
    pub rows: Vec<OverlayRow>,
    pub summaries: Vec<OverlaySummary>,
}

fn dist_to_polyline(p: Point, line: &Polyline) -> f64 {
    let w = line.waypoints();
    if w.len() == 1 {
        return p.dist(w[0]);
    }
    w.windows(2)
        .map(|s| dist_to_segment(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Lattice maximal path next to the macroscopic maximiser for every target.
/// Uses the single `n` of the config and replica 0 (seed `base_seed`).
pub fn path_overlay(cfg: &ExperimentConfig) -> Result<OverlayReport> {
    cfg.validate()?;
    let [n] = cfg.n_list[..] else {
        return Err(Error::Parse(format!(
            "path overlay takes a single n, got n_list {:?}",
            cfg.n_list
        )));
    };
    let field = cfg.parse_field()?;
    let opts = cfg.optimize_options();
    let env = EnvironmentSpec::new(field.clone(), n, cfg.replica_seed(0))?;
    let per_target = cfg
        .target_points()
        .into_par_iter()
        .map(|t| {
            let shape = solve_shape(&field, t, SolveMethod::Auto, &opts)?;
            let res = env.last_passage((0, 0), env.lattice_target(t.x, t.y), true)?;
            let sites = res.path.clone().unwrap_or_default();
            let scale = 1.0 / n as f64;
            let micro: Vec<Point> = sites
                .iter()
                .map(|&(i, j)| Point::new(i as f64 * scale, j as f64 * scale))
                .collect();
            let label = if shape.non_unique { "non-unique".to_string() } else { shape.branch.to_string() };
            let micro_line = Polyline::new(micro.clone())?;
            let within = micro
                .iter()
                .filter(|p| dist_to_polyline(**p, &shape.maximiser) <= OVERLAY_BAND)
                .count();
            let summary = OverlaySummary {
                target: t,
                n,
                branch: label.clone(),
                shape_value: shape.value,
                g_over_n: res.value * scale,
                sup_distance: micro_line.sup_distance(&shape.maximiser),
                band_fraction: within as f64 / micro.len().max(1) as f64,
                path_valid: res.path_is_valid(),
            };
            let mut rows: Vec<OverlayRow> = micro
                .iter()
                .enumerate()
                .map(|(k, p)| OverlayRow {
                    kind: OverlayKind::Micro,
                    target_x: t.x,
                    target_y: t.y,
                    step_index: k,
                    px: p.x,
                    py: p.y,
                    branch: label.clone(),
                })
                .collect();
            rows.extend(shape.maximiser.waypoints().iter().enumerate().map(|(k, p)| OverlayRow {
                kind: OverlayKind::Macro,
                target_x: t.x,
                target_y: t.y,
                step_index: k,
                px: p.x,
                py: p.y,
                branch: label.clone(),
            }));
            Ok((rows, summary))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (r, s) in per_target {
        rows.extend(r);
        summaries.push(s);
    }
    Ok(OverlayReport { rows, summaries })
}

impl OverlayReport {
    pub fn chart(&self, model: &str) -> Chart {
        let mut series = Vec::new();
        for s in &self.summaries {
            let pick = |kind| {
                self.rows
                    .iter()
                    .filter(|r| r.kind == kind && r.target_x == s.target.x && r.target_y == s.target.y)
                    .map(|r| (r.px, r.py))
                    .collect::<Vec<_>>()
            };
            series.push(Series {
                label: format!("lattice ({}, {})", s.target.x, s.target.y),
                points: pick(OverlayKind::Micro),
                style: SeriesStyle::Line,
            });
            series.push(Series {
                label: format!("{} ({}, {})", s.branch, s.target.x, s.target.y),
                points: pick(OverlayKind::Macro),
                style: SeriesStyle::LineMarkers,
            });
        }
        Chart {
            title: format!("maximal paths, {model}"),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            series,
        }
    }
}

/// Points at which [`m2_sweep`] evaluates. The grid is walked from `amax`
/// down to `amin`, so the last row is the one nearest the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepGrid {
    pub amin: f64,
    pub amax: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.amin > 0.0 && self.amin <= self.amax) || self.points == 0 {
            return Err(Error::Domain(format!(
                "sweep grid needs 0 < amin <= amax and points >= 1, got [{}, {}] with {} points",
                self.amin, self.amax, self.points
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.amax]);
        }
        let last = self.points - 1;
        Ok((0..self.points)
            .map(|i| {
                let t = i as f64 / last as f64;
                match i {
                    0 => self.amax,
                    _ if i == last => self.amin,
                    _ if self.log => 10f64.powf(self.amax.log10() + t * (self.amin.log10() - self.amax.log10())),
                    _ => self.amax + t * (self.amin - self.amax),
                }
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct M2Row {
    pub a: f64,
    pub m1: f64,
    pub m2: f64,
    pub d_a: f64,
    pub residual: f64,
}

impl CsvRecord for M2Row {
    const HEADER: &'static [&'static str] = &["a", "m1", "m2", "d_a", "residual"];

    fn to_record(&self) -> Vec<String> {
        [self.a, self.m1, self.m2, self.d_a, self.residual].iter().map(|v| fmt_f64(*v)).collect()
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != Self::HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, got {}", Self::HEADER.len(), r.len())));
        }
        let v = |k: usize| parse_f64(&r[k], Self::HEADER[k]);
        Ok(M2Row {
            a: v(0)?,
            m1: v(1)?,
            m2: v(2)?,
            d_a: v(3)?,
            residual: v(4)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct M2Sweep {
    pub field: String,
    pub origin_limit: M2Limit,
    pub a0_limit: M2Limit,
    pub rows: Vec<M2Row>,
}

impl M2Sweep {
    /// Comment lines for the CSV header.
    pub fn comments(&self) -> Vec<String> {
        vec![
            format!("field {}", self.field),
            format!("predicted m2 limit as a -> 0: {}", self.origin_limit),
            format!("predicted m2 limit as a -> a0: {}", self.a0_limit),
        ]
    }
}

/// Tabulates the crossing slope along a grid of curve parameters.
pub fn m2_sweep(field: &SpeedField, grid: SweepGrid) -> Result<M2Sweep> {
    let (curve, r) = field
        .corner_curve()
        .ok_or_else(|| Error::Unsupported(format!("{field} is not a corner field")))?;
    let values = grid.values()?;
    if grid.amax >= curve.a0() {
        return Err(Error::Domain(format!(
            "amax = {} must lie below the curve end a0 = {}",
            grid.amax,
            curve.a0()
        )));
    }
    let rows = values
        .into_iter()
        .map(|a| {
            let m2 = corner_m2(curve, r, a)?;
            Ok(M2Row {
                a,
                m1: curve.eval(a)? / a,
                m2,
                d_a: corner_d(curve, r, a)?,
                residual: crossing_residual(curve, r, a, m2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(M2Sweep {
        field: field.to_string(),
        origin_limit: classify_m2_limit(curve, r, CurveEnd::Origin)?,
        a0_limit: classify_m2_limit(curve, r, CurveEnd::A0)?,
        rows,
    })
}

impl CsvRecord for ExpansionPoint {
    const HEADER: &'static [&'static str] = &["a", "inv_sqrt_m2", "leading", "remainder"];

    fn to_record(&self) -> Vec<String> {
        [self.a, self.lhs, self.leading, self.remainder].iter().map(|v| fmt_f64(*v)).collect()
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != Self::HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, got {}", Self::HEADER.len(), r.len())));
        }
        let v = |k: usize| parse_f64(&r[k], Self::HEADER[k]);
        Ok(ExpansionPoint {
            a: v(0)?,
            lhs: v(1)?,
            leading: v(2)?,
            remainder: v(3)?,
        })
    }
}

/// `expansion_check` at `a = 10^-e` for each exponent.
pub fn expansion_table(p: &ExpansionParams, exponents: impl IntoIterator<Item = i32>) -> Result<Vec<ExpansionPoint>> {
    exponents.into_iter().map(|e| expansion_check(p, 10f64.powi(-e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_walks_toward_origin() {
        let g = SweepGrid { amin: 1e-6, amax: 1e-2, points: 5, log: true };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[2] - 1e-4).abs() < 1e-18);
        assert_eq!((v[0], v[4]), (1e-2, 1e-6));
        assert!(SweepGrid { amin: 0.0, ..g }.values().is_err());
    }

    #[test]
    fn sqrt_sweep_has_equal_slopes() {
        let f = SpeedField::corner_sqrt(2.0).unwrap();
        let s = m2_sweep(&f, SweepGrid { amin: 0.01, amax: 0.9, points: 12, log: false }).unwrap();
        for r in &s.rows {
            assert!((r.m2 / r.m1 - 1.0).abs() < 1e-9, "{r:?}");
            assert!(r.residual.abs() < 1e-9);
        }
        assert!(m2_sweep(&SpeedField::constant(1.0).unwrap(), SweepGrid { amin: 0.1, amax: 0.2, points: 2, log: false }).is_err());
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, s) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, over 4
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[7.0]), (7.0, 0.0));
    }
}
