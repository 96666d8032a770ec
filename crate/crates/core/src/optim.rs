//! Thin wrappers over `argmin` for the one-dimensional and simplex searches
//! used by the shape solvers. All entry points maximise.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentRoot;
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Neg<'a, P>(&'a dyn Fn(&P) -> f64);

impl<P> CostFunction for Neg<'_, P> {
    type Param = P;
    type Output = f64;

    fn cost(&self, p: &P) -> std::result::Result<f64, argmin::core::Error> {
        Ok(-(self.0)(p))
    }
}

struct Plain<'a>(&'a dyn Fn(f64) -> f64);

impl CostFunction for Plain<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

fn internal(e: argmin::core::Error) -> Error {
    Error::Internal(format!("optimizer: {e}"))
}

/// Maximiser of a unimodal `f` on `[lo, hi]` by golden-section search with
/// relative bracket tolerance `tol`. Returns `(x, f(x))`, comparing against
/// both end points so monotone objectives are handled.
pub fn golden_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let mut best = (lo, f(lo));
    let fh = f(hi);
    if fh > best.1 {
        best = (hi, fh);
    }
    if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
        return Ok(best);
    }
    let g = |x: &f64| f(x.clamp(lo, hi));
    let solver = GoldenSectionSearch::new(lo, hi)
        .and_then(|s| s.with_tolerance(tol))
        .map_err(internal)?;
    let res = Executor::new(Neg(&g), solver)
        .configure(|s| s.param(0.5 * (lo + hi)).max_iters(300))
        .run()
        .map_err(internal)?;
    let x = res.state().get_best_param().copied().unwrap_or(best.0);
    let fx = f(x);
    Ok(if fx > best.1 { (x, fx) } else { best })
}

/// Root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs,
/// located by Brent's method to relative tolerance `tol`.
pub fn root_bracketed(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Internal(format!("no sign change on [{lo}, {hi}]")));
    }
    // argmin's tolerance is absolute
    let abs_tol = tol * lo.abs().max(hi.abs());
    let res = Executor::new(Plain(f), BrentRoot::new(lo, hi, abs_tol))
        .configure(|s| s.param(0.5 * (lo + hi)).max_iters(500))
        .run()
        .map_err(internal)?;
    res.state()
        .get_best_param()
        .copied()
        .ok_or_else(|| Error::Internal("root finder returned no point".into()))
}

/// Settings for [`nelder_mead_max`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexSettings {
    /// Stop once the standard deviation of the simplex values drops below this.
    pub value_tol: f64,
    pub max_iters: u64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        SimplexSettings {
            value_tol: 1e-12,
            max_iters: 2000,
        }
    }
}

/// Local maximiser of `f` started from the simplex `vertices`.
pub fn nelder_mead_max(
    f: &dyn Fn(&Vec<f64>) -> f64,
    vertices: Vec<Vec<f64>>,
    settings: SimplexSettings,
) -> Result<(Vec<f64>, f64)> {
    let solver = NelderMead::new(vertices)
        .with_sd_tolerance(settings.value_tol)
        .map_err(internal)?;
    let res = Executor::new(Neg(f), solver)
        .configure(|s| s.max_iters(settings.max_iters))
        .run()
        .map_err(internal)?;
    let x = res
        .state()
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::Internal("simplex search returned no point".into()))?;
    let fx = f(&x);
    Ok((x, fx))
}
