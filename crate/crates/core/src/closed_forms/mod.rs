//! Explicit formulas for the shifted two-phase model and the corner model.

pub mod asymptotics;
pub mod corner;
pub mod two_phase;

pub use asymptotics::{
    classify_m2_limit, classify_origin_profile, expansion_check, expansion_slope, CurveEnd, EndProfile,
    ExpansionParams, ExpansionPoint, M2Limit,
};
pub use corner::{
    corner_candidates, corner_d, corner_m2, corner_shape, crossing_density, crossing_residual, crossing_residual_relative,
    region_boundary_hyperbola, uniqueness_probe, CornerCandidates, CrossingSolution, UniquenessReport,
};
pub use two_phase::{parabola_l, two_phase_constants, two_phase_shape, TwoPhaseConstants};

use crate::error::{Error, Result};
use crate::field::{Family, SpeedField};
use crate::geometry::Point;
use crate::shape::{gamma_homog, Branch, Polyline, ShapeEval};

/// Shape function from whichever explicit formula covers the field's family.
/// Step grids have none and give [`Error::Unsupported`].
pub fn closed_form_shape(field: &SpeedField, x: f64, y: f64) -> Result<ShapeEval> {
    match field.family() {
        Family::Constant { rate } => {
            if !field.bbox().contains(x, y) {
                return Err(Error::Domain(format!("target ({x}, {y}) outside the field bbox")));
            }
            Ok(ShapeEval {
                value: gamma_homog(*rate, x, y)?,
                maximiser: Polyline::straight(Point::ORIGIN, Point::new(x, y))?,
                branch: Branch::Straight,
                residuals: Default::default(),
                non_unique: false,
            })
        }
        Family::ShiftedTwoPhase { r, lambda } => two_phase_shape(*r, *lambda, x, y),
        Family::Corner { .. } => corner_shape(field, x, y),
        Family::StepGrid(_) => Err(Error::Unsupported(
            "step grids have no closed-form shape; use the numeric optimizer".into(),
        )),
    }
}
