//! Predicted limits of the crossing slope at both ends of several corner
//! curves, next to the slope evaluated close to each end.

use lpp_shape::closed_forms::{classify_m2_limit, corner_m2, expansion_slope, CurveEnd, ExpansionParams};
use lpp_shape::field::CornerCurve;
use lpp_shape::Result;

fn main() -> Result<()> {
    let cases = [
        (CornerCurve::power(0.5, 1.2, 3.0)?, 3.0),
        (CornerCurve::power(0.5, 2.0, 3.0)?, 3.0),
        (CornerCurve::power(1.0, 1.0, 3.0)?, 3.0),
        (CornerCurve::power(1.0, 1.0, 1.6)?, 3.0),
        (CornerCurve::Sqrt, 2.0),
    ];
    for (curve, r) in cases {
        let a0 = curve.a0();
        println!("{curve:?}, r = {r}");
        println!(
            "  a -> 0:  predicted {:<10} m2(1e-12) = {:.4e}",
            classify_m2_limit(curve, r, CurveEnd::Origin)?.to_string(),
            corner_m2(curve, r, 1e-12)?
        );
        println!(
            "  a -> a0: predicted {:<10} m2(a0 (1 - 1e-9)) = {:.4e}",
            classify_m2_limit(curve, r, CurveEnd::A0)?.to_string(),
            corner_m2(curve, r, a0 * (1.0 - 1e-9))?
        );
    }

    println!("\nremainder slopes of 1/sqrt(m2) at the critical coefficient, r = 2:");
    for gamma in [0.3, 0.75, 1.5] {
        let p = ExpansionParams::critical(1.0, 1.0, gamma, 2.0)?;
        println!("  exponent {gamma}: {:.4}", expansion_slope(&p, 1e-8, 1e-10)?);
    }
    Ok(())
}
