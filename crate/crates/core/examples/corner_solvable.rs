//! The corner with f(a) = (1 - sqrt a)^2: crossings happen on straight lines
//! through the curve and the shape has a closed form.

use lpp_shape::closed_forms::{corner_d, corner_m2, corner_shape};
use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::field::CornerCurve;
use lpp_shape::{Result, SpeedField};

fn main() -> Result<()> {
    let r = 2.0;
    let field = SpeedField::corner_sqrt(r)?;
    for a in [0.01, 0.25, 0.64] {
        println!(
            "a = {a:<5} m2 = {:.6}  D(a) = {:.1e}",
            corner_m2(CornerCurve::Sqrt, r, a)?,
            corner_d(CornerCurve::Sqrt, r, a)?
        );
    }
    println!();
    for (x, y) in [(1.0, 1.0), (0.1, 0.1), (2.0, 0.5), (0.5, 3.0)] {
        let e = corner_shape(&field, x, y)?;
        let w = e.maximiser.waypoints();
        let env = EnvironmentSpec::new(field.clone(), 600, 3)?;
        println!(
            "({x}, {y})  {:<22} value {:.6}  via ({:.4}, {:.4})  simulated {:.4}",
            e.branch.label(),
            e.value,
            w[w.len().saturating_sub(2)].x,
            w[w.len().saturating_sub(2)].y,
            env.scaled_passage(x, y)?
        );
    }
    Ok(())
}
