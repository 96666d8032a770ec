//! Closed-form shape of the shifted two-phase model, checked against the
//! numerical polyline optimiser and a simulation.

use lpp_shape::closed_forms::{parabola_l, two_phase_constants, two_phase_shape};
use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::shape::{optimize_polyline, OptimizeOptions};
use lpp_shape::{Point, Result, SpeedField};

fn main() -> Result<()> {
    let (r, lambda) = (0.5, 1.0);
    let c = two_phase_constants(r, lambda)?;
    println!("r = {r}, lambda = {lambda}");
    println!("K = {:.6}  A = {:.6}  D = {:.6}  a1* = {:.6}", c.k, c.a, c.d, c.a1_star);

    let field = SpeedField::two_phase(r, lambda)?;
    let opts = OptimizeOptions::default();
    for (x, y) in [(3.0, 2.5), (0.5, 2.0), (3.0, 2.0), (2.0, 0.4), (1.0, 6.0)] {
        let e = two_phase_shape(r, lambda, x, y)?;
        let num = optimize_polyline(&field, Point::new(x, y), &opts)?;
        println!(
            "({x}, {y})  L = {:>9.4}  {:<12} closed {:.9}  numeric {:.9}",
            parabola_l(r, lambda, x, y)?,
            e.branch,
            e.value,
            num.value
        );
    }

    let env = EnvironmentSpec::new(field, 500, 1)?;
    println!("simulated G/n at (3, 2.5), n = 500: {:.4}", env.scaled_passage(3.0, 2.5)?);
    Ok(())
}
