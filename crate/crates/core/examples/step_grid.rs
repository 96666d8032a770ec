//! A piecewise-constant field with no closed form: the polyline optimiser
//! against simulation.

use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::field::StepGrid;
use lpp_shape::shape::{optimize_polyline, OptimizeOptions};
use lpp_shape::{Point, Result, SpeedField};

fn main() -> Result<()> {
    // rate 0.3 in the middle cell: heavier weights there attract the path
    let grid = StepGrid::new(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![0.0, 1.0, 2.0, 3.0],
        vec![1.0, 1.0, 1.0, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0],
    )?;
    let field = SpeedField::step_grid(grid);
    let target = Point::new(3.0, 3.0);
    let opts = OptimizeOptions { free_waypoints: 3, ..OptimizeOptions::default() };
    let e = optimize_polyline(&field, target, &opts)?;
    println!("{e}");
    for n in [100u32, 200, 400] {
        let env = EnvironmentSpec::new(field.clone(), n, 5)?;
        println!("n = {n:<4} G/n = {:.4}", env.scaled_passage(target.x, target.y)?);
    }
    Ok(())
}
