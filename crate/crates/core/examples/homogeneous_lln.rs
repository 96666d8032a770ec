//! G(0 -> (nx, ny)) / n against (sqrt x + sqrt y)^2 for i.i.d. Exp(1) weights.

use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::shape::gamma;
use lpp_shape::{Result, SpeedField};

fn main() -> Result<()> {
    let field = SpeedField::constant(1.0)?;
    let (x, y) = (1.0, 0.5);
    let limit = gamma(x, y)?;
    println!("target ({x}, {y}), limit {limit:.6}");
    println!("{:>6} {:>10} {:>10}", "n", "mean G/n", "gap");
    for n in [100u32, 200, 400, 800, 1600] {
        let reps = 8;
        let mut sum = 0.0;
        for seed in 0..reps {
            sum += EnvironmentSpec::new(field.clone(), n, seed)?.scaled_passage(x, y)?;
        }
        let mean = sum / reps as f64;
        // the gap shrinks roughly like n^(-2/3) relative to n
        println!("{n:>6} {mean:>10.5} {:>10.5}", limit - mean);
    }
    Ok(())
}
