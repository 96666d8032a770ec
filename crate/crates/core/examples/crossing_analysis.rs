//! All candidate maximisers of a corner target, the uniqueness probe and the
//! density of crossing points.

use lpp_shape::closed_forms::{corner_candidates, corner_shape, crossing_density, uniqueness_probe};
use lpp_shape::{Point, Result, SpeedField};

fn main() -> Result<()> {
    let field = SpeedField::corner_power(0.5, 2.0, 3.0, 3.0)?;
    println!("{field}");
    for (x, y) in [(0.05, 2.0), (0.3, 0.3), (1.0, 0.05)] {
        let cands = corner_candidates(&field, x, y)?;
        println!("target ({x}, {y})");
        for c in &cands.crossings {
            println!("  crossing a = {:.6e}  m2 = {:.4}  value {:.6}", c.a, c.m2, c.value);
        }
        if let Some(v) = cands.vertical {
            println!("  vertical       value {v:.6}");
        }
        if let Some(v) = cands.horizontal {
            println!("  horizontal     value {v:.6}");
        }
        println!("  winner {}", corner_shape(&field, x, y)?.branch);
    }

    let sqrt = SpeedField::corner_sqrt(2.0)?;
    let rep = uniqueness_probe(&sqrt, Point::new(1.0, 1.0), 2.0)?;
    println!(
        "\nmoving (1, 1) out along its segment to ({:.3}, {:.3}): same crossing {}",
        rep.moved_target.x, rep.moved_target.y, rep.same_crossing
    );

    for (n, gap) in crossing_density(&sqrt, 3.0, &[5, 10, 20, 40])? {
        println!("grid {n:>2}x{n:<2} largest gap between crossing points {gap:.4}");
    }
    Ok(())
}
