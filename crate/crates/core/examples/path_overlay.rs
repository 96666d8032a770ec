//! Microscopic maximal paths against macroscopic maximisers, written as CSV
//! and SVG. Takes an optional config path.

use lpp_shape::harness::{emit_csv, emit_svg, path_overlay, ExperimentConfig};
use lpp_shape::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/paths_corner_sqrt.json").into());
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let rep = path_overlay(&cfg)?;
    for s in &rep.summaries {
        println!(
            "({}, {}) n={} {:<22} shape {:.4}  G/n {:.4}  sup-distance {:.3}  within band {:.2}",
            s.target.x, s.target.y, s.n, s.branch, s.shape_value, s.g_over_n, s.sup_distance, s.band_fraction
        );
    }
    emit_csv(&rep.rows, &[format!("field {}", cfg.field)], &cfg.out_csv)?;
    if let Some(svg) = &cfg.out_svg {
        emit_svg(&rep.chart(&cfg.field), svg)?;
    }
    println!("wrote {}", cfg.out_csv.display());
    Ok(())
}
