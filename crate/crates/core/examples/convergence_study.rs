//! G/n against the shape value over several n, with per-cell summaries.

use lpp_shape::harness::{converge_experiment, emit_csv, emit_svg, ExperimentConfig};
use lpp_shape::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/converge_two_phase.json").into());
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let rep = converge_experiment(&cfg)?;
    println!("{:>14} {:>6} {:>10} {:>10} {:>10}", "target", "n", "mean G/n", "se", "|err|");
    for s in &rep.summary {
        println!(
            "{:>14} {:>6} {:>10.5} {:>10.5} {:>10.5}",
            format!("({}, {})", s.target.x, s.target.y),
            s.n,
            s.mean_g_over_n,
            s.se_g_over_n,
            s.mean_abs_err
        );
    }
    println!("error trend consistent with convergence, per target: {:?}", rep.trend_ok);
    emit_csv(&rep.rows, &[], &cfg.out_csv)?;
    if let Some(svg) = &cfg.out_svg {
        emit_svg(&rep.chart(&cfg.field), svg)?;
    }
    Ok(())
}
