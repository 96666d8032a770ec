//! Which kind of maximiser wins at each target, for the six corner parameter
//! sets in configs/phase_*.json. Writes one SVG scatter per set, then
//! simulates the config targets and compares the microscopic paths.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lpp_shape::closed_forms::corner_shape;
use lpp_shape::harness::{emit_svg, path_overlay, Chart, ExperimentConfig, Series, SeriesStyle};
use lpp_shape::Result;

const GRID: usize = 40;

fn main() -> Result<()> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"));
    for k in 1..=6 {
        let cfg = ExperimentConfig::load(&dir.join(format!("phase_{k}.json")))?;
        let field = cfg.parse_field()?;
        let extent = 1.5;
        let mut by_branch: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for i in 1..=GRID {
            for j in 1..=GRID {
                let (x, y) = (extent * i as f64 / GRID as f64, extent * j as f64 / GRID as f64);
                let e = corner_shape(&field, x, y)?;
                let key = if e.non_unique { "non-unique".to_string() } else { e.branch.to_string() };
                by_branch.entry(key).or_default().push((x, y));
            }
        }
        let counts: Vec<String> = by_branch.iter().map(|(b, p)| format!("{b} {}", p.len())).collect();
        println!("{field}: {}", counts.join(", "));

        let chart = Chart {
            title: format!("maximiser type, {field}"),
            x_label: "x".into(),
            y_label: "y".into(),
            series: by_branch
                .into_iter()
                .map(|(label, points)| Series { label, points, style: SeriesStyle::Scatter })
                .collect(),
            ..Chart::default()
        };
        emit_svg(&chart, &PathBuf::from(format!("out/phase_{k}_diagram.svg")))?;

        for s in path_overlay(&cfg)?.summaries {
            println!(
                "  ({}, {}) {:<22} sup-distance {:.3}",
                s.target.x, s.target.y, s.branch, s.sup_distance
            );
        }
    }
    Ok(())
}
