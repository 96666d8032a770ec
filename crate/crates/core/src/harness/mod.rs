//! Experiment orchestration and flat-file output behind the `lpp` binary.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, OptimizerConfig};
pub use experiments::{
    converge_experiment, expansion_table, m2_sweep, path_overlay, solve_shape, ConvergeReport, M2Row, M2Sweep,
    OverlayKind, OverlayReport, OverlayRow, OverlaySummary, ResultRow, SolveMethod, SummaryRow, SweepGrid,
    OVERLAY_BAND,
};
pub use output::{
    csv_string, emit_csv, emit_svg, fmt_f64, load_csv, read_csv, render_svg, write_csv, Chart, CsvRecord, Series,
    SeriesStyle,
};
