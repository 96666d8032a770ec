use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lpp_shape::closed_forms::{corner_candidates, corner_shape, expansion_slope, ExpansionParams};
use lpp_shape::engine::EnvironmentSpec;
use lpp_shape::harness::{
    converge_experiment, csv_string, emit_csv, emit_svg, expansion_table, m2_sweep, path_overlay, solve_shape,
    ExperimentConfig, SolveMethod, SweepGrid,
};
use lpp_shape::shape::OptimizeOptions;
use lpp_shape::{Error, Point, Result, SpeedField};

/// Last-passage percolation in inhomogeneous exponential environments.
#[derive(Parser)]
#[command(name = "lpp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Numeric,
    Auto,
}

#[derive(Subcommand)]
enum Cmd {
    /// Shape function value, branch and maximiser at a target.
    Solve {
        #[arg(long)]
        field: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// One lattice simulation: G and G/n.
    Simulate {
        #[arg(long)]
        field: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        /// Write the maximal path as `i,j` lines.
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Convergence study from a JSON config.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Lattice and macroscopic maximal paths from a JSON config.
    Paths {
        #[arg(long)]
        config: PathBuf,
    },
    /// Every crossing root and axis candidate of a corner target.
    Crossing {
        #[arg(long)]
        field: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Crossing slope along a grid of curve parameters, as CSV.
    M2sweep {
        #[arg(long)]
        field: String,
        #[arg(long)]
        amin: f64,
        #[arg(long)]
        amax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        log: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Small-a expansion of the crossing slope at the critical coefficient.
    Expand {
        #[arg(long)]
        f0: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: f64,
    },
}

fn field(s: &str) -> Result<SpeedField> {
    s.parse()
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io { path: "<stdout>".into(), source: e }
}

fn run(cmd: Cmd) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cmd {
        Cmd::Solve { field: f, x, y, method } => {
            let method = match method {
                Method::Closed => SolveMethod::Closed,
                Method::Numeric => SolveMethod::Numeric,
                Method::Auto => SolveMethod::Auto,
            };
            let e = solve_shape(&field(&f)?, Point::new(x, y), method, &OptimizeOptions::default())?;
            writeln!(out, "{e}").map_err(stdout_err)?;
        }
        Cmd::Simulate { field: f, n, seed, x, y, path } => {
            let env = EnvironmentSpec::new(field(&f)?, n, seed)?;
            let res = env.last_passage((0, 0), env.lattice_target(x, y), path.is_some())?;
            writeln!(out, "G      {:.12}", res.value).map_err(stdout_err)?;
            writeln!(out, "G/n    {:.12}", res.value / n as f64).map_err(stdout_err)?;
            writeln!(out, "target ({}, {})", res.target.0, res.target.1).map_err(stdout_err)?;
            if let (Some(p), Some(sites)) = (path, &res.path) {
                let text: String = sites.iter().map(|(i, j)| format!("{i},{j}\n")).collect();
                std::fs::write(&p, text).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            }
        }
        Cmd::Converge { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let rep = converge_experiment(&cfg)?;
            emit_csv(&rep.rows, &[], &cfg.out_csv)?;
            if let Some(svg) = &cfg.out_svg {
                emit_svg(&rep.chart(&cfg.field), svg)?;
            }
            writeln!(out, "{:>8} {:>8} {:>6} {:>12} {:>10} {:>12} {:>10}", "x", "y", "n", "mean G/n", "se", "mean err", "se")
                .map_err(stdout_err)?;
            for s in &rep.summary {
                writeln!(
                    out,
                    "{:>8} {:>8} {:>6} {:>12.6} {:>10.2e} {:>12.6} {:>10.2e}",
                    s.target.x, s.target.y, s.n, s.mean_g_over_n, s.se_g_over_n, s.mean_abs_err, s.se_abs_err
                )
                .map_err(stdout_err)?;
            }
            for ((t, shape), ok) in rep.shapes.iter().zip(&rep.trend_ok) {
                writeln!(
                    out,
                    "({}, {}): shape {:.9} [{}], error trend {}",
                    t.x,
                    t.y,
                    shape.value,
                    shape.branch,
                    if *ok { "decreasing" } else { "NOT decreasing" }
                )
                .map_err(stdout_err)?;
            }
            writeln!(out, "wrote {}", cfg.out_csv.display()).map_err(stdout_err)?;
        }
        Cmd::Paths { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let rep = path_overlay(&cfg)?;
            emit_csv(&rep.rows, &[], &cfg.out_csv)?;
            if let Some(svg) = &cfg.out_svg {
                emit_svg(&rep.chart(&cfg.field), svg)?;
            }
            for s in &rep.summaries {
                writeln!(
                    out,
                    "({}, {}) n={} branch {} shape {:.6} G/n {:.6} sup-dist {:.4} within {}: {:.3}",
                    s.target.x,
                    s.target.y,
                    s.n,
                    s.branch,
                    s.shape_value,
                    s.g_over_n,
                    s.sup_distance,
                    lpp_shape::harness::OVERLAY_BAND,
                    s.band_fraction
                )
                .map_err(stdout_err)?;
            }
            writeln!(out, "wrote {}", cfg.out_csv.display()).map_err(stdout_err)?;
        }
        Cmd::Crossing { field: f, x, y } => {
            let fld = field(&f)?;
            let c = corner_candidates(&fld, x, y)?;
            writeln!(out, "type-C crossings: {}", c.crossings.len()).map_err(stdout_err)?;
            for s in &c.crossings {
                writeln!(
                    out,
                    "  a {:.12}  m1 {:.6e}  m2 {:.6e}  D {:.6e}  residual {:.2e}  value {:.12}",
                    s.a, s.m1, s.m2, s.d_a, s.residual, s.value
                )
                .map_err(stdout_err)?;
            }
            let opt = |v: Option<f64>| v.map_or("not available".to_string(), |v| format!("{v:.12}"));
            writeln!(out, "type-B vertical:   {}", opt(c.vertical)).map_err(stdout_err)?;
            writeln!(out, "type-B horizontal: {}", opt(c.horizontal)).map_err(stdout_err)?;
            let w = corner_shape(&fld, x, y)?;
            writeln!(
                out,
                "winner {} value {:.12}{}",
                w.branch,
                w.value,
                if w.non_unique { " (non-unique)" } else { "" }
            )
            .map_err(stdout_err)?;
        }
        Cmd::M2sweep { field: f, amin, amax, points, log, out: dest } => {
            let s = m2_sweep(&field(&f)?, SweepGrid { amin, amax, points, log })?;
            match dest {
                Some(p) => emit_csv(&s.rows, &s.comments(), &p)?,
                None => out.write_all(csv_string(&s.rows, &s.comments())?.as_bytes()).map_err(stdout_err)?,
            }
        }
        Cmd::Expand { f0, gamma, c, r } => {
            let p = ExpansionParams::critical(f0, c, gamma, r)?;
            let rows = expansion_table(&p, 2..=10)?;
            let comments = vec![
                format!("f0 {f0} gamma {gamma} c {c} r {r} c_half {}", p.c_half),
                format!("remainder slope over a in [1e-8, 1e-6]: {:.4}", expansion_slope(&p, 1e-6, 1e-8)?),
            ];
            out.write_all(csv_string(&rows, &comments)?.as_bytes()).map_err(stdout_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
