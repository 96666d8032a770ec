//! Last-passage percolation with exponential weights whose means follow a
//! macroscopic speed field, together with the variational shape function
//! that describes `G / n` for large `n`.
//!
//! * [`field`]: speed fields (constant, shifted two-phase, corner, step grid).
//! * [`engine`]: lattice dynamic program with path backtracking.
//! * [`shape`]: the path functional and a numeric polyline optimizer.
//! * [`closed_forms`]: explicit shape formulas and crossing-slope analysis.
//! * [`harness`]: experiments, CSV and SVG output.
//!
//! ```
//! use lpp_shape::{engine::EnvironmentSpec, field::SpeedField, shape::gamma};
//!
//! let env = EnvironmentSpec::new(SpeedField::constant(1.0).unwrap(), 200, 7).unwrap();
//! let g = env.scaled_passage(1.0, 1.0).unwrap();
//! assert!((g - gamma(1.0, 1.0).unwrap()).abs() < 0.5);
//! ```

pub mod closed_forms;
pub mod engine;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod optim;
pub mod rng;
pub mod shape;

pub use error::{Error, Result};
pub use field::SpeedField;
pub use geometry::Point;
