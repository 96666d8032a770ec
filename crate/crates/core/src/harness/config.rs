use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpeedField;
use crate::geometry::Point;
use crate::optim::SimplexSettings;
use crate::shape::OptimizeOptions;

fn one() -> u32 {
    1
}

/// Optimizer settings as they appear in a config file. Every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub free_waypoints: usize,
    pub multistart: usize,
    pub rng_seed: u64,
    pub value_tol: f64,
    pub max_iters: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let o = OptimizeOptions::default();
        OptimizerConfig {
            free_waypoints: o.free_waypoints,
            multistart: o.multistart,
            rng_seed: o.rng_seed,
            value_tol: o.simplex.value_tol,
            max_iters: o.simplex.max_iters,
        }
    }
}

impl From<&OptimizerConfig> for OptimizeOptions {
    fn from(c: &OptimizerConfig) -> Self {
        OptimizeOptions {
            free_waypoints: c.free_waypoints,
            multistart: c.multistart,
            rng_seed: c.rng_seed,
            simplex: SimplexSettings {
                value_tol: c.value_tol,
                max_iters: c.max_iters,
            },
        }
    }
}

/// One experiment as read from JSON.
///
/// Replica `k` runs with seed `base_seed + k` (wrapping).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: String,
    pub targets: Vec<[f64; 2]>,
    pub n_list: Vec<u32>,
    #[serde(default = "one")]
    pub replicas: u32,
    #[serde(default)]
    pub base_seed: u64,
    pub out_csv: PathBuf,
    #[serde(default)]
    pub out_svg: Option<PathBuf>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Off by default so that repeated runs give byte-identical CSV files;
    /// `wall_ms` is then written as 0.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let field = self.parse_field()?;
        if self.targets.is_empty() {
            return Err(Error::Parse("config: targets is empty".into()));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::Parse("config: n_list must be nonempty with positive entries".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(format!(
                "config: n_list must be strictly increasing, got {:?}",
                self.n_list
            )));
        }
        if self.replicas == 0 {
            return Err(Error::Parse("config: replicas must be at least 1".into()));
        }
        for t in &self.targets {
            if !(t[0] >= 0.0 && t[1] >= 0.0) || !field.bbox().contains(t[0], t[1]) {
                return Err(Error::Domain(format!("target ({}, {}) outside the field bbox", t[0], t[1])));
            }
        }
        Ok(())
    }

    pub fn parse_field(&self) -> Result<SpeedField> {
        self.field.parse()
    }

    pub fn target_points(&self) -> Vec<Point> {
        self.targets.iter().map(|t| Point::new(t[0], t[1])).collect()
    }

    pub fn replica_seed(&self, replica: u32) -> u64 {
        self.base_seed.wrapping_add(replica as u64)
    }

    pub fn optimize_options(&self) -> OptimizeOptions {
        (&self.optimizer).into()
    }
}
