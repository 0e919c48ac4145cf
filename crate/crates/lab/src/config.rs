use std::fs;
use std::path::{Path, PathBuf};

use hardy_core::ensembles::EnsembleConfig;
use hardy_core::torus::TorusGrid;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Run parameters as read from a JSON file or the command line. Every field
/// is optional; missing values fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n_points: Option<usize>,
    pub depth: Option<usize>,
    pub max_degree: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    pub resolutions: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Values from `self` win over `base`.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            n_points: self.n_points.or(base.n_points),
            depth: self.depth.or(base.depth),
            max_degree: self.max_degree.or(base.max_degree),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            budget: self.budget.or(base.budget),
            resolutions: self.resolutions.or(base.resolutions),
            out: self.out.or(base.out),
            csv: self.csv.or(base.csv),
        }
    }

    /// Reads a flat config object, or the `config` member of a saved report.
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
            if let Some(obj) = value.as_object_mut() {
                obj.retain(|_, v| !v.is_null());
            }
        }
        serde_json::from_value(value)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Identities,
    Lemmas,
    Theorem,
    ConstantSearch,
    Convergence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identities => "identities",
            Self::Lemmas => "lemmas",
            Self::Theorem => "theorem",
            Self::ConstantSearch => "constant-search",
            Self::Convergence => "convergence",
        }
    }

    fn default_samples(&self) -> usize {
        match self {
            Self::Identities | Self::Theorem => 1000,
            Self::Lemmas => 10_000,
            Self::ConstantSearch => 4,
            Self::Convergence => 1,
        }
    }

    fn default_depth(&self) -> usize {
        match self {
            Self::Lemmas | Self::Convergence => 1,
            _ => 2,
        }
    }
}

/// Fully resolved parameters; this is what a report echoes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_points: usize,
    pub depth: usize,
    pub max_degree: usize,
    pub samples: usize,
    pub seed: u64,
    /// `None` selects each check's default tolerance.
    pub tol: Option<f64>,
    pub budget: usize,
    pub resolutions: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

pub const DEFAULT_RESOLUTIONS: [usize; 6] = [4, 8, 16, 32, 64, 128];

/// Upper limit on constant-search iterations per start.
pub const MAX_BUDGET: usize = 1_000_000;

impl RunConfig {
    pub fn resolve(command: Command, o: ConfigOverrides) -> Result<Self, LabError> {
        let n_points = o.n_points.unwrap_or(8);
        let grid = TorusGrid::new(n_points).map_err(|e| LabError::Config(e.to_string()))?;
        let cfg = RunConfig {
            n_points,
            depth: o.depth.unwrap_or(command.default_depth()),
            max_degree: o.max_degree.unwrap_or(grid.max_analytic_degree()),
            samples: o.samples.unwrap_or(command.default_samples()),
            seed: o.seed.unwrap_or(0),
            tol: o.tol,
            budget: o.budget.unwrap_or(200),
            resolutions: o
                .resolutions
                .unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec()),
            out: o.out,
            csv: o.csv,
        };
        cfg.validate(command)?;
        Ok(cfg)
    }

    fn validate(&self, command: Command) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if self.samples == 0 && command != Command::Convergence {
            return bad("--samples must be positive".into());
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return bad(format!(
                    "--tol must be a finite non-negative number, got {tol}"
                ));
            }
        }
        if command == Command::ConstantSearch && self.budget > MAX_BUDGET {
            return bad(format!(
                "--budget must be at most {MAX_BUDGET}, got {}",
                self.budget
            ));
        }
        if command == Command::Convergence {
            if self.resolutions.is_empty() {
                return bad("--resolutions must list at least one grid size".into());
            }
            for &n in &self.resolutions {
                TorusGrid::new(n).map_err(|e| LabError::Config(e.to_string()))?;
            }
        } else {
            self.ensemble()
                .validate()
                .map_err(|e| LabError::Config(e.to_string()))?;
            hardy_core::martingale::MartingaleField::zero(
                TorusGrid::new(self.n_points).expect("validated"),
                self.depth,
            )
            .map_err(|e| LabError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            max_degree: self.max_degree,
            ..EnsembleConfig::new(self.seed, self.n_points, self.depth)
        }
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}
