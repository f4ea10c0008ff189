//! The single JSON document that drives every subcommand.

use std::path::{Path, PathBuf};

use bubbles::configuration::{DEFAULT_MULTISTART, DEFAULT_SEED};
use bubbles::dynamics::{Direction, ForcingModel, SimulationOptions};
use bubbles::numerics::ode::Tolerances;
use bubbles::profiles::DIM;
use bubbles::spectral::CorrectorGrid;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every field has a default, so `{}` is a valid configuration for the
/// commands that do not need sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Blow-up sites in `R^5`.
    pub points: Vec<[f64; DIM]>,
    /// Time at which data are prepared.
    #[serde(rename = "T")]
    pub t: f64,
    /// Time the backward integration and shooting run down to.
    #[serde(rename = "T0")]
    pub t0: f64,
    /// `K + 1` shooting parameters; zeros when absent.
    pub alpha: Option<Vec<f64>>,
    pub direction: Direction,
    pub forcing: ForcingModel,
    /// Channel to tune; all channels when absent.
    pub channel: Option<usize>,
    pub nu: Option<f64>,
    pub seed: u64,
    pub multistart: usize,
    pub samples: usize,
    pub stop_on_exit: bool,
    pub tolerances: OdeTolerances,
    pub spectral: SpectralGrid,
    pub correctors: CorrectorSettings,
    pub interactions: InteractionSettings,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            t: 100.0,
            t0: 10.0,
            alpha: None,
            direction: Direction::Backward,
            forcing: ForcingModel::None,
            channel: None,
            nu: None,
            seed: DEFAULT_SEED,
            multistart: DEFAULT_MULTISTART,
            samples: 101,
            stop_on_exit: true,
            tolerances: OdeTolerances::default(),
            spectral: SpectralGrid::default(),
            correctors: CorrectorSettings::default(),
            interactions: InteractionSettings::default(),
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        let t = SimulationOptions::default().tolerances;
        Self {
            rtol: t.rtol,
            atol: t.atol,
            max_steps: t.max_steps,
        }
    }
}

/// Finite-element mesh `r_i = scale·sinh(i·Δs)` on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralGrid {
    pub scale: f64,
    pub r_max: f64,
    pub elements: usize,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self {
            scale: 1.0,
            r_max: 1e4,
            elements: 8000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectorSettings {
    pub scale: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for CorrectorSettings {
    fn default() -> Self {
        let g = CorrectorGrid::default();
        Self {
            scale: g.scale,
            r_max: g.r_max,
            points: g.points,
        }
    }
}

impl From<CorrectorSettings> for CorrectorGrid {
    fn from(s: CorrectorSettings) -> Self {
        CorrectorGrid {
            scale: s.scale,
            r_max: s.r_max,
            points: s.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionSettings {
    pub times: Vec<f64>,
    /// Monte-Carlo cross-check budget at the first time; zero disables it.
    pub mc_samples: usize,
}

impl Default for InteractionSettings {
    fn default() -> Self {
        Self {
            times: vec![10.0, 20.0, 40.0, 80.0],
            mc_samples: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn simulation_options(&self) -> SimulationOptions {
        let base = SimulationOptions::default();
        SimulationOptions {
            tolerances: Tolerances {
                rtol: self.tolerances.rtol,
                atol: self.tolerances.atol,
                max_steps: self.tolerances.max_steps,
                ..base.tolerances
            },
            samples: self.samples,
            stop_on_exit: self.stop_on_exit,
        }
    }
}
