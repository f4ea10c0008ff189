use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FORCING_AMPLITUDE: f64 = 1.0;
/// Decay exponents of the forcing on `λ'`, `b'` and the channels.
pub const LAMBDA_FORCING_DECAY: f64 = 11.0 / 3.0;
pub const B_FORCING_DECAY: f64 = 14.0 / 3.0;
pub const CHANNEL_FORCING_DECAY: f64 = 4.0;
const MODES: usize = 3;

/// Model of the remainders in the modulation equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForcingModel {
    None,
    /// Every remainder at `+C t^{-p}`.
    WorstCase {
        amplitude: f64,
    },
    /// Every remainder at `C t^{-p} ψ(ln t)` with `ψ` a seeded normalized
    /// sum of sinusoids, `|ψ| ≤ 1`.
    RandomBounded {
        amplitude: f64,
        seed: u64,
    },
}

impl ForcingModel {
    pub fn amplitude(&self) -> f64 {
        match *self {
            ForcingModel::None => 0.0,
            ForcingModel::WorstCase { amplitude }
            | ForcingModel::RandomBounded { amplitude, .. } => amplitude,
        }
    }
}

#[derive(Debug, Clone)]
struct Mode {
    weight: f64,
    freq: f64,
    phase: f64,
}

/// Evaluator for the `4K` remainders of a [`ForcingModel`].
#[derive(Debug, Clone)]
pub struct Forcing {
    model: ForcingModel,
    k: usize,
    modes: Vec<[Mode; MODES]>,
}

/// Remainders at one time, in the order `λ, b, a⁺, a⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingValues {
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
}

impl Forcing {
    pub fn new(model: ForcingModel, k: usize) -> Result<Self> {
        let amp = model.amplitude();
        if !(amp >= 0.0 && amp.is_finite()) {
            return Err(Error::input(
                "forcing amplitude must be finite and nonnegative",
            ));
        }
        let modes = match model {
            ForcingModel::RandomBounded { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..4 * k)
                    .map(|_| {
                        let mut draw = || Mode {
                            weight: rng.random_range(0.1..1.0),
                            freq: rng.random_range(0.5..5.0),
                            phase: rng.random_range(0.0..std::f64::consts::TAU),
                        };
                        let mut m = [draw(), draw(), draw()];
                        let total: f64 = m.iter().map(|x| x.weight).sum();
                        m.iter_mut().for_each(|x| x.weight /= total);
                        m
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(Self { model, k, modes })
    }

    pub fn model(&self) -> ForcingModel {
        self.model
    }

    pub fn is_none(&self) -> bool {
        matches!(self.model, ForcingModel::None) || self.model.amplitude() == 0.0
    }

    /// Shape factor `ψ_j(t) ∈ [-1, 1]` of remainder `j`.
    fn shape(&self, j: usize, t: f64) -> f64 {
        match self.model {
            ForcingModel::None => 0.0,
            ForcingModel::WorstCase { .. } => 1.0,
            ForcingModel::RandomBounded { .. } => {
                let tau = t.ln();
                self.modes[j]
                    .iter()
                    .map(|m| m.weight * (m.freq * tau + m.phase).sin())
                    .sum()
            }
        }
    }

    /// Remainders scaled by `t^p`, i.e. `C ψ_j(t)`.
    pub(crate) fn scaled(&self, t: f64, out: &mut [f64]) {
        let amp = self.model.amplitude();
        for (j, o) in out.iter_mut().enumerate().take(4 * self.k) {
            *o = amp * self.shape(j, t);
        }
    }

    pub fn eval(&self, t: f64) -> ForcingValues {
        let mut s = vec![0.0; 4 * self.k];
        self.scaled(t, &mut s);
        let k = self.k;
        let pl = t.powf(-LAMBDA_FORCING_DECAY);
        let pb = t.powf(-B_FORCING_DECAY);
        let pa = t.powf(-CHANNEL_FORCING_DECAY);
        ForcingValues {
            lambda: s[..k].iter().map(|v| v * pl).collect(),
            b: s[k..2 * k].iter().map(|v| v * pb).collect(),
            a_plus: s[2 * k..3 * k].iter().map(|v| v * pa).collect(),
            a_minus: s[3 * k..].iter().map(|v| v * pa).collect(),
        }
    }
}
