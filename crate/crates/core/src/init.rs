//! Initial distributions over configurations and the angle-precision metric.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{angle_of_index, EnergyLandscape};
use crate::qwalk::{RegisterLayout, StateVector};

pub const DEFAULT_KAPPA: f64 = 1.0;

/// Guessed angle means (radians) with a shared von Mises concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGuess {
    #[serde(rename = "means_radians")]
    pub means: Vec<f64>,
    pub kappa: f64,
}

impl AngleGuess {
    /// Means are reduced into `[0, 2pi)`.
    pub fn new(means: Vec<f64>, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::field("kappa", format!("must be >= 0, got {kappa}")));
        }
        if let Some(bad) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::field("means_radians", format!("non-finite mean {bad}")));
        }
        let means = means.into_iter().map(|m| m.rem_euclid(TAU)).collect();
        Ok(AngleGuess { means, kappa })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: AngleGuess = serde_json::from_str(text)?;
        AngleGuess::new(raw.means, raw.kappa)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Uniform,
    #[serde(alias = "minifold")]
    Vonmises,
    #[serde(alias = "original")]
    Delta,
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" | "random" => InitKind::Uniform,
            "vonmises" | "minifold" => InitKind::Vonmises,
            "delta" | "original" => InitKind::Delta,
            other => return Err(Error::field("init", format!("unknown init kind `{other}`"))),
        })
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitKind::Uniform => "uniform",
            InitKind::Vonmises => "vonmises",
            InitKind::Delta => "delta",
        })
    }
}

/// Probability mass over all flat configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    pub kind: InitKind,
    pub pmf: Vec<f64>,
}

/// Von Mises density evaluated at the `2^b` grid angles and renormalized.
pub fn vonmises_pmf(mu: f64, kappa: f64, bits: u32) -> Result<Vec<f64>> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::field("kappa", format!("must be >= 0, got {kappa}")));
    }
    let levels = 1usize << bits;
    // cos(theta - mu) - 1 <= 0 keeps exp() in range for large kappa
    let weights: Vec<f64> = (0..levels)
        .map(|i| {
            let theta = angle_of_index(i, bits).expect("index in range");
            (kappa * ((theta - mu).cos() - 1.0)).exp()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

pub fn build_initial(
    kind: InitKind,
    landscape: &EnergyLandscape,
    guess: Option<&AngleGuess>,
) -> Result<InitialDistribution> {
    let grid = landscape.grid();
    let d = grid.space_size();
    let pmf = match kind {
        InitKind::Uniform => vec![1.0 / d as f64; d],
        InitKind::Delta => {
            let truth = landscape
                .true_angle_indices()
                .ok_or(Error::MissingTrueAngles)?;
            let mut pmf = vec![0.0; d];
            pmf[grid.to_flat(truth)?] = 1.0;
            pmf
        }
        InitKind::Vonmises => {
            let guess = guess.ok_or(Error::MissingGuess)?;
            if guess.means.len() != grid.n_angles {
                return Err(Error::field(
                    "means_radians",
                    format!("expected {} means, got {}", grid.n_angles, guess.means.len()),
                ));
            }
            let marginals = guess
                .means
                .iter()
                .map(|&mu| vonmises_pmf(mu, guess.kappa, grid.bits))
                .collect::<Result<Vec<_>>>()?;
            (0..d)
                .map(|flat| {
                    marginals
                        .iter()
                        .enumerate()
                        .map(|(k, m)| m[grid.digit(flat, k)])
                        .product()
                })
                .collect()
        }
    };
    Ok(InitialDistribution { kind, pmf })
}

/// `sqrt(pmf)` on the system register with move and coin registers at zero.
pub fn amplitudes_from(init: &InitialDistribution, layout: &RegisterLayout) -> Result<StateVector> {
    if init.pmf.len() != layout.system_size() {
        return Err(Error::Domain(format!(
            "distribution over {} states does not match layout with {} system states",
            init.pmf.len(),
            layout.system_size()
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (x, &p) in init.pmf.iter().enumerate() {
        amps[layout.index(x, 0, 0)] = Complex64::new(p.sqrt(), 0.0);
    }
    Ok(StateVector::from_amplitudes(*layout, amps))
}

/// `1 - d(a, b) / pi` with `d` the wrapped angular distance.
pub fn precision(alpha_true: f64, alpha_guess: f64) -> f64 {
    let diff = (alpha_true - alpha_guess).abs().rem_euclid(TAU);
    let dist = diff.min(TAU - diff);
    (1.0 - dist / PI).clamp(0.0, 1.0)
}
