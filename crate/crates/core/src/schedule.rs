//! Inverse-temperature schedules `beta(t)` for 1-based walk steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 50.0;
pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_FIXED_BETA: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Fixed,
    Logarithmic,
    Linear,
    Geometric,
    Exponential,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Fixed => "fixed",
            ScheduleKind::Logarithmic => "logarithmic",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::Exponential => "exponential",
        }
    }

    fn needs_alpha(self) -> bool {
        matches!(self, ScheduleKind::Geometric | ScheduleKind::Exponential)
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fixed" => ScheduleKind::Fixed,
            "logarithmic" => ScheduleKind::Logarithmic,
            "linear" => ScheduleKind::Linear,
            "geometric" => ScheduleKind::Geometric,
            "exponential" => ScheduleKind::Exponential,
            other => {
                return Err(Error::field(
                    "schedule",
                    format!("unknown schedule `{other}`"),
                ))
            }
        })
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated annealing schedule.
///
/// For `fixed` the constant inverse temperature is stored in `beta1`.
/// `dimension` is only read by the exponential schedule and equals the
/// number of torsion angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub beta1: f64,
    pub alpha: f64,
    pub dimension: usize,
}

impl ScheduleSpec {
    pub fn new(kind: ScheduleKind, beta1: f64, alpha: f64, dimension: usize) -> Result<Self> {
        let spec = ScheduleSpec {
            kind,
            beta1,
            alpha,
            dimension,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fixed(beta: f64) -> Result<Self> {
        Self::new(ScheduleKind::Fixed, beta, DEFAULT_ALPHA, 1)
    }

    /// Checks parameters. A fixed schedule may run at `beta = 0`; annealed
    /// schedules need `beta1 > 0`.
    pub fn validate(&self) -> Result<()> {
        let beta_ok = if self.kind == ScheduleKind::Fixed {
            self.beta1 >= 0.0 && self.beta1.is_finite()
        } else {
            self.beta1 > 0.0 && self.beta1.is_finite()
        };
        if !beta_ok {
            return Err(Error::field(
                "beta1",
                format!("invalid value {} for {} schedule", self.beta1, self.kind),
            ));
        }
        if self.kind.needs_alpha() && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::field(
                "alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        if self.kind == ScheduleKind::Exponential && self.dimension < 1 {
            return Err(Error::field("dimension", "must be at least 1"));
        }
        Ok(())
    }

    pub fn beta_at(&self, t: usize) -> Result<f64> {
        if t < 1 {
            return Err(Error::Domain("schedule step t must be >= 1".into()));
        }
        Ok(self.beta_unchecked(t))
    }

    fn beta_unchecked(&self, t: usize) -> f64 {
        let tf = t as f64;
        match self.kind {
            ScheduleKind::Fixed => self.beta1,
            // log(t e) = 1 + ln t keeps beta(1) exact
            ScheduleKind::Logarithmic => self.beta1 * (1.0 + tf.ln()),
            ScheduleKind::Linear => self.beta1 * tf,
            ScheduleKind::Geometric => self.beta1 * self.alpha.powf(1.0 - tf),
            ScheduleKind::Exponential => {
                let x = (tf - 1.0).powf(1.0 / self.dimension as f64);
                self.beta1 * (self.alpha * x).exp()
            }
        }
    }

    /// `beta(1), ..., beta(steps)`.
    pub fn betas(&self, steps: usize) -> Vec<f64> {
        (1..=steps).map(|t| self.beta_unchecked(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ScheduleKind) -> ScheduleSpec {
        ScheduleSpec::new(kind, 50.0, 0.9, 2).unwrap()
    }

    #[test]
    fn worked_values() {
        assert_eq!(spec(ScheduleKind::Logarithmic).beta_at(1).unwrap(), 50.0);
        assert_eq!(spec(ScheduleKind::Linear).beta_at(3).unwrap(), 150.0);
        let g = spec(ScheduleKind::Geometric).beta_at(2).unwrap();
        assert!((g - 50.0 / 0.9).abs() < 1e-4);
        assert!((g - 55.5556).abs() < 1e-4);
        assert_eq!(spec(ScheduleKind::Exponential).beta_at(1).unwrap(), 50.0);
        assert_eq!(spec(ScheduleKind::Fixed).beta_at(77).unwrap(), 50.0);
    }

    #[test]
    fn all_start_at_beta1_and_are_monotone() {
        for kind in [
            ScheduleKind::Fixed,
            ScheduleKind::Logarithmic,
            ScheduleKind::Linear,
            ScheduleKind::Geometric,
            ScheduleKind::Exponential,
        ] {
            for (beta1, alpha, n) in [(50.0, 0.9, 2), (0.3, 0.1, 1), (7.0, 0.99, 5)] {
                let s = ScheduleSpec::new(kind, beta1, alpha, n).unwrap();
                assert_eq!(s.beta_at(1).unwrap(), beta1);
                let b = s.betas(10_000);
                assert!(b.windows(2).all(|w| w[1] >= w[0]), "{kind} not monotone");
            }
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(spec(ScheduleKind::Linear).beta_at(0).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::Geometric, 50.0, 1.0, 1).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::Exponential, 50.0, 0.0, 1).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::Linear, 0.0, 0.9, 1).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::Exponential, 1.0, 0.9, 0).is_err());
        assert!(ScheduleSpec::fixed(0.0).is_ok());
        assert!(ScheduleSpec::fixed(-1.0).is_err());
        assert!("cubic".parse::<ScheduleKind>().is_err());
    }
}
