//! Time-to-solution, scaling fits, speedup extrapolation and the Welch test
//! used on hardware count data.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA_TARGET: f64 = 0.9;
pub const DEFAULT_T_MIN: usize = 2;
pub const DEFAULT_T_MAX: usize = 50;

/// Expected total steps to reach the target with confidence `delta_target`
/// when a length-`t` walk succeeds with probability `p`:
/// `t * ln(1 - delta_target) / ln(1 - p)`.
///
/// `p = 0` gives `+inf`; `p = 1` gives `t` (one attempt suffices).
pub fn tts(t: usize, p: f64, delta_target: f64) -> Result<f64> {
    if t < 1 {
        return Err(Error::Domain("tts requires t >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("success probability {p} outside [0, 1]")));
    }
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(Error::Domain(format!(
            "delta_target {delta_target} outside (0, 1)"
        )));
    }
    let t = t as f64;
    Ok(if p == 0.0 {
        f64::INFINITY
    } else if p == 1.0 {
        t
    } else if p == delta_target {
        t
    } else {
        t * (-delta_target).ln_1p() / (-p).ln_1p()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtsPoint {
    pub t: usize,
    pub p: f64,
    pub tts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtsCurve {
    pub delta_target: f64,
    pub points: Vec<TtsPoint>,
    pub min_tts: f64,
    pub argmin_t: usize,
}

impl TtsCurve {
    /// TTS at every step of `series` (entry `i` is step `i + 1`), minimized over
    /// `t_min..=t_max` clipped to the series length.
    pub fn from_series(series: &[f64], t_min: usize, t_max: usize, delta_target: f64) -> Result<Self> {
        let points = series
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                Ok(TtsPoint {
                    t: i + 1,
                    p,
                    tts: tts(i + 1, p, delta_target)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (min_tts, argmin_t) = min_tts(series, t_min, t_max, delta_target)?;
        Ok(TtsCurve {
            delta_target,
            points,
            min_tts,
            argmin_t,
        })
    }
}

/// Minimum TTS over `t_min..=t_max` (clipped to the series); ties go to the
/// smaller `t`. A series that never succeeds yields `(+inf, t_min)`.
pub fn min_tts(series: &[f64], t_min: usize, t_max: usize, delta_target: f64) -> Result<(f64, usize)> {
    let lo = t_min.max(1);
    let hi = t_max.min(series.len());
    if lo > hi {
        return Err(Error::EmptyRange {
            len: series.len(),
            t_min,
            t_max,
        });
    }
    let mut best = (f64::INFINITY, lo);
    for t in lo..=hi {
        let v = tts(t, series[t - 1], delta_target)?;
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log10 y` on `log10 x`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "log-log fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Domain(format!(
            "log-log fit needs finite positive coordinates, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ScalingFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// `log10` of the quantum speedup for a protein with `n_angles` angles at `bits`
/// bits, given the advantage exponent `e` and size exponent `r`:
/// `(1 - e) * n_angles * r * bits * log10(2)`.
pub fn extrapolate_speedup(e: f64, r: f64, n_angles: usize, bits: u32) -> Result<f64> {
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::Domain(format!("advantage exponent {e} outside (0, 1]")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("size exponent {r} must be positive")));
    }
    Ok((1.0 - e) * n_angles as f64 * r * bits as f64 * std::f64::consts::LOG10_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountGroup {
    pub successes: u64,
    pub trials: u64,
}

/// Hardware counts file: `{"a": {...}, "b": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub a: CountGroup,
    pub b: CountGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: f64,
}

/// Welch two-sample t-test on Bernoulli shots, two-sided.
pub fn two_proportion_test(
    successes_a: u64,
    trials_a: u64,
    successes_b: u64,
    trials_b: u64,
) -> Result<TTestResult> {
    for (s, n, name) in [(successes_a, trials_a, "a"), (successes_b, trials_b, "b")] {
        if n < 2 {
            return Err(Error::Domain(format!("group {name} needs at least 2 trials")));
        }
        if s > n {
            return Err(Error::Domain(format!(
                "group {name} has more successes ({s}) than trials ({n})"
            )));
        }
    }
    let group = |s: u64, n: u64| {
        let nf = n as f64;
        let mean = s as f64 / nf;
        // unbiased sample variance of a 0/1 sample
        let var = nf / (nf - 1.0) * mean * (1.0 - mean);
        (mean, var / nf, nf)
    };
    let (ma, va, na) = group(successes_a, trials_a);
    let (mb, vb, nb) = group(successes_b, trials_b);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Domain(e.to_string()))?;
    let p_value = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTestResult {
        t_statistic: t,
        p_value,
        degrees_of_freedom: df,
    })
}
