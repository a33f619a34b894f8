//! Comparison suites: classical versus quantum minimum TTS over many
//! landscapes, with log-log fits across instances.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{loglog_fit, min_tts, ScalingFit, DEFAULT_DELTA_TARGET, DEFAULT_T_MAX, DEFAULT_T_MIN};
use crate::cwalk::{default_iterations, propagate_exact, sample_walks};
use crate::error::{Error, Result};
use crate::init::{amplitudes_from, build_initial, AngleGuess, InitKind, DEFAULT_KAPPA};
use crate::landscape::{generate_synthetic, load_landscape, EnergyLandscape, SyntheticKind};
use crate::qwalk::{check_qubits, run_with_betas, RegisterLayout, DEFAULT_MAX_QUBITS};
use crate::schedule::{ScheduleKind, ScheduleSpec, DEFAULT_ALPHA, DEFAULT_BETA1, DEFAULT_FIXED_BETA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum LandscapeSource {
    File {
        path: PathBuf,
    },
    Synthetic {
        seed: u64,
        n_angles: usize,
        bits: u32,
        kind: SyntheticKind,
    },
}

impl LandscapeSource {
    pub fn load(&self) -> Result<EnergyLandscape> {
        match self {
            LandscapeSource::File { path } => load_landscape(path),
            LandscapeSource::Synthetic {
                seed,
                n_angles,
                bits,
                kind,
            } => generate_synthetic(*seed, *n_angles, *bits, *kind),
        }
    }
}

/// Schedule as written in a suite file. Missing `beta1` defaults to 1000 for
/// `fixed` and 50 otherwise; missing `dimension` defaults to the angle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

impl ScheduleConfig {
    pub fn resolve(&self, n_angles: usize) -> Result<ScheduleSpec> {
        let beta1 = self.beta1.unwrap_or(if self.kind == ScheduleKind::Fixed {
            DEFAULT_FIXED_BETA
        } else {
            DEFAULT_BETA1
        });
        ScheduleSpec::new(
            self.kind,
            beta1,
            self.alpha.unwrap_or(DEFAULT_ALPHA),
            self.dimension.unwrap_or(n_angles),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub kind: InitKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means_radians: Option<Vec<f64>>,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            kind: InitKind::Uniform,
            kappa: None,
            means_radians: None,
        }
    }
}

impl InitConfig {
    pub fn guess(&self) -> Result<Option<AngleGuess>> {
        self.means_radians
            .as_ref()
            .map(|m| AngleGuess::new(m.clone(), self.kappa.unwrap_or(DEFAULT_KAPPA)))
            .transpose()
    }
}

fn default_steps() -> usize {
    DEFAULT_T_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteInstance {
    /// Defaults to the zero-padded position in the suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub landscape: LandscapeSource,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMethod {
    #[default]
    Exact,
    Sample,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA_TARGET
}
fn default_t_min() -> usize {
    DEFAULT_T_MIN
}
fn default_t_max() -> usize {
    DEFAULT_T_MAX
}
fn default_max_qubits() -> u32 {
    DEFAULT_MAX_QUBITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub instances: Vec<SuiteInstance>,
    #[serde(default = "default_delta")]
    pub delta_target: f64,
    #[serde(default = "default_t_min")]
    pub t_min: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default)]
    pub classical: ClassicalMethod,
    /// Monte Carlo trajectories per instance; defaults to `500 * space_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: u32,
}

impl SuiteConfig {
    pub fn new(instances: Vec<SuiteInstance>) -> Self {
        SuiteConfig {
            instances,
            delta_target: DEFAULT_DELTA_TARGET,
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            classical: ClassicalMethod::Exact,
            iterations: None,
            seed: 0,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_target > 0.0 && self.delta_target < 1.0) {
            return Err(Error::field("delta_target", "must lie in (0, 1)"));
        }
        if self.t_min < 1 || self.t_min > self.t_max {
            return Err(Error::field("t_min", "need 1 <= t_min <= t_max"));
        }
        if self.iterations == Some(0) {
            return Err(Error::field("iterations", "must be at least 1"));
        }
        let mut ids: Vec<String> = (0..self.instances.len()).map(|i| self.instance_id(i)).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::field("id", format!("duplicate instance id `{}`", w[0])));
        }
        Ok(())
    }

    pub fn instance_id(&self, index: usize) -> String {
        self.instances[index]
            .id
            .clone()
            .unwrap_or_else(|| format!("{index:04}"))
    }
}

/// One instance's classical and quantum ground-probability series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSeries {
    pub instance_id: String,
    pub n_angles: usize,
    pub bits: u32,
    pub space_size: usize,
    pub schedule: String,
    pub init: String,
    pub classical: Vec<f64>,
    pub quantum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRow {
    pub instance_id: String,
    #[serde(rename = "K")]
    pub n_angles: usize,
    pub bits: u32,
    pub space_size: usize,
    pub schedule: String,
    pub init: String,
    pub classical_min_tts: f64,
    pub classical_argmin_t: usize,
    pub quantum_min_tts: f64,
    pub quantum_argmin_t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceFailure {
    pub instance_id: String,
    pub error: &'static str,
    pub message: String,
}

/// Fits across instances; each is absent when fewer than two instances have
/// finite, positive values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteFits {
    /// `log10(quantum min TTS)` against `log10(classical min TTS)`.
    pub advantage: Option<ScalingFit>,
    /// `log10(classical min TTS)` against `log10(space size)`.
    pub size: Option<ScalingFit>,
    pub advantage_slope: Option<f64>,
    pub advantage_intercept: Option<f64>,
    pub size_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub delta_target: f64,
    pub t_min: usize,
    pub t_max: usize,
    pub rows: Vec<InstanceRow>,
    pub failures: Vec<InstanceFailure>,
    pub fits: SuiteFits,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "instance_id",
    "K",
    "bits",
    "space_size",
    "schedule",
    "init",
    "classical_min_tts",
    "classical_argmin_t",
    "quantum_min_tts",
    "quantum_argmin_t",
];

impl SuiteReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.instance_id.clone(),
                r.n_angles.to_string(),
                r.bits.to_string(),
                r.space_size.to_string(),
                r.schedule.clone(),
                r.init.clone(),
                format!("{:?}", r.classical_min_tts),
                r.classical_argmin_t.to_string(),
                format!("{:?}", r.quantum_min_tts),
                r.quantum_argmin_t.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn fit_positive(points: impl Iterator<Item = (f64, f64)>) -> Option<ScalingFit> {
    let pts: Vec<_> = points
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        .collect();
    loglog_fit(&pts).ok()
}

/// Computes both walks for one instance.
pub fn run_instance(cfg: &SuiteConfig, index: usize) -> Result<InstanceSeries> {
    let inst = &cfg.instances[index];
    let landscape = inst.landscape.load()?;
    let schedule = inst.schedule.resolve(landscape.n_angles())?;
    if inst.steps < 1 {
        return Err(Error::field("steps", "must be at least 1"));
    }
    let layout = RegisterLayout::for_grid(landscape.grid());
    check_qubits(&layout, cfg.max_qubits)?;
    let guess = inst.init.guess()?;
    let init = build_initial(inst.init.kind, &landscape, guess.as_ref())?;
    let classical = match cfg.classical {
        ClassicalMethod::Exact => propagate_exact(&init, &landscape, &schedule, inst.steps)?,
        ClassicalMethod::Sample => {
            let iterations = cfg.iterations.unwrap_or_else(|| default_iterations(&landscape));
            sample_walks(
                &init,
                &landscape,
                &schedule,
                inst.steps,
                iterations,
                cfg.seed.wrapping_add(index as u64),
            )?
            .p
        }
    };
    let state = amplitudes_from(&init, &layout)?;
    let quantum = run_with_betas(&state, &landscape, &schedule.betas(inst.steps), cfg.max_qubits)?;
    Ok(InstanceSeries {
        instance_id: cfg.instance_id(index),
        n_angles: landscape.n_angles(),
        bits: landscape.bits(),
        space_size: landscape.space_size(),
        schedule: schedule.kind.to_string(),
        init: init.kind.to_string(),
        classical,
        quantum,
    })
}

/// Builds rows and fits from per-instance results. Rows and failures are
/// sorted by instance id.
pub fn assemble_report(
    results: Vec<std::result::Result<InstanceSeries, (String, Error)>>,
    delta_target: f64,
    t_min: usize,
    t_max: usize,
) -> SuiteReport {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for res in results {
        let row = res.and_then(|s| {
            let c = min_tts(&s.classical, t_min, t_max, delta_target);
            let q = min_tts(&s.quantum, t_min, t_max, delta_target);
            match (c, q) {
                (Ok(c), Ok(q)) => Ok(InstanceRow {
                    instance_id: s.instance_id,
                    n_angles: s.n_angles,
                    bits: s.bits,
                    space_size: s.space_size,
                    schedule: s.schedule,
                    init: s.init,
                    classical_min_tts: c.0,
                    classical_argmin_t: c.1,
                    quantum_min_tts: q.0,
                    quantum_argmin_t: q.1,
                }),
                (Err(e), _) | (_, Err(e)) => Err((s.instance_id, e)),
            }
        });
        match row {
            Ok(r) => rows.push(r),
            Err((id, e)) => failures.push(InstanceFailure {
                instance_id: id,
                error: e.kind(),
                message: e.to_string(),
            }),
        }
    }
    rows.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    failures.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let advantage = fit_positive(rows.iter().map(|r| (r.classical_min_tts, r.quantum_min_tts)));
    let size = fit_positive(rows.iter().map(|r| (r.space_size as f64, r.classical_min_tts)));
    SuiteReport {
        delta_target,
        t_min,
        t_max,
        rows,
        failures,
        fits: SuiteFits {
            advantage_slope: advantage.as_ref().map(|f| f.slope),
            advantage_intercept: advantage.as_ref().map(|f| f.intercept),
            size_slope: size.as_ref().map(|f| f.slope),
            advantage,
            size,
        },
    }
}

/// Runs every instance in parallel; failing instances are reported, not fatal.
pub fn compare_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let results = (0..cfg.instances.len())
        .into_par_iter()
        .map(|i| run_instance(cfg, i).map_err(|e| (cfg.instance_id(i), e)))
        .collect();
    Ok(assemble_report(results, cfg.delta_target, cfg.t_min, cfg.t_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(seed: u64, k: usize, b: u32) -> SuiteInstance {
        SuiteInstance {
            id: None,
            landscape: LandscapeSource::Synthetic {
                seed,
                n_angles: k,
                bits: b,
                kind: SyntheticKind::DihedralCosine,
            },
            schedule: ScheduleConfig {
                kind: ScheduleKind::Geometric,
                beta1: None,
                alpha: None,
                dimension: None,
            },
            init: InitConfig::default(),
            steps: 20,
        }
    }

    #[test]
    fn single_instance_has_no_fit() {
        let r = compare_suite(&SuiteConfig::new(vec![synth(0, 2, 1)])).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.failures.is_empty());
        assert!(r.fits.advantage.is_none() && r.fits.size.is_none());
        assert!(r.fits.advantage_slope.is_none());
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(json["fits"]["advantage_slope"].is_null());
    }

    #[test]
    fn identical_series_give_unit_slope() {
        let results = (0..5)
            .map(|i| {
                let p = 0.02 * (i + 1) as f64;
                Ok(InstanceSeries {
                    instance_id: format!("{i}"),
                    n_angles: 2,
                    bits: 1 + i as u32,
                    space_size: 4usize << (2 * i),
                    schedule: "fixed".into(),
                    init: "uniform".into(),
                    classical: vec![p; 10],
                    quantum: vec![p; 10],
                })
            })
            .collect();
        let r = assemble_report(results, 0.9, 2, 50);
        assert!((r.fits.advantage_slope.unwrap() - 1.0).abs() < 1e-9);
        assert!(r.fits.advantage_intercept.unwrap().abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_sorted() {
        let cfg = SuiteConfig::new((0..6).map(|s| synth(s, 2, 1 + (s % 2) as u32)).collect());
        let a = compare_suite(&cfg).unwrap();
        let b = compare_suite(&cfg).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let ids: Vec<_> = a.rows.iter().map(|r| r.instance_id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert!(a.fits.advantage.is_some());
        let header = a.to_csv().unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, CSV_COLUMNS.join(","));
    }

    #[test]
    fn failures_are_recorded() {
        let mut bad = synth(1, 2, 1);
        bad.init = InitConfig {
            kind: InitKind::Vonmises,
            kappa: None,
            means_radians: None,
        };
        let mut missing = synth(2, 2, 1);
        missing.landscape = LandscapeSource::File {
            path: "/nonexistent/landscape.json".into(),
        };
        let cfg = SuiteConfig::new(vec![synth(0, 2, 1), bad, missing]);
        let r = compare_suite(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.failures.len(), 2);
        assert_eq!(r.failures[0].error, "missing_guess");
        assert_eq!(r.failures[1].error, "io");
    }

    #[test]
    fn sampled_classical_agrees_with_exact() {
        let mut cfg = SuiteConfig::new(vec![synth(3, 2, 1)]);
        let exact = run_instance(&cfg, 0).unwrap();
        cfg.classical = ClassicalMethod::Sample;
        cfg.seed = 5;
        let sampled = run_instance(&cfg, 0).unwrap();
        let n = default_iterations(&cfg.instances[0].landscape.load().unwrap()) as f64;
        for (e, s) in exact.classical.iter().zip(&sampled.classical) {
            let sigma = (e * (1.0 - e) / n).sqrt().max(1.0 / n);
            assert!((e - s).abs() <= 4.0 * sigma, "{e} vs {s}");
        }
        assert_eq!(exact.quantum, sampled.quantum);
    }

    #[test]
    fn parses_suite_json() {
        let text = r#"{"instances": [
            {"landscape": {"source": "synthetic", "seed": 0, "n_angles": 2, "bits": 1, "kind": "dihedral_cosine"},
             "schedule": {"kind": "fixed", "beta1": 0.5},
             "init": {"kind": "uniform"}, "steps": 5},
            {"id": "named", "landscape": {"source": "file", "path": "x.json"},
             "schedule": {"kind": "exponential"}}
        ], "delta_target": 0.9}"#;
        let cfg = SuiteConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.instance_id(0), "0000");
        assert_eq!(cfg.instance_id(1), "named");
        assert_eq!(cfg.instances[1].steps, 50);
        let s = cfg.instances[1].schedule.resolve(3).unwrap();
        assert_eq!((s.beta1, s.alpha, s.dimension), (50.0, 0.9, 3));
        assert_eq!(cfg.instances[0].schedule.resolve(2).unwrap().beta1, 0.5);
        assert!(SuiteConfig::from_json_str(r#"{"instances": [], "bogus": 1}"#).is_err());
    }
}
