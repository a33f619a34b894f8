//! The `metrofold` command line.
//!
//! Every subcommand accepts `--config FILE`, a JSON object whose keys are the
//! long flag names with underscores; flags given on the command line win.
//! Outputs go to `--out`, else to `$METROFOLD_OUT_DIR/<default name>`, else
//! to stdout. Files are written atomically. Errors are reported on stderr as
//! one JSON line `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::{
    min_tts, tts, two_proportion_test, CountsFile, DEFAULT_DELTA_TARGET, DEFAULT_T_MAX, DEFAULT_T_MIN,
};
use crate::cwalk::{
    build_transition_matrix_guarded, default_iterations, propagate_exact_guarded, sample_walks,
    DEFAULT_MAX_DENSE_DIM, DEFAULT_MAX_PROPAGATE_DIM,
};
use crate::error::{Error, Result};
use crate::init::{amplitudes_from, build_initial, AngleGuess, InitKind};
use crate::landscape::{generate_synthetic, load_landscape, EnergyLandscape, SyntheticKind};
use crate::qasm::{export_circuit, HardwareCircuitSpec};
use crate::qwalk::{check_qubits, run_with_betas, RegisterLayout, DEFAULT_MAX_QUBITS};
use crate::schedule::{ScheduleKind, ScheduleSpec, DEFAULT_ALPHA, DEFAULT_BETA1, DEFAULT_FIXED_BETA};
use crate::spectral::{
    bipartite_phase_mismatch, build_szegedy_bipartite_guarded, classical_gap,
    detailed_balance_residual, gibbs, spectrum_similarity_check, unitarity_error,
    DEFAULT_MAX_BIPARTITE_DIM,
};
use crate::suite::{compare_suite, ClassicalMethod, SuiteConfig};

pub const OUT_DIR_ENV: &str = "METROFOLD_OUT_DIR";

pub const DEFAULT_QASM_BETA_STEP1: f64 = 0.1;
pub const DEFAULT_QASM_BETA_STEP2: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(name = "metrofold", version, about = "Classical and coined quantum Metropolis walks on torsion-angle landscapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic landscape as JSON.
    GenLandscape(GenArgs),
    /// Print a landscape summary.
    Info(InfoArgs),
    /// Classical Metropolis walk: CSV of t, p, stderr, tts.
    RunClassical(RunArgs),
    /// Coined quantum walk: CSV of t, beta, p, tts.
    RunQuantum(RunArgs),
    /// Run a comparison suite: CSV rows plus a JSON report with fits.
    Compare(CompareArgs),
    /// Spectral gap report (JSON), optionally with the bipartite walk check.
    SpectralCheck(SpectralArgs),
    /// Emit the two-step, two-angle circuit as OpenQASM 2.0.
    ExportQasm(QasmArgs),
    /// Welch t-test on hardware success counts (JSON).
    TTest(TTestArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct LandscapeArgs {
    /// Landscape JSON file.
    #[arg(long)]
    landscape: Option<PathBuf>,
    /// Generate a synthetic landscape of this kind instead of loading a file.
    #[arg(long, conflicts_with = "landscape")]
    synthetic: Option<SyntheticKind>,
    #[arg(long)]
    n_angles: Option<usize>,
    #[arg(long)]
    bits: Option<u32>,
    /// Seed of the synthetic generator.
    #[arg(long)]
    landscape_seed: Option<u64>,
}

impl LandscapeArgs {
    fn load(&self) -> Result<EnergyLandscape> {
        match (&self.landscape, self.synthetic) {
            (Some(_), Some(_)) => Err(Error::Config(
                "--landscape and --synthetic are mutually exclusive".into(),
            )),
            (Some(path), None) => {
                if self.n_angles.is_some() || self.bits.is_some() || self.landscape_seed.is_some() {
                    return Err(Error::Config(
                        "--n-angles, --bits and --landscape-seed only apply to --synthetic".into(),
                    ));
                }
                load_landscape(path)
            }
            (None, Some(kind)) => {
                let k = self
                    .n_angles
                    .ok_or_else(|| Error::Config("--synthetic needs --n-angles".into()))?;
                let b = self
                    .bits
                    .ok_or_else(|| Error::Config("--synthetic needs --bits".into()))?;
                generate_synthetic(self.landscape_seed.unwrap_or(0), k, b, kind)
            }
            (None, None) => Err(Error::Config("need --landscape or --synthetic".into())),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct GenArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_angles: Option<usize>,
    #[arg(long)]
    bits: Option<u32>,
    /// uniform_random or dihedral_cosine.
    #[arg(long)]
    kind: Option<SyntheticKind>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct InfoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: LandscapeArgs,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: LandscapeArgs,
    /// fixed, logarithmic, linear, geometric or exponential.
    #[arg(long)]
    schedule: Option<ScheduleKind>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Constant inverse temperature; fixed schedule only.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// uniform, vonmises or delta.
    #[arg(long)]
    init: Option<InitKind>,
    #[arg(long)]
    kappa: Option<f64>,
    /// JSON `{"means_radians": [...], "kappa": k}` for von Mises starts.
    #[arg(long)]
    guess_file: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Exact propagation of the distribution (the default).
    #[arg(long, conflicts_with = "sample")]
    #[serde(default, skip_serializing_if = "is_false")]
    exact: bool,
    /// Monte Carlo trajectories.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    sample: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta_target: Option<f64>,
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    max_qubits: Option<u32>,
    /// Largest state space for exact classical propagation.
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct CompareArgs {
    /// Suite JSON file.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "sample")]
    #[serde(default, skip_serializing_if = "is_false")]
    exact: bool,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    sample: bool,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    delta_target: Option<f64>,
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    max_qubits: Option<u32>,
    /// CSV report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct SpectralArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: LandscapeArgs,
    #[arg(long)]
    beta: Option<f64>,
    /// Also build the bipartite walk on the doubled space and compare phases.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    bipartite: bool,
    #[arg(long)]
    max_dense_dim: Option<usize>,
    #[arg(long)]
    max_bipartite_dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct QasmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: LandscapeArgs,
    #[arg(long)]
    beta1_step: Option<f64>,
    #[arg(long)]
    beta2_step: Option<f64>,
    /// Skip group corrections within this many radians of pi.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct TTestArgs {
    /// JSON `{"a": {"successes": n, "trials": m}, "b": {...}}`.
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// Overlays command-line values on a JSON config file. Unset options and
/// unset switches leave the file's value in place.
fn merge_config<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let Value::Object(mut merged) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::Config(format!("{} must hold a JSON object", path.display())));
    };
    let Value::Object(cli) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialize to objects");
    };
    let known = known_keys::<T>()?;
    if let Some(bad) = merged.keys().find(|k| !known.contains(k)) {
        return Err(Error::Config(format!("unknown key `{bad}` in {}", path.display())));
    }
    for (k, v) in cli {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    Ok(serde_json::from_value(Value::Object(merged))?)
}

fn known_keys<T: DeserializeOwned + Serialize>() -> Result<Vec<String>> {
    // every field of the argument structs is optional, so `{}` deserializes
    let empty: T = serde_json::from_value(json!({}))?;
    let Value::Object(m) = serde_json::to_value(&empty)? else {
        unreachable!("argument structs serialize to objects");
    };
    let mut keys: Vec<String> = m.into_iter().map(|(k, _)| k).collect();
    // switches are only serialized when set
    let switches: T = serde_json::from_value(json!({"exact": true, "sample": true, "bipartite": true}))?;
    if let Value::Object(m) = serde_json::to_value(&switches)? {
        keys.extend(m.into_iter().filter(|(_, v)| v == &Value::Bool(true)).map(|(k, _)| k));
    }
    Ok(keys)
}

fn write_output(out: Option<&Path>, default_name: &str, content: &str) -> Result<()> {
    let target = match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)),
    };
    let Some(path) = target else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(content.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Error::io("<stdout>", e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let shown = path.display().to_string();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(shown.clone(), e))?;
    tmp.write_all(content.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| Error::io(shown.clone(), e))?;
    tmp.persist(&path).map_err(|e| Error::io(shown, e.error))?;
    Ok(())
}

fn config_line(prefix: &str, config: &impl Serialize) -> Result<String> {
    Ok(format!("{prefix} config: {}\n", serde_json::to_string(config)?))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Serialize)]
struct ResolvedRun {
    command: &'static str,
    landscape: String,
    landscape_source: LandscapeArgs,
    n_angles: usize,
    bits: u32,
    space_size: usize,
    schedule: ScheduleSpec,
    steps: usize,
    init: InitKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    guess: Option<AngleGuess>,
    delta_target: f64,
    t_min: usize,
    t_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<ClassicalMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_qubits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_dim: Option<usize>,
}

fn resolve_schedule(a: &RunArgs, n_angles: usize) -> Result<ScheduleSpec> {
    let kind = a.schedule.unwrap_or(ScheduleKind::Fixed);
    if kind == ScheduleKind::Fixed {
        if a.beta.is_some() && a.beta1.is_some() {
            return Err(Error::Config("give either --beta or --beta1 for a fixed schedule".into()));
        }
        if a.alpha.is_some() {
            return Err(Error::Config("--alpha has no effect on a fixed schedule".into()));
        }
        let beta = a.beta.or(a.beta1).unwrap_or(DEFAULT_FIXED_BETA);
        ScheduleSpec::fixed(beta)
    } else {
        if a.beta.is_some() {
            return Err(Error::Config(format!(
                "--beta only applies to the fixed schedule, not {kind}; use --beta1"
            )));
        }
        ScheduleSpec::new(
            kind,
            a.beta1.unwrap_or(DEFAULT_BETA1),
            a.alpha.unwrap_or(DEFAULT_ALPHA),
            n_angles,
        )
    }
}

fn resolve_guess(a: &RunArgs) -> Result<Option<AngleGuess>> {
    match (&a.guess_file, a.kappa) {
        (Some(path), kappa) => {
            let g = AngleGuess::load(path)?;
            Ok(Some(AngleGuess::new(g.means, kappa.unwrap_or(g.kappa))?))
        }
        (None, Some(_)) if a.init != Some(InitKind::Vonmises) => {
            Err(Error::Config("--kappa only applies to --init vonmises".into()))
        }
        (None, _) => Ok(None),
    }
}

fn check_range(delta: f64, t_min: usize, t_max: usize) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::field("delta_target", "must lie in (0, 1)"));
    }
    if t_min < 1 || t_min > t_max {
        return Err(Error::field("t_min", "need 1 <= t_min <= t_max"));
    }
    Ok(())
}

fn summary_line(series: &[f64], r: &ResolvedRun) -> Result<String> {
    match min_tts(series, r.t_min, r.t_max, r.delta_target) {
        Ok((v, t)) => Ok(format!("# min_tts: {} argmin_t: {t}\n", num(v))),
        Err(Error::EmptyRange { .. }) => Ok(String::new()),
        Err(e) => Err(e),
    }
}

fn run_walk(a: RunArgs, quantum: bool) -> Result<()> {
    let landscape = a.source.load()?;
    let schedule = resolve_schedule(&a, landscape.n_angles())?;
    let steps = a.steps.unwrap_or(DEFAULT_T_MAX);
    if steps < 1 {
        return Err(Error::field("steps", "must be at least 1"));
    }
    let delta_target = a.delta_target.unwrap_or(DEFAULT_DELTA_TARGET);
    let t_min = a.t_min.unwrap_or(DEFAULT_T_MIN);
    let t_max = a.t_max.unwrap_or(DEFAULT_T_MAX);
    check_range(delta_target, t_min, t_max)?;
    let method = if a.sample { ClassicalMethod::Sample } else { ClassicalMethod::Exact };
    let layout = RegisterLayout::for_grid(landscape.grid());
    if quantum {
        check_qubits(&layout, a.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS))?;
    } else if method == ClassicalMethod::Exact {
        let limit = a.max_dim.unwrap_or(DEFAULT_MAX_PROPAGATE_DIM);
        if landscape.space_size() > limit {
            return Err(Error::SizeGuard {
                what: "exact propagation",
                size: landscape.space_size(),
                limit,
            });
        }
    }
    let init_kind = a.init.unwrap_or(InitKind::Uniform);
    let guess = resolve_guess(&a)?;
    let init = build_initial(init_kind, &landscape, guess.as_ref())?;

    if quantum {
        if a.sample || a.exact || a.iterations.is_some() || a.max_dim.is_some() {
            return Err(Error::Config(
                "--exact, --sample, --iterations and --max-dim only apply to run-classical".into(),
            ));
        }
    } else {
        if a.max_qubits.is_some() {
            return Err(Error::Config("--max-qubits only applies to run-quantum".into()));
        }
        if method == ClassicalMethod::Exact && a.iterations.is_some() {
            return Err(Error::Config("--iterations requires --sample".into()));
        }
    }
    let iterations = (!quantum && method == ClassicalMethod::Sample)
        .then(|| a.iterations.unwrap_or_else(|| default_iterations(&landscape)));
    let resolved = ResolvedRun {
        command: if quantum { "run-quantum" } else { "run-classical" },
        landscape: landscape.name().to_string(),
        landscape_source: a.source.clone(),
        n_angles: landscape.n_angles(),
        bits: landscape.bits(),
        space_size: landscape.space_size(),
        schedule,
        steps,
        init: init_kind,
        guess,
        delta_target,
        t_min,
        t_max,
        method: (!quantum).then_some(method),
        iterations,
        seed: (!quantum && method == ClassicalMethod::Sample).then(|| a.seed.unwrap_or(0)),
        max_qubits: quantum.then(|| a.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS)),
        max_dim: (!quantum && method == ClassicalMethod::Exact)
            .then(|| a.max_dim.unwrap_or(DEFAULT_MAX_PROPAGATE_DIM)),
    };

    let mut out = config_line("#", &resolved)?;
    if quantum {
        let state = amplitudes_from(&init, &layout)?;
        let betas = schedule.betas(steps);
        let p = run_with_betas(&state, &landscape, &betas, resolved.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS))?;
        out += &summary_line(&p, &resolved)?;
        out += "t,beta,p,tts\n";
        for (i, (&b, &pt)) in betas.iter().zip(&p).enumerate() {
            let t = i + 1;
            out += &format!("{t},{},{},{}\n", num(b), num(pt), num(tts(t, pt.clamp(0.0, 1.0), delta_target)?));
        }
        write_output(a.out.as_deref(), "quantum.csv", &out)
    } else {
        let (p, stderr) = match iterations {
            Some(n) => {
                let s = sample_walks(&init, &landscape, &schedule, steps, n, resolved.seed.unwrap_or(0))?;
                (s.p, s.stderr)
            }
            None => {
                let p = propagate_exact_guarded(
                    &init,
                    &landscape,
                    &schedule,
                    steps,
                    resolved.max_dim.unwrap_or(DEFAULT_MAX_PROPAGATE_DIM),
                )?;
                let zeros = vec![0.0; p.len()];
                (p, zeros)
            }
        };
        out += &summary_line(&p, &resolved)?;
        out += "t,p,stderr,tts\n";
        for (i, (&pt, &se)) in p.iter().zip(&stderr).enumerate() {
            let t = i + 1;
            out += &format!("{t},{},{},{}\n", num(pt), num(se), num(tts(t, pt, delta_target)?));
        }
        write_output(a.out.as_deref(), "classical.csv", &out)
    }
}

fn gen_landscape(a: GenArgs) -> Result<()> {
    let k = a.n_angles.ok_or_else(|| Error::Config("--n-angles is required".into()))?;
    let b = a.bits.ok_or_else(|| Error::Config("--bits is required".into()))?;
    let l = generate_synthetic(a.seed.unwrap_or(0), k, b, a.kind.unwrap_or(SyntheticKind::DihedralCosine))?;
    let mut text = l.to_json_string()?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_output(a.out.as_deref(), &format!("{}.json", l.name()), &text)
}

fn info(a: InfoArgs) -> Result<()> {
    let l = a.source.load()?;
    let ground = l.ground_config();
    let tuple = |v: &[usize]| {
        format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
    };
    let mut s = String::new();
    s += &format!("name={}\n", l.name());
    s += &format!("K={}\n", l.n_angles());
    s += &format!("b={}\n", l.bits());
    s += &format!("space={}\n", l.space_size());
    s += &format!("moves={}\n", l.move_set().len());
    s += &format!("ground={}\n", tuple(&ground.indices));
    s += &format!("ground_flat={}\n", ground.flat);
    s += &format!("ground_energy={}\n", num(l.energy(ground.flat)));
    let (lo, hi) = l
        .energies()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    s += &format!("energy_range=[{}, {}]\n", num(lo), num(hi));
    s += &format!(
        "true_angle_indices={}\n",
        l.true_angle_indices().map_or("none".to_string(), tuple)
    );
    write_output(None, "", &s)
}

fn compare(a: CompareArgs) -> Result<()> {
    let path = a.suite.as_ref().ok_or_else(|| Error::Config("--suite is required".into()))?;
    let mut cfg = SuiteConfig::load(path)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.sample {
        cfg.classical = ClassicalMethod::Sample;
    }
    if a.exact {
        cfg.classical = ClassicalMethod::Exact;
    }
    if a.iterations.is_some() {
        cfg.iterations = a.iterations;
    }
    if let Some(d) = a.delta_target {
        cfg.delta_target = d;
    }
    if let Some(t) = a.t_min {
        cfg.t_min = t;
    }
    if let Some(t) = a.t_max {
        cfg.t_max = t;
    }
    if let Some(q) = a.max_qubits {
        cfg.max_qubits = q;
    }
    if cfg.iterations.is_some() && cfg.classical == ClassicalMethod::Exact {
        return Err(Error::Config("iterations require sampled classical runs".into()));
    }
    let report = compare_suite(&cfg)?;
    let csv = config_line("#", &cfg)? + &report.to_csv()?;
    let mut json_report = serde_json::to_value(&report)?;
    if let Value::Object(m) = &mut json_report {
        m.insert("config".into(), serde_json::to_value(&cfg)?);
    }
    let json_text = serde_json::to_string_pretty(&json_report)? + "\n";
    write_output(a.out.as_deref(), "compare.csv", &csv)?;
    let json_path = a
        .json_out
        .clone()
        .or_else(|| a.out.as_ref().map(|p| p.with_extension("json")));
    if json_path.is_some() || std::env::var_os(OUT_DIR_ENV).is_some() {
        write_output(json_path.as_deref(), "compare.json", &json_text)?;
    }
    Ok(())
}

fn spectral_check(a: SpectralArgs) -> Result<()> {
    let l = a.source.load()?;
    let beta = a.beta.unwrap_or(DEFAULT_FIXED_BETA);
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::field("beta", "must be finite and >= 0"));
    }
    let max_dense = a.max_dense_dim.unwrap_or(DEFAULT_MAX_DENSE_DIM);
    let max_bip = a.max_bipartite_dim.unwrap_or(DEFAULT_MAX_BIPARTITE_DIM);
    let w = build_transition_matrix_guarded(&l, beta, max_dense)?;
    let pi = gibbs(&l, beta);
    let report = classical_gap(&w)?;
    let (residual, i, j) = detailed_balance_residual(&w, &pi);
    let (similarity, similarity_error) = match spectrum_similarity_check(&w, &pi) {
        Ok(ok) => (Some(ok), None),
        Err(e @ Error::ZeroGibbsWeight { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let bipartite = if a.bipartite {
        let walk = build_szegedy_bipartite_guarded(&w, &pi, max_bip)?;
        Some(json!({
            "dimension": walk.nrows(),
            "unitarity_error": unitarity_error(&walk),
            "phase_mismatch": bipartite_phase_mismatch(&report.eigenvalues, &walk)?,
        }))
    } else {
        None
    };
    let config = json!({
        "command": "spectral-check",
        "landscape": l.name(),
        "landscape_source": a.source,
        "beta": beta,
        "bipartite": a.bipartite,
        "max_dense_dim": max_dense,
        "max_bipartite_dim": max_bip,
    });
    let mut doc = Map::new();
    doc.insert("config".into(), config);
    doc.insert("report".into(), serde_json::to_value(&report)?);
    doc.insert("lambda1".into(), json!(report.lambda1()));
    doc.insert("bounds".into(), json!({"upper": report.bounds().0, "lower": report.bounds().1}));
    doc.insert(
        "detailed_balance".into(),
        json!({"max_residual": residual, "i": i, "j": j}),
    );
    doc.insert("similarity_check".into(), json!(similarity));
    if let Some(e) = similarity_error {
        doc.insert("similarity_check_error".into(), json!(e));
    }
    doc.insert("bipartite".into(), bipartite.unwrap_or(Value::Null));
    let text = serde_json::to_string_pretty(&Value::Object(doc))? + "\n";
    write_output(a.out.as_deref(), "spectral.json", &text)
}

fn export_qasm(a: QasmArgs) -> Result<()> {
    let l = a.source.load()?;
    let pair = (
        a.beta1_step.unwrap_or(DEFAULT_QASM_BETA_STEP1),
        a.beta2_step.unwrap_or(DEFAULT_QASM_BETA_STEP2),
    );
    let tolerance = a.tolerance.unwrap_or(0.0);
    let spec = HardwareCircuitSpec::new(l, pair, tolerance)?;
    let circuit = export_circuit(&spec)?;
    let config = json!({
        "command": "export-qasm",
        "landscape": spec.landscape.name(),
        "landscape_source": a.source,
        "beta1_step": pair.0,
        "beta2_step": pair.1,
        "tolerance": tolerance,
    });
    let cfg = config_line("//", &config)?;
    let mut lines = circuit.text.splitn(3, '\n');
    let (head, include, rest) = (lines.next().unwrap_or(""), lines.next().unwrap_or(""), lines.next().unwrap_or(""));
    let text = format!("{head}\n{include}\n{cfg}{rest}");
    write_output(a.out.as_deref(), "circuit.qasm", &text)
}

fn t_test(a: TTestArgs) -> Result<()> {
    let path = a.counts.as_ref().ok_or_else(|| Error::Config("--counts is required".into()))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let counts: CountsFile = serde_json::from_str(&text)?;
    let r = two_proportion_test(counts.a.successes, counts.a.trials, counts.b.successes, counts.b.trials)?;
    let doc = json!({
        "config": {"command": "t-test", "counts": path},
        "proportion_a": counts.a.successes as f64 / counts.a.trials as f64,
        "proportion_b": counts.b.successes as f64 / counts.b.trials as f64,
        "t_statistic": r.t_statistic,
        "p_value": r.p_value,
        "degrees_of_freedom": r.degrees_of_freedom,
    });
    write_output(a.out.as_deref(), "t_test.json", &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenLandscape(a) => gen_landscape(merge_config(&a, a.config.as_deref())?),
        Command::Info(a) => info(merge_config(&a, a.config.as_deref())?),
        Command::RunClassical(a) => run_walk(merge_config(&a, a.config.as_deref())?, false),
        Command::RunQuantum(a) => run_walk(merge_config(&a, a.config.as_deref())?, true),
        Command::Compare(a) => compare(merge_config(&a, a.config.as_deref())?),
        Command::SpectralCheck(a) => spectral_check(merge_config(&a, a.config.as_deref())?),
        Command::ExportQasm(a) => export_qasm(merge_config(&a, a.config.as_deref())?),
        Command::TTest(a) => t_test(merge_config(&a, a.config.as_deref())?),
    }
}

fn report_error(kind: &str, message: &str) {
    let line = json!({"error": kind, "message": message});
    eprintln!("{line}");
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 on success, 1 on a runtime error and 2
/// on a usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let message = e
                .to_string()
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            report_error("usage", &message);
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            1
        }
    }
}
