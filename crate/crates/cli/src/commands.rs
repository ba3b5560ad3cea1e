//! Subcommand configs and drivers.
//!
//! Every command has a serializable config with desk-scale defaults. A JSON
//! file given with `--config` replaces the defaults, and explicit flags then
//! override individual fields. The merged config is what the provenance header
//! records.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use tpuzzle_core::diagnostics::{hardness_experiment, single_block_scan, HardnessConfig, SingleBlockConfig, SINGLE_BLOCK_MAX_QUBITS};
use tpuzzle_core::landscape::{concentration_experiment, heatmap_experiment, ConcentrationConfig, HeatmapConfig};
use tpuzzle_core::optimizer::robustness::{robustness_experiment, RobustnessConfig};
use tpuzzle_core::optimizer::scaling::{scaling_experiment, Method, ScalingConfig};
use tpuzzle_core::optimizer::{hill_climb, HillClimbOptions, NoisySchedule};
use tpuzzle_core::qsvt::{assemble_qsvt, build_block_encoding, build_commuting_basis, verify_cayley_equivalence, VerifyOptions};
use tpuzzle_core::rng::{label, stream};
use tpuzzle_core::{build_instance, build_rotation_instance, Bitstring, InstanceParams, LossKind, PuzzleInstance, RotationParams};

use crate::plot::plot_file;
use crate::table::{num, Provenance, Table};
use crate::Common;

/// Bad flags or config values.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn init_workers(workers: usize) {
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
}

macro_rules! merge {
    ($cfg:ident, $args:ident; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $args.$field.clone() { $cfg.$field = v; } )*
    };
}

fn out_dir(common: &Common) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    s.parse().map_err(|e: tpuzzle_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: tpuzzle_core::Error| e.to_string())
}

fn summary_cells(s: &tpuzzle_core::stats::Summary) -> Vec<String> {
    [s.mean, s.std, s.min, s.q25, s.median, s.q75, s.max].iter().map(|&x| num(x)).collect()
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub n: Option<usize>,
    /// Defaults to `n`.
    #[serde(rename = "D")]
    pub d: Option<usize>,
    pub beta_w: f64,
    pub beta_v: f64,
    /// Defaults to `4 n^2`.
    pub k: Option<usize>,
    pub seed: u64,
    pub s_star: Option<Bitstring>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self { n: None, d: None, beta_w: 0.2, beta_v: 0.2, k: None, seed: 0, s_star: None }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    /// Number of qubits.
    #[arg(long, required_unless_present = "config")]
    n: Option<usize>,
    /// Number of layers (hidden bits); defaults to n.
    #[arg(long = "depth", short = 'D')]
    d: Option<usize>,
    /// Sets both beta_w and beta_v.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    beta_w: Option<f64>,
    #[arg(long)]
    beta_v: Option<f64>,
    /// Pauli terms per Hermitian; defaults to 4 n^2.
    #[arg(long)]
    k: Option<usize>,
    /// Hidden bitstring, most significant bit first.
    #[arg(long)]
    s_star: Option<Bitstring>,
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg: GenerateConfig = load_config(a.common.config.as_deref())?;
    if let Some(b) = a.beta {
        cfg.beta_w = b;
        cfg.beta_v = b;
    }
    if let Some(n) = a.n {
        cfg.n = Some(n);
    }
    for (slot, v) in [(&mut cfg.d, a.d), (&mut cfg.k, a.k)] {
        if v.is_some() {
            *slot = v;
        }
    }
    merge!(cfg, a; beta_w, beta_v);
    if let Some(s) = a.s_star {
        cfg.s_star = Some(s);
    }
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let n = cfg.n.ok_or_else(|| UsageError("--n is required (flag or config)".into()))?;
    let params = InstanceParams {
        n,
        d: cfg.d.unwrap_or(n),
        beta_w: cfg.beta_w,
        beta_v: cfg.beta_v,
        k: cfg.k.unwrap_or(4 * n * n),
        seed: cfg.seed,
    };
    let inst = build_instance(&params, cfg.s_star.clone())?;
    let path = a.common.out.unwrap_or_else(|| PathBuf::from("instance.json"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    inst.save(&path)?;
    eprintln!("wrote {} (n={}, D={}, s*={})", path.display(), inst.n, inst.d, inst.s_star);
    Ok(())
}

// ------------------------------------------------------------------- solve

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Solve a stored instance instead of generating a sweep.
    pub instance: Option<PathBuf>,
    pub sizes: Vec<usize>,
    pub instances: usize,
    /// Random starts per instance for hill climbing.
    pub starts: usize,
    /// Trials per instance for random search.
    pub trials: usize,
    pub methods: Vec<Method>,
    pub beta: f64,
    pub k_factor: usize,
    pub loss: LossKind,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            instance: None,
            sizes: vec![4, 6, 8, 10],
            instances: 20,
            starts: 1,
            trials: 20,
            methods: vec![Method::Hill, Method::Random],
            beta: 0.2,
            k_factor: 4,
            loss: LossKind::Fidelity,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Instance JSON written by `generate`.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Square sizes n = D, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// hill, random, or both (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k_factor: Option<usize>,
    /// fidelity or parity.
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    #[arg(long)]
    tol: Option<f64>,
}

const RUN_COLUMNS: [&str; 9] = ["method", "n", "instance", "instance_seed", "run", "f_evals", "sweeps", "final_loss", "success"];

pub fn solve(a: SolveArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: SolveConfig = load_config(a.common.config.as_deref())?;
    if a.instance.is_some() {
        cfg.instance = a.instance.clone();
    }
    merge!(cfg, a; sizes, instances, starts, trials, methods, beta, k_factor, loss, tol);
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let dir = out_dir(&a.common);
    let prov = Provenance::new("solve", &cfg, cfg.seed)?;
    if let Some(path) = &cfg.instance {
        return solve_instance(&cfg, path, &dir, &prov);
    }
    if cfg.methods.is_empty() || cfg.sizes.is_empty() {
        return Err(UsageError("solve needs at least one size and one method".into()).into());
    }
    let mut runs = Table::new(&RUN_COLUMNS);
    let mut summary = Table::new(&[
        "method",
        "n",
        "runs",
        "f_evals_mean",
        "f_evals_std",
        "f_evals_min",
        "f_evals_q25",
        "f_evals_median",
        "f_evals_q75",
        "f_evals_max",
        "success_rate",
        "reference",
    ]);
    for &method in &cfg.methods {
        let sc = ScalingConfig {
            sizes: cfg.sizes.clone(),
            instances: cfg.instances,
            runs_per_instance: if method == Method::Hill { cfg.starts } else { cfg.trials },
            beta: cfg.beta,
            k_factor: cfg.k_factor,
            seed: cfg.seed,
            method,
            loss: cfg.loss,
            tol: cfg.tol,
        };
        let (records, rows) = scaling_experiment(&sc)?;
        for r in &records {
            runs.push(vec![
                method.name().into(),
                r.n.to_string(),
                r.instance.to_string(),
                r.instance_seed.to_string(),
                r.run.to_string(),
                r.f_evals.to_string(),
                r.sweeps.to_string(),
                num(r.final_loss),
                r.success.to_string(),
            ]);
        }
        for r in &rows {
            let mut row = vec![method.name().into(), r.n.to_string(), r.f_evals.count.to_string()];
            row.extend(summary_cells(&r.f_evals));
            row.push(num(r.success_rate));
            row.push(num(r.reference));
            summary.push(row);
            eprintln!(
                "{:>6} n={:<2} mean f_evals {:>9.2} (reference {:>9.2}), success {:.2}",
                method.name(),
                r.n,
                r.f_evals.mean,
                r.reference,
                r.success_rate
            );
        }
        if method == Method::Hill && rows.len() >= 2 {
            let (a2, b1) = quadratic_fit(&rows.iter().map(|r| (r.n as f64, r.f_evals.mean)).collect::<Vec<_>>());
            eprintln!("  hill fit: f_evals = {a2:.4} n^2 + {b1:+.4} n   (reference 0.5 n^2 - 0.25 n)");
        }
    }
    runs.write(&dir.join("solve_runs.csv"), &prov)?;
    summary.write(&dir.join("solve_summary.csv"), &prov)?;
    Ok(())
}

/// Least squares for `y = a n^2 + b n`.
fn quadratic_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let (mut s4, mut s3, mut s2, mut y2, mut y1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, y) in pts {
        s4 += n.powi(4);
        s3 += n.powi(3);
        s2 += n * n;
        y2 += y * n * n;
        y1 += y * n;
    }
    let det = s4 * s2 - s3 * s3;
    ((y2 * s2 - s3 * y1) / det, (s4 * y1 - s3 * y2) / det)
}

fn solve_instance(cfg: &SolveConfig, path: &Path, dir: &Path, prov: &Provenance) -> Result<()> {
    let inst = PuzzleInstance::load(path)?;
    let puzzle = inst.compile()?;
    let mut ev = puzzle.evaluator(cfg.loss);
    let mut traces = Table::new(&["run", "sweep", "current_loss", "f_evals_cumulative", "bitstring_hex"]);
    let mut runs = Table::new(&RUN_COLUMNS);
    for run in 0..cfg.starts {
        let s0 = Bitstring::random(inst.d, &mut stream(cfg.seed, &[label::START, run as u64]));
        let mut t = hill_climb(|s| ev.loss(s), &s0, HillClimbOptions { tol: cfg.tol, ..Default::default() })?;
        let ok = t.judge(&inst.s_star);
        for r in &t.sweeps {
            traces.push(vec![run.to_string(), r.sweep.to_string(), num(r.loss), r.f_evals.to_string(), r.bitstring.to_hex()]);
        }
        runs.push(vec![
            "hill".into(),
            inst.n.to_string(),
            "0".into(),
            inst.seed.to_string(),
            run.to_string(),
            t.f_evals.to_string(),
            t.sweep_count().to_string(),
            num(t.final_loss()),
            ok.to_string(),
        ]);
        eprintln!("run {run}: {} sweeps, {} evaluations, final {} ({})", t.sweep_count(), t.f_evals, t.final_string(), if ok { "solved" } else { "not solved" });
    }
    traces.write(&dir.join("solve_traces.csv"), prov)?;
    runs.write(&dir.join("solve_runs.csv"), prov)
}

// ------------------------------------------------------------- noisy-solve

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoisyConfig {
    pub sizes: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub runs: usize,
    pub beta: f64,
    pub k_factor: usize,
    pub loss: LossKind,
    pub schedule: NoisySchedule,
    pub margin_factor: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        let base = RobustnessConfig::new(vec![6, 8], vec![0.0, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1]);
        Self {
            sizes: base.sizes,
            sigmas: base.sigmas,
            runs: base.runs,
            beta: base.beta,
            k_factor: base.k_factor,
            loss: base.loss,
            schedule: base.schedule,
            margin_factor: base.margin_factor,
            max_sweeps: base.max_sweeps,
            seed: base.seed,
        }
    }
}

#[derive(Args, Debug)]
pub struct NoisyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k_factor: Option<usize>,
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    #[arg(long)]
    margin_factor: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
}

pub fn noisy_solve(a: NoisyArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: NoisyConfig = load_config(a.common.config.as_deref())?;
    merge!(cfg, a; sizes, sigmas, runs, beta, k_factor, loss, margin_factor, max_sweeps);
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    if cfg.sigmas.is_empty() {
        return Err(UsageError("noisy-solve needs a sigma grid".into()).into());
    }
    let rc = RobustnessConfig {
        sizes: cfg.sizes.clone(),
        sigmas: cfg.sigmas.clone(),
        runs: cfg.runs,
        beta: cfg.beta,
        k_factor: cfg.k_factor,
        seed: cfg.seed,
        loss: cfg.loss,
        schedule: cfg.schedule.clone(),
        margin_factor: cfg.margin_factor,
        max_sweeps: cfg.max_sweeps,
    };
    let (records, rows) = robustness_experiment(&rc)?;
    let prov = Provenance::new("noisy-solve", &cfg, cfg.seed)?;
    let dir = out_dir(&a.common);
    let mut runs = Table::new(&["n", "sigma", "run", "instance_seed", "f_evals", "sweeps", "final_loss", "success"]);
    for r in &records {
        runs.push(vec![
            r.n.to_string(),
            num(r.sigma),
            r.run.to_string(),
            r.instance_seed.to_string(),
            r.f_evals.to_string(),
            r.sweeps.to_string(),
            num(r.final_loss),
            r.success.to_string(),
        ]);
    }
    let mut table = Table::new(&["n", "sigma", "runs", "success_rate", "f_evals_mean", "f_evals_std"]);
    for r in &rows {
        table.push(vec![r.n.to_string(), num(r.sigma), r.runs.to_string(), num(r.success_rate), num(r.f_evals.mean), num(r.f_evals.std)]);
        eprintln!("n={:<2} sigma={:<6} success {:.2}  mean f_evals {:.1}", r.n, r.sigma, r.success_rate, r.f_evals.mean);
    }
    runs.write(&dir.join("noisy_runs.csv"), &prov)?;
    table.write(&dir.join("noisy_success.csv"), &prov)
}

// --------------------------------------------------------------- landscape

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LandscapePart {
    All,
    Heatmap,
    Concentration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub part: LandscapePart,
    /// Heatmap puzzle size.
    pub n: usize,
    #[serde(rename = "D")]
    pub d: Option<usize>,
    pub betas: Vec<f64>,
    pub instances: usize,
    /// Concentration sizes `n = D`.
    pub sizes: Vec<usize>,
    pub concentration_beta: f64,
    pub concentration_instances: usize,
    pub k_factor: usize,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            part: LandscapePart::All,
            n: 6,
            d: None,
            betas: vec![0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.6],
            instances: 6,
            sizes: vec![6, 8, 10],
            concentration_beta: 0.2,
            concentration_instances: 10,
            k_factor: 4,
            loss: LossKind::Fidelity,
            seed: 0,
        }
    }
}

#[derive(Args, Debug)]
pub struct LandscapeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    part: Option<LandscapePart>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "depth", short = 'D')]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    concentration_beta: Option<f64>,
    #[arg(long)]
    concentration_instances: Option<usize>,
    #[arg(long)]
    k_factor: Option<usize>,
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
}

pub fn landscape(a: LandscapeArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: LandscapeConfig = load_config(a.common.config.as_deref())?;
    merge!(cfg, a; part, n, betas, instances, sizes, concentration_beta, concentration_instances, k_factor, loss);
    if a.d.is_some() {
        cfg.d = a.d;
    }
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let prov = Provenance::new("landscape", &cfg, cfg.seed)?;
    let dir = out_dir(&a.common);
    if cfg.part != LandscapePart::Concentration {
        let hc = HeatmapConfig {
            n: cfg.n,
            d: cfg.d.unwrap_or(cfg.n),
            betas: cfg.betas.clone(),
            instances: cfg.instances,
            k_factor: cfg.k_factor,
            seed: cfg.seed,
            loss: cfg.loss,
        };
        let rows = heatmap_experiment(&hc)?;
        let mut t = Table::new(&["beta", "instances", "non_unimodal", "non_separable", "non_monotonic"]);
        for r in &rows {
            t.push(vec![num(r.beta), r.instances.to_string(), num(r.non_unimodal), num(r.non_separable), num(r.non_monotonic)]);
            eprintln!(
                "beta={:<5} non-unimodal {:.2} non-separable {:.2} non-monotonic {:.2}",
                r.beta, r.non_unimodal, r.non_separable, r.non_monotonic
            );
        }
        t.write(&dir.join("landscape_heatmap.csv"), &prov)?;
    }
    if cfg.part != LandscapePart::Heatmap {
        let cc = ConcentrationConfig {
            sizes: cfg.sizes.clone(),
            beta: cfg.concentration_beta,
            instances: cfg.concentration_instances,
            k_factor: cfg.k_factor,
            seed: cfg.seed,
            loss: cfg.loss,
        };
        let (records, rows) = concentration_experiment(&cc)?;
        let mut per = Table::new(&["n", "instance", "instance_seed", "delta_s", "delta_gap"]);
        let mut shells = Table::new(&["n", "instance", "h", "mean_loss"]);
        for r in &records {
            per.push(vec![r.n.to_string(), r.instance.to_string(), r.instance_seed.to_string(), num(r.delta_s), num(r.delta_gap)]);
            for (h, m) in r.shell_means.iter().enumerate() {
                shells.push(vec![r.n.to_string(), r.instance.to_string(), h.to_string(), num(*m)]);
            }
        }
        let mut summary = Table::new(&["n", "instances", "delta_s_mean", "delta_s_std", "delta_gap_mean", "delta_gap_std"]);
        for r in &rows {
            summary.push(vec![
                r.n.to_string(),
                r.delta_s.count.to_string(),
                num(r.delta_s.mean),
                num(r.delta_s.std),
                num(r.delta_gap.mean),
                num(r.delta_gap.std),
            ]);
            eprintln!("n={:<2} Delta_S {:.4} +- {:.4}  delta {:.3e}", r.n, r.delta_s.mean, r.delta_s.std, r.delta_gap.mean);
        }
        per.write(&dir.join("landscape_concentration.csv"), &prov)?;
        shells.write(&dir.join("landscape_shells.csv"), &prov)?;
        summary.write(&dir.join("landscape_concentration_summary.csv"), &prov)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- diagnose

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosePart {
    All,
    Hardness,
    Scan,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub part: DiagnosePart,
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub instances: usize,
    pub k_factor: usize,
    /// Pauli strings sampled for the stabilizer norm above 8 qubits.
    pub magic_samples: usize,
    pub scan_n: usize,
    /// Defaults to `4 scan_n^2`.
    pub scan_k: Option<usize>,
    pub scan_betas: Vec<f64>,
    pub scan_instances: usize,
    pub renyi: bool,
    pub clifford_samples: usize,
    pub clifford_depth: usize,
    pub seed: u64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            part: DiagnosePart::All,
            sizes: vec![4, 6, 8],
            beta: 0.2,
            instances: 5,
            k_factor: 4,
            magic_samples: 20_000,
            scan_n: 8,
            scan_k: None,
            scan_betas: (0..=15).map(|i| f64::from(i) / 10.0).collect(),
            scan_instances: 20,
            renyi: false,
            clifford_samples: 0,
            clifford_depth: 5,
            seed: 0,
        }
    }
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    part: Option<DiagnosePart>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    k_factor: Option<usize>,
    #[arg(long)]
    magic_samples: Option<usize>,
    #[arg(long)]
    scan_n: Option<usize>,
    #[arg(long)]
    scan_k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    scan_betas: Option<Vec<f64>>,
    #[arg(long)]
    scan_instances: Option<usize>,
    /// Also write the Renyi-2 profile over cuts.
    #[arg(long)]
    renyi: Option<bool>,
    #[arg(long)]
    clifford_samples: Option<usize>,
    #[arg(long)]
    clifford_depth: Option<usize>,
}

pub fn diagnose(a: DiagnoseArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: DiagnoseConfig = load_config(a.common.config.as_deref())?;
    merge!(cfg, a; part, sizes, beta, instances, k_factor, magic_samples, scan_n, scan_betas, scan_instances, renyi, clifford_samples, clifford_depth);
    if a.scan_k.is_some() {
        cfg.scan_k = a.scan_k;
    }
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let prov = Provenance::new("diagnose", &cfg, cfg.seed)?;
    let dir = out_dir(&a.common);
    if cfg.part != DiagnosePart::Scan {
        if let Some(&n) = cfg.sizes.iter().find(|&&n| n > SINGLE_BLOCK_MAX_QUBITS) {
            return Err(tpuzzle_core::Error::SizeCap { what: "diagnose", n, cap: SINGLE_BLOCK_MAX_QUBITS }.into());
        }
        let hc = HardnessConfig {
            sizes: cfg.sizes.clone(),
            beta: cfg.beta,
            instances: cfg.instances,
            k_factor: cfg.k_factor,
            seed: cfg.seed,
            magic_samples: cfg.magic_samples,
        };
        let (records, rows) = hardness_experiment(&hc)?;
        let mut per = Table::new(&["n", "instance", "instance_seed", "purity_excess", "stabilizer_norm", "magic_mode", "magic_std_error"]);
        for r in &records {
            let mode = match r.magic.mode {
                tpuzzle_core::diagnostics::MagicMode::Exhaustive => "exhaustive",
                tpuzzle_core::diagnostics::MagicMode::Sampled { .. } => "sampled",
            };
            per.push(vec![
                r.n.to_string(),
                r.instance.to_string(),
                r.instance_seed.to_string(),
                num(r.purity_excess),
                num(r.magic.value),
                mode.into(),
                num(r.magic.std_error),
            ]);
        }
        let mut summary = Table::new(&["n", "instances", "purity_excess_mean", "purity_excess_std", "stabilizer_norm_mean", "stabilizer_norm_std"]);
        for r in &rows {
            summary.push(vec![
                r.n.to_string(),
                r.purity_excess.count.to_string(),
                num(r.purity_excess.mean),
                num(r.purity_excess.std),
                num(r.magic.mean),
                num(r.magic.std),
            ]);
            eprintln!("n={:<2} purity excess {:.4}  stabilizer norm {:.3}", r.n, r.purity_excess.mean, r.magic.mean);
        }
        per.write(&dir.join("diagnose_hardness.csv"), &prov)?;
        summary.write(&dir.join("diagnose_hardness_summary.csv"), &prov)?;
    }
    if cfg.part != DiagnosePart::Hardness {
        let sc = SingleBlockConfig {
            n: cfg.scan_n,
            k: cfg.scan_k.unwrap_or(4 * cfg.scan_n * cfg.scan_n),
            betas: cfg.scan_betas.clone(),
            instances: cfg.scan_instances,
            seed: cfg.seed,
            renyi_profile: cfg.renyi,
            clifford_samples: cfg.clifford_samples,
            clifford_depth: cfg.clifford_depth,
        };
        let rows = single_block_scan(&sc)?;
        let mut t = Table::new(&["beta_eff", "loss_mean", "loss_std", "reference", "non_clifford"]);
        let mut renyi = Table::new(&["beta_eff", "l", "s2_mean"]);
        for r in &rows {
            t.push(vec![
                num(r.beta),
                num(r.loss.mean),
                num(r.loss.std),
                num(r.reference),
                r.non_clifford.map(num).unwrap_or_default(),
            ]);
            for (l, s2) in r.renyi.iter().enumerate() {
                renyi.push(vec![num(r.beta), (l + 1).to_string(), num(*s2)]);
            }
        }
        let mad = rows.iter().map(|r| (r.loss.mean - r.reference).abs()).sum::<f64>() / rows.len().max(1) as f64;
        eprintln!("single block n={}: mean |loss - closed form| = {mad:.4}", cfg.scan_n);
        t.write(&dir.join("diagnose_single_block.csv"), &prov)?;
        if renyi.len() > 0 {
            renyi.write(&dir.join("diagnose_renyi.csv"), &prov)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------- qsvt-verify

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QsvtConfig {
    pub n: usize,
    pub k: usize,
    pub betas: Vec<f64>,
    pub degrees: Vec<usize>,
    pub rescale: bool,
    pub grid_size: usize,
    /// Also write each circuit in the text format.
    pub emit_circuits: bool,
    pub seed: u64,
}

impl Default for QsvtConfig {
    fn default() -> Self {
        Self { n: 2, k: 2, betas: vec![0.0, 0.5, 0.75, 2.0], degrees: vec![2, 4, 10], rescale: false, grid_size: 2001, emit_circuits: false, seed: 0 }
    }
}

#[derive(Args, Debug)]
pub struct QsvtArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Commuting Pauli terms in the nested block encoding.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Even polynomial degrees.
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    /// Compare against W(beta sqrt(2^K)) instead of W(beta).
    #[arg(long)]
    rescale: Option<bool>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    emit_circuits: Option<bool>,
}

pub fn qsvt_verify(a: QsvtArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: QsvtConfig = load_config(a.common.config.as_deref())?;
    merge!(cfg, a; n, k, betas, degrees, rescale, grid_size, emit_circuits);
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let basis = build_commuting_basis(cfg.n, cfg.k, &mut stream(cfg.seed, &[label::W_BLOCK]))?;
    eprintln!("basis: {}", basis.strings().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "));
    let jobs: Vec<(f64, usize)> = cfg.betas.iter().flat_map(|&b| cfg.degrees.iter().map(move |&d| (b, d))).collect();
    let opts = VerifyOptions { rescale: cfg.rescale, grid_size: cfg.grid_size, seed: cfg.seed };
    let results = jobs
        .par_iter()
        .map(|&(beta, d)| verify_cayley_equivalence(&basis, beta, d, opts))
        .collect::<tpuzzle_core::Result<Vec<_>>>()?;
    let prov = Provenance::new("qsvt-verify", &cfg, cfg.seed)?;
    let dir = out_dir(&a.common);
    let mut t = Table::new(&[
        "beta",
        "d",
        "beta_effective",
        "deviation",
        "fit_error",
        "unitarity_defect",
        "postselection_probability",
        "gate_count",
        "phases",
    ]);
    for (&(beta, d), v) in jobs.iter().zip(&results) {
        t.push(vec![
            num(beta),
            d.to_string(),
            num(v.beta_effective),
            num(v.deviation),
            num(v.fit_error),
            num(v.unitarity_defect),
            num(v.postselection_probability),
            v.gate_count.to_string(),
            v.phases.phases.iter().map(|&p| num(p)).collect::<Vec<_>>().join(";"),
        ]);
        eprintln!("beta={beta:<5} d={d:<3} deviation {:.3e}  fit error {:.3e}", v.deviation, v.fit_error);
        if cfg.emit_circuits {
            let c = assemble_qsvt(&build_block_encoding(&basis)?, &v.phases)?;
            let path = dir.join(format!("qsvt_beta{beta}_d{d}.txt"));
            fs::create_dir_all(&dir)?;
            fs::write(&path, c.to_text())?;
        }
    }
    t.write(&dir.join("qsvt.csv"), &prov)
}

// -------------------------------------------------------------- largescale

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LargescaleConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub sigma_rot1: f64,
    pub sigma_rot2: f64,
    pub l_v: usize,
    pub instances: usize,
    /// Also run each instance with the CZ layers removed.
    pub reference: bool,
    pub seed: u64,
}

impl Default for LargescaleConfig {
    fn default() -> Self {
        Self { rows: 4, cols: 4, d: 8, sigma_rot1: 0.25, sigma_rot2: 0.4, l_v: 2, instances: 10, reference: true, seed: 0 }
    }
}

#[derive(Args, Debug)]
pub struct LargescaleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long = "depth", short = 'D')]
    d: Option<usize>,
    #[arg(long)]
    sigma_rot1: Option<f64>,
    #[arg(long)]
    sigma_rot2: Option<f64>,
    #[arg(long)]
    l_v: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    reference: Option<bool>,
}

pub fn largescale(a: LargescaleArgs) -> Result<()> {
    init_workers(a.common.workers);
    let mut cfg: LargescaleConfig = load_config(a.common.config.as_deref())?;
    merge!(cfg, a; rows, cols, d, sigma_rot1, sigma_rot2, l_v, instances, reference);
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let n = cfg.rows * cfg.cols;
    let variants: Vec<bool> = if cfg.reference { vec![true, false] } else { vec![true] };
    let jobs: Vec<(usize, bool)> = (0..cfg.instances).flat_map(|i| variants.iter().map(move |&cz| (i, cz))).collect();
    let results = jobs
        .par_iter()
        .map(|&(i, cz)| -> Result<_> {
            let p = RotationParams {
                rows: cfg.rows,
                cols: cfg.cols,
                d: cfg.d,
                sigma_rot1: cfg.sigma_rot1,
                sigma_rot2: cfg.sigma_rot2,
                l_v: cfg.l_v,
                cz_enabled: cz,
                seed: tpuzzle_core::landscape::instance_seed(cfg.seed, n, i),
            };
            let inst = build_rotation_instance(&p)?;
            let puzzle = inst.compile()?;
            let mut ev = puzzle.evaluator(LossKind::Fidelity);
            let mut t = hill_climb(|s| ev.loss(s), &Bitstring::zeros(cfg.d), HillClimbOptions::default())?;
            let ok = t.judge(&inst.s_star());
            Ok((t, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    let prov = Provenance::new("largescale", &cfg, cfg.seed)?;
    let dir = out_dir(&a.common);
    let mut trace = Table::new(&["instance", "cz_enabled", "sweep", "current_loss", "f_evals_cumulative", "bitstring_hex"]);
    let mut summary = Table::new(&["instance", "cz_enabled", "sweeps", "f_evals", "final_loss", "success"]);
    for (&(i, cz), (t, ok)) in jobs.iter().zip(&results) {
        for r in &t.sweeps {
            trace.push(vec![i.to_string(), cz.to_string(), r.sweep.to_string(), num(r.loss), r.f_evals.to_string(), r.bitstring.to_hex()]);
        }
        summary.push(vec![i.to_string(), cz.to_string(), t.sweep_count().to_string(), t.f_evals.to_string(), num(t.final_loss()), ok.to_string()]);
    }
    let solved = |cz: bool| results.iter().zip(&jobs).filter(|(r, j)| j.1 == cz && r.1 && r.0.sweep_count() <= cfg.d).count();
    eprintln!("{n} qubits, D={}: {}/{} instances reach 1...1 within D sweeps", cfg.d, solved(true), cfg.instances);
    if cfg.reference {
        eprintln!("without CZ layers: {}/{}", solved(false), cfg.instances);
    }
    trace.write(&dir.join("largescale_trace.csv"), &prov)?;
    summary.write(&dir.join("largescale_summary.csv"), &prov)
}

// -------------------------------------------------------------------- plot

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// CSV tables written by the other subcommands.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

pub fn plot(a: PlotArgs) -> Result<()> {
    let dir = a.common.out.clone().unwrap_or_else(|| PathBuf::from("plots"));
    for input in &a.inputs {
        let path = plot_file(input, &dir)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
