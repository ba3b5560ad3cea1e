//! Evaluation-count scaling over square puzzles (`n = D`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hill_climb, random_search, HillClimbOptions};
use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::landscape::{enumerate_losses, instance_seed};
use crate::puzzle::{build_instance, InstanceParams, LossKind};
use crate::rng::{label, stream};
use crate::stats::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hill,
    Random,
}

impl Method {
    /// `n^2/2 - n/4` for hill climbing, `(2^n + 1)/2` for random search.
    pub fn reference(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Method::Hill => nf * nf / 2.0 - nf / 4.0,
            Method::Random => (2f64.powi(n as i32) + 1.0) / 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Hill => "hill",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hill" => Ok(Method::Hill),
            "random" => Ok(Method::Random),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub instances: usize,
    /// Hill climbing: random starts per instance. Random search: trials per instance.
    pub runs_per_instance: usize,
    pub beta: f64,
    pub k_factor: usize,
    pub seed: u64,
    pub method: Method,
    pub loss: LossKind,
    pub tol: f64,
}

impl ScalingConfig {
    pub fn new(sizes: Vec<usize>, method: Method) -> Self {
        Self {
            sizes,
            instances: 20,
            runs_per_instance: 1,
            beta: 0.2,
            k_factor: 4,
            seed: 0,
            method,
            loss: LossKind::Fidelity,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub n: usize,
    pub instance: usize,
    pub instance_seed: u64,
    pub run: usize,
    pub f_evals: u64,
    pub sweeps: usize,
    pub final_loss: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub method: Method,
    pub n: usize,
    pub f_evals: Summary,
    pub success_rate: f64,
    pub reference: f64,
}

pub const SCALING_MAX_QUBITS: usize = 12;

fn run_instance(cfg: &ScalingConfig, n: usize, instance: usize) -> Result<Vec<RunRecord>> {
    let seed = instance_seed(cfg.seed, n, instance);
    let params = InstanceParams { n, d: n, beta_w: cfg.beta, beta_v: cfg.beta, k: cfg.k_factor * n * n, seed };
    let inst = build_instance(&params, None)?;
    let puzzle = inst.compile()?;
    let mut ev = puzzle.evaluator(cfg.loss);
    let record = |run, f_evals, sweeps, final_loss, success| RunRecord {
        method: cfg.method,
        n,
        instance,
        instance_seed: seed,
        run,
        f_evals,
        sweeps,
        final_loss,
        success,
    };
    match cfg.method {
        Method::Hill => (0..cfg.runs_per_instance)
            .map(|run| {
                let s0 = Bitstring::random(n, &mut stream(seed, &[label::START, run as u64]));
                let opts = HillClimbOptions { tol: cfg.tol, ..Default::default() };
                let mut t = hill_climb(|s| ev.loss(s), &s0, opts)?;
                let ok = t.judge(&inst.s_star);
                Ok(record(run, t.f_evals, t.sweep_count(), t.final_loss(), ok))
            })
            .collect(),
        Method::Random => {
            let map = enumerate_losses(|s| ev.loss(s), n)?;
            (0..cfg.runs_per_instance)
                .map(|run| {
                    let mut rng = stream(seed, &[label::SEARCH, run as u64]);
                    let mut t = random_search(|s| Ok(map.get(s)), n, &mut rng, cfg.tol)?;
                    let ok = t.judge(&inst.s_star);
                    Ok(record(run, t.f_evals, t.sweep_count(), t.final_loss(), ok))
                })
                .collect()
        }
    }
}

/// Runs every (size, instance) pair in parallel and summarizes `f_evals` per size.
pub fn scaling_experiment(cfg: &ScalingConfig) -> Result<(Vec<RunRecord>, Vec<ScalingRow>)> {
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n > SCALING_MAX_QUBITS || n == 0) {
        return Err(Error::SizeCap { what: "scaling experiment", n, cap: SCALING_MAX_QUBITS });
    }
    let jobs: Vec<(usize, usize)> =
        cfg.sizes.iter().flat_map(|&n| (0..cfg.instances).map(move |i| (n, i))).collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(n, i)| run_instance(cfg, n, i))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let rows = cfg
        .sizes
        .iter()
        .map(|&n| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.n == n).collect();
            let evals: Vec<f64> = runs.iter().map(|r| r.f_evals as f64).collect();
            ScalingRow {
                method: cfg.method,
                n,
                f_evals: Summary::of(&evals),
                success_rate: runs.iter().filter(|r| r.success).count() as f64 / runs.len().max(1) as f64,
                reference: cfg.method.reference(n),
            }
        })
        .collect();
    Ok((records, rows))
}
