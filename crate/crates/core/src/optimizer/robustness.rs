//! Success rate of noisy hill climbing over a grid of noise levels.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{noisy_hill_climb, NoisyOptions, NoisySchedule};
use crate::bitstring::Bitstring;
use crate::error::{invalid, Error, Result};
use crate::landscape::{enumerate_losses, instance_seed};
use crate::puzzle::{build_instance, InstanceParams, LossKind};
use crate::rng::{derive_seed, label, stream};
use crate::stats::Summary;

pub const ROBUSTNESS_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    pub sizes: Vec<usize>,
    pub sigmas: Vec<f64>,
    /// One fresh instance and random start per run.
    pub runs: usize,
    pub beta: f64,
    pub k_factor: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub schedule: NoisySchedule,
    pub margin_factor: f64,
    pub max_sweeps: usize,
}

impl RobustnessConfig {
    pub fn new(sizes: Vec<usize>, sigmas: Vec<f64>) -> Self {
        Self {
            sizes,
            sigmas,
            runs: 20,
            beta: 0.2,
            k_factor: 4,
            seed: 0,
            loss: LossKind::Fidelity,
            schedule: NoisySchedule::default(),
            margin_factor: 1.0,
            max_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRunRecord {
    pub n: usize,
    pub sigma: f64,
    pub run: usize,
    pub instance_seed: u64,
    pub f_evals: u64,
    pub sweeps: usize,
    /// Exact loss of the final string.
    pub final_loss: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub n: usize,
    pub sigma: f64,
    pub runs: usize,
    pub success_rate: f64,
    pub f_evals: Summary,
}

fn run_instance(cfg: &RobustnessConfig, n: usize, run: usize) -> Result<Vec<NoisyRunRecord>> {
    let seed = instance_seed(cfg.seed, n, run);
    let params = InstanceParams { n, d: n, beta_w: cfg.beta, beta_v: cfg.beta, k: cfg.k_factor * n * n, seed };
    let inst = build_instance(&params, None)?;
    let puzzle = inst.compile()?;
    let mut ev = puzzle.evaluator(cfg.loss);
    let map = enumerate_losses(|s| ev.loss(s), n)?;
    let s0 = Bitstring::random(n, &mut stream(seed, &[label::START, 0]));
    cfg.sigmas
        .iter()
        .enumerate()
        .map(|(j, &sigma)| {
            let opts = NoisyOptions {
                schedule: cfg.schedule.clone(),
                sigma,
                margin_factor: cfg.margin_factor,
                max_sweeps: cfg.max_sweeps,
                tol: 1e-10,
            };
            let observe = |s: &Bitstring, rng: &mut crate::rng::Stream| {
                let eta: f64 = rng.sample(StandardNormal);
                Ok(map.get(s) + sigma * eta)
            };
            let mut t = noisy_hill_climb(observe, &s0, &opts, derive_seed(seed, &[label::NOISE, j as u64]))?;
            let success = t.judge(&inst.s_star);
            Ok(NoisyRunRecord {
                n,
                sigma,
                run,
                instance_seed: seed,
                f_evals: t.f_evals,
                sweeps: t.sweep_count(),
                final_loss: map.get(t.final_string()),
                success,
            })
        })
        .collect()
}

/// Runs every (size, run) pair in parallel; each run is scored at every sigma
/// from the same instance and start.
pub fn robustness_experiment(cfg: &RobustnessConfig) -> Result<(Vec<NoisyRunRecord>, Vec<RobustnessRow>)> {
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n > ROBUSTNESS_MAX_QUBITS || n == 0) {
        return Err(Error::SizeCap { what: "noisy success-rate experiment", n, cap: ROBUSTNESS_MAX_QUBITS });
    }
    if cfg.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(invalid("sigma values must be finite and >= 0"));
    }
    let jobs: Vec<(usize, usize)> = cfg.sizes.iter().flat_map(|&n| (0..cfg.runs).map(move |r| (n, r))).collect();
    let records: Vec<NoisyRunRecord> = jobs
        .par_iter()
        .map(|&(n, r)| run_instance(cfg, n, r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for &sigma in &cfg.sigmas {
            let runs: Vec<&NoisyRunRecord> = records.iter().filter(|r| r.n == n && r.sigma == sigma).collect();
            let evals: Vec<f64> = runs.iter().map(|r| r.f_evals as f64).collect();
            rows.push(RobustnessRow {
                n,
                sigma,
                runs: runs.len(),
                success_rate: runs.iter().filter(|r| r.success).count() as f64 / runs.len().max(1) as f64,
                f_evals: Summary::of(&evals),
            });
        }
    }
    Ok((records, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_row_always_succeeds() {
        let mut cfg = RobustnessConfig::new(vec![4], vec![0.0]);
        cfg.runs = 4;
        let (records, rows) = robustness_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(rows[0].success_rate, 1.0);
    }

    #[test]
    fn oversized_request_is_capped() {
        let cfg = RobustnessConfig::new(vec![13], vec![0.0]);
        assert!(matches!(robustness_experiment(&cfg), Err(Error::SizeCap { .. })));
    }
}
