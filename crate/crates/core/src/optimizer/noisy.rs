use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{OptTrace, Termination};
use crate::bitstring::Bitstring;
use crate::error::{invalid, Result};
use crate::rng::{label, stream, Stream};

/// Use breadth `lambda` and `m` repetitions while the estimate is at least `min_loss`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTier {
    pub min_loss: f64,
    pub lambda: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySchedule {
    tiers: Vec<ScheduleTier>,
}

impl NoisySchedule {
    /// Tiers must have strictly decreasing thresholds and `lambda, m >= 1`.
    pub fn new(tiers: Vec<ScheduleTier>) -> Result<Self> {
        if tiers.is_empty() {
            return Err(invalid("schedule needs at least one tier"));
        }
        if tiers.windows(2).any(|w| w[0].min_loss <= w[1].min_loss) {
            return Err(invalid("schedule thresholds must strictly decrease"));
        }
        if tiers.iter().any(|t| t.lambda == 0 || t.m == 0) {
            return Err(invalid("schedule breadth and repetitions must be >= 1"));
        }
        Ok(Self { tiers })
    }

    pub fn tiers(&self) -> &[ScheduleTier] {
        &self.tiers
    }

    /// The first tier whose threshold the estimate reaches, else the last.
    pub fn select(&self, estimate: f64) -> ScheduleTier {
        *self.tiers.iter().find(|t| estimate >= t.min_loss).unwrap_or_else(|| self.tiers.last().unwrap())
    }
}

impl Default for NoisySchedule {
    fn default() -> Self {
        Self::new(vec![
            ScheduleTier { min_loss: 0.3, lambda: 36, m: 1 },
            ScheduleTier { min_loss: 0.1, lambda: 12, m: 3 },
            ScheduleTier { min_loss: 0.0, lambda: 2, m: 6 },
        ])
        .unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOptions {
    pub schedule: NoisySchedule,
    /// Noise level the acceptance margin and stopping floor are scaled by.
    pub sigma: f64,
    pub margin_factor: f64,
    pub max_sweeps: usize,
    /// Lower bound on the stopping floor, which matters when `sigma = 0`.
    pub tol: f64,
}

impl NoisyOptions {
    pub fn new(sigma: f64) -> Self {
        Self { schedule: NoisySchedule::default(), sigma, margin_factor: 1.0, max_sweeps: 200, tol: 1e-10 }
    }
}

fn estimate<F>(noisy: &mut F, s: &Bitstring, m: usize, rng: &mut Stream) -> Result<f64>
where
    F: FnMut(&Bitstring, &mut Stream) -> Result<f64>,
{
    let mut acc = 0.0;
    for _ in 0..m {
        acc += noisy(s, rng)?;
    }
    Ok(acc / m as f64)
}

/// Hill climbing on noisy loss observations.
///
/// `noisy(s, rng)` returns one observation of the loss at `s`, drawing any
/// noise from `rng`. Each sweep picks `(lambda, m)` from the schedule,
/// re-estimates the incumbent with `m` draws, and stops once that estimate is
/// within `max(2 sigma / sqrt(m), tol)` of zero. Otherwise it averages `m`
/// draws at `lambda` distinct random neighbors and moves to the best one if it
/// beats the incumbent by `margin_factor * sigma * sqrt(2/m)`. Every draw
/// after the initial one counts toward `f_evals`.
pub fn noisy_hill_climb<F>(mut noisy: F, s0: &Bitstring, opts: &NoisyOptions, seed: u64) -> Result<OptTrace>
where
    F: FnMut(&Bitstring, &mut Stream) -> Result<f64>,
{
    if !(opts.sigma >= 0.0) || !(opts.margin_factor >= 0.0) {
        return Err(invalid("sigma and margin_factor must be >= 0"));
    }
    let d = s0.len();
    let mut cur = s0.clone();
    let mut cur_est = noisy(&cur, &mut stream(seed, &[label::SWEEP, 0]))?;
    let mut trace = OptTrace::start(&cur, cur_est);
    loop {
        let sweep = trace.sweep_count() + 1;
        if sweep > opts.max_sweeps {
            trace.termination = Termination::IterationCap;
            break;
        }
        let mut rng = stream(seed, &[label::SWEEP, sweep as u64]);
        let tier = opts.schedule.select(cur_est);
        let m = tier.m;
        cur_est = estimate(&mut noisy, &cur, m, &mut rng)?;
        trace.f_evals += m as u64;
        let floor = (2.0 * opts.sigma / (m as f64).sqrt()).max(opts.tol);
        if cur_est <= floor {
            trace.record(cur_est, &cur);
            trace.termination = Termination::Converged;
            break;
        }
        let mut picks = sample(&mut rng, d, tier.lambda.min(d)).into_vec();
        picks.sort_unstable();
        let mut best: Option<(usize, f64)> = None;
        for i in picks {
            let l = estimate(&mut noisy, &cur.flipped(i), m, &mut rng)?;
            trace.f_evals += m as u64;
            if best.is_none_or(|b| l < b.1) {
                best = Some((i, l));
            }
        }
        let margin = opts.margin_factor * opts.sigma * (2.0 / m as f64).sqrt();
        if let Some((i, l)) = best {
            if l < cur_est - margin {
                cur.flip_in_place(i);
                cur_est = l;
                trace.path.push(cur.clone());
            }
        }
        trace.record(cur_est, &cur);
    }
    Ok(trace)
}
