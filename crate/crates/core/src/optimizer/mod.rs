//! Discrete searches over candidate strings.

mod hill;
mod noisy;
mod random;
pub mod robustness;
pub mod scaling;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::Result;

pub use hill::{hill_climb, HillClimbOptions};
pub use noisy::{noisy_hill_climb, NoisyOptions, NoisySchedule, ScheduleTier};
pub use random::random_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The loss dropped below tolerance (or the noise floor).
    Converged,
    /// No neighbor improved on the incumbent.
    NoImprovement,
    IterationCap,
}

/// One row per sweep; sweep 0 is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub loss: f64,
    pub f_evals: u64,
    pub bitstring: Bitstring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    /// Incumbents after each accepted move, starting with the initial string.
    pub path: Vec<Bitstring>,
    pub sweeps: Vec<SweepRecord>,
    pub f_evals: u64,
    pub termination: Termination,
    /// Filled in after the run by [`OptTrace::judge`].
    pub success: Option<bool>,
}

impl OptTrace {
    fn start(s0: &Bitstring, loss: f64) -> Self {
        Self {
            path: vec![s0.clone()],
            sweeps: vec![SweepRecord { sweep: 0, loss, f_evals: 0, bitstring: s0.clone() }],
            f_evals: 0,
            termination: Termination::NoImprovement,
            success: None,
        }
    }

    fn record(&mut self, loss: f64, s: &Bitstring) {
        let sweep = self.sweeps.len();
        self.sweeps.push(SweepRecord { sweep, loss, f_evals: self.f_evals, bitstring: s.clone() });
    }

    /// Number of sweeps performed (excluding the starting row).
    pub fn sweep_count(&self) -> usize {
        self.sweeps.len() - 1
    }

    pub fn final_string(&self) -> &Bitstring {
        self.path.last().expect("trace has a start")
    }

    pub fn final_loss(&self) -> f64 {
        self.sweeps.last().expect("trace has a start").loss
    }

    pub fn loss_per_sweep(&self) -> Vec<f64> {
        self.sweeps.iter().map(|r| r.loss).collect()
    }

    /// Compares the final string with the hidden one and stores the verdict.
    pub fn judge(&mut self, s_star: &Bitstring) -> bool {
        let ok = self.final_string() == s_star;
        self.success = Some(ok);
        ok
    }

    /// `sweep,current_loss,f_evals_cumulative,bitstring_hex` rows with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,current_loss,f_evals_cumulative,bitstring_hex\n");
        for r in &self.sweeps {
            let _ = writeln!(out, "{},{:.16e},{},{}", r.sweep, r.loss, r.f_evals, r.bitstring.to_hex());
        }
        out
    }
}

/// Caches exact losses so repeated queries cost nothing.
pub struct Memo<F> {
    inner: F,
    seen: HashMap<Bitstring, f64>,
}

impl<F: FnMut(&Bitstring) -> Result<f64>> Memo<F> {
    pub fn new(inner: F) -> Self {
        Self { inner, seen: HashMap::new() }
    }

    pub fn get(&mut self, s: &Bitstring) -> Result<f64> {
        if let Some(&v) = self.seen.get(s) {
            return Ok(v);
        }
        let v = (self.inner)(s)?;
        self.seen.insert(s.clone(), v);
        Ok(v)
    }

    pub fn distinct(&self) -> usize {
        self.seen.len()
    }
}
