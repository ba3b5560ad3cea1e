use rand::seq::SliceRandom;
use rand::Rng;

use super::{OptTrace, Termination};
use crate::bitstring::Bitstring;
use crate::error::{invalid, Result};

/// Largest `D` for which the full permutation is materialized.
pub const RANDOM_SEARCH_MAX_BITS: usize = 20;

/// Evaluates strings in a uniformly random order until the loss drops below
/// `tol`; `f_evals` is the position of the first such string.
pub fn random_search<F, R>(mut loss: F, d: usize, rng: &mut R, tol: f64) -> Result<OptTrace>
where
    F: FnMut(&Bitstring) -> Result<f64>,
    R: Rng + ?Sized,
{
    if d == 0 || d > RANDOM_SEARCH_MAX_BITS {
        return Err(invalid(format!("random search needs 1 <= D <= {RANDOM_SEARCH_MAX_BITS}, got {d}")));
    }
    let mut order: Vec<u64> = (0..1u64 << d).collect();
    order.shuffle(rng);
    let first = Bitstring::from_index(d, order[0]);
    let first_loss = loss(&first)?;
    let mut trace = OptTrace::start(&first, first_loss);
    trace.f_evals = 1;
    if first_loss < tol {
        trace.record(first_loss, &first);
        trace.termination = Termination::Converged;
        return Ok(trace);
    }
    let mut best = first_loss;
    for &idx in &order[1..] {
        let s = Bitstring::from_index(d, idx);
        let l = loss(&s)?;
        trace.f_evals += 1;
        if l < best {
            best = l;
            trace.path.push(s.clone());
        }
        if l < tol {
            trace.record(l, &s);
            trace.termination = Termination::Converged;
            return Ok(trace);
        }
    }
    let last = trace.final_string().clone();
    trace.record(best, &last);
    trace.termination = Termination::NoImprovement;
    Ok(trace)
}
