use serde::{Deserialize, Serialize};

use super::{OptTrace, Termination};
use crate::bitstring::Bitstring;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillClimbOptions {
    /// Stop as soon as an accepted move brings the loss below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_sweeps: 10_000 }
    }
}

/// Steepest-descent single-bit-flip search.
///
/// Each sweep evaluates all `D` neighbors and moves to the best one if it
/// strictly improves; ties go to the lowest bit index. The starting loss is
/// evaluated once and not counted in `f_evals`.
pub fn hill_climb<F>(mut loss: F, s0: &Bitstring, opts: HillClimbOptions) -> Result<OptTrace>
where
    F: FnMut(&Bitstring) -> Result<f64>,
{
    let d = s0.len();
    let mut cur = s0.clone();
    let mut cur_loss = loss(&cur)?;
    let mut trace = OptTrace::start(&cur, cur_loss);
    loop {
        if trace.sweep_count() == opts.max_sweeps {
            trace.termination = Termination::IterationCap;
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut probe = cur.clone();
        for i in 0..d {
            probe.flip_in_place(i);
            let l = loss(&probe)?;
            probe.flip_in_place(i);
            if l < best.map_or(cur_loss, |b| b.1) {
                best = Some((i, l));
            }
        }
        trace.f_evals += d as u64;
        match best {
            Some((i, l)) => {
                cur.flip_in_place(i);
                cur_loss = l;
                trace.path.push(cur.clone());
                trace.record(cur_loss, &cur);
                if cur_loss < opts.tol {
                    trace.termination = Termination::Converged;
                    break;
                }
            }
            None => {
                trace.record(cur_loss, &cur);
                trace.termination = if cur_loss < opts.tol { Termination::Converged } else { Termination::NoImprovement };
                break;
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[f64]) -> impl FnMut(&Bitstring) -> Result<f64> + '_ {
        move |s: &Bitstring| Ok(values[s.index() as usize])
    }

    #[test]
    fn hand_enumerated_two_bit_map() {
        let map = [0.9, 0.5, 0.8, 0.0];
        let opts = HillClimbOptions { tol: 0.0, ..Default::default() };
        let t = hill_climb(table(&map), &"00".parse().unwrap(), opts).unwrap();
        let path: Vec<String> = t.path.iter().map(|s| s.to_string()).collect();
        assert_eq!(path, ["00", "01", "11"]);
        assert_eq!(t.f_evals, 6);
        assert_eq!(t.sweep_count(), 3);
        assert_eq!(t.termination, Termination::NoImprovement);
    }

    #[test]
    fn starting_at_optimum_takes_one_sweep() {
        let map = [0.9, 0.5, 0.8, 0.0];
        let t = hill_climb(table(&map), &"11".parse().unwrap(), HillClimbOptions::default()).unwrap();
        assert_eq!(t.f_evals, 2);
        assert_eq!(t.path.len(), 1);
        assert_eq!(t.termination, Termination::Converged);
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let map = [1.0, 0.5, 0.5, 0.7];
        let t = hill_climb(table(&map), &"00".parse().unwrap(), HillClimbOptions::default()).unwrap();
        assert_eq!(t.path[1].to_string(), "10");
    }

    #[test]
    fn csv_has_one_row_per_sweep() {
        let map = [0.9, 0.5, 0.8, 0.0];
        let t = hill_climb(table(&map), &"00".parse().unwrap(), HillClimbOptions::default()).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 1 + t.sweeps.len());
        assert!(csv.lines().last().unwrap().ends_with(",4,3"));
    }
}
