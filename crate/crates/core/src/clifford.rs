//! Random Clifford circuits over {H, S, CNOT} and stabilizer fidelity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gates::Gate;
use crate::state::Statevector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    pub n: usize,
    pub depth: usize,
    pub gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn identity(n: usize) -> Self {
        Self { n, depth: 0, gates: Vec::new() }
    }

    /// Wraps an explicit gate list; only H, S and CNOT are accepted.
    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            if !matches!(g, Gate::H(_) | Gate::S(_) | Gate::Cnot { .. }) {
                return Err(invalid(format!("{g:?} is not in the Clifford gate set")));
            }
            if g.qubits().iter().any(|&q| q >= n) {
                return Err(invalid(format!("{g:?} acts outside {n} qubits")));
            }
        }
        Ok(Self { n, depth: 0, gates })
    }

    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        crate::gates::apply_all(&self.gates, state)
    }

    /// The stabilizer state `C|0...0>`.
    pub fn prepare(&self) -> Result<Statevector> {
        let mut s = Statevector::zero(self.n);
        self.apply(&mut s)?;
        Ok(s)
    }
}

/// Each layer gives every qubit one of H, S or nothing, then CNOTs on a
/// random disjoint pairing of the qubits.
pub fn sample_clifford<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> CliffordCircuit {
    let mut gates = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        for q in 0..n {
            match rng.random_range(0..3u8) {
                0 => gates.push(Gate::H(q)),
                1 => gates.push(Gate::S(q)),
                _ => {}
            }
        }
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            gates.push(Gate::Cnot { control: pair[0], target: pair[1] });
        }
    }
    CliffordCircuit { n, depth, gates }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilizerFidelity {
    /// `max_j |<phi_j|psi>|^2`, with `|0...0>` always among the candidates.
    pub f_stab: f64,
    /// `1 - f_stab`.
    pub non_clifford: f64,
    /// Index into the sample list of the best candidate; `None` for `|0...0>`.
    pub best: Option<usize>,
}

pub fn stabilizer_fidelity(state: &Statevector, samples: &[CliffordCircuit]) -> Result<StabilizerFidelity> {
    let mut best = state.amplitudes()[0].norm_sqr();
    let mut arg = None;
    for (j, c) in samples.iter().enumerate() {
        let f = c.prepare()?.fidelity(state)?;
        if f > best {
            best = f;
            arg = Some(j);
        }
    }
    Ok(StabilizerFidelity { f_stab: best, non_clifford: (1.0 - best).max(0.0), best: arg })
}
