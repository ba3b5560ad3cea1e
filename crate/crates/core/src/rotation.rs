//! Rotation-circuit puzzles built from single-qubit kicks and CZ ladders.
//!
//! A kick on qubit `j` is `Rz(phi) Ry(theta) Rz(phi)^dagger`. Each `W_i` is a
//! kick on every qubit, CZs on pairs (1,2),(3,4),..., a second kick layer and
//! CZs on pairs (2,3),(4,5),... . Each `V_i` repeats one kick on the layer's
//! target `L_V` times. The hidden string is all ones.

use std::f64::consts::TAU;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{invalid, Error, Result};
use crate::gates::{mat_mul, rz_matrix, ry_matrix, Gate, Mat2};
use crate::puzzle::{Block, Layer, Puzzle};
use crate::rng::{label, stream};

/// Largest register a rotation puzzle may simulate.
pub const ROTATION_MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    pub phi: f64,
    pub theta: f64,
}

impl Kick {
    pub fn matrix(&self) -> Mat2 {
        let rz = rz_matrix(self.phi);
        let rz_dag = rz_matrix(-self.phi);
        mat_mul(&rz, &mat_mul(&ry_matrix(self.theta), &rz_dag))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationLayer {
    pub first: Vec<Kick>,
    pub second: Vec<Kick>,
    pub v_kick: Kick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationInstance {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub sigma_rot1: f64,
    pub sigma_rot2: f64,
    pub l_v: usize,
    pub cz_enabled: bool,
    pub seed: u64,
    /// Target qubit of each layer, 1-based and distinct.
    pub targets: Vec<usize>,
    pub layers: Vec<RotationLayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub sigma_rot1: f64,
    pub sigma_rot2: f64,
    pub l_v: usize,
    pub cz_enabled: bool,
    pub seed: u64,
}

fn draw_kick<R: Rng + ?Sized>(rng: &mut R, theta: &Normal<f64>) -> Kick {
    Kick { phi: rng.random_range(0.0..TAU), theta: theta.sample(rng) }
}

pub fn build_rotation_instance(p: &RotationParams) -> Result<RotationInstance> {
    let n = p.rows * p.cols;
    if n == 0 || p.d == 0 || p.d > n {
        return Err(invalid(format!("need 1 <= D <= n, got D={} on a {}x{} grid", p.d, p.rows, p.cols)));
    }
    let theta1 = Normal::new(0.0, p.sigma_rot1).map_err(|e| invalid(e.to_string()))?;
    let theta2 = Normal::new(0.0, p.sigma_rot2).map_err(|e| invalid(e.to_string()))?;
    let targets = sample(&mut stream(p.seed, &[label::TARGET_QUBITS]), n, p.d).into_iter().map(|t| t + 1).collect();
    let layers = (0..p.d)
        .map(|i| {
            let mut rng = stream(p.seed, &[label::W_BLOCK, i as u64]);
            let first = (0..n).map(|_| draw_kick(&mut rng, &theta1)).collect();
            let second = (0..n).map(|_| draw_kick(&mut rng, &theta1)).collect();
            let v_kick = draw_kick(&mut stream(p.seed, &[label::V_BLOCK, i as u64]), &theta2);
            RotationLayer { first, second, v_kick }
        })
        .collect();
    Ok(RotationInstance {
        rows: p.rows,
        cols: p.cols,
        d: p.d,
        sigma_rot1: p.sigma_rot1,
        sigma_rot2: p.sigma_rot2,
        l_v: p.l_v,
        cz_enabled: p.cz_enabled,
        seed: p.seed,
        targets,
        layers,
    })
}

impl RotationInstance {
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn s_star(&self) -> Bitstring {
        Bitstring::ones(self.d)
    }

    fn w_gates(&self, layer: &RotationLayer) -> Vec<Gate> {
        let n = self.n();
        let mut gates: Vec<Gate> = layer.first.iter().enumerate().map(|(j, k)| Gate::Unitary1(j, k.matrix())).collect();
        if self.cz_enabled {
            gates.extend((0..n.saturating_sub(1)).step_by(2).map(|j| Gate::Cz(j, j + 1)));
        }
        gates.extend(layer.second.iter().enumerate().map(|(j, k)| Gate::Unitary1(j, k.matrix())));
        if self.cz_enabled {
            gates.extend((1..n.saturating_sub(1)).step_by(2).map(|j| Gate::Cz(j, j + 1)));
        }
        gates
    }

    /// Builds the gate-level circuit; refuses registers above the size cap.
    pub fn compile(&self) -> Result<Puzzle> {
        let n = self.n();
        if n > ROTATION_MAX_QUBITS {
            return Err(Error::SizeCap { what: "rotation-circuit statevector", n, cap: ROTATION_MAX_QUBITS });
        }
        let layers = self
            .layers
            .iter()
            .zip(&self.targets)
            .map(|(layer, &t)| {
                let kick = Gate::Unitary1(t - 1, layer.v_kick.matrix());
                Layer { w: Block::Gates(self.w_gates(layer)), v: Block::Gates(vec![kick; self.l_v]), qubit: t - 1 }
            })
            .collect();
        Puzzle::from_layers(n, layers, self.s_star())
    }
}
