//! Puzzle instances, the layered circuit they compile to, and loss evaluation.
//!
//! The target applies, for `i = 1..D`, the block `W_i`, then `V_i`, then `T`
//! on `q[i]` when `s*_i = 1`, then `V_i^dagger`. The ansatz undoes layers in
//! reverse order with `T^dagger` placed according to the candidate string.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::cayley::{CayleyBackend, CayleyOperator, SolverOptions, Workspace};
use crate::error::{invalid, Error, Result};
use crate::gates::Gate;
use crate::hermitian::RandomHermitian;
use crate::rng::{label, stream, Stream};
use crate::state::{parity_expectation, Statevector};

pub const FORMAT_VERSION: u32 = 1;

/// Above this many bytes the evaluator stops caching per-layer states.
pub const PREFIX_CACHE_BYTES: usize = 1 << 30;

/// One unitary block of a layer.
#[derive(Debug, Clone)]
pub enum Block {
    Identity,
    Cayley(CayleyOperator),
    Gates(Vec<Gate>),
}

impl Block {
    fn apply(&self, n: usize, amps: &mut [Complex64], adjoint: bool, ws: &mut Workspace) -> Result<()> {
        match self {
            Block::Identity => Ok(()),
            Block::Cayley(op) => op.apply_in_place(amps, adjoint, ws),
            Block::Gates(gates) if adjoint => gates.iter().rev().try_for_each(|g| g.adjoint().apply_amps(n, amps)),
            Block::Gates(gates) => gates.iter().try_for_each(|g| g.apply_amps(n, amps)),
        }
    }
}

/// `W_i`, `V_i` and the qubit (0-based) that receives the optional T gate.
#[derive(Debug, Clone)]
pub struct Layer {
    pub w: Block,
    pub v: Block,
    pub qubit: usize,
}

/// A compiled puzzle: its layers, hidden string and cached target state.
#[derive(Debug, Clone)]
pub struct Puzzle {
    n: usize,
    layers: Vec<Layer>,
    s_star: Bitstring,
    target: Statevector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `1 - |<0|psi>|^2`.
    #[default]
    Fidelity,
    /// `1 - <Z...Z>^2`.
    Parity,
}

impl LossKind {
    fn eval(self, amps: &[Complex64]) -> f64 {
        let v = match self {
            LossKind::Fidelity => 1.0 - amps[0].norm_sqr(),
            LossKind::Parity => {
                let z = parity_expectation(amps);
                1.0 - z * z
            }
        };
        v.clamp(0.0, 1.0)
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fidelity" => Ok(LossKind::Fidelity),
            "parity" => Ok(LossKind::Parity),
            other => Err(Error::Parse(format!("unknown loss kind '{other}'"))),
        }
    }
}

impl Puzzle {
    pub fn from_layers(n: usize, layers: Vec<Layer>, s_star: Bitstring) -> Result<Self> {
        if layers.len() != s_star.len() {
            return Err(Error::WidthMismatch { expected: layers.len(), got: s_star.len() });
        }
        for l in &layers {
            if l.qubit >= n {
                return Err(Error::QubitOutOfRange { index: l.qubit, n });
            }
        }
        let mut p = Self { n, layers, target: Statevector::zero(n), s_star };
        p.target = p.prepare(&p.s_star.clone())?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn s_star(&self) -> &Bitstring {
        &self.s_star
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// `U(s*)|0>`.
    pub fn target(&self) -> &Statevector {
        &self.target
    }

    /// `U(s)|0>`, the target circuit with `s` in place of `s*`.
    pub fn prepare(&self, s: &Bitstring) -> Result<Statevector> {
        self.check_len(s)?;
        let mut state = Statevector::zero(self.n);
        let n = self.n;
        let amps = state.amplitudes_mut();
        let mut ws = Workspace::default();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.w.apply(n, amps, false, &mut ws)?;
            if s.get(i) {
                layer.v.apply(n, amps, false, &mut ws)?;
                Gate::T(layer.qubit).apply_amps(n, amps)?;
                layer.v.apply(n, amps, true, &mut ws)?;
            }
        }
        Ok(state)
    }

    fn check_len(&self, s: &Bitstring) -> Result<()> {
        if s.len() != self.layers.len() {
            return Err(Error::WidthMismatch { expected: self.layers.len(), got: s.len() });
        }
        Ok(())
    }

    /// Applies the ansatz factor for layer `i` (0-based).
    fn undo_layer(&self, i: usize, bit: bool, amps: &mut [Complex64], ws: &mut Workspace) -> Result<()> {
        let layer = &self.layers[i];
        if bit {
            layer.v.apply(self.n, amps, false, ws)?;
            Gate::Tdg(layer.qubit).apply_amps(self.n, amps)?;
            layer.v.apply(self.n, amps, true, ws)?;
        }
        layer.w.apply(self.n, amps, true, ws)
    }

    /// `Ubar(s) U(s*) |0>`.
    pub fn recompiled_state(&self, s: &Bitstring) -> Result<Statevector> {
        self.check_len(s)?;
        let mut state = self.target.clone();
        let mut ws = Workspace::default();
        for i in (0..self.depth()).rev() {
            self.undo_layer(i, s.get(i), state.amplitudes_mut(), &mut ws)?;
        }
        Ok(state)
    }

    pub fn loss(&self, s: &Bitstring) -> Result<f64> {
        Ok(LossKind::Fidelity.eval(self.recompiled_state(s)?.amplitudes()))
    }

    pub fn parity_loss(&self, s: &Bitstring) -> Result<f64> {
        Ok(LossKind::Parity.eval(self.recompiled_state(s)?.amplitudes()))
    }

    /// The fidelity loss computed as `1 - |<U(s)0|U(s*)0>|^2`.
    pub fn loss_via_overlap(&self, s: &Bitstring) -> Result<f64> {
        Ok((1.0 - self.prepare(s)?.fidelity(&self.target)?).clamp(0.0, 1.0))
    }

    pub fn evaluator(&self, kind: LossKind) -> Evaluator<'_> {
        Evaluator::new(self, kind)
    }
}

/// Loss evaluation with per-layer state caching.
///
/// Consecutive queries that share their trailing bits (the layers applied
/// first by the ansatz) reuse the cached intermediate states.
pub struct Evaluator<'a> {
    puzzle: &'a Puzzle,
    kind: LossKind,
    /// `cache[a]` is the state before the ansatz step at position `a`.
    cache: Vec<Vec<Complex64>>,
    last: Option<Bitstring>,
    ws: Workspace,
    evaluations: u64,
}

impl<'a> Evaluator<'a> {
    fn new(puzzle: &'a Puzzle, kind: LossKind) -> Self {
        let d = puzzle.depth();
        let bytes = (d + 1).saturating_mul(puzzle.target.dim()).saturating_mul(16);
        let slots = if bytes <= PREFIX_CACHE_BYTES { d + 1 } else { 1 };
        let mut cache = vec![puzzle.target.amplitudes().to_vec()];
        cache.resize(slots, puzzle.target.amplitudes().to_vec());
        Self { puzzle, kind, cache, last: None, ws: Workspace::default(), evaluations: 0 }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn puzzle(&self) -> &Puzzle {
        self.puzzle
    }

    /// Number of loss evaluations served so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn loss(&mut self, s: &Bitstring) -> Result<f64> {
        let p = self.puzzle;
        p.check_len(s)?;
        self.evaluations += 1;
        let d = p.depth();
        if self.cache.len() == 1 {
            let mut amps = p.target.amplitudes().to_vec();
            for i in (0..d).rev() {
                p.undo_layer(i, s.get(i), &mut amps, &mut self.ws)?;
            }
            return Ok(self.kind.eval(&amps));
        }
        // Position a applies layer d-1-a; resume at the first changed one.
        let start = match &self.last {
            None => 0,
            Some(prev) => (0..d).find(|&a| prev.get(d - 1 - a) != s.get(d - 1 - a)).unwrap_or(d),
        };
        self.last = None;
        for a in start..d {
            let (head, tail) = self.cache.split_at_mut(a + 1);
            let next = &mut tail[0];
            next.copy_from_slice(&head[a]);
            p.undo_layer(d - 1 - a, s.get(d - 1 - a), next, &mut self.ws)?;
        }
        self.last = Some(s.clone());
        Ok(self.kind.eval(&self.cache[d]))
    }
}

/// Parameters that, with a seed, determine a puzzle instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub beta_w: f64,
    pub beta_v: f64,
    pub k: usize,
    pub seed: u64,
}

impl InstanceParams {
    /// `n = D`, `beta_w = beta_v = beta`, `k = 4 n^2`.
    pub fn square(n: usize, beta: f64, seed: u64) -> Self {
        Self { n, d: n, beta_w: beta, beta_v: beta, k: 4 * n * n, seed }
    }
}

/// A reconstructible puzzle description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleInstance {
    pub format_version: u32,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub beta_w: f64,
    pub beta_v: f64,
    pub k: usize,
    pub seed: u64,
    pub s_star: Bitstring,
    /// Target qubit of each layer, 1-based.
    pub q: Vec<usize>,
}

pub fn build_instance(params: &InstanceParams, s_star: Option<Bitstring>) -> Result<PuzzleInstance> {
    let InstanceParams { n, d, beta_w, beta_v, k, seed } = *params;
    if n == 0 || d == 0 || k == 0 {
        return Err(invalid(format!("need n, D, k >= 1 (got n={n}, D={d}, k={k})")));
    }
    for (name, b) in [("beta_w", beta_w), ("beta_v", beta_v)] {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(invalid(format!("{name} must be finite and >= 0, got {b}")));
        }
    }
    let mut rng = stream(seed, &[label::TARGET_QUBITS]);
    let q = if d <= n {
        let mut all: Vec<usize> = (1..=n).collect();
        all.shuffle(&mut rng);
        all.truncate(d);
        all
    } else {
        (0..d).map(|_| rng.random_range(1..=n)).collect()
    };
    let s_star = match s_star {
        Some(s) if s.len() != d => return Err(Error::WidthMismatch { expected: d, got: s.len() }),
        Some(s) => s,
        None => Bitstring::random(d, &mut stream(seed, &[label::HIDDEN_STRING])),
    };
    Ok(PuzzleInstance { format_version: FORMAT_VERSION, n, d, beta_w, beta_v, k, seed, s_star, q })
}

impl PuzzleInstance {
    pub fn params(&self) -> InstanceParams {
        InstanceParams { n: self.n, d: self.d, beta_w: self.beta_w, beta_v: self.beta_v, k: self.k, seed: self.seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", self.format_version)));
        }
        if self.s_star.len() != self.d || self.q.len() != self.d {
            return Err(invalid(format!(
                "D={} but s_star has {} bits and q has {} entries",
                self.d,
                self.s_star.len(),
                self.q.len()
            )));
        }
        if let Some(&bad) = self.q.iter().find(|&&q| q == 0 || q > self.n) {
            return Err(invalid(format!("target qubit {bad} outside [1, {}]", self.n)));
        }
        Ok(())
    }

    /// Hermitian generator of `W_i` (`i` 0-based).
    pub fn w_hermitian(&self, i: usize) -> Result<RandomHermitian> {
        RandomHermitian::sample(self.n, self.k, &mut stream(self.seed, &[label::W_BLOCK, i as u64]))
    }

    /// Hermitian generator of `V_i` (`i` 0-based).
    pub fn v_hermitian(&self, i: usize) -> Result<RandomHermitian> {
        RandomHermitian::sample(self.n, self.k, &mut stream(self.seed, &[label::V_BLOCK, i as u64]))
    }

    pub fn compile(&self) -> Result<Puzzle> {
        self.compile_with(CayleyBackend::Auto, SolverOptions::default())
    }

    pub fn compile_with(&self, backend: CayleyBackend, opts: SolverOptions) -> Result<Puzzle> {
        self.validate()?;
        let block = |h: RandomHermitian, beta: f64| -> Result<Block> {
            if beta == 0.0 {
                return Ok(Block::Identity);
            }
            Ok(Block::Cayley(CayleyOperator::new(Arc::new(h), beta, backend, opts)?))
        };
        let layers = (0..self.d)
            .map(|i| {
                Ok(Layer {
                    w: block(self.w_hermitian(i)?, self.beta_w)?,
                    v: block(self.v_hermitian(i)?, self.beta_v)?,
                    qubit: self.q[i] - 1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Puzzle::from_layers(self.n, layers, self.s_star.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Additive Gaussian shot noise, `l~ = l + sigma * eta`.
#[derive(Debug, Clone)]
pub struct NoisyLossModel {
    sigma: f64,
    rng: Stream,
}

impl NoisyLossModel {
    pub fn new(sigma: f64, rng: Stream) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { sigma, rng })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Adds one noise draw to an exact loss; no clamping.
    pub fn observe(&mut self, exact: f64) -> f64 {
        if self.sigma == 0.0 {
            return exact;
        }
        let eta: f64 = self.rng.sample(StandardNormal);
        exact + self.sigma * eta
    }

    pub fn noisy_loss(&mut self, eval: &mut Evaluator<'_>, s: &Bitstring) -> Result<f64> {
        let exact = eval.loss(s)?;
        Ok(self.observe(exact))
    }
}
