//! Block encoding of a commuting-projector Hermitian and the QSVT circuit
//! that realizes its Cayley transform.

mod basis;
mod circuit;
mod qsp;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::dense_cayley;
use crate::error::{Error, Result};
use crate::rng::{label, stream};
use crate::state::Statevector;

pub use basis::{build_commuting_basis, nested_hermitian, CommutingBasis};
pub use circuit::{CircuitIR, Op, DENSE_IR_MAX_WIRES};
pub use qsp::{cayley_response, constrained_phases, fit_error, fit_qsp_phases, qsp_angles_for_cayley, qsp_matrix, qsp_poly, QspPhases};

/// Hadamards on the encoding ancillas, one open-controlled `B_j` per ancilla,
/// Hadamards again. The all-zero-ancilla block is `prod_j (I + B_j)/2`.
pub fn build_block_encoding(basis: &CommutingBasis) -> Result<CircuitIR> {
    let (k, n) = (basis.k(), basis.n());
    if n + k > DENSE_IR_MAX_WIRES - 1 {
        return Err(Error::SizeCap { what: "block encoding (n + K)", n: n + k, cap: DENSE_IR_MAX_WIRES - 1 });
    }
    let mut c = CircuitIR::new(k, n);
    let system: Vec<usize> = c.system_wires().collect();
    for w in c.encoding_wires() {
        c.push(Op::H(w))?;
    }
    for (j, b) in basis.strings().iter().enumerate() {
        c.push(Op::ControlledPauli { control: 1 + j, open: true, pauli: b.clone(), targets: system.clone() })?;
    }
    for w in c.encoding_wires() {
        c.push(Op::H(w))?;
    }
    Ok(c)
}

/// `exp(i phi (2 Pi - I))` with `Pi` the all-zero projector on the encoding
/// ancillas, computed into wire 0 and uncomputed.
fn push_projector_phase(c: &mut CircuitIR, phi: f64) -> Result<()> {
    let controls: Vec<usize> = c.encoding_wires().collect();
    c.push(Op::MultiControlledX { controls: controls.clone(), open: true, target: 0 })?;
    c.push(Op::Rz(0, 2.0 * phi))?;
    c.push(Op::MultiControlledX { controls, open: true, target: 0 })
}

/// Alternates projector phases with the encoding and its adjoint, applying
/// `phi_d` first and `phi_0` last.
pub fn assemble_qsvt(encoding: &CircuitIR, phases: &QspPhases) -> Result<CircuitIR> {
    let mut c = CircuitIR::new(encoding.k(), encoding.n());
    let adjoint = encoding.adjoint();
    let d = phases.degree;
    push_projector_phase(&mut c, phases.phases[d])?;
    for (step, k) in (0..d).rev().enumerate() {
        c.extend(if step % 2 == 0 { encoding } else { &adjoint })?;
        push_projector_phase(&mut c, phases.phases[k])?;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Compare against the Cayley transform of `sqrt(2^K)` times the
    /// projector (the unit-normalized Pauli sum) instead of the projector.
    pub rescale: bool,
    /// Points in the fit-error grid over `[-1, 1]`.
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { rescale: false, grid_size: 2001, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsvtVerification {
    /// `max |block - W|` entrywise.
    pub deviation: f64,
    pub fit_error: f64,
    /// Probability of finding the QSVT ancilla in `|0>` on a random input.
    pub postselection_probability: f64,
    /// `max |B^dagger B - I|` of the extracted block.
    pub unitarity_defect: f64,
    /// Beta used by the phase fit (rescaled when requested).
    pub beta_effective: f64,
    pub phases: QspPhases,
    pub gate_count: usize,
}

fn max_dev(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Builds the QSVT circuit for `W(beta)` and compares its system block with
/// the dense Cayley transform of the encoded projector.
pub fn verify_cayley_equivalence(basis: &CommutingBasis, beta: f64, d: usize, opts: VerifyOptions) -> Result<QsvtVerification> {
    let wires = 1 + basis.k() + basis.n();
    if wires > DENSE_IR_MAX_WIRES {
        return Err(Error::SizeCap { what: "QSVT verification (n + K + 1)", n: wires, cap: DENSE_IR_MAX_WIRES });
    }
    let beta_eff = if opts.rescale { beta * ((1u64 << basis.k()) as f64).sqrt() } else { beta };
    let phases = fit_qsp_phases(beta_eff, d, opts.grid_size)?;
    let circuit = assemble_qsvt(&build_block_encoding(basis)?, &phases)?;
    let block = circuit.system_block()?;
    let reference = dense_cayley(&nested_hermitian(basis), beta_eff)?;
    let deviation = max_dev(&block, reference.matrix());

    let dim = block.nrows();
    let mut gram = Mat::<Complex64>::zeros(dim, dim);
    faer::linalg::matmul::matmul(gram.as_mut(), faer::Accum::Replace, block.adjoint(), block.as_ref(), Complex64::new(1.0, 0.0), faer::Par::Seq);
    let eye = Mat::<Complex64>::from_fn(dim, dim, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let unitarity_defect = max_dev(&gram, &eye);

    let sys = Statevector::random(basis.n(), &mut stream(opts.seed, &[label::FIT]));
    let mut full = vec![Complex64::new(0.0, 0.0); 1usize << wires];
    full[..sys.dim()].copy_from_slice(sys.amplitudes());
    let mut state = Statevector::from_amplitudes(full)?;
    circuit.apply(&mut state)?;
    let half = state.dim() / 2;
    let postselection_probability = state.amplitudes()[..half].iter().map(|a| a.norm_sqr()).sum();

    Ok(QsvtVerification {
        deviation,
        fit_error: phases.fit_error,
        postselection_probability,
        unitarity_defect,
        beta_effective: beta_eff,
        gate_count: circuit.ops().len(),
        phases,
    })
}
