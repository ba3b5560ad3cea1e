//! Dense statevectors and reduced density matrices.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Largest register this crate will allocate (2^30 amplitudes, 16 GiB).
pub const MAX_QUBITS: usize = 30;

/// `2^n` complex amplitudes; qubit 0 is the most significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= 1usize << n {
            return Err(invalid(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut s = Self::zero(n);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps amplitudes without normalizing; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(invalid(format!("amplitude count {len} is not a power of two")));
        }
        Ok(Self { n: len.trailing_zeros() as usize, amps })
    }

    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << n);
        Self { n, amps }
    }

    /// Haar-random state from normalized complex Gaussians.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut s = Self { n, amps };
        s.normalize();
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= norm);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        crate::pauli::check_width(self.n, other.n)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `<Z...Z>`, the expectation of the global Z parity.
    pub fn parity_expectation(&self) -> f64 {
        parity_expectation(&self.amps)
    }

    pub fn max_abs_diff(&self, other: &Statevector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn parity_expectation(amps: &[Complex64]) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(x, a)| if x.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// A reduced density matrix over an ordered qubit subset.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    qubits: Vec<usize>,
    rho: Mat<Complex64>,
}

impl DensityMatrix {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.rho[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.rho[(i, i)]).sum()
    }

    /// `tr(rho^2)`, which for a Hermitian matrix is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for j in 0..d {
            for i in 0..d {
                acc += self.rho[(i, j)].norm_sqr();
            }
        }
        acc
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.rho[(i, j)]).collect()).collect()
    }
}

/// Traces out everything except `subset`; subset order sets the index order
/// of the result (first listed qubit is the most significant bit).
pub fn reduced_density(state: &Statevector, subset: &[usize]) -> Result<DensityMatrix> {
    let n = state.n();
    if subset.is_empty() {
        return Err(invalid("reduced density needs a nonempty subset"));
    }
    let mut seen = vec![false; n];
    for &q in subset {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(invalid(format!("qubit {q} repeated in subset")));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&q| !seen[q]).collect();
    let da = 1usize << subset.len();
    let db = 1usize << rest.len();
    let amps = state.amplitudes();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let offset = |qs: &[usize], v: usize| {
        qs.iter().enumerate().fold(0usize, |acc, (j, &q)| {
            if v >> (qs.len() - 1 - j) & 1 == 1 {
                acc | bit(q)
            } else {
                acc
            }
        })
    };
    let a_off: Vec<usize> = (0..da).map(|a| offset(subset, a)).collect();
    let b_off: Vec<usize> = (0..db).map(|b| offset(&rest, b)).collect();
    let psi = Mat::<Complex64>::from_fn(da, db, |a, b| amps[a_off[a] | b_off[b]]);
    let mut rho = Mat::<Complex64>::zeros(da, da);
    matmul(rho.as_mut(), Accum::Replace, psi.as_ref(), psi.adjoint(), Complex64::new(1.0, 0.0), Par::Seq);
    Ok(DensityMatrix { qubits: subset.to_vec(), rho })
}

/// Purity of the reduced state on `subset`, using the smaller side of the cut.
pub fn subsystem_purity(state: &Statevector, subset: &[usize]) -> Result<f64> {
    let n = state.n();
    if subset.len() * 2 > n {
        let complement: Vec<usize> = (0..n).filter(|q| !subset.contains(q)).collect();
        if !complement.is_empty() && complement.len() + subset.len() == n {
            return Ok(reduced_density(state, &complement)?.purity());
        }
    }
    Ok(reduced_density(state, subset)?.purity())
}
