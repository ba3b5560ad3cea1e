//! The Cayley transform `W(beta) = (1 - i beta H)(1 + i beta H)^{-1}`.
//!
//! Two paths are provided: a matrix-free conjugate-gradient solve on the
//! normal equations of `(1 + i beta H)`, and an explicit dense unitary for
//! small registers.

use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::DenseSolveCore;
use faer::{Accum, ColMut, ColRef, Mat, Par};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hermitian::HermitianOperator;
use crate::pauli::check_width;
use crate::state::Statevector;

/// Largest register for which a dense unitary may be formed.
pub const DENSE_MAX_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target for the normal equations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||(1 + i beta H) phi - (1 - i beta H) psi|| / ||psi||`.
    pub residual: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

/// `W(beta)|psi>` through the matrix-free solver.
pub fn cayley_apply<H: HermitianOperator + ?Sized>(h: &H, beta: f64, state: &Statevector) -> Result<Statevector> {
    Ok(cayley_apply_with(h, beta, state, SolverOptions::default())?.0)
}

pub fn cayley_apply_with<H: HermitianOperator + ?Sized>(
    h: &H,
    beta: f64,
    state: &Statevector,
    opts: SolverOptions,
) -> Result<(Statevector, SolveStats)> {
    check_beta(beta)?;
    check_width(h.width(), state.n())?;
    let mut amps = state.amplitudes().to_vec();
    let mut ws = Workspace::default();
    let stats = cayley_solve(h, beta, &mut amps, &mut ws, opts)?;
    Ok((Statevector::from_raw(state.n(), amps), stats))
}

/// `W(beta)^dagger |psi> = W(-beta)|psi>`.
pub fn cayley_apply_adjoint<H: HermitianOperator + ?Sized>(h: &H, beta: f64, state: &Statevector) -> Result<Statevector> {
    check_beta(beta)?;
    check_width(h.width(), state.n())?;
    let mut amps = state.amplitudes().to_vec();
    cayley_solve(h, -beta, &mut amps, &mut Workspace::default(), SolverOptions::default())?;
    Ok(Statevector::from_raw(state.n(), amps))
}

/// Scratch buffers reused across solves.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    bufs: [Vec<Complex64>; 6],
}

impl Workspace {
    fn ensure(&mut self, len: usize) {
        for b in &mut self.bufs {
            if b.len() != len {
                b.resize(len, ZERO);
            }
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Replaces `psi` by `W(beta) psi` for any real `beta` (negative gives the adjoint).
///
/// Solves `(1 + beta^2 H^2) phi = (1 - i beta H)^2 psi` by conjugate gradients,
/// starting from `phi = psi`.
pub(crate) fn cayley_solve<H: HermitianOperator + ?Sized>(
    h: &H,
    beta: f64,
    psi: &mut [Complex64],
    ws: &mut Workspace,
    opts: SolverOptions,
) -> Result<SolveStats> {
    if beta == 0.0 {
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let len = psi.len();
    ws.ensure(len);
    let [hpsi, t, r, p, ap, x] = &mut ws.bufs;
    let b2 = beta * beta;
    let ib = Complex64::new(0.0, beta);

    h.apply_into(psi, hpsi);
    h.apply_into(hpsi, t);
    // r = b - A psi = -2 i beta H psi - 2 beta^2 H^2 psi
    for i in 0..len {
        r[i] = -2.0 * ib * hpsi[i] - 2.0 * b2 * t[i];
    }
    let b_norm = {
        let mut acc = 0.0;
        for i in 0..len {
            acc += (psi[i] - 2.0 * ib * hpsi[i] - b2 * t[i]).norm_sqr();
        }
        acc.sqrt()
    };
    x.copy_from_slice(psi);
    p.copy_from_slice(r);
    let mut rr = dot(r, r).re;
    let target = opts.tol * b_norm.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    while rr.sqrt() > target {
        if iterations == opts.max_iter {
            return Err(Error::NotConverged { iterations, residual: rr.sqrt() / b_norm });
        }
        iterations += 1;
        h.apply_into(p, t);
        h.apply_into(t, ap);
        for i in 0..len {
            ap[i] = p[i] + b2 * ap[i];
        }
        let alpha = rr / dot(p, ap).re;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(r, r).re;
        let gamma = rr_new / rr;
        rr = rr_new;
        for i in 0..len {
            p[i] = r[i] + gamma * p[i];
        }
    }
    // Residual of the original (unsquared) system.
    h.apply_into(x, t);
    let psi_norm = norm(psi).max(f64::MIN_POSITIVE);
    let mut acc = 0.0;
    for i in 0..len {
        acc += ((x[i] - psi[i]) + ib * (t[i] + hpsi[i])).norm_sqr();
    }
    psi.copy_from_slice(x);
    Ok(SolveStats { iterations, residual: acc.sqrt() / psi_norm })
}

/// An explicit unitary matrix.
#[derive(Debug, Clone)]
pub struct DenseUnitary {
    n: usize,
    m: Mat<Complex64>,
}

impl DenseUnitary {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.m
    }

    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_width(self.n, state.n())?;
        let mut out = vec![ZERO; state.dim()];
        self.apply_raw(state.amplitudes(), &mut out, false);
        Ok(Statevector::from_raw(self.n, out))
    }

    pub fn apply_adjoint(&self, state: &Statevector) -> Result<Statevector> {
        check_width(self.n, state.n())?;
        let mut out = vec![ZERO; state.dim()];
        self.apply_raw(state.amplitudes(), &mut out, true);
        Ok(Statevector::from_raw(self.n, out))
    }

    pub(crate) fn apply_raw(&self, input: &[Complex64], out: &mut [Complex64], adjoint: bool) {
        let dst = ColMut::from_slice_mut(out).as_mat_mut();
        let src = ColRef::from_slice(input).as_mat();
        if adjoint {
            matmul(dst, Accum::Replace, self.m.adjoint(), src, ONE, Par::Seq);
        } else {
            matmul(dst, Accum::Replace, self.m.as_ref(), src, ONE, Par::Seq);
        }
    }

    /// `max |(U^dagger U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.m.nrows();
        let mut g = Mat::<Complex64>::zeros(dim, dim);
        matmul(g.as_mut(), Accum::Replace, self.m.adjoint(), self.m.as_ref(), ONE, Par::Seq);
        let mut worst = 0.0f64;
        for j in 0..dim {
            for i in 0..dim {
                let want = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - want).norm());
            }
        }
        worst
    }
}

/// Explicit `W(beta)` via `W = 2 (1 + i beta H)^{-1} - 1`.
pub fn dense_cayley<H: HermitianOperator + ?Sized>(h: &H, beta: f64) -> Result<DenseUnitary> {
    check_beta(beta)?;
    dense_cayley_signed(h, beta)
}

pub(crate) fn dense_cayley_signed<H: HermitianOperator + ?Sized>(h: &H, beta: f64) -> Result<DenseUnitary> {
    let n = h.width();
    if n > DENSE_MAX_QUBITS {
        return Err(Error::SizeCap { what: "dense Cayley transform", n, cap: DENSE_MAX_QUBITS });
    }
    let dim = 1usize << n;
    let mut a = h.to_dense();
    let ib = Complex64::new(0.0, beta);
    for j in 0..dim {
        for i in 0..dim {
            a[(i, j)] *= ib;
        }
        a[(j, j)] += ONE;
    }
    let mut w = a.partial_piv_lu().inverse();
    for j in 0..dim {
        for i in 0..dim {
            w[(i, j)] *= 2.0;
        }
        w[(j, j)] -= ONE;
    }
    Ok(DenseUnitary { n, m: w })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CayleyBackend {
    Dense,
    MatrixFree,
    /// Dense up to [`DENSE_MAX_QUBITS`], matrix-free above.
    #[default]
    Auto,
}

#[derive(Clone)]
enum Kind {
    Identity,
    Dense(DenseUnitary),
    MatrixFree { h: Arc<dyn HermitianOperator>, beta: f64, opts: SolverOptions },
}

/// A prepared `W(beta)` that can be applied repeatedly.
#[derive(Clone)]
pub struct CayleyOperator {
    n: usize,
    kind: Kind,
}

impl std::fmt::Debug for CayleyOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Identity => "identity",
            Kind::Dense(_) => "dense",
            Kind::MatrixFree { .. } => "matrix-free",
        };
        f.debug_struct("CayleyOperator").field("n", &self.n).field("kind", &kind).finish()
    }
}

impl CayleyOperator {
    pub fn new(h: Arc<dyn HermitianOperator>, beta: f64, backend: CayleyBackend, opts: SolverOptions) -> Result<Self> {
        check_beta(beta)?;
        let n = h.width();
        let kind = if beta == 0.0 {
            Kind::Identity
        } else {
            match backend {
                CayleyBackend::Dense => Kind::Dense(dense_cayley(h.as_ref(), beta)?),
                CayleyBackend::Auto if n <= DENSE_MAX_QUBITS => Kind::Dense(dense_cayley(h.as_ref(), beta)?),
                _ => Kind::MatrixFree { h, beta, opts },
            }
        };
        Ok(Self { n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, Kind::Dense(_))
    }

    /// Applies `W` (or `W^dagger`) in place.
    pub fn apply_in_place(&self, amps: &mut [Complex64], adjoint: bool, ws: &mut Workspace) -> Result<()> {
        match &self.kind {
            Kind::Identity => Ok(()),
            Kind::Dense(u) => {
                ws.ensure(amps.len());
                let tmp = &mut ws.bufs[0];
                u.apply_raw(amps, tmp, adjoint);
                amps.copy_from_slice(tmp);
                Ok(())
            }
            Kind::MatrixFree { h, beta, opts } => {
                let b = if adjoint { -beta } else { *beta };
                cayley_solve(h.as_ref(), b, amps, ws, *opts).map(|_| ())
            }
        }
    }
}
