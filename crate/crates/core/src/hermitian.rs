//! Hermitian operators given as real combinations of Pauli strings.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::pauli::{apply_masks_add, check_width, sample_offdiagonal_strings, PauliString};
use crate::state::Statevector;

/// A Hermitian operator that can act on raw amplitude buffers.
pub trait HermitianOperator: Send + Sync {
    fn width(&self) -> usize;

    /// Overwrites `out` with `H * input`.
    fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]);

    /// Dense `2^n x 2^n` matrix; callers keep `n` small.
    fn to_dense(&self) -> Mat<Complex64> {
        let dim = 1usize << self.width();
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            e[j] = Complex64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy)]
struct MaskTerm {
    flip: u64,
    sign: u64,
    coef: Complex64,
}

/// `sum_j c_j P_j` with real `c_j` and Hermitian `P_j`.
#[derive(Debug, Clone)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(PauliString, f64)>,
    masks: Vec<MaskTerm>,
}

impl PauliSum {
    pub fn new(n: usize, terms: Vec<(PauliString, f64)>) -> Result<Self> {
        for (p, _) in &terms {
            check_width(n, p.len())?;
            if !p.is_hermitian() {
                return Err(invalid(format!("string {p} is not self-adjoint")));
            }
        }
        let masks = terms
            .iter()
            .map(|(p, c)| {
                let (flip, sign) = p.masks();
                MaskTerm { flip, sign, coef: p.coefficient() * *c }
            })
            .collect();
        Ok(Self { n, terms, masks })
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn apply(&self, state: &Statevector) -> Result<Vec<Complex64>> {
        check_width(self.n, state.n())?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_into(state.amplitudes(), &mut out);
        Ok(out)
    }
}

impl HermitianOperator for PauliSum {
    fn width(&self) -> usize {
        self.n
    }

    fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for t in &self.masks {
            apply_masks_add(t.flip, t.sign, t.coef, input, out);
        }
    }

    fn to_dense(&self) -> Mat<Complex64> {
        let dim = 1usize << self.n;
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for t in &self.masks {
            for x in 0..dim as u64 {
                let v = if (x & t.sign).count_ones() % 2 == 1 { -t.coef } else { t.coef };
                m[((x ^ t.flip) as usize, x as usize)] += v;
            }
        }
        m
    }
}

/// `(1/sqrt(k)) sum_j P_j` over `k` off-diagonal strings from `{I,X,Y}^n`.
#[derive(Debug, Clone)]
pub struct RandomHermitian {
    strings: Vec<PauliString>,
    sum: PauliSum,
}

impl RandomHermitian {
    pub fn from_strings(n: usize, strings: Vec<PauliString>) -> Result<Self> {
        if strings.is_empty() {
            return Err(invalid("a random Hermitian needs at least one string"));
        }
        for p in &strings {
            check_width(n, p.len())?;
            if !p.is_off_diagonal() {
                return Err(invalid(format!("string {p} is diagonal")));
            }
        }
        let scale = 1.0 / (strings.len() as f64).sqrt();
        let sum = PauliSum::new(n, strings.iter().map(|p| (p.clone(), scale)).collect())?;
        Ok(Self { strings, sum })
    }

    /// Samples `k` strings with replacement.
    pub fn sample<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        Self::from_strings(n, sample_offdiagonal_strings(n, k, false, rng)?)
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn normalization(&self) -> f64 {
        1.0 / (self.strings.len() as f64).sqrt()
    }

    pub fn as_pauli_sum(&self) -> &PauliSum {
        &self.sum
    }

    /// `H|psi>`, not normalized.
    pub fn apply_to(&self, state: &Statevector) -> Result<Vec<Complex64>> {
        self.sum.apply(state)
    }
}

impl HermitianOperator for RandomHermitian {
    fn width(&self) -> usize {
        self.sum.n
    }

    fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.sum.apply_into(input, out)
    }

    fn to_dense(&self) -> Mat<Complex64> {
        self.sum.to_dense()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h(strings: &[&str]) -> RandomHermitian {
        let ps: Vec<PauliString> = strings.iter().map(|s| s.parse().unwrap()).collect();
        RandomHermitian::from_strings(ps[0].len(), ps).unwrap()
    }

    #[test]
    fn single_x() {
        let out = h(&["X"]).apply_to(&Statevector::zero(1)).unwrap();
        assert_eq!(out[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn x_plus_y() {
        let out = h(&["X", "Y"]).apply_to(&Statevector::zero(1)).unwrap();
        let want = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((out[1] - want).norm() < 1e-15);
        assert!(out[0].norm() < 1e-15);
    }

    #[test]
    fn diagonal_strings_are_rejected() {
        let z: PauliString = "ZI".parse().unwrap();
        assert!(RandomHermitian::from_strings(2, vec![z]).is_err());
        let x: PauliString = "X".parse().unwrap();
        assert!(RandomHermitian::from_strings(2, vec![x]).is_err());
    }

    #[test]
    fn dense_is_hermitian() {
        let mut rng = crate::rng::stream(5, &[]);
        let op = RandomHermitian::sample(4, 20, &mut rng).unwrap();
        let m = op.to_dense();
        for i in 0..16 {
            for j in 0..16 {
                assert!((m[(i, j)] - m[(j, i)].conj()).norm() < 1e-14);
            }
        }
    }
}
