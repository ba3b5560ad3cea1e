//! Elementary gates applied in place, without forming dense matrices.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::Statevector;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    /// `exp(-i theta Y / 2)`.
    Ry(usize, f64),
    /// `diag(exp(-i phi/2), exp(i phi/2))`.
    Rz(usize, f64),
    Unitary1(usize, Mat2),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn ry_matrix(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

pub fn rz_matrix(phi: f64) -> Mat2 {
    [[Complex64::from_polar(1.0, -phi / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, phi / 2.0)]]
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::T(q)
            | Gate::Tdg(q)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::Unitary1(q, _) => vec![q],
            Gate::Cz(a, b) => vec![a, b],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::T(q) => Gate::Tdg(q),
            Gate::Tdg(q) => Gate::T(q),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Unitary1(q, m) => Gate::Unitary1(q, mat_adjoint(&m)),
            g => g,
        }
    }

    /// The 2x2 matrix of a single-qubit gate.
    pub fn matrix1(&self) -> Option<Mat2> {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Some(match *self {
            Gate::H(_) => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            Gate::X(_) => [[z, one], [one, z]],
            Gate::S(_) => [[one, z], [z, c(0.0, 1.0)]],
            Gate::Sdg(_) => [[one, z], [z, c(0.0, -1.0)]],
            Gate::T(_) => [[one, z], [z, Complex64::from_polar(1.0, FRAC_PI_4)]],
            Gate::Tdg(_) => [[one, z], [z, Complex64::from_polar(1.0, -FRAC_PI_4)]],
            Gate::Ry(_, t) => ry_matrix(t),
            Gate::Rz(_, t) => rz_matrix(t),
            Gate::Unitary1(_, m) => m,
            _ => return None,
        })
    }

    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        let n = state.n();
        self.apply_amps(n, state.amplitudes_mut())
    }

    /// Applies the gate to a raw amplitude buffer of an `n`-qubit register.
    pub fn apply_amps(&self, n: usize, amps: &mut [Complex64]) -> Result<()> {
        for q in self.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
        }
        let bit = |q: usize| 1usize << (n - 1 - q);
        match *self {
            Gate::S(q) => phase_on_one(amps, bit(q), c(0.0, 1.0)),
            Gate::Sdg(q) => phase_on_one(amps, bit(q), c(0.0, -1.0)),
            Gate::T(q) => phase_on_one(amps, bit(q), Complex64::from_polar(1.0, FRAC_PI_4)),
            Gate::Tdg(q) => phase_on_one(amps, bit(q), Complex64::from_polar(1.0, -FRAC_PI_4)),
            Gate::Cz(a, b) => {
                if a == b {
                    return Err(crate::error::invalid("CZ needs two distinct qubits"));
                }
                let m = bit(a) | bit(b);
                for (x, v) in amps.iter_mut().enumerate() {
                    if x & m == m {
                        *v = -*v;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                if control == target {
                    return Err(crate::error::invalid("CNOT needs two distinct qubits"));
                }
                let (cb, tb) = (bit(control), bit(target));
                for x in 0..amps.len() {
                    if x & cb != 0 && x & tb == 0 {
                        amps.swap(x, x | tb);
                    }
                }
            }
            Gate::X(q) => {
                let b = bit(q);
                for x in 0..amps.len() {
                    if x & b == 0 {
                        amps.swap(x, x | b);
                    }
                }
            }
            _ => {
                let m = self.matrix1().expect("single-qubit gate");
                apply_mat2(amps, bit(self.qubits()[0]), &m);
            }
        }
        Ok(())
    }
}

fn phase_on_one(amps: &mut [Complex64], bit: usize, phase: Complex64) {
    for (x, v) in amps.iter_mut().enumerate() {
        if x & bit != 0 {
            *v *= phase;
        }
    }
}

/// Applies a 2x2 matrix to the qubit addressed by `bit`.
pub(crate) fn apply_mat2(amps: &mut [Complex64], bit: usize, m: &Mat2) {
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for x in base..base + bit {
            let a0 = amps[x];
            let a1 = amps[x + bit];
            amps[x] = m[0][0] * a0 + m[0][1] * a1;
            amps[x + bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * bit;
    }
}

/// Applies a gate sequence in order.
pub fn apply_all(gates: &[Gate], state: &mut Statevector) -> Result<()> {
    gates.iter().try_for_each(|g| g.apply(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn t_on_one() {
        let mut s = Statevector::basis(1, 1).unwrap();
        Gate::T(0).apply(&mut s).unwrap();
        let want = Complex64::from_polar(1.0, PI / 4.0);
        assert!((s.amplitudes()[1] - want).norm() < 1e-15);
    }

    #[test]
    fn cz_on_11() {
        let mut s = Statevector::basis(2, 3).unwrap();
        Gate::Cz(0, 1).apply(&mut s).unwrap();
        assert_eq!(s.amplitudes()[3], c(-1.0, 0.0));
    }

    #[test]
    fn ry_pi_flips_zero() {
        let mut s = Statevector::zero(1);
        Gate::Ry(0, PI).apply(&mut s).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cnot_uses_control_bit() {
        let mut s = Statevector::basis(2, 0b10).unwrap();
        Gate::Cnot { control: 0, target: 1 }.apply(&mut s).unwrap();
        assert_eq!(s.amplitudes()[0b11], c(1.0, 0.0));
        let mut s = Statevector::basis(2, 0b01).unwrap();
        Gate::Cnot { control: 0, target: 1 }.apply(&mut s).unwrap();
        assert_eq!(s.amplitudes()[0b01], c(1.0, 0.0));
    }

    #[test]
    fn out_of_range_target() {
        let mut s = Statevector::zero(2);
        assert!(matches!(Gate::H(2).apply(&mut s), Err(Error::QubitOutOfRange { index: 2, n: 2 })));
    }

    #[test]
    fn adjoint_inverts() {
        let mut rng = crate::rng::stream(1, &[]);
        let start = Statevector::random(3, &mut rng);
        let gates = [
            Gate::H(0),
            Gate::T(1),
            Gate::S(2),
            Gate::Ry(0, 0.3),
            Gate::Rz(2, -1.1),
            Gate::Cz(0, 2),
            Gate::Cnot { control: 1, target: 0 },
        ];
        let mut s = start.clone();
        apply_all(&gates, &mut s).unwrap();
        for g in gates.iter().rev() {
            g.adjoint().apply(&mut s).unwrap();
        }
        assert!(s.max_abs_diff(&start) < 1e-14);
    }
}
