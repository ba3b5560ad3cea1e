//! Pauli strings and their action on statevectors.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::state::Statevector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-site product `self * rhs` as (phase exponent of i, letter).
    fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// A unit phase, stored as a power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k & 3)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) & 3)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

/// A tensor product of single-qubit Paulis with a unit phase.
///
/// Letter `j` acts on qubit `j`; qubit 0 is the most significant bit of a
/// basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: Phase) -> Self {
        Self { letters, phase }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n], Phase::ONE)
    }

    /// Builds the string `X^x Z^z` pattern from bit masks, with `+1` phase and
    /// `Y` wherever both masks are set.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let letters = (0..n)
            .map(|j| {
                let bit = 1u64 << (n - 1 - j);
                match (x & bit != 0, z & bit != 0) {
                    (false, false) => Pauli::I,
                    (true, false) => Pauli::X,
                    (true, true) => Pauli::Y,
                    (false, true) => Pauli::Z,
                }
            })
            .collect();
        Self::new(letters, Phase::ONE)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// True when at least one letter is `X` or `Y`.
    pub fn is_off_diagonal(&self) -> bool {
        self.letters.iter().any(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Self-adjoint iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bit masks `(flip, sign)`: positions carrying X/Y and Y/Z respectively.
    pub fn masks(&self) -> (u64, u64) {
        let n = self.letters.len();
        let mut flip = 0u64;
        let mut sign = 0u64;
        for (j, p) in self.letters.iter().enumerate() {
            let bit = 1u64 << (n - 1 - j);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign)
    }

    /// Overall scalar `phase * i^{#Y}` multiplying the sign pattern.
    pub fn coefficient(&self) -> Complex64 {
        let ny = self.letters.iter().filter(|&&p| p == Pauli::Y).count() as u8;
        (self.phase * Phase::from_power(ny)).to_complex()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.letters.clone(), self.phase.conj())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    pub fn mul(&self, rhs: &PauliString) -> Result<PauliString> {
        if self.len() != rhs.len() {
            return Err(Error::WidthMismatch { expected: self.len(), got: rhs.len() });
        }
        let mut power = self.phase.power() + rhs.phase.power();
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                power += k;
                p
            })
            .collect();
        Ok(PauliString::new(letters, Phase::from_power(power)))
    }

    /// Returns `P|psi>`.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_width(self.len(), state.n())?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_add(state.amplitudes(), &mut out, 1.0);
        Ok(Statevector::from_raw(state.n(), out))
    }

    /// Accumulates `scale * P * input` into `out`.
    pub(crate) fn apply_add(&self, input: &[Complex64], out: &mut [Complex64], scale: f64) {
        let (flip, sign) = self.masks();
        let c = self.coefficient() * scale;
        apply_masks_add(flip, sign, c, input, out);
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, state: &Statevector) -> Result<Complex64> {
        check_width(self.len(), state.n())?;
        let (flip, sign) = self.masks();
        let a = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &ax) in a.iter().enumerate() {
            let x = x as u64;
            let v = a[(x ^ flip) as usize].conj() * ax;
            if (x & sign).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        Ok(acc * self.coefficient())
    }
}

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::WidthMismatch { expected, got });
    }
    Ok(())
}

/// `out[x ^ flip] += c * (-1)^{|x & sign|} * input[x]`.
pub(crate) fn apply_masks_add(flip: u64, sign: u64, c: Complex64, input: &[Complex64], out: &mut [Complex64]) {
    for (x, &v) in input.iter().enumerate() {
        let x = x as u64;
        let t = c * v;
        let y = (x ^ flip) as usize;
        if (x & sign).count_ones() % 2 == 1 {
            out[y] -= t;
        } else {
            out[y] += t;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional `+`, `-`, `+i`, `-i` or `i` prefix followed by
    /// letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else {
            (Phase::ONE, s)
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string '{s}'")));
        }
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("bad Pauli letter '{other}' in '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::new(letters, phase))
    }
}

/// Number of off-diagonal strings over `{I,X,Y}^n`, i.e. `3^n - 1`.
pub fn offdiagonal_count(n: usize) -> u128 {
    if n >= 80 {
        return u128::MAX;
    }
    3u128.pow(n as u32) - 1
}

/// Draws `k` strings uniformly from `{I,X,Y}^n` minus the identity.
///
/// With `dedup` the strings are distinct, which requires `k <= 3^n - 1`.
pub fn sample_offdiagonal_strings<R: Rng + ?Sized>(n: usize, k: usize, dedup: bool, rng: &mut R) -> Result<Vec<PauliString>> {
    if n == 0 || k == 0 {
        return Err(invalid(format!("need n >= 1 and k >= 1, got n={n}, k={k}")));
    }
    let available = offdiagonal_count(n);
    if dedup && (k as u128) > available {
        return Err(Error::TooManyStrings { requested: k, n, available });
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| match rng.random_range(0..3u8) {
                0 => Pauli::I,
                1 => Pauli::X,
                _ => Pauli::Y,
            })
            .collect();
        let p = PauliString::new(letters, Phase::ONE);
        if p.is_identity() || (dedup && !seen.insert(p.clone())) {
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

/// Draws a uniformly random string over `{I,X,Y,Z}^n` with `+1` phase.
pub fn sample_uniform_string<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    let letters = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4usize)]).collect();
    PauliString::new(letters, Phase::ONE)
}
