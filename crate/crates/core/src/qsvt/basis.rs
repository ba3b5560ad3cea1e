use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::hermitian::PauliSum;
use crate::pauli::{sample_offdiagonal_strings, Phase, PauliString};

/// Mutually commuting, independent, self-adjoint off-diagonal strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingBasis {
    n: usize,
    strings: Vec<PauliString>,
}

/// Rank over GF(2) of the symplectic vectors `(x | z)`.
fn symplectic_rank(strings: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = strings
        .iter()
        .map(|p| {
            let (x, z) = p.masks();
            ((x as u128) << 64) | z as u128
        })
        .collect();
    let mut rank = 0;
    for bit in (0..128).rev() {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else { continue };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

impl CommutingBasis {
    pub fn new(strings: Vec<PauliString>) -> Result<Self> {
        let Some(first) = strings.first() else {
            return Err(invalid("a commuting basis needs at least one string"));
        };
        let n = first.len();
        for p in &strings {
            if p.len() != n {
                return Err(Error::WidthMismatch { expected: n, got: p.len() });
            }
            if p.phase() != Phase::ONE || !p.is_off_diagonal() {
                return Err(invalid(format!("basis element {p} must be off-diagonal with phase +1")));
            }
            if p.letters().contains(&crate::pauli::Pauli::Z) {
                return Err(invalid(format!("basis element {p} contains Z")));
            }
        }
        for (i, a) in strings.iter().enumerate() {
            for b in &strings[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(invalid(format!("{a} and {b} anticommute")));
                }
            }
        }
        if symplectic_rank(&strings) != strings.len() {
            return Err(invalid("basis elements are not independent"));
        }
        Ok(Self { n, strings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.strings.len()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    /// All `2^K` products of subsets, with their signs folded into the phase.
    pub fn generated(&self) -> Vec<PauliString> {
        (0..1usize << self.k())
            .map(|mask| {
                self.strings
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .fold(PauliString::identity(self.n), |acc, (_, b)| acc.mul(b).expect("equal widths"))
            })
            .collect()
    }
}

/// Draws `K` commuting strings by rejection; `K <= n` is required.
pub fn build_commuting_basis<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<CommutingBasis> {
    const ATTEMPTS: usize = 10_000;
    if k == 0 || k > n || n > 64 {
        return Err(invalid(format!("need 1 <= K <= n <= 64, got K={k}, n={n}")));
    }
    for _ in 0..ATTEMPTS {
        let mut chosen: Vec<PauliString> = Vec::with_capacity(k);
        for _ in 0..64 {
            let cand = sample_offdiagonal_strings(n, 1, false, rng)?.pop().unwrap();
            let mut trial = chosen.clone();
            trial.push(cand.clone());
            if chosen.iter().all(|c| c.commutes_with(&cand)) && symplectic_rank(&trial) == trial.len() {
                chosen = trial;
                if chosen.len() == k {
                    return CommutingBasis::new(chosen);
                }
            }
        }
    }
    Err(Error::BasisConstruction(ATTEMPTS))
}

/// `prod_j (I + B_j)/2` expanded as a Pauli sum; a projector of rank `2^{n-K}`.
pub fn nested_hermitian(basis: &CommutingBasis) -> PauliSum {
    let scale = 1.0 / (1u64 << basis.k()) as f64;
    let terms = basis
        .generated()
        .into_iter()
        .map(|p| {
            let sign = if p.phase() == Phase::MINUS_ONE { -1.0 } else { 1.0 };
            (p.with_phase(Phase::ONE), sign * scale)
        })
        .collect();
    PauliSum::new(basis.n(), terms).expect("products of commuting self-adjoint strings are self-adjoint")
}
