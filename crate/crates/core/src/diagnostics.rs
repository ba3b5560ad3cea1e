//! Entanglement and magic diagnostics of puzzle and single-block states.

use num_complex::Complex64;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::cayley_apply;
use crate::clifford::{sample_clifford, CliffordCircuit};
use crate::error::{invalid, Error, Result};
use crate::hermitian::RandomHermitian;
use crate::landscape::instance_seed;
use crate::pauli::sample_uniform_string;
use crate::puzzle::{build_instance, InstanceParams};
use crate::rng::{label, stream};
use crate::state::{subsystem_purity, Statevector};
use crate::stats::{mean, std_dev, Summary};

/// Exhaustive stabilizer norms sum over `4^n` strings; capped here.
pub const EXHAUSTIVE_MAGIC_MAX_QUBITS: usize = 8;

/// Above this many qubits the pair average uses a random subset of pairs.
pub const ALL_PAIRS_MAX_QUBITS: usize = 10;
pub const SAMPLED_PAIRS: usize = 50;

/// `-log2 tr(rho_A^2)` for `A` = the first `l` qubits.
pub fn renyi2(state: &Statevector, l: usize) -> Result<f64> {
    if l == 0 || l >= state.n() {
        return Err(invalid(format!("partition length must satisfy 1 <= L < {}, got {l}", state.n())));
    }
    renyi2_subset(state, &(0..l).collect::<Vec<_>>())
}

pub fn renyi2_subset(state: &Statevector, subset: &[usize]) -> Result<f64> {
    Ok((-subsystem_purity(state, subset)?.log2()).max(0.0))
}

/// `tr(rho_ij^2) - 1/4` for one pair.
pub fn pair_purity_excess(state: &Statevector, i: usize, j: usize) -> Result<f64> {
    Ok(subsystem_purity(state, &[i, j])? - 0.25)
}

/// Qubit pairs used for the two-body average.
pub fn purity_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if n <= ALL_PAIRS_MAX_QUBITS {
        return all;
    }
    let mut picks = sample(&mut stream(seed, &[label::PAIRS]), all.len(), SAMPLED_PAIRS).into_vec();
    picks.sort_unstable();
    picks.into_iter().map(|p| all[p]).collect()
}

/// Mean over qubit pairs of `tr(rho_ij^2) - 1/4`.
pub fn two_body_purity_excess(state: &Statevector, seed: u64) -> Result<f64> {
    if state.n() < 2 {
        return Err(invalid("two-body purity needs at least two qubits"));
    }
    let pairs = purity_pairs(state.n(), seed);
    let vals = pairs.iter().map(|&(i, j)| pair_purity_excess(state, i, j)).collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum MagicMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagicEstimate {
    pub value: f64,
    pub mode: MagicMode,
    pub sample_count: usize,
    /// Standard error of a sampled estimate; zero when exhaustive.
    pub std_error: f64,
}

/// In-place Walsh-Hadamard transform without normalization.
fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (p, q) = (*x, *y);
                *x = p + q;
                *y = p - q;
            }
        }
        h *= 2;
    }
}

/// `M(psi) = 2^{-n} sum_P |<psi|P|psi>|` over all `4^n` strings, or its
/// unbiased estimate `2^n * mean |<P>|` over uniformly sampled strings.
pub fn stabilizer_norm(state: &Statevector, mode: MagicMode) -> Result<MagicEstimate> {
    let n = state.n();
    match mode {
        MagicMode::Exhaustive => {
            if n > EXHAUSTIVE_MAGIC_MAX_QUBITS {
                return Err(Error::SizeCap { what: "exhaustive stabilizer norm", n, cap: EXHAUSTIVE_MAGIC_MAX_QUBITS });
            }
            let psi = state.amplitudes();
            let dim = psi.len();
            let total: f64 = (0..dim)
                .into_par_iter()
                .map(|flip| {
                    let mut f: Vec<Complex64> = (0..dim).map(|x| psi[x ^ flip].conj() * psi[x]).collect();
                    walsh_hadamard(&mut f);
                    f.iter().map(|v| v.norm()).sum::<f64>()
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            Ok(MagicEstimate { value: total / dim as f64, mode, sample_count: dim * dim, std_error: 0.0 })
        }
        MagicMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(invalid("sampled stabilizer norm needs at least one sample"));
            }
            let mut rng = stream(seed, &[label::PAULI_SAMPLE]);
            let vals = (0..samples)
                .map(|_| Ok(sample_uniform_string(n, &mut rng).expectation(state)?.norm()))
                .collect::<Result<Vec<f64>>>()?;
            let scale = (1u64 << n) as f64;
            Ok(MagicEstimate {
                value: scale * mean(&vals),
                mode,
                sample_count: samples,
                std_error: scale * std_dev(&vals) / (samples as f64).sqrt(),
            })
        }
    }
}

/// `1 - ((1 - b^2)/(1 + b^2))^2`, the single-block loss for a flat spectrum.
pub fn single_block_reference(beta: f64) -> f64 {
    let r = (1.0 - beta * beta) / (1.0 + beta * beta);
    1.0 - r * r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBlockConfig {
    pub n: usize,
    pub k: usize,
    pub betas: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    /// Also compute `S_2` for every cut `L = 1..n-1`.
    pub renyi_profile: bool,
    /// Clifford samples for the stabilizer fidelity; 0 skips it.
    pub clifford_samples: usize,
    pub clifford_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBlockRow {
    pub beta: f64,
    pub loss: Summary,
    pub reference: f64,
    /// Mean `S_2` for `L = 1..n-1`; empty unless requested.
    pub renyi: Vec<f64>,
    /// Mean `1 - F_stab`; `None` unless Clifford samples were requested.
    pub non_clifford: Option<f64>,
}

pub const SINGLE_BLOCK_MAX_QUBITS: usize = 12;

/// Statistics of `W(beta)|0>` for independently drawn Hermitians; the same
/// Hermitians are reused at every beta.
pub fn single_block_scan(cfg: &SingleBlockConfig) -> Result<Vec<SingleBlockRow>> {
    if cfg.n == 0 || cfg.n > SINGLE_BLOCK_MAX_QUBITS {
        return Err(Error::SizeCap { what: "single-block scan", n: cfg.n, cap: SINGLE_BLOCK_MAX_QUBITS });
    }
    if cfg.instances == 0 {
        return Err(invalid("need at least one instance"));
    }
    let hs = (0..cfg.instances)
        .map(|i| RandomHermitian::sample(cfg.n, cfg.k, &mut stream(instance_seed(cfg.seed, cfg.n, i), &[label::W_BLOCK])))
        .collect::<Result<Vec<_>>>()?;
    let cliffords: Vec<CliffordCircuit> = (0..cfg.clifford_samples)
        .map(|j| sample_clifford(cfg.n, cfg.clifford_depth, &mut stream(cfg.seed, &[label::CLIFFORD, j as u64])))
        .collect();
    let stab_states = cliffords.iter().map(|c| c.prepare()).collect::<Result<Vec<_>>>()?;
    cfg.betas
        .iter()
        .map(|&beta| {
            let per = hs
                .par_iter()
                .map(|h| {
                    let psi = cayley_apply(h, beta, &Statevector::zero(cfg.n))?;
                    let loss = (1.0 - psi.amplitudes()[0].norm_sqr()).clamp(0.0, 1.0);
                    let renyi = if cfg.renyi_profile && cfg.n > 1 {
                        (1..cfg.n).map(|l| renyi2(&psi, l)).collect::<Result<Vec<_>>>()?
                    } else {
                        Vec::new()
                    };
                    let nc = if cfg.clifford_samples > 0 {
                        let mut best = psi.amplitudes()[0].norm_sqr();
                        for s in &stab_states {
                            best = best.max(s.fidelity(&psi)?);
                        }
                        Some((1.0 - best).max(0.0))
                    } else {
                        None
                    };
                    Ok((loss, renyi, nc))
                })
                .collect::<Result<Vec<_>>>()?;
            let losses: Vec<f64> = per.iter().map(|p| p.0).collect();
            let renyi = if cfg.renyi_profile && cfg.n > 1 {
                (0..cfg.n - 1).map(|l| mean(&per.iter().map(|p| p.1[l]).collect::<Vec<_>>())).collect()
            } else {
                Vec::new()
            };
            let non_clifford =
                (cfg.clifford_samples > 0).then(|| mean(&per.iter().map(|p| p.2.unwrap()).collect::<Vec<_>>()));
            Ok(SingleBlockRow { beta, loss: Summary::of(&losses), reference: single_block_reference(beta), renyi, non_clifford })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessConfig {
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub instances: usize,
    pub k_factor: usize,
    pub seed: u64,
    /// Samples for the stabilizer norm above the exhaustive cap.
    pub magic_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRecord {
    pub n: usize,
    pub instance: usize,
    pub instance_seed: u64,
    pub purity_excess: f64,
    pub magic: MagicEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRow {
    pub n: usize,
    pub purity_excess: Summary,
    pub magic: Summary,
}

/// Two-body purity excess and stabilizer norm of puzzle targets with `n = D`.
pub fn hardness_experiment(cfg: &HardnessConfig) -> Result<(Vec<HardnessRecord>, Vec<HardnessRow>)> {
    let jobs: Vec<(usize, usize)> =
        cfg.sizes.iter().flat_map(|&n| (0..cfg.instances).map(move |i| (n, i))).collect();
    let records = jobs
        .par_iter()
        .map(|&(n, i)| {
            let seed = instance_seed(cfg.seed, n, i);
            let params =
                InstanceParams { n, d: n, beta_w: cfg.beta, beta_v: cfg.beta, k: cfg.k_factor * n * n, seed };
            let puzzle = build_instance(&params, None)?.compile()?;
            let target = puzzle.target();
            let mode = if n <= EXHAUSTIVE_MAGIC_MAX_QUBITS {
                MagicMode::Exhaustive
            } else {
                MagicMode::Sampled { samples: cfg.magic_samples, seed }
            };
            Ok(HardnessRecord {
                n,
                instance: i,
                instance_seed: seed,
                purity_excess: two_body_purity_excess(target, seed)?,
                magic: stabilizer_norm(target, mode)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg
        .sizes
        .iter()
        .map(|&n| {
            let of = |f: fn(&HardnessRecord) -> f64| {
                Summary::of(&records.iter().filter(|r| r.n == n).map(f).collect::<Vec<_>>())
            };
            HardnessRow { n, purity_excess: of(|r| r.purity_excess), magic: of(|r| r.magic.value) }
        })
        .collect();
    Ok((records, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Gate;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell_pairs(pairs: usize) -> Statevector {
        let mut s = Statevector::zero(2 * pairs);
        for p in 0..pairs {
            Gate::H(2 * p).apply(&mut s).unwrap();
            Gate::Cnot { control: 2 * p, target: 2 * p + 1 }.apply(&mut s).unwrap();
        }
        s
    }

    fn ghz(n: usize) -> Statevector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[(1 << n) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Statevector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn renyi_examples() {
        assert!(renyi2(&Statevector::basis(3, 5).unwrap(), 1).unwrap().abs() < 1e-12);
        assert!((renyi2(&bell_pairs(1), 1).unwrap() - 1.0).abs() < 1e-12);
        for l in 1..5 {
            assert!((renyi2(&ghz(5), l).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(renyi2(&ghz(3), 0).is_err());
        assert!(renyi2(&ghz(3), 3).is_err());
    }

    #[test]
    fn purity_excess_examples() {
        assert!((two_body_purity_excess(&Statevector::zero(5), 0).unwrap() - 0.75).abs() < 1e-12);
        // Qubits 0 and 2 belong to different Bell pairs: both marginals are maximally mixed.
        assert!(pair_purity_excess(&bell_pairs(2), 0, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pair_sampling() {
        assert_eq!(purity_pairs(4, 0).len(), 6);
        assert_eq!(purity_pairs(12, 0).len(), SAMPLED_PAIRS);
    }

    #[test]
    fn magic_examples() {
        let m = stabilizer_norm(&Statevector::zero(4), MagicMode::Exhaustive).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
        let mut t_plus = Statevector::zero(1);
        Gate::H(0).apply(&mut t_plus).unwrap();
        Gate::T(0).apply(&mut t_plus).unwrap();
        let m = stabilizer_norm(&t_plus, MagicMode::Exhaustive).unwrap();
        assert!((m.value - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(matches!(
            stabilizer_norm(&Statevector::zero(9), MagicMode::Exhaustive),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn reference_curve() {
        assert_eq!(single_block_reference(0.0), 0.0);
        assert!((single_block_reference(1.0) - 1.0).abs() < 1e-15);
    }
}
