//! Exhaustive loss tables and their classification.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{invalid, Error, Result};
use crate::puzzle::{build_instance, InstanceParams, LossKind};
use crate::rng::{derive_seed, label};
use crate::stats::Summary;

pub const ENUMERATE_MAX_BITS: usize = 16;

/// Default tolerance for strict comparisons on exact maps.
pub const STRICT_TOL: f64 = 1e-12;
/// Default tolerance for the separability test.
pub const SEPARABLE_TOL: f64 = 1e-8;

/// Largest `D` the heatmap and concentration drivers accept.
pub const EXPERIMENT_MAX_BITS: usize = 10;

/// Loss of every string, indexed by [`Bitstring::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossMap {
    d: usize,
    values: Vec<f64>,
}

impl LossMap {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        if d > ENUMERATE_MAX_BITS {
            return Err(Error::SizeCap { what: "loss map", n: d, cap: ENUMERATE_MAX_BITS });
        }
        if values.len() != 1usize << d {
            return Err(invalid(format!("loss map for D={d} needs {} values, got {}", 1usize << d, values.len())));
        }
        Ok(Self { d, values })
    }

    /// Builds a map from a closure over strings.
    pub fn from_fn(d: usize, mut f: impl FnMut(&Bitstring) -> f64) -> Result<Self> {
        Self::new(d, (0..1u64 << d).map(|i| f(&Bitstring::from_index(d, i))).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: &Bitstring) -> f64 {
        self.values[s.index() as usize]
    }

    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn argmin(&self) -> Bitstring {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("maps are nonempty");
        Bitstring::from_index(self.d, i as u64)
    }

    fn bit(&self, i: usize) -> usize {
        1usize << (self.d - 1 - i)
    }

    /// Little-endian `f64` values in index order, plus a JSON sidecar.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(path, bytes)?;
        let header = BinaryHeader {
            d: self.d,
            count: self.values.len(),
            dtype: "f64-le".into(),
            index_order: "s1-most-significant".into(),
        };
        std::fs::write(sidecar(path), serde_json::to_string_pretty(&header)? + "\n")?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let header: BinaryHeader = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
        let bytes = std::fs::read(path)?;
        if bytes.len() != header.count * 8 {
            return Err(Error::Parse(format!("expected {} bytes, found {}", header.count * 8, bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(header.d, values)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BinaryHeader {
    #[serde(rename = "D")]
    d: usize,
    count: usize,
    dtype: String,
    index_order: String,
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    name.into()
}

/// Evaluates every string, varying `s_1` fastest so that consecutive
/// queries differ in the last layers the ansatz applies.
pub fn enumerate_losses<F>(mut loss: F, d: usize) -> Result<LossMap>
where
    F: FnMut(&Bitstring) -> Result<f64>,
{
    if d == 0 || d > ENUMERATE_MAX_BITS {
        return Err(Error::SizeCap { what: "landscape enumeration", n: d, cap: ENUMERATE_MAX_BITS });
    }
    let mut values = vec![0.0; 1usize << d];
    for c in 0..1u64 << d {
        let s = Bitstring::new((0..d).map(|j| c >> j & 1 == 1).collect());
        values[s.index() as usize] = loss(&s)?;
    }
    LossMap::new(d, values)
}

/// Unique minimum, and a strictly better one-flip neighbor everywhere else.
pub fn is_unimodal(map: &LossMap) -> bool {
    is_unimodal_tol(map, STRICT_TOL)
}

pub fn is_unimodal_tol(map: &LossMap, tol: f64) -> bool {
    let min = map.values.iter().copied().fold(f64::INFINITY, f64::min);
    if map.values.iter().filter(|&&v| v <= min + tol).count() != 1 {
        return false;
    }
    map.values.iter().enumerate().all(|(x, &v)| {
        v <= min + tol || (0..map.d).any(|i| map.values[x ^ map.bit(i)] < v - tol)
    })
}

/// Loss never decreases when moving further from `s_star` in the subset
/// order on disagreement masks.
pub fn is_monotonic(map: &LossMap, s_star: &Bitstring) -> bool {
    is_monotonic_tol(map, s_star, STRICT_TOL)
}

pub fn is_monotonic_tol(map: &LossMap, s_star: &Bitstring, tol: f64) -> bool {
    let star = s_star.index() as usize;
    let size = map.values.len();
    (0..size).all(|u| {
        let here = map.values[star ^ u];
        (0..map.d).all(|i| {
            let b = map.bit(i);
            u & b != 0 || here <= map.values[star ^ u ^ b] + tol
        })
    })
}

/// Every bit's flip difference is the same in all contexts.
pub fn is_separable(map: &LossMap) -> bool {
    is_separable_tol(map, SEPARABLE_TOL)
}

pub fn is_separable_tol(map: &LossMap, tol: f64) -> bool {
    (0..map.d).all(|i| {
        let b = map.bit(i);
        let mut diffs = (0..map.values.len()).filter(|x| x & b == 0).map(|x| map.values[x | b] - map.values[x]);
        let first = diffs.next().unwrap_or(0.0);
        diffs.all(|v| (v - first).abs() <= tol)
    })
}

/// Losses grouped by Hamming distance from `s_star`.
pub fn shells(map: &LossMap, s_star: &Bitstring) -> Vec<Vec<f64>> {
    let star = s_star.index() as usize;
    let mut out = vec![Vec::new(); map.d + 1];
    for (x, &v) in map.values.iter().enumerate() {
        out[(x ^ star).count_ones() as usize].push(v);
    }
    out
}

pub fn shell_means(map: &LossMap, s_star: &Bitstring) -> Vec<f64> {
    shells(map, s_star).iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect()
}

/// Mean step between consecutive shell means.
pub fn sliding_step(map: &LossMap, s_star: &Bitstring) -> f64 {
    let m = shell_means(map, s_star);
    let total: f64 = (1..=map.d).map(|h| m[h] - m[h - 1]).sum();
    total / map.d as f64
}

/// Mean gap between sorted losses in the shell at distance `ceil(D/2)`.
pub fn gap_delta(map: &LossMap, s_star: &Bitstring) -> Result<f64> {
    let h = map.d.div_ceil(2);
    let mut shell = shells(map, s_star).swap_remove(h);
    if shell.len() < 2 {
        return Err(invalid(format!("shell at distance {h} has {} strings, need 2", shell.len())));
    }
    shell.sort_by(f64::total_cmp);
    let gaps: f64 = shell.windows(2).map(|w| w[1] - w[0]).sum();
    Ok(gaps / (shell.len() - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub unimodal: bool,
    pub monotonic: bool,
    pub separable: bool,
    pub delta_s: f64,
    /// `None` when the middle shell has fewer than two strings.
    pub delta_gap: Option<f64>,
    pub argmin: Bitstring,
}

pub fn classify(map: &LossMap, s_star: &Bitstring) -> LandscapeReport {
    LandscapeReport {
        unimodal: is_unimodal(map),
        monotonic: is_monotonic(map, s_star),
        separable: is_separable(map),
        delta_s: sliding_step(map, s_star),
        delta_gap: gap_delta(map, s_star).ok(),
        argmin: map.argmin(),
    }
}

/// Builds, compiles and enumerates one square puzzle.
pub fn puzzle_map(params: &InstanceParams, kind: LossKind) -> Result<(LossMap, Bitstring)> {
    let inst = build_instance(params, None)?;
    let puzzle = inst.compile()?;
    let mut ev = puzzle.evaluator(kind);
    let map = enumerate_losses(|s| ev.loss(s), inst.d)?;
    Ok((map, inst.s_star))
}

/// Seed of instance `index` in a sweep; independent of the beta value.
pub fn instance_seed(seed: u64, n: usize, index: usize) -> u64 {
    derive_seed(seed, &[label::INSTANCE, n as u64, index as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub betas: Vec<f64>,
    pub instances: usize,
    /// `k = k_factor * n^2`.
    pub k_factor: usize,
    pub seed: u64,
    pub loss: LossKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub beta: f64,
    pub instances: usize,
    pub non_unimodal: f64,
    pub non_separable: f64,
    pub non_monotonic: f64,
}

pub fn heatmap_experiment(cfg: &HeatmapConfig) -> Result<Vec<HeatmapRow>> {
    if cfg.d > EXPERIMENT_MAX_BITS {
        return Err(Error::SizeCap { what: "heatmap experiment", n: cfg.d, cap: EXPERIMENT_MAX_BITS });
    }
    if cfg.instances == 0 {
        return Err(invalid("need at least one instance per cell"));
    }
    let cells: Vec<(usize, usize)> =
        (0..cfg.betas.len()).flat_map(|b| (0..cfg.instances).map(move |i| (b, i))).collect();
    let reports = cells
        .par_iter()
        .map(|&(b, i)| {
            let beta = cfg.betas[b];
            let params = InstanceParams {
                n: cfg.n,
                d: cfg.d,
                beta_w: beta,
                beta_v: beta,
                k: cfg.k_factor * cfg.n * cfg.n,
                seed: instance_seed(cfg.seed, cfg.n, i),
            };
            let (map, s_star) = puzzle_map(&params, cfg.loss)?;
            Ok((is_unimodal(&map), is_separable(&map), is_monotonic(&map, &s_star)))
        })
        .collect::<Result<Vec<_>>>()?;
    let frac = |xs: &[(bool, bool, bool)], f: fn(&(bool, bool, bool)) -> bool| {
        xs.iter().filter(|x| !f(x)).count() as f64 / xs.len() as f64
    };
    Ok(cfg
        .betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let cell = &reports[b * cfg.instances..(b + 1) * cfg.instances];
            HeatmapRow {
                beta,
                instances: cfg.instances,
                non_unimodal: frac(cell, |x| x.0),
                non_separable: frac(cell, |x| x.1),
                non_monotonic: frac(cell, |x| x.2),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub instances: usize,
    pub k_factor: usize,
    pub seed: u64,
    pub loss: LossKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub n: usize,
    pub instance: usize,
    pub instance_seed: u64,
    pub delta_s: f64,
    pub delta_gap: f64,
    pub shell_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub delta_s: Summary,
    pub delta_gap: Summary,
}

/// Sliding step and shell gap over square puzzles with `n = D`.
pub fn concentration_experiment(cfg: &ConcentrationConfig) -> Result<(Vec<ConcentrationRecord>, Vec<ConcentrationRow>)> {
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n > EXPERIMENT_MAX_BITS) {
        return Err(Error::SizeCap { what: "concentration experiment", n, cap: EXPERIMENT_MAX_BITS });
    }
    let jobs: Vec<(usize, usize)> =
        cfg.sizes.iter().flat_map(|&n| (0..cfg.instances).map(move |i| (n, i))).collect();
    let records = jobs
        .par_iter()
        .map(|&(n, i)| {
            let seed = instance_seed(cfg.seed, n, i);
            let params =
                InstanceParams { n, d: n, beta_w: cfg.beta, beta_v: cfg.beta, k: cfg.k_factor * n * n, seed };
            let (map, s_star) = puzzle_map(&params, cfg.loss)?;
            Ok(ConcentrationRecord {
                n,
                instance: i,
                instance_seed: seed,
                delta_s: sliding_step(&map, &s_star),
                delta_gap: gap_delta(&map, &s_star)?,
                shell_means: shell_means(&map, &s_star),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg
        .sizes
        .iter()
        .map(|&n| {
            let of = |f: fn(&ConcentrationRecord) -> f64| {
                Summary::of(&records.iter().filter(|r| r.n == n).map(f).collect::<Vec<_>>())
            };
            ConcentrationRow { n, delta_s: of(|r| r.delta_s), delta_gap: of(|r| r.delta_gap) }
        })
        .collect();
    Ok((records, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leading_ones(d: usize, star: &Bitstring) -> LossMap {
        LossMap::from_fn(d, |s| {
            let lo = (0..d).take_while(|&i| s.get(i) == star.get(i)).count();
            1.0 - lo as f64 / d as f64
        })
        .unwrap()
    }

    #[test]
    fn leading_ones_is_unimodal_not_separable() {
        for d in 1..=6 {
            let star = Bitstring::from_index(d, 0b101101 & ((1 << d) - 1));
            let map = leading_ones(d, &star);
            assert!(is_unimodal(&map), "D={d}");
            assert_eq!(map.argmin(), star);
            if d >= 2 {
                assert!(!is_separable(&map));
            }
        }
    }

    #[test]
    fn leading_ones_three_bits_closed_form() {
        let star: Bitstring = "000".parse().unwrap();
        let map = leading_ones(3, &star);
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0];
        for (v, w) in map.values().iter().zip(want) {
            assert!((v - w).abs() < 1e-15);
        }
    }

    #[test]
    fn needle_is_not_unimodal() {
        let map = LossMap::from_fn(3, |s| if s.index() == 5 { 0.0 } else { 1.0 }).unwrap();
        assert!(!is_unimodal(&map));
    }

    #[test]
    fn hamming_map_is_monotonic() {
        let star: Bitstring = "0110".parse().unwrap();
        let map = LossMap::from_fn(4, |s| s.hamming(&star) as f64 / 4.0).unwrap();
        assert!(is_monotonic(&map, &star));
        assert!(is_separable(&map));
    }

    #[test]
    fn one_bit_maps_are_monotonic() {
        let map = LossMap::new(1, vec![0.3, 0.0]).unwrap();
        assert!(is_monotonic(&map, &"1".parse().unwrap()));
    }

    #[test]
    fn additive_and_product_maps() {
        let w = [0.1, 0.3, 0.2];
        let add = LossMap::from_fn(3, |s| (0..3).map(|i| w[i] * s.get(i) as u8 as f64).sum()).unwrap();
        assert!(is_separable(&add));
        let prod = LossMap::from_fn(2, |s| (s.get(0) && s.get(1)) as u8 as f64).unwrap();
        assert!(!is_separable(&prod));
    }

    #[test]
    fn sliding_step_and_gap_examples() {
        let star: Bitstring = "00".parse().unwrap();
        let map = LossMap::new(2, vec![0.0, 0.2, 0.4, 0.5]).unwrap();
        assert!((sliding_step(&map, &star) - 0.25).abs() < 1e-15);
        let map3 = LossMap::from_fn(3, |s| match s.index() {
            0b011 => 0.2,
            0b101 => 0.9,
            0b110 => 0.5,
            _ => 0.0,
        })
        .unwrap();
        assert!((gap_delta(&map3, &"000".parse().unwrap()).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn gap_needs_two_strings() {
        let map = LossMap::new(1, vec![0.0, 1.0]).unwrap();
        assert!(gap_delta(&map, &"0".parse().unwrap()).is_err());
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_losses(|_| Ok(0.0), 17), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.bin");
        let map = LossMap::from_fn(3, |s| s.index() as f64 / 7.0).unwrap();
        map.write_binary(&path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 64);
        assert_eq!(LossMap::read_binary(&path).unwrap(), map);
    }
}
