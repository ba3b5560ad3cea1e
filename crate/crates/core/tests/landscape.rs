use proptest::prelude::*;
use rand::Rng;

use tpuzzle_core::landscape::{
    gap_delta, is_monotonic, is_separable, is_unimodal, shell_means, shells, sliding_step,
};
use tpuzzle_core::optimizer::{hill_climb, HillClimbOptions};
use tpuzzle_core::rng::stream;
use tpuzzle_core::*;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn random_map(d: usize, seed: u64) -> LossMap {
    let mut rng = stream(seed, &[0]);
    LossMap::from_fn(d, |_| rng.random::<f64>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn separable_maps_with_nonzero_weights_are_unimodal(d in 1usize..10, seed in any::<u64>()) {
        let mut rng = stream(seed, &[1]);
        let weights: Vec<f64> = (0..d)
            .map(|_| rng.random_range(0.1..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let map = LossMap::from_fn(d, |s| (0..d).map(|i| if s.get(i) { weights[i] } else { 0.0 }).sum()).unwrap();
        prop_assert!(is_separable(&map));
        prop_assert!(is_unimodal(&map));
        let argmin = map.argmin();
        prop_assert!(is_monotonic(&map, &argmin));
    }

    #[test]
    fn shell_statistics_telescope(d in 1usize..11, seed in any::<u64>()) {
        let map = random_map(d, seed);
        let star = Bitstring::random(d, &mut stream(seed, &[2]));
        let sh = shells(&map, &star);
        for (h, shell) in sh.iter().enumerate() {
            prop_assert_eq!(shell.len(), binomial(d, h));
        }
        let m = shell_means(&map, &star);
        prop_assert!((sliding_step(&map, &star) - (m[d] - m[0]) / d as f64).abs() < 1e-12);
        if let Ok(gap) = gap_delta(&map, &star) {
            let mut mid = sh[d.div_ceil(2)].clone();
            mid.sort_by(f64::total_cmp);
            let span = mid[mid.len() - 1] - mid[0];
            prop_assert!((gap - span / (mid.len() - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn unimodal_maps_lead_descent_to_the_argmin(d in 1usize..9, seed in any::<u64>()) {
        let map = random_map(d, seed);
        prop_assume!(is_unimodal(&map));
        let opts = HillClimbOptions { tol: -1.0, ..Default::default() };
        for start in 0..1u64 << d {
            let t = hill_climb(|s| Ok(map.get(s)), &Bitstring::from_index(d, start), opts).unwrap();
            prop_assert_eq!(t.final_string(), &map.argmin());
        }
    }

    #[test]
    fn binary_files_round_trip(d in 1usize..8, seed in any::<u64>()) {
        let map = random_map(d, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.bin");
        map.write_binary(&path).unwrap();
        prop_assert_eq!(LossMap::read_binary(&path).unwrap(), map);
    }
}

#[test]
fn monotonicity_follows_the_subset_order() {
    // In the second map 11 sits below 01, which it dominates.
    let map = LossMap::new(2, vec![0.0, 0.6, 0.4, 0.9]).unwrap();
    assert!(is_monotonic(&map, &Bitstring::zeros(2)));
    let broken = LossMap::new(2, vec![0.0, 0.6, 0.4, 0.5]).unwrap();
    assert!(!is_monotonic(&broken, &Bitstring::zeros(2)));
}

#[test]
fn xor_interaction_is_not_separable() {
    let map = LossMap::from_fn(2, |s| if s.get(0) ^ s.get(1) { 1.0 } else { 0.0 }).unwrap();
    assert!(!is_separable(&map));
    assert!(!is_unimodal(&map));
}
