use proptest::prelude::*;
use rand::Rng;

use tpuzzle_core::landscape::is_unimodal;
use tpuzzle_core::optimizer::{hill_climb, random_search, HillClimbOptions};
use tpuzzle_core::rng::stream;
use tpuzzle_core::*;

/// A unimodal map: weighted Hamming distance to `target` plus a small
/// interaction that never reverses a descent direction.
fn unimodal_map(d: usize, seed: u64) -> (LossMap, Bitstring) {
    let mut rng = stream(seed, &[]);
    let target = Bitstring::random(d, &mut rng);
    let weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..1.5)).collect();
    let map = LossMap::from_fn(d, |s| {
        let dist: f64 = (0..d).filter(|&i| s.get(i) != target.get(i)).map(|i| weights[i]).sum();
        dist + 0.05 * dist * dist
    })
    .unwrap();
    (map, target)
}

fn exact(opts_tol: f64) -> HillClimbOptions {
    HillClimbOptions { tol: opts_tol, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_moves_strictly_decrease(d in 1usize..9, seed in any::<u64>()) {
        let mut rng = stream(seed, &[1]);
        let map = LossMap::from_fn(d, |_| rng.random::<f64>()).unwrap();
        let s0 = Bitstring::random(d, &mut stream(seed, &[2]));
        let t = hill_climb(|s| Ok(map.get(s)), &s0, exact(-1.0)).unwrap();
        let losses: Vec<f64> = t.path.iter().map(|s| map.get(s)).collect();
        prop_assert!(losses.windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(t.f_evals, (d * t.sweep_count()) as u64);
        for w in t.path.windows(2) {
            prop_assert_eq!(w[0].hamming(&w[1]), 1);
        }
    }

    #[test]
    fn unimodal_maps_reach_the_global_minimum(d in 1usize..10, seed in any::<u64>()) {
        let (map, target) = unimodal_map(d, seed);
        prop_assert!(is_unimodal(&map));
        let s0 = Bitstring::random(d, &mut stream(seed, &[3]));
        let t = hill_climb(|s| Ok(map.get(s)), &s0, exact(-1.0)).unwrap();
        prop_assert_eq!(t.final_string(), &target);
        prop_assert!(t.sweep_count() <= d + 1);
        prop_assert_eq!(t.termination, Termination::NoImprovement);
    }

    #[test]
    fn runs_are_deterministic(d in 1usize..8, seed in any::<u64>()) {
        let quantized = LossMap::from_fn(d, {
            let mut rng = stream(seed, &[4]);
            move |_| rng.random_range(0..4u8) as f64
        }).unwrap();
        let s0 = Bitstring::random(d, &mut stream(seed, &[5]));
        let a = hill_climb(|s| Ok(quantized.get(s)), &s0, exact(-1.0)).unwrap();
        let b = hill_climb(|s| Ok(quantized.get(s)), &s0, exact(-1.0)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn random_search_finds_the_zero(d in 1usize..10, seed in any::<u64>()) {
        let target = Bitstring::random(d, &mut stream(seed, &[6]));
        let t = random_search(|s| Ok(if *s == target { 0.0 } else { 1.0 }), d, &mut stream(seed, &[7]), 1e-10).unwrap();
        prop_assert_eq!(t.final_string(), &target);
        prop_assert!(t.f_evals >= 1 && t.f_evals <= 1 << d);
    }
}

#[test]
fn ties_go_to_the_lowest_bit() {
    // Every single flip from 000 lowers the loss equally.
    let map = LossMap::from_fn(3, |s| if s.count_ones() == 0 { 1.0 } else { 0.5 }).unwrap();
    let t = hill_climb(|s| Ok(map.get(s)), &Bitstring::zeros(3), exact(-1.0)).unwrap();
    assert_eq!(t.path[1].to_string(), "100");
}

#[test]
fn starting_at_the_optimum_costs_one_sweep() {
    let (map, target) = unimodal_map(6, 42);
    let t = hill_climb(|s| Ok(map.get(s)), &target, exact(-1.0)).unwrap();
    assert_eq!(t.sweep_count(), 1);
    assert_eq!(t.f_evals, 6);
}
