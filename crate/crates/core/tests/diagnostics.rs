use proptest::prelude::*;

use tpuzzle_core::clifford::sample_clifford;
use tpuzzle_core::diagnostics::{renyi2_subset, stabilizer_norm, two_body_purity_excess, MagicMode};
use tpuzzle_core::rng::stream;
use tpuzzle_core::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn renyi_entropy_is_symmetric_across_a_cut(n in 2usize..8, seed in any::<u64>(), mask in 1u32..127) {
        let s = Statevector::random(n, &mut stream(seed, &[]));
        let a: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 0).collect();
        prop_assume!(!a.is_empty() && !b.is_empty());
        let sa = renyi2_subset(&s, &a).unwrap();
        let sb = renyi2_subset(&s, &b).unwrap();
        prop_assert!((sa - sb).abs() < 1e-9);
        prop_assert!(sa >= 0.0 && sa <= a.len().min(b.len()) as f64 + 1e-9);
    }

    #[test]
    fn stabilizer_norm_is_at_least_one(n in 1usize..6, seed in any::<u64>()) {
        let s = Statevector::random(n, &mut stream(seed, &[]));
        prop_assert!(stabilizer_norm(&s, MagicMode::Exhaustive).unwrap().value >= 1.0 - 1e-9);
    }

    #[test]
    fn clifford_states_have_unit_stabilizer_norm(n in 1usize..7, depth in 0usize..6, seed in any::<u64>()) {
        let s = sample_clifford(n, depth, &mut stream(seed, &[])).prepare().unwrap();
        let m = stabilizer_norm(&s, MagicMode::Exhaustive).unwrap().value;
        prop_assert!((m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_states_have_full_pair_purity(n in 2usize..8, index in any::<usize>()) {
        let s = Statevector::basis(n, index % (1 << n)).unwrap();
        prop_assert!((two_body_purity_excess(&s, 0).unwrap() - 0.75).abs() < 1e-12);
    }
}

#[test]
fn sampled_stabilizer_norm_agrees_with_enumeration() {
    let s = Statevector::random(4, &mut stream(3, &[]));
    let exact = stabilizer_norm(&s, MagicMode::Exhaustive).unwrap();
    let est = stabilizer_norm(&s, MagicMode::Sampled { samples: 100_000, seed: 5 }).unwrap();
    assert!((est.value - exact.value).abs() < 3.0 * est.std_error, "{} vs {}", est.value, exact.value);
    assert!(est.std_error > 0.0);
}

#[test]
fn t_state_has_known_stabilizer_norm() {
    // H then T: <X> = <Y> = 1/sqrt2, <Z> = 0, so M = (1 + sqrt2)/2.
    let mut s = Statevector::zero(1);
    Gate::H(0).apply(&mut s).unwrap();
    Gate::T(0).apply(&mut s).unwrap();
    let m = stabilizer_norm(&s, MagicMode::Exhaustive).unwrap().value;
    assert!((m - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn bell_pair_is_maximally_entangled() {
    let mut s = Statevector::zero(2);
    Gate::H(0).apply(&mut s).unwrap();
    Gate::Cnot { control: 0, target: 1 }.apply(&mut s).unwrap();
    assert!((renyi2_subset(&s, &[0]).unwrap() - 1.0).abs() < 1e-12);
    assert!((two_body_purity_excess(&s, 0).unwrap() - 0.75).abs() < 1e-12);
}
