use num_complex::Complex64;
use proptest::prelude::*;

use tpuzzle_core::qsvt::{
    assemble_qsvt, build_block_encoding, build_commuting_basis, cayley_response, constrained_phases, fit_qsp_phases,
    nested_hermitian, qsp_matrix, qsp_poly, verify_cayley_equivalence, CircuitIR, VerifyOptions,
};
use tpuzzle_core::rng::stream;
use tpuzzle_core::*;

fn max_unitarity_defect(m: &faer::Mat<Complex64>) -> f64 {
    let dim = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let dot: Complex64 = (0..dim).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}

#[test]
fn block_encoding_circuit_is_unitary() {
    let basis = build_commuting_basis(2, 2, &mut stream(1, &[])).unwrap();
    let enc = build_block_encoding(&basis).unwrap();
    assert!(max_unitarity_defect(&enc.to_dense().unwrap()) < 1e-6);
    let phases = fit_qsp_phases(0.5, 4, 501).unwrap();
    let full = assemble_qsvt(&enc, &phases).unwrap();
    assert!(max_unitarity_defect(&full.to_dense().unwrap()) < 1e-6);
}

#[test]
fn projector_eigenvectors_pick_up_the_endpoint_values() {
    let beta = 0.6;
    let basis = build_commuting_basis(2, 2, &mut stream(4, &[])).unwrap();
    let phases = fit_qsp_phases(beta, 4, 501).unwrap();
    let block = assemble_qsvt(&build_block_encoding(&basis).unwrap(), &phases).unwrap().system_block().unwrap();
    let proj = nested_hermitian(&basis);
    let v = Statevector::random(2, &mut stream(4, &[1]));
    let pv = proj.apply(&v).unwrap();
    let rest: Vec<Complex64> = v.amplitudes().iter().zip(&pv).map(|(a, b)| a - b).collect();
    for (vec, want) in [(pv, cayley_response(beta, 1.0)), (rest, Complex64::new(1.0, 0.0))] {
        let norm: f64 = vec.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        for i in 0..vec.len() {
            let out: Complex64 = (0..vec.len()).map(|j| block[(i, j)] * vec[j]).sum();
            assert!((out - want * vec[i]).norm() < 1e-9 * norm.max(1.0));
        }
    }
}

#[test]
fn verification_reports_small_block_deviation() {
    let basis = build_commuting_basis(2, 2, &mut stream(6, &[])).unwrap();
    let v = verify_cayley_equivalence(&basis, 0.5, 4, VerifyOptions { grid_size: 501, ..Default::default() }).unwrap();
    assert!(v.deviation < 1e-10, "deviation {}", v.deviation);
    assert!(v.unitarity_defect < 1e-10);
    assert!(v.postselection_probability > 0.0 && v.postselection_probability <= 1.0 + 1e-12);
}

#[test]
fn circuit_text_round_trips() {
    let basis = build_commuting_basis(3, 2, &mut stream(2, &[])).unwrap();
    let phases = fit_qsp_phases(0.3, 4, 301).unwrap();
    let c = assemble_qsvt(&build_block_encoding(&basis).unwrap(), &phases).unwrap();
    let back = CircuitIR::from_text(&c.to_text()).unwrap();
    assert_eq!(back.to_text(), c.to_text());
    assert_eq!(back.ops().len(), c.ops().len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sequence_matrices_are_unitary(free in prop::collection::vec(-3.0f64..3.0, 1..10), beta in 0.0f64..2.0, x in -1.0f64..1.0) {
        let d = free.len() + 1;
        let phases = constrained_phases(beta, d, &free);
        let m = qsp_matrix(&phases, x);
        prop_assert!((m[0][0].norm_sqr() + m[0][1].norm_sqr() - 1.0).abs() < 1e-8);
        prop_assert!((m[1][0].norm_sqr() + m[1][1].norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn even_degree_real_part_is_even(half in 1usize..5, seed in any::<u64>(), x in 0.0f64..1.0) {
        let d = 2 * half;
        let mut rng = stream(seed, &[]);
        let free: Vec<f64> = (0..d - 1).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let phases = constrained_phases(0.4, d, &free);
        prop_assert!((qsp_poly(&phases, x).re - qsp_poly(&phases, -x).re).abs() < 1e-10);
    }

    #[test]
    fn constrained_endpoints_are_exact(half in 1usize..5, beta in 0.0f64..2.0, seed in any::<u64>()) {
        let d = 2 * half;
        let mut rng = stream(seed, &[]);
        let free: Vec<f64> = (0..d - 1).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let phases = constrained_phases(beta, d, &free);
        prop_assert!((qsp_poly(&phases, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!((qsp_poly(&phases, 1.0) - cayley_response(beta, 1.0)).norm() < 1e-10);
    }
}
