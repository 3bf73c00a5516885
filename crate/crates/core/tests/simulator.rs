mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::Rng;
use siqnn::operators::{PauliString, PauliSum};
use siqnn::rng::rng_from;
use siqnn::simulator::{apply_n_gate, apply_p_gate, estimate_z_observable, expectation, sample_z_basis};

fn column(psi: &siqnn::simulator::StateVector) -> DMatrix<C> {
    DMatrix::from_column_slice(psi.dim(), 1, psi.amplitudes())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gate_sequences_preserve_norm_and_match_dense(seed in any::<u64>(), n in 2usize..=6, len in 1usize..12) {
        let mut rng = rng_from(seed);
        let mut psi = random_state(n, &mut rng);
        let mut want = column(&psi);
        for _ in 0..len {
            let q1 = rng.random_range(0..n);
            let q2 = (q1 + rng.random_range(1..n)) % n;
            if rng.random_bool(0.5) {
                let t = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                apply_n_gate(&mut psi, q1, q2, t).unwrap();
                want = n_gate_dense(n, q1, q2, t) * want;
            } else {
                let t = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                apply_p_gate(&mut psi, q1, q2, t).unwrap();
                want = p_gate_dense(n, q1, q2, t) * want;
            }
            prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
        prop_assert!(max_abs_diff(&column(&psi), &want) < 1e-10);
    }

    #[test]
    fn expectation_matches_dense(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = rng_from(seed);
        let psi = random_state(n, &mut rng);
        let mut obs = PauliSum::zero(n);
        let mut dense = DMatrix::<C>::zeros(1 << n, 1 << n);
        for _ in 0..4 {
            let label: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect();
            let w = rng.random_range(-1.0..1.0);
            obs.add_term(label.parse::<PauliString>().unwrap(), C::new(w, 0.0));
            dense += pauli_matrix(&label) * C::new(w, 0.0);
        }
        let v = column(&psi);
        let want = (v.adjoint() * dense * &v)[(0, 0)].re;
        prop_assert!((expectation(&psi, &obs).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn shot_estimator_is_unbiased() {
    let mut rng = rng_from(11);
    let psi = random_state(3, &mut rng);
    let mut obs = PauliSum::zero(3);
    for label in ["ZII", "IZZ", "ZZZ", "III"] {
        obs.add_term(label.parse::<PauliString>().unwrap(), C::new(rng.random_range(-1.0..1.0), 0.0));
    }
    let exact = expectation(&psi, &obs).unwrap();
    let estimates: Vec<f64> =
        (0..1000).map(|s| estimate_z_observable(&sample_z_basis(&psi, 50, s).unwrap(), &obs).unwrap()).collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "mean {mean}, exact {exact}, se {se}");
}
