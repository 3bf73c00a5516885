mod common;

use common::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::Rng;
use siqnn::operators::{build_dipole_operator, build_qubit_hamiltonian, to_dense};
use siqnn::rng::rng_from;
use siqnn::simulator::StateVector;
use siqnn::spectra::{diagonalize, tdm_norm, Sector};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sector_spectra_cover_the_full_spectrum(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng_from(seed);
        let ints = random_integrals(n, n, &mut rng);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let mut full: Vec<f64> = to_dense(&h).unwrap().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut union = Vec::new();
        for na in 0..=n {
            for nb in 0..=n {
                let spec = diagonalize(&h, Sector::new(na + nb, na as i32 - nb as i32)).unwrap();
                for j in 0..spec.len() {
                    prop_assert!(spec.residual(&h, j) < 1e-8);
                }
                union.extend(spec.energies);
            }
        }
        full.sort_by(f64::total_cmp);
        union.sort_by(f64::total_cmp);
        prop_assert_eq!(full.len(), union.len());
        prop_assert!(full.iter().zip(&union).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn tdm_norm_ignores_global_phases(seed in any::<u64>(), a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let mut rng = rng_from(seed);
        let mut ints = random_integrals(2, 2, &mut rng);
        for c in 0..3 {
            ints.dipole1[c] = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            ints.dipole1[c][1] = ints.dipole1[c][2];
        }
        let mu = build_dipole_operator(&ints).unwrap();
        let psi0 = random_state(4, &mut rng);
        let psi1 = random_state(4, &mut rng);
        let rotate = |s: &StateVector, phi: f64| {
            StateVector::from_amplitudes(s.amplitudes().iter().map(|z| z * C::from_polar(1.0, phi)).collect()).unwrap()
        };
        let t = tdm_norm(&psi0, &psi1, &mu);
        prop_assert!((tdm_norm(&rotate(&psi0, a), &rotate(&psi1, b), &mu) - t).abs() < 1e-12);
    }
}
