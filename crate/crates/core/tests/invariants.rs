//! Structural invariants of the ring spectrum over random parameters.

use std::f64::consts::TAU;

use proptest::prelude::*;
use ptring::eig::{eigenpairs, eigenvalues};
use ptring::matching::multiset_distance;
use ptring::model::{apply_pt, build_flux_hamiltonian, build_sc_hamiltonian, RingParams};
use ptring::phase::classify;
use ptring::Complex64;

// Eigenvalues near an exceptional point carry error ~ε^(1/k); these bounds
// leave room for second-order points at random parameters.
const SPECTRUM_TOL: f64 = 1e-6;

fn params() -> impl Strategy<Value = (usize, f64, f64)> {
    (2usize..=8, 0.0..3.0f64, -10.0..10.0f64)
}

fn spectrum(n: usize, g: f64, phi: f64) -> Vec<Complex64> {
    let h = build_flux_hamiltonian(&RingParams::new(n, g, phi).unwrap()).unwrap();
    eigenvalues(&h).eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_choice_leaves_spectrum_unchanged((n, g, phi) in params()) {
        let p = RingParams::new(n, g, phi).unwrap();
        let a = eigenvalues(&build_flux_hamiltonian(&p).unwrap()).eigenvalues;
        let b = eigenvalues(&build_sc_hamiltonian(&p).unwrap()).eigenvalues;
        prop_assert!(multiset_distance(&a, &b) < SPECTRUM_TOL);
    }

    #[test]
    fn power_sums_match_traces((n, g, phi) in params()) {
        let h = build_flux_hamiltonian(&RingParams::new(n, g, phi).unwrap()).unwrap();
        let s = eigenvalues(&h);
        prop_assert!((s.sum() - h.trace()).norm() < 1e-9);
        prop_assert!((s.sum_of_squares() - h.matmul(&h).trace()).norm() < 1e-8 * (1.0 + g * g) * n as f64);
    }

    #[test]
    fn spectrum_closed_under_conjugation_and_negation((n, g, phi) in params()) {
        let p = RingParams::new(n, g, phi).unwrap();
        let s = eigenvalues(&build_flux_hamiltonian(&p).unwrap());
        prop_assert!(multiset_distance(&s.eigenvalues, &s.conjugated()) < SPECTRUM_TOL);
        // Chiral symmetry of the bipartite ring.
        prop_assert!(multiset_distance(&s.eigenvalues, &s.negated()) < SPECTRUM_TOL);
    }

    #[test]
    fn flux_periodic_and_even((n, g, phi) in params()) {
        let base = spectrum(n, g, phi);
        prop_assert!(multiset_distance(&base, &spectrum(n, g, phi + TAU)) < SPECTRUM_TOL);
        prop_assert!(multiset_distance(&base, &spectrum(n, g, -phi)) < SPECTRUM_TOL);
    }

    #[test]
    fn eigenvalues_have_small_residuals((n, g, phi) in params()) {
        let h = build_flux_hamiltonian(&RingParams::new(n, g, phi).unwrap()).unwrap();
        let s = eigenvalues(&h);
        prop_assert!(s.converged);
        prop_assert!(s.max_residual() <= 1e-9, "residual {}", s.max_residual());
    }

    #[test]
    fn exact_phase_eigenvectors_are_pt_symmetric((n, g, phi) in params()) {
        let p = RingParams::new(n, g, phi).unwrap();
        let h = build_flux_hamiltonian(&p).unwrap();
        let pairs = eigenpairs(&h);
        let verdict = classify(&pairs.spectrum).unwrap();
        prop_assume!(verdict.is_exact());
        let values = &pairs.spectrum.eigenvalues;
        for (i, v) in pairs.vectors.iter().enumerate() {
            let isolated = values.iter().enumerate().all(|(j, z)| j == i || (z - values[i]).norm() > 1e-3);
            if !isolated {
                continue;
            }
            // A nondegenerate PT-exact eigenvector is a PT eigenvector: |⟨v, PT v⟩| = 1.
            let w = apply_pt(v, n).unwrap();
            let overlap: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            prop_assert!((overlap.norm() - 1.0).abs() < 1e-6, "overlap {}", overlap.norm());
        }
    }
}
