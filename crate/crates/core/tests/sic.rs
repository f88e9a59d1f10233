use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicforge::qmat::random::{random_density_matrix, random_hermitian};
use sicforge::qmat::{hermitian_eigenvalues, identity, max_abs_diff, trace, ComplexMatrix};
use sicforge::qubitlab::{canonical_projectors, canonical_sic};
use sicforge::sic::*;
use sicforge::sicsearch::{build_candidate, optimize_with, GramFactors, SearchConfig};
use sicforge::starprod::{delta_kernel, dual_kernel, kernel, reconstruct, star, symbol};
use std::sync::OnceLock;

fn qutrit_search_output() -> &'static SicSet {
    static SET: OnceLock<SicSet> = OnceLock::new();
    SET.get_or_init(|| {
        let cfg = SearchConfig::default();
        let gf = GramFactors::with_seed(3, cfg.direction_seed).unwrap();
        let state = optimize_with(&gf, &cfg).unwrap();
        assert!(state.converged);
        SicSet::new(build_candidate(&gf, &state.qtilde).unwrap(), 1e-6).unwrap()
    })
}

#[test]
fn verify_flags_broken_sets() {
    let mut p = canonical_projectors();
    p[3] = identity(2).scale(0.5);
    let r = verify(&p, 1e-10).unwrap();
    assert!(!r.pass);
    assert!(r.idempotence > 1e-3 && r.pairwise_trace > 1e-3);
    assert!(verify(&p[..3], 1e-10).is_err());
    assert!(SicSet::new(p, 1e-10).is_err());
}

#[test]
fn search_output_verifies_independently() {
    let s = qutrit_search_output();
    let r = verify(s.projectors(), 1e-7).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.trace_powers.len(), 3);
}

#[test]
fn sic_scheme_structure() {
    for s in [canonical_sic(), qutrit_search_output().clone()] {
        let d = s.dim();
        let scheme = sic_scheme(&s);
        let sum_u = scheme.dequantizers().iter().fold(ComplexMatrix::zeros(d, d), |a, u| a + u);
        let sum_d = scheme.quantizers().iter().fold(ComplexMatrix::zeros(d, d), |a, q| a + q);
        assert!(max_abs_diff(&sum_u, &identity(d)) < 1e-7);
        assert!(max_abs_diff(&sum_d, &identity(d).scale(d as f64)) < 1e-6);
        let delta = delta_kernel(&scheme);
        assert!(max_abs_diff(&delta, &identity(d * d)) < 1e-6);
    }
}

#[test]
fn qubit_symbols_and_kernel_entries() {
    let s = canonical_sic();
    let scheme = sic_scheme(&s);
    let id = symbol(&identity(2), &scheme).unwrap();
    assert!(id.values.iter().all(|v| (v - Complex64::new(0.5, 0.0)).norm() < 1e-15));
    let mixed = symbol(&identity(2).scale(0.5), &scheme).unwrap();
    assert!(mixed.values.iter().all(|v| (v.re - 0.25).abs() < 1e-15));
    let p1 = symbol(&s.projectors()[0], &scheme).unwrap();
    for (v, e) in p1.values.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
        assert!((v.re - e).abs() < 1e-15 && v.im.abs() < 1e-15);
    }
    let k = kernel(&scheme);
    let kd = dual_kernel(&scheme);
    assert!((k.get(0, 0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    assert!((kd.get(0, 0, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    // Π₁ ⋆ Π₁ = Π₁
    let sq = star(&p1, &p1, &k).unwrap();
    assert!(sq.max_abs_diff(&p1) < 1e-14);
    // uniform symbol reconstructs Î/d
    let mut uniform = id.clone();
    uniform.values.iter_mut().for_each(|v| *v = Complex64::new(0.25, 0.0));
    assert!(max_abs_diff(&reconstruct(&uniform, &scheme).unwrap(), &identity(2).scale(0.5)) < 1e-15);
}

#[test]
fn probabilities_and_reconstruction() {
    let s = canonical_sic();
    let p = probabilities(&identity(2).scale(0.5), &s).unwrap();
    assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-15));
    let p = probabilities(&s.projectors()[0], &s).unwrap();
    for (v, e) in p.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
        assert!((v - e).abs() < 1e-15);
    }
    let rho = reconstruct_state(&[0.25; 4], &s).unwrap();
    assert!(max_abs_diff(&rho, &identity(2).scale(0.5)) < 1e-15);
    // a vertex of the simplex is not a state
    let vertex = reconstruct_state(&[1.0, 0.0, 0.0, 0.0], &s).unwrap();
    assert!(max_abs_diff(&vertex, &(s.projectors()[0].scale(3.0) - identity(2))) < 1e-15);
    assert!((trace(&vertex).re - 1.0).abs() < 1e-15);
    assert!(hermitian_eigenvalues(&vertex).unwrap()[0] < -0.5);
    assert!(reconstruct_state(&[0.5, 0.5, 0.5, 0.5], &s).is_err());
    assert!(reconstruct_state(&[1.0], &s).is_err());
    assert!(probabilities(&identity(2), &s).is_err());
    let r = state_round_trip_residual(&s, &random_states(2, 100, 1)).unwrap();
    assert!(r < 1e-12);
}

#[test]
fn inverse_portrait_normalization() {
    for s in [canonical_sic(), qutrit_search_output().clone()] {
        let d = s.dim() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let rho = random_density_matrix(s.dim(), &mut rng);
            let por = inverse_portrait(&rho, &s).unwrap();
            let p = probabilities(&rho, &s).unwrap();
            assert!((por.sum() - 1.0).abs() < 1e-6);
            for i in 0..s.len() {
                assert!((por.column(i).sum() - 1.0 / (d * d)).abs() < 1e-6);
                // highest-weight row: p_i = d·𝒫(j, i)
                assert!((p[i] - d * por[(0, i)]).abs() < 1e-6);
            }
            let top: f64 = por.row(0).sum();
            assert!((top - 1.0 / d).abs() < 1e-6);
        }
    }
    let bare = canonical_sic().without_fiducials();
    assert!(inverse_portrait(&identity(2).scale(0.5), &bare).is_err());
}

#[test]
fn triple_product_entries() {
    for s in [canonical_sic(), qutrit_search_output().clone()] {
        let t = triple_products(&s);
        let d = s.dim() as f64;
        assert!(t.symmetry_residual() < 1e-12);
        for i in 0..s.len() {
            assert!((t.get(i, i, i) - Complex64::new(1.0, 0.0)).norm() < 1e-6);
            for j in 0..s.len() {
                if i != j {
                    assert!((t.get(i, i, j).re - 1.0 / (d + 1.0)).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn identity_web_qubit() {
    let s = canonical_sic();
    let rel = check_t_relations(&triple_products(&s));
    assert!(rel.three < 1e-12 && rel.four_first < 1e-12 && rel.four_second < 1e-12, "{rel:?}");
    assert!(rel.four_first_inverted_prefactor > 1e-3 || rel.four_second_inverted_prefactor > 1e-3);
    let h = higher_products(&s, FIVE_PRODUCT_SAMPLES, 1);
    assert!(h.four_product < 1e-12 && h.five_product < 1e-12, "{h:?}");
    let (k, kd) = kernel_route_residuals(&s);
    assert!(k < 1e-12 && kd < 1e-12);
}

#[test]
fn identity_web_qutrit_search_output() {
    let s = qutrit_search_output();
    let rel = check_t_relations(&triple_products(s));
    assert!(rel.three < 1e-7 && rel.four_first < 1e-7 && rel.four_second < 1e-7, "{rel:?}");
    let h = higher_products(s, FIVE_PRODUCT_SAMPLES, 1);
    assert!(h.four_product < 1e-7 && h.five_product < 1e-7, "{h:?}");
    let (k, kd) = kernel_route_residuals(s);
    assert!(k < 1e-8 && kd < 1e-8);
}

#[test]
fn non_sic_tensors_violate_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fake: Vec<_> = (0..4).map(|_| random_density_matrix(2, &mut rng)).collect();
    let rel = check_t_relations(&triple_products_of(&fake));
    assert!(rel.three > 1e-3 || rel.four_first > 1e-3 || rel.four_second > 1e-3);
}

#[test]
fn weyl_heisenberg_orbit_of_qutrit_fiducial() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = nalgebra::DVector::from_vec(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
    ]);
    let set = SicSet::new(weyl_heisenberg_orbit(&psi), 1e-12).unwrap();
    assert_eq!(set.len(), 9);
    assert_eq!(set.scheme_label(), "sic-d3");
    let rel = check_t_relations(&triple_products(&set));
    assert!(rel.three < 1e-12 && rel.four_first < 1e-12 && rel.four_second < 1e-12);
    assert!(state_round_trip_residual(&set, &random_states(3, 100, 2)).unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn state_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = canonical_sic();
        let rho = random_density_matrix(2, &mut rng);
        let p = probabilities(&rho, &s).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= -1e-15 && *v <= 0.5 + 1e-15));
        let back = reconstruct_state(&p, &s).unwrap();
        prop_assert!(max_abs_diff(&back, &rho) < 1e-12);
        prop_assert!((probabilities(&back, &s).unwrap().iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)) < 1e-12);
    }

    #[test]
    fn star_product_is_operator_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = sic_scheme(&canonical_sic());
        let k = kernel(&scheme);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let fa = symbol(&a, &scheme).unwrap();
        let fb = symbol(&b, &scheme).unwrap();
        let fab = symbol(&(&a * &b), &scheme).unwrap();
        prop_assert!(star(&fa, &fb, &k).unwrap().max_abs_diff(&fab) < 1e-10);
    }
}
