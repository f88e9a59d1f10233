use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicforge::qmat::random::{random_density_matrix, random_orthogonal};
use sicforge::qmat::{max_abs_diff, trace_product3, Direction, Spin};
use sicforge::qubitlab::*;
use sicforge::sic::{sic_scheme, verify, SicSet};
use sicforge::sicsearch::{build_candidate, GramFactors};
use sicforge::spintomo::{continuous_scheme, fnr_directions, fnr_scheme, quadrature_grid, DEFAULT_DIRECTION_SEED};
use sicforge::starprod::{reconstruct, symbol};

fn random_r(seed: u64) -> Matrix3<f64> {
    let q = random_orthogonal(3, &mut ChaCha8Rng::seed_from_u64(seed));
    Matrix3::from_fn(|i, j| q[(i, j)])
}

#[test]
fn canonical_set_is_a_sic() {
    let s = canonical_sic();
    let r = verify(s.projectors(), 1e-12).unwrap();
    assert!(r.pass && r.max_residual() < 1e-14, "{r:?}");
    let b = canonical_bloch_vectors();
    let s3 = 3f64.sqrt();
    for (v, e) in b.iter().zip([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]) {
        assert!((v - Vector3::from(e) / s3).norm() < 1e-15);
    }
    // fiducials reproduce the projectors
    for (psi, p) in canonical_fiducials().iter().zip(s.projectors()) {
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!(max_abs_diff(&(psi * psi.adjoint()), p) < 1e-15);
    }
}

#[test]
fn canonical_param_reproduces_canonical_set() {
    let p = QubitSicParam::canonical();
    assert_eq!(p.det_class, -1);
    assert_eq!(p.orientation(), -1.0);
    for (a, b) in p.projectors().iter().zip(canonical_projectors().iter()) {
        assert!(max_abs_diff(a, b) < 1e-14);
    }
    let id = QubitSicParam::new(Matrix3::identity()).unwrap();
    assert_eq!(id.orientation(), 1.0);
}

#[test]
fn every_orthogonal_r_gives_a_sic() {
    let mut classes = [0, 0];
    for seed in 0..100 {
        let r = random_r(seed);
        let set = sic_from_r(r).unwrap();
        assert!(verify(set.projectors(), 1e-11).unwrap().pass);
        let p = QubitSicParam::new(r).unwrap();
        // inversions flip the orientation
        assert_eq!(p.orientation(), p.det_class as f64);
        classes[(p.det_class > 0) as usize] += 1;
        let inverted = QubitSicParam::new(-r).unwrap();
        assert_eq!(inverted.orientation(), -p.orientation());
        assert!(verify(&inverted.projectors(), 1e-11).unwrap().pass);
    }
    assert!(classes[0] > 0 && classes[1] > 0, "{classes:?}");
    assert!(sic_from_r(Matrix3::identity() * 2.0).is_err());
}

#[test]
fn search_candidates_match_rotated_base_vectors() {
    let gf = GramFactors::default_for(2).unwrap();
    for seed in 0..20 {
        let q = random_orthogonal(3, &mut ChaCha8Rng::seed_from_u64(100 + seed));
        let cand = build_candidate(&gf, &q).unwrap();
        let p = QubitSicParam::from_qtilde(&q).unwrap();
        for (a, b) in cand.iter().zip(p.projectors().iter()) {
            assert!(max_abs_diff(a, b) < 1e-12);
        }
    }
}

#[test]
fn closed_form_tensors() {
    let mut params = vec![QubitSicParam::canonical(), QubitSicParam::new(Matrix3::identity()).unwrap()];
    params.extend((0..10).map(|s| QubitSicParam::new(random_r(500 + s)).unwrap()));
    for p in &params {
        let f = qubit_closed_forms(p).unwrap();
        assert!(f.t_residual < 1e-12 && f.k_residual < 1e-12 && f.k_dual_residual < 1e-12, "{f:?}");
        assert!(f.k_short_form_residual > 0.5);
    }
    let canon = qubit_closed_forms(&QubitSicParam::canonical()).unwrap();
    let t123 = canon.t.get(0, 1, 2);
    let expected = Complex64::new(0.0, 1.0 / (3.0 * 3f64.sqrt()));
    assert!((t123 - expected).norm() < 1e-14);
    let p = canonical_projectors();
    assert!((trace_product3(&p[0], &p[1], &p[2]) - expected).norm() < 1e-14);
}

#[test]
fn levi_civita_table() {
    assert_eq!(levi_civita(0, 1, 2), 1.0);
    assert_eq!(levi_civita(1, 0, 2), -1.0);
    assert_eq!(levi_civita(0, 2, 3), 1.0);
    assert_eq!(levi_civita(0, 3, 1), 1.0);
    assert_eq!(levi_civita(3, 2, 1), 1.0);
    assert_eq!(levi_civita(0, 0, 1), 0.0);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(levi_civita(i, j, k), -levi_civita(j, i, k));
                assert_eq!(levi_civita(i, j, k), levi_civita(j, k, i));
            }
        }
    }
}

struct Schemes {
    sic: sicforge::starprod::Scheme,
    spin: sicforge::starprod::Scheme,
    spin_dirs: Vec<Direction>,
    fnr: sicforge::starprod::Scheme,
    fnr_dirs: Vec<Direction>,
}

fn schemes(set: &SicSet) -> Schemes {
    let half = Spin::from_twice(1);
    let ds = fnr_directions(half, DEFAULT_DIRECTION_SEED).unwrap();
    Schemes {
        sic: sic_scheme(set),
        spin: continuous_scheme(half, 0).unwrap(),
        spin_dirs: quadrature_grid(half, 0).unwrap().into_iter().map(|(d, _)| d).collect(),
        fnr: fnr_scheme(half, &ds).unwrap(),
        fnr_dirs: ds.directions,
    }
}

#[test]
fn intertwining_round_trips() {
    let set = canonical_sic();
    let s = schemes(&set);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let a = random_density_matrix(2, &mut rng);
        for (from, to) in [(&s.sic, &s.spin), (&s.sic, &s.fnr), (&s.spin, &s.fnr), (&s.fnr, &s.sic)] {
            let f = symbol(&a, from).unwrap();
            let g = intertwine(&f, from, to).unwrap();
            assert!(g.max_abs_diff(&symbol(&a, to).unwrap()) < 1e-10);
            let back = intertwine(&g, to, from).unwrap();
            assert!(back.max_abs_diff(&f) < 1e-9);
            assert!(max_abs_diff(&reconstruct(&g, to).unwrap(), &a) < 1e-10);
        }
    }
    let f = symbol(&random_density_matrix(2, &mut rng), &s.sic).unwrap();
    assert!(intertwine(&f, &s.spin, &s.fnr).is_err());
}

#[test]
fn intertwining_closed_forms() {
    for param in [QubitSicParam::canonical(), QubitSicParam::new(random_r(77)).unwrap()] {
        let set = SicSet::new(param.projectors(), 1e-12).unwrap();
        let s = schemes(&set);
        let r = intertwining_closed_form_residuals(&param, &s.sic, &s.spin, &s.spin_dirs, &s.fnr, &s.fnr_dirs)
            .unwrap();
        assert!(r.iter().all(|v| *v < 1e-11), "{r:?}");
    }
}

#[test]
fn dual_basis_is_biorthogonal() {
    let ds = fnr_directions(Spin::from_twice(1), 1).unwrap();
    let l = dual_basis(&ds.directions).unwrap();
    for (k, lk) in l.iter().enumerate() {
        for (kp, n) in ds.directions.iter().enumerate() {
            let e = if k == kp { 1.0 } else { 0.0 };
            assert!((lk.dot(&Vector3::from(n.cartesian)) - e).abs() < 1e-12);
        }
    }
    assert!(dual_basis(&ds.directions[..2]).is_err());
}

#[test]
fn mutually_unbiased_bases() {
    let r = mub_report();
    assert!(r.intra.iter().all(|v| v.abs() < 1e-14));
    assert!(r.cross_residual < 1e-14 && r.octahedron_residual < 1e-14);
    // μ_i sits on +x_i, ν_i on -x_i, in the order z, x, y
    let axis = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    for (i, a) in axis.iter().enumerate() {
        for (c, ac) in a.iter().enumerate() {
            assert!((r.bloch[2 * i][c] - ac).abs() < 1e-14);
            assert!((r.bloch[2 * i + 1][c] + ac).abs() < 1e-14);
        }
    }
}

#[test]
fn lie_structure_constants() {
    let canon = lie_structure(&canonical_sic());
    assert!(canon.residual < 1e-11 && canon.antisymmetry < 1e-12);
    let (sign, fit) = canon.qubit_sign.unwrap();
    assert_eq!(sign, 1);
    assert!(fit < 1e-12);
    let base = lie_structure(&sic_from_r(Matrix3::identity()).unwrap());
    assert_eq!(base.qubit_sign.unwrap().0, -1);
}

#[test]
fn casimir_relations() {
    let canon = casimir_check(&canonical_sic()).unwrap();
    assert_eq!(canon.input_sign, 1);
    assert!(!canon.relabeled);
    assert!(canon.pass(1e-12), "{canon:?}");
    let (coef, fit) = canon.h_plus_minus;
    assert!((coef + 1.0).abs() < 1e-12 && fit < 1e-12);

    let base = casimir_check(&sic_from_r(Matrix3::identity()).unwrap()).unwrap();
    assert!(base.relabeled);
    assert!(base.pass(1e-12));
    for seed in 0..10 {
        let rep = casimir_check(&sic_from_r(random_r(900 + seed)).unwrap()).unwrap();
        assert!(rep.final_relation.iter().all(|v| *v < 1e-12));
        assert!(rep.c1_norm < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triple_products_follow_orientation(seed in any::<u64>()) {
        let p = QubitSicParam::new(random_r(seed)).unwrap();
        let f = qubit_closed_forms(&p).unwrap();
        prop_assert!(f.t_residual < 1e-12);
        prop_assert!(f.k_residual < 1e-12);
        prop_assert!(f.k_dual_residual < 1e-12);
    }

    #[test]
    fn final_relation_is_labeling_independent(seed in any::<u64>(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let set = sic_from_r(random_r(seed)).unwrap();
        let permuted: Vec<_> = perm.iter().map(|&i| set.projectors()[i].clone()).collect();
        prop_assert!(final_relation_commutators(&permuted).iter().all(|v| *v < 1e-12));
    }
}
