use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicforge::qmat::random::{random_orthogonal, random_unitary};
use sicforge::qmat::{identity, max_abs_diff, max_abs_diff_real, orthogonality_residual, pauli, RealMatrix};
use sicforge::qubitlab::canonical_sic;
use sicforge::sic::{verify, SicSet};
use sicforge::sicsearch::*;
use sicforge::Error;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn gram_factor_identities_d2_to_d5() {
    for d in 2..=5 {
        let gf = GramFactors::default_for(d).unwrap();
        let r = gf.residuals();
        assert!(r.s_gamma < 1e-10 && r.frak < 1e-10 && r.row_sum < 1e-10, "d={d}: {r:?}");
        assert!(r.orthonormal_basis < 1e-10, "d={d}: {r:?}");
    }
}

#[test]
fn qubit_gram_matrices_have_closed_forms() {
    let gf = GramFactors::default_for(2).unwrap();
    let s3 = 3f64.sqrt();
    let s2 = 2f64.sqrt();
    let expected = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0 / s2, 1.0 / s2, 1.0 / s2, 1.0 / s2,
            -1.0 / s3, 1.0 / s3, 0.0, 0.0,
            -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, 0.0,
            -1.0 / (3.0 * s2), -1.0 / (3.0 * s2), -1.0 / (3.0 * s2), 1.0 / s2,
        ],
    );
    assert!(max_abs_diff_real(gf.s(), &expected) < 1e-15);
    for i in 0..4 {
        for j in 0..4 {
            let g = if i == j { 1.0 } else { 1.0 / 3.0 };
            assert!((gf.gamma()[(i, j)] - g).abs() < 1e-15);
        }
    }
    // 𝔖 rows for L = 1 are (n_z; n_x; n_y)
    let dirs = &gf.directions()[1].directions;
    let fs = gf.frak_s();
    for (k, n) in dirs.iter().enumerate() {
        let [x, y, z] = n.cartesian;
        assert!((fs[(1, 1 + k)] - z).abs() < 1e-14);
        assert!((fs[(2, 1 + k)] - x).abs() < 1e-14);
        assert!((fs[(3, 1 + k)] - y).abs() < 1e-14);
    }
    assert!((fs[(0, 0)] - 1.0).abs() < 1e-15);
}

#[test]
fn d3_s_matrix_factors_gram() {
    let gf = GramFactors::default_for(3).unwrap();
    assert!(max_abs_diff_real(&(gf.s().transpose() * gf.s()), gf.gamma()) < 1e-12);
}

#[test]
fn singular_block_is_reported_with_its_l() {
    let mut dirs: Vec<_> = (0..3).map(|l| sicforge::spintomo::block_directions(l, 5).unwrap()).collect();
    // three coplanar directions make Σ(1) singular
    dirs[1] = sicforge::spintomo::DirectionSet::new(vec![
        sicforge::qmat::Direction::x(),
        sicforge::qmat::Direction::y(),
        sicforge::qmat::Direction::from_cartesian([1.0, 1.0, 0.0]).unwrap(),
    ]);
    match GramFactors::new(3, dirs) {
        Err(Error::IllPosedDirections { l, .. }) => assert_eq!(l, 1),
        other => panic!("expected ill-posed directions, got {other:?}"),
    }
}

#[test]
fn construction_properties_hold_for_random_qtilde() {
    for d in [2usize, 3] {
        let gf = GramFactors::default_for(d).unwrap();
        let mut r = rng(40 + d as u64);
        for _ in 0..100 {
            let q = random_orthogonal(d * d - 1, &mut r);
            let c = construction_residuals(&gf, &q).unwrap();
            assert!(c.hermiticity < 1e-9 && c.unit_trace < 1e-9 && c.pairwise_trace < 1e-9, "{c:?}");
            assert!(c.completeness < 1e-9 && c.symbol_gram < 1e-9, "{c:?}");
        }
    }
}

#[test]
fn non_orthogonal_qtilde_is_rejected() {
    let gf = GramFactors::default_for(2).unwrap();
    let q = RealMatrix::identity(3, 3) * 1.1;
    assert!(matches!(build_candidate(&gf, &q), Err(Error::NotOrthogonal(_))));
    assert!(matches!(build_candidate(&gf, &RealMatrix::identity(2, 2)), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn qubit_candidates_are_always_sics() {
    let gf = GramFactors::default_for(2).unwrap();
    let id = RealMatrix::identity(3, 3);
    let v = functional_v(&gf, &id).unwrap();
    assert!(v.direct.iter().all(|x| (x - 1.0).abs() < 1e-12));
    assert!(v.route_gap() < 1e-10);
    assert!(matrix_equation_residual(&gf, &id).unwrap().idempotence_form < 1e-10);
    let mut r = rng(2);
    for _ in 0..100 {
        let q = random_orthogonal(3, &mut r);
        let report = verify(&build_candidate(&gf, &q).unwrap(), 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
    }
}

#[test]
fn functional_routes_agree_and_random_d3_is_below_one() {
    let gf = GramFactors::default_for(3).unwrap();
    let mut r = rng(9);
    for _ in 0..5 {
        let q = random_orthogonal(8, &mut r);
        let v = functional_v(&gf, &q).unwrap();
        assert!(v.route_gap() < 1e-10, "{}", v.route_gap());
        assert!(v.direct.iter().all(|x| *x < 1.0 + 1e-9));
        assert!(v.direct.iter().all(|x| *x < 1.0 - 1e-6));
        let m = matrix_equation_residual(&gf, &q).unwrap();
        assert!(m.idempotence_form > 1e-3);
    }
}

#[test]
fn d2_search_converges_at_iteration_zero() {
    for seed in [1, 7, 99] {
        let cfg = SearchConfig { seed, ..Default::default() };
        let s = optimize(2, &cfg).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 0);
        assert!(max_abs_diff_real(&s.qtilde, &RealMatrix::identity(3, 3)) < 1e-15);
        assert!((s.objective - 4.0).abs() < 1e-12);
    }
}

fn d3_state() -> (GramFactors, SearchState) {
    let cfg = SearchConfig::default();
    let gf = GramFactors::with_seed(3, cfg.direction_seed).unwrap();
    let s = optimize_with(&gf, &cfg).unwrap();
    (gf, s)
}

#[test]
fn d3_search_finds_a_sic() {
    let (gf, s) = d3_state();
    assert!(s.converged, "gap {}", s.gap());
    assert!(s.objective >= 9.0 - 1e-6 && s.objective <= 9.0 + 1e-6);
    assert!(orthogonality_residual(&s.qtilde) < 1e-10);
    let cand = build_candidate(&gf, &s.qtilde).unwrap();
    assert!(verify(&cand, 1e-6).unwrap().pass);
    assert!(matrix_equation_residual(&gf, &s.qtilde).unwrap().idempotence_form < 1e-6);
    let v = functional_v(&gf, &s.qtilde).unwrap();
    assert!(v.route_gap() < 1e-9);
    assert!(s.history.windows(2).all(|w| w[1] >= w[0]), "best-so-far must not decrease");
}

#[test]
fn search_is_deterministic_and_thread_count_independent() {
    let a = optimize(3, &SearchConfig { parallel: 1, restarts: 4, ..Default::default() }).unwrap();
    let b = optimize(3, &SearchConfig { parallel: 4, restarts: 4, ..Default::default() }).unwrap();
    assert_eq!(a.qtilde, b.qtilde);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.seed, b.seed);
}

#[test]
fn starved_budget_does_not_converge() {
    let s = optimize(3, &SearchConfig { max_iterations: 1, restarts: 2, ..Default::default() }).unwrap();
    assert!(!s.converged);
    assert!(s.objective <= 9.0 + 1e-6);
}

#[test]
#[ignore = "slow: d = 4 search"]
fn d4_search_finds_a_sic() {
    let s = optimize(4, &SearchConfig::default()).unwrap();
    assert!(s.converged);
    assert!(s.objective >= 16.0 - 1e-5);
}

#[test]
fn sequential_rotations_qubit() {
    let gf = GramFactors::default_for(2).unwrap();
    let s = sequential_rotations(&gf, &SearchConfig::default()).unwrap();
    assert!(s.converged);
    assert_eq!(s.failed_step, None);
    assert!(s.step_residuals.iter().all(|r| *r < 1e-12));
}

#[test]
fn sequential_rotations_d3_keeps_earlier_projectors() {
    let gf = GramFactors::default_for(3).unwrap();
    let cfg = SearchConfig::default();
    let trace = sequential_trace(&gf, &cfg, 1).unwrap();
    let s = &trace.state;
    if s.converged {
        assert!(verify(&build_candidate(&gf, &s.qtilde).unwrap(), 1e-6).unwrap().pass);
    } else {
        let step = s.failed_step.expect("failure names a step");
        assert!(step < 9);
    }
    let final_set = build_candidate(&gf, &s.qtilde).unwrap();
    for snap in &trace.snapshots {
        for (k, p) in snap.iter().enumerate() {
            assert!(max_abs_diff(p, &final_set[k]) < 1e-10, "projector {k} changed");
        }
    }
}

#[test]
fn equiangular_frames() {
    let f1 = equiangular_frame(1).unwrap();
    assert_eq!(f1.vectors.len(), 2);
    assert!((f1.vectors[0][0] + f1.vectors[1][0]).abs() < 1e-15);
    let f3 = equiangular_frame(3).unwrap();
    for (i, a) in f3.vectors.iter().enumerate() {
        for b in &f3.vectors[i + 1..] {
            assert!((a.dot(b) / (a.norm() * b.norm()) + 1.0 / 3.0).abs() < 1e-12);
        }
    }
    let f8 = equiangular_frame(8).unwrap();
    assert_eq!(f8.vectors.len(), 9);
    assert!((f8.vectors[0].norm_squared() - 2.0 / 3.0).abs() < 1e-12);
    assert!((f8.vectors[0].dot(&f8.vectors[5]) + 1.0 / 12.0).abs() < 1e-12);
    for n in 1..30 {
        let f = equiangular_frame(n).unwrap();
        assert!(f.norm_residual() < 1e-12 && f.angle_residual() < 1e-12, "N={n}");
    }
    assert!(equiangular_frame(0).is_err());
}

#[test]
fn unitary_orbits() {
    let gf = GramFactors::default_for(2).unwrap();
    let s = canonical_sic();
    let (same, q) = unitary_orbit(&s, &identity(2), &gf).unwrap();
    assert!(max_abs_diff_real(&q, &RealMatrix::identity(4, 4)) < 1e-12);
    assert_eq!(same.projectors(), s.projectors());
    let (moved, q) = unitary_orbit(&s, &pauli()[0], &gf).unwrap();
    assert!(moved.verification().pass);
    assert!(orthogonality_residual(&q) < 1e-9);
    let q0 = qtilde_from_sic(&gf, &s).unwrap();
    let q1 = qtilde_from_sic(&gf, &moved).unwrap();
    let qu = q.view((1, 1), (3, 3)).into_owned();
    assert!(max_abs_diff_real(&(qu * q0), &q1) < 1e-12);
    assert!(matches!(unitary_orbit(&s, &identity(2).scale(2.0), &gf), Err(Error::NotUnitary(_))));

    let (gf3, state) = d3_state();
    let set = SicSet::new(build_candidate(&gf3, &state.qtilde).unwrap(), 1e-6).unwrap();
    let u = random_unitary(3, &mut rng(4));
    let (moved, q) = unitary_orbit(&set, &u, &gf3).unwrap();
    assert!(moved.verification().pass);
    assert!(orthogonality_residual(&q) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn candidates_satisfy_construction_for_any_qtilde(seed in any::<u64>()) {
        let gf = GramFactors::default_for(3).unwrap();
        let q = random_orthogonal(8, &mut rng(seed));
        let c = construction_residuals(&gf, &q).unwrap();
        prop_assert!(c.pairwise_trace < 1e-9 && c.completeness < 1e-9);
        let v = functional_v(&gf, &q).unwrap();
        prop_assert!(v.route_gap() < 1e-9);
        prop_assert!(v.total() <= 9.0 + 1e-6);
    }

    #[test]
    fn givens_products_are_orthogonal(seed in any::<u64>(), reflect in any::<bool>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let angles: Vec<f64> = (0..givens_count(8)).map(|_| r.random_range(-3.2..3.2)).collect();
        let q = givens_matrix(8, &angles, reflect);
        prop_assert!(orthogonality_residual(&q) < 1e-12);
        let det = if reflect { -1.0 } else { 1.0 };
        prop_assert!((q.determinant() - det).abs() < 1e-10);
    }
}
