use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicforge::qmat::random::{random_density_matrix, random_direction, random_matrix};
use sicforge::qmat::*;
use sicforge::qubitlab::canonical_sic;
use sicforge::sic::{sic_scheme, weyl_heisenberg_orbit, SicSet};
use sicforge::sicsearch::GramFactors;
use sicforge::spintomo::*;
use sicforge::starprod::*;

fn qutrit_sic() -> SicSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0)]);
    SicSet::new(weyl_heisenberg_orbit(&psi), 1e-12).unwrap()
}

fn shipped_schemes() -> Vec<Scheme> {
    let half = Spin::from_twice(1);
    let one = Spin::from_twice(2);
    vec![
        sic_scheme(&canonical_sic()),
        sic_scheme(&qutrit_sic()),
        fnr_scheme(half, &fnr_directions(half, DEFAULT_DIRECTION_SEED).unwrap()).unwrap(),
        fnr_scheme(one, &fnr_directions(one, DEFAULT_DIRECTION_SEED).unwrap()).unwrap(),
        GramFactors::default_for(2).unwrap().block_scheme(),
        GramFactors::default_for(3).unwrap().block_scheme(),
        continuous_scheme(half, 0).unwrap(),
    ]
}

#[test]
fn reconstruction_delta_and_star_on_every_scheme() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in shipped_schemes() {
        assert!(reconstruction_residual(&s).unwrap() < 1e-9, "{}", s.label());
        for unit in matrix_units(s.dim()) {
            let f = symbol(&unit, &s).unwrap();
            assert!(delta_reproduction_residual(&s, &f).unwrap() < 1e-9, "{}", s.label());
        }
        let k = kernel(&s);
        let a = random_matrix(s.dim(), &mut rng);
        let b = random_matrix(s.dim(), &mut rng);
        let fa = symbol(&a, &s).unwrap();
        let fb = symbol(&b, &s).unwrap();
        let fab = symbol(&(&a * &b), &s).unwrap();
        assert!(star(&fa, &fb, &k).unwrap().max_abs_diff(&fab) < 1e-9, "{}", s.label());
        // identity is the star unit
        let fi = symbol(&identity(s.dim()), &s).unwrap();
        assert!(star(&fi, &fa, &k).unwrap().max_abs_diff(&fa) < 1e-9);
        // dual symbols reconstruct through the swapped pair
        let dual = s.dual();
        assert!(reconstruction_residual(&dual).unwrap() < 1e-9, "{}", s.label());
    }
}

#[test]
fn associativity_of_discrete_kernels() {
    for s in shipped_schemes().into_iter().take(6) {
        let k = kernel(&s);
        assert!(check_assoc3(&k) < 1e-9, "{}", s.label());
        assert!(check_assoc4(&k) < 1e-9, "{}", s.label());
        let kd = dual_kernel(&s);
        assert!(check_assoc3(&kd) < 1e-9, "{} dual", s.label());
    }
}

#[test]
fn sic_and_fnr_kernels_are_distinguished_from_random_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    use rand::Rng;
    let noise: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = KernelTensor::from_fn("noise", 4, false, |a, b, x| c(noise[(a * 4 + b) * 4 + x], 0.0));
    assert!(check_assoc3(&k) > 1e-2);
    assert!(check_assoc4(&k) > 1e-2);
}

#[test]
fn fnr_on_axes_spin_half() {
    let half = Spin::from_twice(1);
    let axes = DirectionSet::new(vec![Direction::x(), Direction::y(), Direction::z()]);
    let m1 = axes.m_matrix(1).unwrap();
    assert!(max_abs_diff_real(&m1, &RealMatrix::identity(3, 3)) < 1e-15);
    let s = fnr_scheme(half, &axes).unwrap();
    assert!(reconstruction_residual(&s).unwrap() < 1e-12);
    let wrong = DirectionSet::new(vec![Direction::x(), Direction::y()]);
    assert!(fnr_scheme(half, &wrong).is_err());
}

#[test]
fn fnr_round_trips_up_to_spin_three_halves() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for two_j in 1..=3 {
        let spin = Spin::from_twice(two_j);
        let ds = fnr_directions(spin, DEFAULT_DIRECTION_SEED).unwrap();
        assert_eq!(ds.count(), 2 * two_j as usize + 1);
        let s = fnr_scheme(spin, &ds).unwrap();
        assert!(reconstruction_residual(&s).unwrap() < 1e-9, "2j={two_j}");
        let rho = random_density_matrix(spin.dim(), &mut rng);
        let w = tomogram(&rho, &s).unwrap();
        assert!(max_abs_diff(&reconstruct(&w, &s).unwrap(), &rho) < 1e-9);
        for l in 0..=two_j as usize {
            let m = ds.m_matrix(l).unwrap();
            for a in 0..m.nrows() {
                for b in 0..m.ncols() {
                    let x = ds.directions[a].dot(&ds.directions[b]);
                    assert!((m[(a, b)] - legendre_poly(l, x)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn continuous_tomograms_are_probability_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for two_j in [1, 2] {
        let spin = Spin::from_twice(two_j);
        let s = continuous_scheme(spin, 0).unwrap();
        let dim = spin.dim();
        let mut by_dir = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for (x, p) in s.points().iter().enumerate() {
            let IndexPoint::SpinDirection { k, .. } = p else { panic!("spin points") };
            by_dir.entry(*k).or_default().push(x);
        }
        for group in by_dir.values() {
            let sum = group.iter().fold(ComplexMatrix::zeros(dim, dim), |a, &x| a + &s.dequantizers()[x]);
            assert!(max_abs_diff(&sum, &identity(dim)) < 1e-10);
        }
        for _ in 0..1000 {
            let w = tomogram(&random_density_matrix(dim, &mut rng), &s).unwrap();
            assert!(w.values.iter().all(|v| v.re >= -1e-12));
            for group in by_dir.values().take(5) {
                let total: f64 = group.iter().map(|&x| w.values[x].re).sum();
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn qubit_tomogram_closed_form() {
    let half = Spin::from_twice(1);
    let s = continuous_scheme(half, 0).unwrap();
    let grid = quadrature_grid(half, 0).unwrap();
    let rho = canonical_sic().projectors()[0].clone();
    let r = bloch_vector(&rho);
    let w = tomogram(&rho, &s).unwrap();
    for (p, v) in s.points().iter().zip(&w.values) {
        let IndexPoint::SpinDirection { m, k } = *p else { panic!("spin points") };
        let n = grid[k].0.cartesian;
        let rn = r[0] * n[0] + r[1] * n[1] + r[2] * n[2];
        assert!((v.re - 0.5 * (1.0 + 2.0 * m * rn)).abs() < 1e-14);
    }
    let mixed = tomogram(&identity(2).scale(0.5), &s).unwrap();
    assert!(mixed.values.iter().all(|v| (v.re - 0.5).abs() < 1e-14));
    assert!(tomogram(&identity(2), &s).is_err());
}

#[test]
fn direction_sets_from_json() {
    let ds = DirectionSet::from_json(r#"{"directions": [[1,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
    assert_eq!(ds.count(), 3);
    assert!(DirectionSet::from_json(r#"{"directions": [[2,0,0]]}"#).is_err());
    let back = DirectionSet::from_json(&ds.to_json_value().to_string()).unwrap();
    assert_eq!(back.directions, ds.directions);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_coeff_orthonormal(two_j in 0u32..=5) {
        let spin = Spin::from_twice(two_j);
        for l in 0..=two_j as usize {
            for lp in 0..=two_j as usize {
                let s: f64 = spin.projections().iter()
                    .map(|&m| f_coeff(l, spin, m).unwrap() * f_coeff(lp, spin, m).unwrap())
                    .sum();
                let e = if l == lp { 1.0 } else { 0.0 };
                prop_assert!((s - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn s_operator_traces_are_legendre(two_j in 1u32..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spin = Spin::from_twice(two_j);
        let n = random_direction(&mut rng);
        let np = random_direction(&mut rng);
        let ops = |d: &Direction| (0..=two_j as usize).map(|l| s_operator(l, spin, d).unwrap()).collect::<Vec<_>>();
        let (a, b) = (ops(&n), ops(&np));
        for (l, sa) in a.iter().enumerate() {
            prop_assert!(hermiticity_residual(sa) < 1e-12);
            for (lp, sb) in b.iter().enumerate() {
                let e = if l == lp { legendre_poly(l, n.dot(&np)) } else { 0.0 };
                prop_assert!((trace_product(sa, sb) - c(e, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn projection_spectrum(two_j in 1u32..=6, seed in any::<u64>()) {
        let spin = Spin::from_twice(two_j);
        let n = random_direction(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut ev = hermitian_eigenvalues(&spin_projection(spin, &n)).unwrap();
        ev.sort_by(f64::total_cmp);
        let mut ms = spin.projections();
        ms.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&ms) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let [jx, jy, jz] = spin_operators(spin);
        prop_assert!(max_abs_diff(&commutator(&jx, &jy), &(jz.clone() * c(0.0, 1.0))) < 1e-12);
        prop_assert!(max_abs_diff(&commutator(&jy, &jz), &(jx.clone() * c(0.0, 1.0))) < 1e-12);
        prop_assert!(max_abs_diff(&commutator(&jz, &jx), &(jy * c(0.0, 1.0))) < 1e-12);
    }
}
