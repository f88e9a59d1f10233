//! Seedable random matrices and states for tests and search restarts.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, Direction, RealMatrix};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Haar-random orthogonal matrix (either determinant).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealMatrix {
    let g = RealMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for row in 0..n {
                q[(row, k)] = -q[(row, k)];
            }
        }
    }
    q
}

/// Haar-random rotation (determinant +1).
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealMatrix {
    let mut q = random_orthogonal(n, rng);
    if q.determinant() < 0.0 {
        for row in 0..n {
            q[(row, 0)] = -q[(row, 0)];
        }
    }
    q
}

pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        if let Ok(d) = Direction::from_cartesian(v) {
            return d;
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Hilbert–Schmidt random density matrix `G G† / Tr[G G†]`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let rho = rho / tr;
    (&rho + rho.adjoint()).scale(0.5)
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    (&g + g.adjoint()).scale(0.5)
}

/// Random complex matrix with standard normal entries.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

#[cfg(test)]
mod tests {
    use super::super::{orthogonality_residual, unitarity_residual, validate_density_matrix};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_objects_have_their_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=5 {
            assert!(unitarity_residual(&random_unitary(d, &mut rng)) < 1e-12);
            assert!(orthogonality_residual(&random_orthogonal(d, &mut rng)) < 1e-12);
            assert!((random_rotation(d, &mut rng).determinant() - 1.0).abs() < 1e-12);
            validate_density_matrix(&random_density_matrix(d, &mut rng)).unwrap();
        }
    }
}
