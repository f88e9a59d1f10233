//! Dense complex linear algebra for small dimensions, plus the special
//! functions and angular-momentum constructions the quantization schemes
//! are built from.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; comparisons use the
//! max-abs entrywise norm throughout.

mod special;
mod spin;
pub mod random;

pub use special::{
    chebyshev_norm, discrete_chebyshev, f_coeff, gauss_legendre, legendre, legendre_normalized,
    legendre_poly,
};
pub use spin::{s_operator, spin_operators, spin_projection, Direction, Spin};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{TOL_HERMITIAN, TOL_PSD, TOL_TRACE};

/// Dense square complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Dense real matrix.
pub type RealMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.trace()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn trace_product3(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Complex64 {
    trace_product(&(a * b), c)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `max |M - M†|`.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermiticity_residual(m) < TOL_HERMITIAN
}

pub fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() && m.nrows() > 0 {
        Ok(m.nrows())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.nrows().max(1),
            got: m.ncols(),
        })
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_square(m)?;
    let herm = hermiticity_residual(m);
    if herm >= TOL_HERMITIAN {
        return Err(Error::NotHermitian(herm));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), m.nrows(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|(v, _)| v)
}

/// `f(M)` for Hermitian `M`, through its eigen-decomposition.
pub fn apply_hermitian_fn(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let n = values.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let fk = f(lambda);
        if fk == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()).scale(fk);
    }
    Ok(out)
}

/// Returns `(min eigenvalue >= -TOL_PSD, min eigenvalue)`.
pub fn psd_check(m: &ComplexMatrix) -> Result<(bool, f64)> {
    let values = hermitian_eigenvalues(m)?;
    let min = values[0];
    Ok((min >= -TOL_PSD, min))
}

/// Checks Hermiticity, unit trace and positivity of a density matrix.
pub fn validate_density_matrix(rho: &ComplexMatrix) -> Result<()> {
    require_square(rho)?;
    let herm = hermiticity_residual(rho);
    if herm >= TOL_HERMITIAN {
        return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > TOL_TRACE {
        return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
    }
    let (ok, min) = psd_check(rho)?;
    if !ok {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Pauli matrices `(σx, σy, σz)`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let sx = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sy = ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let sz = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    [sx, sy, sz]
}

/// `σ·v`.
pub fn sigma_dot(v: [f64; 3]) -> ComplexMatrix {
    let [sx, sy, sz] = pauli();
    sx.scale(v[0]) + sy.scale(v[1]) + sz.scale(v[2])
}

/// `½(Î + σ·r)`.
pub fn qubit_from_bloch(r: [f64; 3]) -> ComplexMatrix {
    (identity(2) + sigma_dot(r)).scale(0.5)
}

/// Bloch vector `(Tr[σx A], Tr[σy A], Tr[σz A])` of a qubit operator.
pub fn bloch_vector(m: &ComplexMatrix) -> [f64; 3] {
    let [sx, sy, sz] = pauli();
    [
        trace_product(m, &sx).re,
        trace_product(m, &sy).re,
        trace_product(m, &sz).re,
    ]
}

/// Matrix unit `|r⟩⟨c|`.
pub fn matrix_unit(dim: usize, r: usize, c: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(r, c)] = ONE;
    m
}

/// All `dim²` matrix units, row-major.
pub fn matrix_units(dim: usize) -> Vec<ComplexMatrix> {
    (0..dim * dim)
        .map(|k| matrix_unit(dim, k / dim, k % dim))
        .collect()
}

/// 2-norm condition number of a real square matrix.
pub fn condition_number(m: &RealMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `max |QᵀQ - I|`.
pub fn orthogonality_residual(q: &RealMatrix) -> f64 {
    let n = q.ncols();
    max_abs_diff_real(&(q.transpose() * q), &RealMatrix::identity(n, n))
}

/// `max |U†U - I|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_of_identity() {
        let (ok, min) = psd_check(&identity(3)).unwrap();
        assert!(ok);
        assert!((min - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psd_detects_small_negative_eigenvalue() {
        let mut m = identity(2);
        m[(1, 1)] = c(-1e-3, 0.0);
        let (ok, min) = psd_check(&m).unwrap();
        assert!(!ok);
        assert!((min + 1e-3).abs() < 1e-15);
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = ONE;
        assert!(matches!(psd_check(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rank_one_projector_spectrum() {
        // canonical qubit Π₁: Bloch vector (1,1,1)/√3
        let s = 1.0 / 3f64.sqrt();
        let p = qubit_from_bloch([s, s, s]);
        // characteristic polynomial λ² - Tr λ + det
        let tr = trace(&p).re;
        let det = (p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)]).re;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let roots = [(tr - disc) / 2.0, (tr + disc) / 2.0];
        let (ok, min) = psd_check(&p).unwrap();
        assert!(ok);
        assert!(min.abs() < 1e-12);
        assert!(roots[0].abs() < 1e-12 && (roots[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_fn_squares() {
        let m = sigma_dot([0.3, -0.4, 0.5]);
        let sq = apply_hermitian_fn(&m, |x| x * x).unwrap();
        assert!(max_abs_diff(&sq, &(&m * &m)) < 1e-14);
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.1, 0.2, -0.3];
        let b = bloch_vector(&qubit_from_bloch(r));
        for k in 0..3 {
            assert!((b[k] - r[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn density_validation() {
        assert!(validate_density_matrix(&identity(2).scale(0.5)).is_ok());
        assert!(validate_density_matrix(&identity(2)).is_err());
        let mut bad = identity(2).scale(0.5);
        bad[(0, 0)] = c(1.2, 0.0);
        bad[(1, 1)] = c(-0.2, 0.0);
        assert!(validate_density_matrix(&bad).is_err());
    }
}
