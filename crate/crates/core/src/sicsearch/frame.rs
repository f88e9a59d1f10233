use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::qmat::{max_abs_diff_real, trace_product, unitarity_residual, ComplexMatrix, RealMatrix};
use crate::sic::SicSet;

use super::gram::s_scr;
use super::GramFactors;

/// `N + 1` equiangular vectors in `R^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquiangularFrame {
    pub n: usize,
    pub vectors: Vec<DVector<f64>>,
}

impl EquiangularFrame {
    /// `d = √(N+1)`.
    pub fn d(&self) -> f64 {
        ((self.n + 1) as f64).sqrt()
    }

    /// `max_i ||r_i|² - (d-1)/d|`.
    pub fn norm_residual(&self) -> f64 {
        let d = self.d();
        self.vectors.iter().map(|v| (v.norm_squared() - (d - 1.0) / d).abs()).fold(0.0, f64::max)
    }

    /// `max_{i≠j} |r_i·r_j + 1/(d(d+1))|`.
    pub fn angle_residual(&self) -> f64 {
        let d = self.d();
        let target = -1.0 / (d * (d + 1.0));
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for b in &self.vectors[i + 1..] {
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }
}

/// Columns of rows `2..N+1` of `𝒮_{N+1}` with `d = √(N+1)`.
pub fn equiangular_frame(n: usize) -> Result<EquiangularFrame> {
    if n == 0 {
        return Err(Error::Domain("frame dimension must be at least 1".into()));
    }
    let s = s_scr(n + 1, ((n + 1) as f64).sqrt());
    let vectors = (0..=n).map(|i| DVector::from_fn(n, |r, _| s[(r + 1, i)])).collect();
    Ok(EquiangularFrame { n, vectors })
}

/// `{û Π̂_i û†}` and the orthogonal `Q_u` with `Q_u[k][l] = Tr[û O_l û† O_k]`
/// in the orthonormal basis of `gf`, so that `Q ↦ Q_u Q`. The transformed
/// set is verified at the source set's tolerance.
pub fn unitary_orbit(s: &SicSet, u: &ComplexMatrix, gf: &GramFactors) -> Result<(SicSet, RealMatrix)> {
    if u.nrows() != s.dim() || u.ncols() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: u.nrows() });
    }
    if gf.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: gf.dim() });
    }
    let r = unitarity_residual(u);
    if !(r < 1e-10) {
        return Err(Error::NotUnitary(r));
    }
    let ud = u.adjoint();
    let moved: Vec<ComplexMatrix> = s.projectors().iter().map(|p| u * p * &ud).collect();
    let out = SicSet::new(moved, s.verification().tolerance)?;
    let basis = gf.o_basis();
    let rotated: Vec<ComplexMatrix> = basis.iter().map(|o| u * o * &ud).collect();
    let n = basis.len();
    let q = RealMatrix::from_fn(n, n, |k, l| trace_product(&rotated[l], &basis[k]).re);
    debug_assert!(max_abs_diff_real(&(q.transpose() * &q), &RealMatrix::identity(n, n)) < 1e-8);
    Ok((out, q))
}
