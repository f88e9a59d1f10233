use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{apply_hermitian_fn, c, f_coeff, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Spin quantum number `j`, stored as the integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub fn from_twice(two_j: u32) -> Self {
        Spin { two_j }
    }

    /// Spin whose Hilbert space has dimension `d = 2j + 1`.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("Hilbert space dimension must be >= 1".into()));
        }
        Ok(Spin { two_j: (dim - 1) as u32 })
    }

    /// Parses `j` from a real value such as `0.5` or `1`.
    pub fn from_value(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(twice >= 0.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::Domain(format!("spin must be a nonnegative half-integer, got {j}")));
        }
        Ok(Spin { two_j: twice.round() as u32 })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Projections `m = j, j-1, ..., -j`, the order of the standard basis.
    pub fn projections(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| self.j() - r as f64).collect()
    }
}

/// Point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
    pub cartesian: [f64; 3],
}

impl Direction {
    /// `θ ∈ [0, π]`; `φ` is wrapped into `[0, 2π)`.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("invalid angles θ = {theta}, φ = {phi}")));
        }
        let phi = phi.rem_euclid(2.0 * PI);
        let cartesian = [phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos()];
        Ok(Direction { theta, phi, cartesian })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain(format!("cannot normalize {v:?}")));
        }
        let n = [v[0] / norm, v[1] / norm, v[2] / norm];
        let theta = n[2].clamp(-1.0, 1.0).acos();
        let phi = n[1].atan2(n[0]).rem_euclid(2.0 * PI);
        Ok(Direction { theta, phi, cartesian: n })
    }

    /// Accepts only vectors whose norm is 1 within `1e-9`.
    pub fn from_unit(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("direction {v:?} has norm {norm}, expected 1")));
        }
        Self::from_cartesian(v)
    }

    pub fn x() -> Self {
        Self::from_cartesian([1.0, 0.0, 0.0]).unwrap()
    }

    pub fn y() -> Self {
        Self::from_cartesian([0.0, 1.0, 0.0]).unwrap()
    }

    pub fn z() -> Self {
        Self::from_cartesian([0.0, 0.0, 1.0]).unwrap()
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        let (a, b) = (self.cartesian, other.cartesian);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }
}

/// `(Ĵ_x, Ĵ_y, Ĵ_z)` in the basis `|j, m⟩`, `m = j..-j`.
pub fn spin_operators(spin: Spin) -> [ComplexMatrix; 3] {
    let d = spin.dim();
    let j = spin.j();
    let mut jp = ComplexMatrix::zeros(d, d);
    let mut jz = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        let m = j - r as f64;
        jz[(r, r)] = c(m, 0.0);
        if r > 0 {
            // Ĵ₊|m⟩ = sqrt(j(j+1) - m(m+1)) |m+1⟩
            jp[(r - 1, r)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    [jx, jy, jz]
}

/// `Ĵ·n`.
pub fn spin_projection(spin: Spin, n: &Direction) -> ComplexMatrix {
    let [jx, jy, jz] = spin_operators(spin);
    let v = n.cartesian;
    let mut out = ComplexMatrix::from_element(spin.dim(), spin.dim(), ZERO);
    out += jx.scale(v[0]);
    out += jy.scale(v[1]);
    out += jz.scale(v[2]);
    out
}

/// `Ŝ_L(n) = f_L((Ĵ·n))`, evaluated on the spectrum of `Ĵ·n`.
///
/// Eigenvalues are snapped to the nearest projection `m` before `f_L` is
/// applied, since the spectrum is known exactly.
pub fn s_operator(l: usize, spin: Spin, n: &Direction) -> Result<ComplexMatrix> {
    if l > spin.two_j() as usize {
        return Err(Error::Domain(format!(
            "Ŝ_L requires L <= 2j, got L = {l}, 2j = {}",
            spin.two_j()
        )));
    }
    let proj = spin_projection(spin, n);
    apply_hermitian_fn(&proj, |lambda| {
        let m = (2.0 * lambda).round() / 2.0;
        f_coeff(l, spin, m).expect("degree checked above")
    })
}
