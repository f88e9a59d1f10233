use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmat::{
    condition_number, identity, legendre_normalized, max_abs_diff, max_abs_diff_real, s_operator,
    trace_product, ComplexMatrix, RealMatrix, Spin,
};
use crate::sic::gram_value;
use crate::spintomo::{block_directions, m_inverse, m_matrix, DirectionSet, DEFAULT_DIRECTION_SEED};
use crate::starprod::{IndexPoint, Scheme};
use crate::tolerance::COND_MAX;

/// Build-time bound on the Gram-factor identities.
const GRAM_BUILD_TOL: f64 = 1e-8;

/// `𝒮` for a `n × n` Gram matrix with parameter `d` (not necessarily an
/// integer): row 0 is `1/√d`; row `k` (1-based `k ≥ 2`) has
/// `-sqrt(d/(k(k-1)(d+1)))` left of the diagonal and `sqrt((k-1)d/(k(d+1)))`
/// on it.
pub fn s_scr(n: usize, d: f64) -> RealMatrix {
    RealMatrix::from_fn(n, n, |r, l| {
        if r == 0 {
            return 1.0 / d.sqrt();
        }
        let k = (r + 1) as f64;
        match l.cmp(&r) {
            std::cmp::Ordering::Less => -(d / (k * (k - 1.0) * (d + 1.0))).sqrt(),
            std::cmp::Ordering::Equal => ((k - 1.0) * d / (k * (d + 1.0))).sqrt(),
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

/// `Σ(L)`: column `j` is direction `n_j`; row 0 is `P_L(cos θ_j)`, rows
/// `2m-1, 2m` are `sqrt(2(L-m)!/(L+m)!) P_L^{(m)}(cos θ_j)` times
/// `cos mφ_j`, `sin mφ_j` (no Condon–Shortley phase).
pub fn sigma_block(ds: &DirectionSet, l: usize) -> Result<RealMatrix> {
    let size = 2 * l + 1;
    if ds.count() < size {
        return Err(Error::DimensionMismatch { expected: size, got: ds.count() });
    }
    let mut out = RealMatrix::zeros(size, size);
    for (j, n) in ds.directions[..size].iter().enumerate() {
        let x = n.cartesian[2].clamp(-1.0, 1.0);
        out[(0, j)] = legendre_normalized(l, 0, x)?;
        for m in 1..=l {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let p = SQRT_2 * sign * legendre_normalized(l, m, x)?;
            let mphi = m as f64 * n.phi;
            out[(2 * m - 1, j)] = p * mphi.cos();
            out[(2 * m, j)] = p * mphi.sin();
        }
    }
    Ok(out)
}

fn block_diag(blocks: &[RealMatrix]) -> RealMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = RealMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Residuals of the Gram-factor identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramResiduals {
    /// `|𝒮ᵀ𝒮 - Γ|`.
    pub s_gamma: f64,
    /// `|𝔖ᵀ𝔖 - 𝔐|`.
    pub frak: f64,
    /// `|Σ_l 𝒮_kl - δ_k1 d^{3/2}|`.
    pub row_sum: f64,
    /// `|Tr[O_a O_b] - δ_ab|` for the orthonormal basis `O = 𝔖^{-T} Ŝ`.
    pub orthonormal_basis: f64,
}

impl GramResiduals {
    pub fn max(&self) -> f64 {
        self.s_gamma.max(self.frak).max(self.row_sum).max(self.orthonormal_basis)
    }
}

/// Gram factors and operator families for dimension `d` over per-block
/// direction sets. Index `p` runs over `(L, k)`, `L = 0..d`, `k < 2L+1`,
/// `L`-major.
#[derive(Clone, Debug)]
pub struct GramFactors {
    dim: usize,
    gamma: RealMatrix,
    s: RealMatrix,
    frak_m: RealMatrix,
    frak_s: RealMatrix,
    directions: Vec<DirectionSet>,
    index: Vec<(usize, usize)>,
    s_ops: Vec<ComplexMatrix>,
    d_ops: Vec<ComplexMatrix>,
    o_basis: Vec<ComplexMatrix>,
    residuals: GramResiduals,
}

impl GramFactors {
    /// `directions[L]` must hold at least `2L+1` directions; only the first
    /// `2L+1` are used.
    pub fn new(d: usize, directions: Vec<DirectionSet>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
        }
        if directions.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: directions.len() });
        }
        let spin = Spin::from_dim(d)?;
        let n = d * d;
        let gamma = RealMatrix::from_fn(n, n, |i, j| gram_value(d, i, j));
        let s = s_scr(n, d as f64);

        let mut sigmas = Vec::with_capacity(d);
        let mut ms = Vec::with_capacity(d);
        let mut index = Vec::with_capacity(n);
        let mut s_ops = Vec::with_capacity(n);
        let mut d_ops = Vec::with_capacity(n);
        for (l, ds) in directions.iter().enumerate() {
            let sigma = sigma_block(ds, l)?;
            let cond = condition_number(&sigma);
            if !(cond < COND_MAX) {
                return Err(Error::IllPosedDirections { l, cond });
            }
            let minv = m_inverse(&ds.directions, l)?;
            let size = 2 * l + 1;
            let ops = ds.directions[..size]
                .iter()
                .map(|dir| s_operator(l, spin, dir))
                .collect::<Result<Vec<_>>>()?;
            for k in 0..size {
                let mut q = ComplexMatrix::zeros(d, d);
                for (kp, op) in ops.iter().enumerate() {
                    q += op.scale(minv[(k, kp)]);
                }
                index.push((l, k));
                d_ops.push(q);
            }
            s_ops.extend(ops);
            ms.push(m_matrix(&ds.directions, l)?);
            sigmas.push(sigma);
        }
        let frak_s = block_diag(&sigmas);
        let frak_m = block_diag(&ms);

        // O = 𝔖^{-T} Ŝ
        let inv_t = frak_s
            .clone()
            .try_inverse()
            .ok_or(Error::IllPosedDirections { l: d - 1, cond: f64::INFINITY })?
            .transpose();
        let o_basis: Vec<ComplexMatrix> = (0..n)
            .map(|a| {
                let mut o = ComplexMatrix::zeros(d, d);
                for (p, sp) in s_ops.iter().enumerate() {
                    if inv_t[(a, p)] != 0.0 {
                        o += sp.scale(inv_t[(a, p)]);
                    }
                }
                o
            })
            .collect();

        let row_sum = (0..n)
            .map(|k| {
                let target = if k == 0 { (d as f64).powf(1.5) } else { 0.0 };
                (s.row(k).sum() - target).abs()
            })
            .fold(0.0, f64::max);
        let orthonormal_basis = (0..n * n)
            .into_par_iter()
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                let target = if a == b { 1.0 } else { 0.0 };
                (trace_product(&o_basis[a], &o_basis[b]).re - target)
                    .abs()
                    .max(trace_product(&o_basis[a], &o_basis[b]).im.abs())
            })
            .reduce(|| 0.0, f64::max);
        let residuals = GramResiduals {
            s_gamma: max_abs_diff_real(&(s.transpose() * &s), &gamma),
            frak: max_abs_diff_real(&(frak_s.transpose() * &frak_s), &frak_m),
            row_sum,
            orthonormal_basis,
        };
        if residuals.max() > GRAM_BUILD_TOL {
            return Err(Error::Invalid(format!("Gram-factor identities fail: {residuals:?}")));
        }
        debug_assert!(max_abs_diff(&o_basis[0], &identity(d).scale(1.0 / (d as f64).sqrt())) < 1e-9);
        Ok(GramFactors { dim: d, gamma, s, frak_m, frak_s, directions, index, s_ops, d_ops, o_basis, residuals })
    }

    /// Per-block directions from [`block_directions`] with seeds
    /// `seed + L`.
    pub fn with_seed(d: usize, seed: u64) -> Result<Self> {
        let dirs = (0..d).map(|l| block_directions(l, seed.wrapping_add(l as u64))).collect::<Result<Vec<_>>>()?;
        Self::new(d, dirs)
    }

    pub fn default_for(d: usize) -> Result<Self> {
        Self::with_seed(d, DEFAULT_DIRECTION_SEED)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d²`.
    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn gamma(&self) -> &RealMatrix {
        &self.gamma
    }

    /// `𝒮`.
    pub fn s(&self) -> &RealMatrix {
        &self.s
    }

    /// `𝔐`.
    pub fn frak_m(&self) -> &RealMatrix {
        &self.frak_m
    }

    /// `𝔖`.
    pub fn frak_s(&self) -> &RealMatrix {
        &self.frak_s
    }

    pub fn directions(&self) -> &[DirectionSet] {
        &self.directions
    }

    /// `(L, k)` of each index `p`.
    pub fn index(&self) -> &[(usize, usize)] {
        &self.index
    }

    /// `Ŝ_L(n_k)`.
    pub fn s_ops(&self) -> &[ComplexMatrix] {
        &self.s_ops
    }

    /// `D̂(L, k) = Σ_k' 𝔐^{-1}(L)_{kk'} Ŝ_L(n_k')`.
    pub fn d_ops(&self) -> &[ComplexMatrix] {
        &self.d_ops
    }

    /// Orthonormal Hermitian basis `𝔖^{-T} Ŝ`; the first element is `Î/√d`.
    pub fn o_basis(&self) -> &[ComplexMatrix] {
        &self.o_basis
    }

    pub fn residuals(&self) -> GramResiduals {
        self.residuals
    }

    /// Scheme with `Û(L,k) = Ŝ_L(n_k)`, `D̂(L,k)` as in [`Self::d_ops`] and
    /// unit weights.
    pub fn block_scheme(&self) -> Scheme {
        let points = self.index.iter().map(|&(l, k)| IndexPoint::Block { l, k }).collect();
        Scheme::new(
            format!("block-d{}", self.dim),
            points,
            self.s_ops.clone(),
            self.d_ops.clone(),
            vec![1.0; self.size()],
        )
        .expect("consistent operator families")
    }
}
