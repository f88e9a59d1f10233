use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmat::{
    max_abs_diff, orthogonality_residual, trace, trace_product, ComplexMatrix, RealMatrix, ZERO,
};
use crate::sic::SicSet;

use super::GramFactors;

/// Bound on `|Q̃ᵀQ̃ - I|` accepted by the candidate builders.
pub const QTILDE_ORTHOGONALITY_TOL: f64 = 1e-8;

fn check_qtilde(gf: &GramFactors, qt: &RealMatrix) -> Result<()> {
    let n = gf.size() - 1;
    if qt.nrows() != n || qt.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: qt.nrows() });
    }
    let r = orthogonality_residual(qt);
    if !(r < QTILDE_ORTHOGONALITY_TOL) {
        return Err(Error::NotOrthogonal(r));
    }
    Ok(())
}

/// `Q = diag(1, Q̃)`.
pub fn full_q(qt: &RealMatrix) -> RealMatrix {
    let n = qt.nrows() + 1;
    let mut q = RealMatrix::zeros(n, n);
    q[(0, 0)] = 1.0;
    q.view_mut((1, 1), (n - 1, n - 1)).copy_from(qt);
    q
}

/// `Q 𝒮`: column `i` holds the coordinates of `Π̂_i` in the orthonormal basis.
pub fn coefficients(gf: &GramFactors, qt: &RealMatrix) -> RealMatrix {
    full_q(qt) * gf.s()
}

/// `F = 𝔖ᵀ Q 𝒮`: column `i` holds the block-scheme symbols of `Π̂_i`.
pub fn f_matrix(gf: &GramFactors, qt: &RealMatrix) -> RealMatrix {
    gf.frak_s().transpose() * coefficients(gf, qt)
}

pub(crate) fn candidate_from_coefficients(gf: &GramFactors, c: &RealMatrix) -> Vec<ComplexMatrix> {
    let d = gf.dim();
    let basis = gf.o_basis();
    (0..c.ncols())
        .map(|i| {
            let mut p = ComplexMatrix::zeros(d, d);
            for (a, o) in basis.iter().enumerate() {
                p += o.scale(c[(a, i)]);
            }
            p
        })
        .collect()
}

pub(crate) fn candidate_unchecked(gf: &GramFactors, qt: &RealMatrix) -> Vec<ComplexMatrix> {
    candidate_from_coefficients(gf, &coefficients(gf, qt))
}

/// `Π̂ = 𝒮ᵀ Qᵀ 𝔖^{-T} Ŝ`. The result is Hermitian with unit traces and the
/// SIC pairwise traces for every orthogonal `Q̃`; idempotence and
/// positivity hold only at a solution.
pub fn build_candidate(gf: &GramFactors, qt: &RealMatrix) -> Result<Vec<ComplexMatrix>> {
    check_qtilde(gf, qt)?;
    Ok(candidate_unchecked(gf, qt))
}

/// `Σ_i Tr[Π̂_i³]` without input checks; the optimizer's hot path.
pub(crate) fn objective_unchecked(gf: &GramFactors, qt: &RealMatrix) -> f64 {
    candidate_unchecked(gf, qt)
        .iter()
        .map(|p| trace_product(&(p * p), p).re)
        .sum()
}

/// `V_i = Tr[Π̂_i³]` by two routes.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalV {
    /// `Σ_{pqr} F_pi F_qi F_ri Tr[D̂_p D̂_q D̂_r]`.
    pub contraction: Vec<f64>,
    /// `Tr[Π̂_i³]` from the built candidate.
    pub direct: Vec<f64>,
}

impl FunctionalV {
    pub fn total(&self) -> f64 {
        self.direct.iter().sum()
    }

    pub fn route_gap(&self) -> f64 {
        self.contraction
            .iter()
            .zip(&self.direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `T[p][q][r] = Tr[A_p B_q B_r]`, row-major.
fn operator_triples(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Vec<Complex64> {
    let n = b.len();
    let pairs: Vec<ComplexMatrix> = (0..n * n).into_par_iter().map(|x| &b[x / n] * &b[x % n]).collect();
    (0..a.len() * n * n)
        .into_par_iter()
        .map(|x| trace_product(&a[x / (n * n)], &pairs[x % (n * n)]))
        .collect()
}

fn cubic_form(t: &[Complex64], f: &RealMatrix, i: usize, n: usize) -> Complex64 {
    let mut acc = ZERO;
    for p in 0..n {
        let fp = f[(p, i)];
        for q in 0..n {
            let fpq = fp * f[(q, i)];
            for r in 0..n {
                acc += t[(p * n + q) * n + r] * (fpq * f[(r, i)]);
            }
        }
    }
    acc
}

pub fn functional_v(gf: &GramFactors, qt: &RealMatrix) -> Result<FunctionalV> {
    let cand = build_candidate(gf, qt)?;
    let f = f_matrix(gf, qt);
    let n = gf.size();
    let t = operator_triples(gf.d_ops(), gf.d_ops());
    let contraction = (0..n).map(|i| cubic_form(&t, &f, i, n).re).collect();
    let direct = cand.iter().map(|p| trace_product(&(p * p), p).re).collect();
    Ok(FunctionalV { contraction, direct })
}

/// Residuals of the nonlinear matrix equation for `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixEquationResidual {
    /// `max_{i,p} |Σ_{qr} F_qi F_ri Tr[Ŝ_p D̂_q D̂_r] - F_pi|`, i.e.
    /// `|Tr[Ŝ_p Π̂_i²] - Tr[Ŝ_p Π̂_i]|`; zero iff every `Π̂_i` is idempotent.
    pub idempotence_form: f64,
    /// `max_{i,p} |(Fᵀ 𝒟_p F)_ii - F_pi|` with `(𝒟_p)_qr = Tr[D̂_p D̂_q D̂_r]`,
    /// i.e. `|Tr[D̂_p Π̂_i²] - Tr[Ŝ_p Π̂_i]|`. Nonzero even at a solution
    /// unless `D̂_p = Ŝ_p`.
    pub literal_form: f64,
}

pub fn matrix_equation_residual(gf: &GramFactors, qt: &RealMatrix) -> Result<MatrixEquationResidual> {
    check_qtilde(gf, qt)?;
    let f = f_matrix(gf, qt);
    let n = gf.size();
    let t_sdd = operator_triples(gf.s_ops(), gf.d_ops());
    let t_ddd = operator_triples(gf.d_ops(), gf.d_ops());
    let quad = |t: &[Complex64], p: usize, i: usize| -> Complex64 {
        let mut acc = ZERO;
        for q in 0..n {
            for r in 0..n {
                acc += t[(p * n + q) * n + r] * (f[(q, i)] * f[(r, i)]);
            }
        }
        acc
    };
    let mut res = MatrixEquationResidual { idempotence_form: 0.0, literal_form: 0.0 };
    for i in 0..n {
        for p in 0..n {
            let rhs = f[(p, i)];
            res.idempotence_form = res.idempotence_form.max((quad(&t_sdd, p, i) - rhs).norm());
            res.literal_form = res.literal_form.max((quad(&t_ddd, p, i) - rhs).norm());
        }
    }
    Ok(res)
}

/// Residuals of the properties every candidate has by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructionResiduals {
    pub hermiticity: f64,
    pub unit_trace: f64,
    pub pairwise_trace: f64,
    /// `|Σ_i Π̂_i - d Î|`.
    pub completeness: f64,
    /// `|Fᵀ 𝔐^{-1} F - Γ|`.
    pub symbol_gram: f64,
}

pub fn construction_residuals(gf: &GramFactors, qt: &RealMatrix) -> Result<ConstructionResiduals> {
    let cand = build_candidate(gf, qt)?;
    let d = gf.dim();
    let n = gf.size();
    let mut r = ConstructionResiduals {
        hermiticity: 0.0,
        unit_trace: 0.0,
        pairwise_trace: 0.0,
        completeness: 0.0,
        symbol_gram: 0.0,
    };
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, p) in cand.iter().enumerate() {
        r.hermiticity = r.hermiticity.max(crate::qmat::hermiticity_residual(p));
        r.unit_trace = r.unit_trace.max((trace(p) - 1.0).norm());
        for (j, q) in cand.iter().enumerate() {
            let g = gf.gamma()[(i, j)];
            r.pairwise_trace = r.pairwise_trace.max((trace_product(p, q) - g).norm());
        }
        sum += p;
    }
    r.completeness = max_abs_diff(&sum, &crate::qmat::identity(d).scale(d as f64));
    let f = f_matrix(gf, qt);
    let minv = gf.frak_m().clone().try_inverse().ok_or_else(|| Error::Invalid("singular 𝔐".into()))?;
    let g = f.transpose() * minv * f;
    r.symbol_gram = crate::qmat::max_abs_diff_real(&g, gf.gamma());
    debug_assert_eq!(g.nrows(), n);
    Ok(r)
}

/// `Q̃` of a verified set: coordinates `C_ai = Tr[Π̂_i O_a]`, `Q = C 𝒮^{-1}`.
pub fn qtilde_from_sic(gf: &GramFactors, s: &SicSet) -> Result<RealMatrix> {
    if s.dim() != gf.dim() {
        return Err(Error::DimensionMismatch { expected: gf.dim(), got: s.dim() });
    }
    let n = gf.size();
    let c = RealMatrix::from_fn(n, n, |a, i| trace_product(&s.projectors()[i], &gf.o_basis()[a]).re);
    let sinv = gf.s().clone().try_inverse().ok_or_else(|| Error::Invalid("singular 𝒮".into()))?;
    let q = c * sinv;
    Ok(q.view((1, 1), (n - 1, n - 1)).into_owned())
}
