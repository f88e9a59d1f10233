//! Closed-form qubit layer: the canonical SIC, the parametrization of all
//! qubit SICs by an orthogonal 3×3 matrix, closed-form kernels,
//! intertwining kernels to spin schemes, MUBs and the `sl(2, C)` relations.

use nalgebra::{DVector, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    bloch_vector, c, commutator, identity, max_abs, max_abs_diff, qubit_from_bloch,
    trace_product, ComplexMatrix, Direction, I, ONE, ZERO,
};
use crate::sic::{kernel_from_t, triple_products, SicSet, TripleProductTensor};
use crate::starprod::{KernelTensor, Scheme, Symbol};

/// The four equiangular base vectors `r_i` of the parametrization.
pub fn base_vectors() -> [Vector3<f64>; 4] {
    let a = (2.0f64 / 3.0).sqrt();
    let b = 2f64.sqrt() / 3.0;
    [
        Vector3::new(-a, -b, -1.0 / 3.0),
        Vector3::new(a, -b, -1.0 / 3.0),
        Vector3::new(0.0, 2.0 * 2f64.sqrt() / 3.0, -1.0 / 3.0),
        Vector3::new(0.0, 0.0, 1.0),
    ]
}

/// Cyclic permutation `(a, b, c) ↦ (b, c, a)` relating `R` and `Q̃`:
/// `R = P Q̃`.
pub fn axis_permutation() -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
}

/// Bloch vectors of the canonical set, `(±1, ±1, ±1)/√3` with an even
/// number of minus signs.
pub fn canonical_bloch_vectors() -> [Vector3<f64>; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        Vector3::new(s, s, s),
        Vector3::new(s, -s, -s),
        Vector3::new(-s, s, -s),
        Vector3::new(-s, -s, s),
    ]
}

/// The canonical projectors with their closed-form entries.
pub fn canonical_projectors() -> Vec<ComplexMatrix> {
    let r3 = 3f64.sqrt();
    let k = 1.0 / (2.0 * r3);
    let m = |a: f64, b: Complex64, d: f64| {
        ComplexMatrix::from_row_slice(2, 2, &[c(a * k, 0.0), b * k, b.conj() * k, c(d * k, 0.0)])
    };
    vec![
        m(r3 + 1.0, c(1.0, -1.0), r3 - 1.0),
        m(r3 - 1.0, c(1.0, 1.0), r3 + 1.0),
        m(r3 - 1.0, c(-1.0, -1.0), r3 + 1.0),
        m(r3 + 1.0, c(-1.0, 1.0), r3 - 1.0),
    ]
}

/// Canonical qubit SIC, verified at `1e-14`.
pub fn canonical_sic() -> SicSet {
    SicSet::new(canonical_projectors(), 1e-14).expect("canonical qubit SIC verifies")
}

/// Closed-form fiducial vectors of the canonical set.
pub fn canonical_fiducials() -> [DVector<Complex64>; 4] {
    let r3 = 3f64.sqrt();
    let n = 1.0 / (2.0 * r3).sqrt();
    let v = |a: f64, b: f64, phase: f64| {
        DVector::from_vec(vec![c(a.sqrt() * n, 0.0), Complex64::from_polar(b.sqrt() * n, phase)])
    };
    let q = std::f64::consts::FRAC_PI_4;
    [
        v(r3 + 1.0, r3 - 1.0, q),
        v(r3 - 1.0, r3 + 1.0, -q),
        v(r3 - 1.0, r3 + 1.0, 3.0 * q),
        v(r3 + 1.0, r3 - 1.0, -3.0 * q),
    ]
}

/// `R` together with the base vectors it rotates.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitSicParam {
    pub r: Matrix3<f64>,
    pub base_vectors: [Vector3<f64>; 4],
    /// `det R`, `+1` (rotation) or `-1` (inversion).
    pub det_class: i8,
}

impl QubitSicParam {
    pub fn new(r: Matrix3<f64>) -> Result<Self> {
        let resid = (r.transpose() * r - Matrix3::identity()).abs().max();
        if !(resid < 1e-10) {
            return Err(Error::NotOrthogonal(resid));
        }
        let det_class = if r.determinant() > 0.0 { 1 } else { -1 };
        Ok(QubitSicParam { r, base_vectors: base_vectors(), det_class })
    }

    /// `R = P Q̃` for a `3 × 3` block `Q̃`.
    pub fn from_qtilde(qt: &crate::qmat::RealMatrix) -> Result<Self> {
        if qt.nrows() != 3 || qt.ncols() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: qt.nrows() });
        }
        Self::new(axis_permutation() * Matrix3::from_fn(|i, j| qt[(i, j)]))
    }

    /// The `R` mapping the base vectors onto the canonical Bloch vectors in
    /// order (an inversion).
    pub fn canonical() -> Self {
        let b = base_vectors();
        let t = canonical_bloch_vectors();
        let from = Matrix3::from_columns(&[b[0], b[1], b[2]]);
        let to = Matrix3::from_columns(&[t[0], t[1], t[2]]);
        Self::new(to * from.try_inverse().expect("base vectors span R^3")).expect("orthogonal by construction")
    }

    /// `R r_i`.
    pub fn bloch_vectors(&self) -> [Vector3<f64>; 4] {
        self.base_vectors.map(|v| self.r * v)
    }

    /// `s = -(3√3/4) b_1·(b_2 × b_3)` for the Bloch vectors `b_i`, so that
    /// `b_i·(b_j × b_k) = -4 s ε_ijk / (3√3)`.
    pub fn orientation(&self) -> f64 {
        let b = self.bloch_vectors();
        let t = b[0].dot(&b[1].cross(&b[2]));
        (-t * 3.0 * 3f64.sqrt() / 4.0).round()
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.bloch_vectors().iter().map(|b| qubit_from_bloch([b.x, b.y, b.z])).collect()
    }
}

/// `Π_i = ½(Î + σ·(R r_i))`, verified at `1e-12`.
pub fn sic_from_r(r: Matrix3<f64>) -> Result<SicSet> {
    SicSet::new(QubitSicParam::new(r)?.projectors(), 1e-12)
}

/// Antisymmetric symbol on four labels (0-based) with
/// `ε_012 = ε_023 = ε_031 = ε_321 = 1`; zero unless all indices differ.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    const POSITIVE: [[usize; 3]; 4] = [[0, 1, 2], [0, 2, 3], [0, 3, 1], [3, 2, 1]];
    if i == j || j == k || i == k || i > 3 || j > 3 || k > 3 {
        return 0.0;
    }
    for p in POSITIVE {
        for shift in 0..3 {
            let cyc = [p[shift], p[(shift + 1) % 3], p[(shift + 2) % 3]];
            if cyc == [i, j, k] {
                return 1.0;
            }
            if cyc == [j, i, k] {
                return -1.0;
            }
        }
    }
    unreachable!("every triple of distinct labels appears in the table")
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Closed-form qubit tensors and their agreement with the generic route.
#[derive(Clone, Debug)]
pub struct QubitClosedForms {
    pub orientation: f64,
    pub t: TripleProductTensor,
    pub k: KernelTensor,
    pub k_dual: KernelTensor,
    /// Closed form vs direct traces.
    pub t_residual: f64,
    pub k_residual: f64,
    pub k_dual_residual: f64,
    /// `½{3δ_ij - i√3 ε_ijk - 1}` against the generic kernel; this shorter
    /// form drops `δ_jk + δ_ki` and does not hold.
    pub k_short_form_residual: f64,
}

/// With `s` the orientation of the set:
/// `T_ijk = ⅓{δ_ij + δ_jk + δ_ki - s(i/√3) ε_ijk}`,
/// `K_ijk = ½{3δ_ij + δ_jk + δ_ki - i√3 s ε_ijk - 1}`,
/// `K^dual_ijk = (1/12){δ_ij + 3(δ_jk + δ_ki) - i√3 s ε_ijk - 1}`.
pub fn qubit_closed_forms(param: &QubitSicParam) -> Result<QubitClosedForms> {
    let s = param.orientation();
    let set = SicSet::new(param.projectors(), 1e-12)?;
    let r3 = 3f64.sqrt();
    let mut t = triple_products(&set);
    let direct_t = t.clone();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let e = levi_civita(i, j, k);
                t.entries[(i * 4 + j) * 4 + k] =
                    c((delta(i, j) + delta(j, k) + delta(k, i)) / 3.0, -s * e / (3.0 * r3));
            }
        }
    }
    let t_residual = max_entry_diff(&t.entries, &direct_t.entries);
    let label = set.scheme_label();
    let k = KernelTensor::from_fn(label.clone(), 4, false, |i, j, k| {
        c(0.5 * (3.0 * delta(i, j) + delta(j, k) + delta(k, i) - 1.0), -0.5 * r3 * s * levi_civita(i, j, k))
    });
    let k_dual = KernelTensor::from_fn(label.clone(), 4, true, |i, j, k| {
        c(
            (delta(i, j) + 3.0 * (delta(j, k) + delta(k, i)) - 1.0) / 12.0,
            -r3 * s * levi_civita(i, j, k) / 12.0,
        )
    });
    let short = KernelTensor::from_fn(label, 4, false, |i, j, k| {
        c(0.5 * (3.0 * delta(i, j) - 1.0), -0.5 * r3 * s * levi_civita(i, j, k))
    });
    let generic_k = kernel_from_t(&direct_t, false);
    let generic_kd = kernel_from_t(&direct_t, true);
    Ok(QubitClosedForms {
        orientation: s,
        k_residual: k.max_abs_diff(&generic_k),
        k_dual_residual: k_dual.max_abs_diff(&generic_kd),
        k_short_form_residual: short.max_abs_diff(&generic_k),
        t,
        k,
        k_dual,
        t_residual,
    })
}

fn max_entry_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `𝒦(x1, x2) = Tr[D̂_from(x1) Û_to(x2)]`, row `x1`, column `x2`.
pub fn intertwining_kernel(from: &Scheme, to: &Scheme) -> Result<Vec<Vec<Complex64>>> {
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch { expected: from.dim(), got: to.dim() });
    }
    Ok(from
        .quantizers()
        .iter()
        .map(|d| to.dequantizers().iter().map(|u| trace_product(d, u)).collect())
        .collect())
}

/// `f_to(x2) = Σ_{x1} w(x1) f_from(x1) Tr[D̂_from(x1) Û_to(x2)]`.
pub fn intertwine(f: &Symbol, from: &Scheme, to: &Scheme) -> Result<Symbol> {
    if f.scheme_label != from.label() {
        return Err(Error::SchemeMismatch { symbol: f.scheme_label.clone(), scheme: from.label().to_string() });
    }
    if f.values.len() != from.len() {
        return Err(Error::DimensionMismatch { expected: from.len(), got: f.values.len() });
    }
    let kernel = intertwining_kernel(from, to)?;
    let mut values = vec![ZERO; to.len()];
    for ((row, fx), w) in kernel.iter().zip(&f.values).zip(from.weights()) {
        let a = fx * *w;
        for (v, k) in values.iter_mut().zip(row) {
            *v += a * k;
        }
    }
    Ok(Symbol { scheme_label: to.label().to_string(), values })
}

/// `𝒦_{Spin→SIC}(m, n, i) = ¼(1 + 6m n·b_i)`.
pub fn kernel_spin_to_sic(m: f64, n: &Direction, b: &Vector3<f64>) -> f64 {
    0.25 * (1.0 + 6.0 * m * dot(n, b))
}

/// `𝒦_{SIC→Spin}(i, m, n) = ½(1 + 6m n·b_i)`.
pub fn kernel_sic_to_spin(m: f64, n: &Direction, b: &Vector3<f64>) -> f64 {
    0.5 * (1.0 + 6.0 * m * dot(n, b))
}

/// `𝒦_{FNR→SIC}(m, n_k, i) = ¾(δ_k0 + 2m l_k·b_i)` with 0-based `k`.
pub fn kernel_fnr_to_sic(m: f64, k: usize, l_k: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    0.75 * (delta(k, 0) + 2.0 * m * l_k.dot(b))
}

/// `𝒦_{SIC→FNR}(i, m, n_k) = (1/6)(1 + 6m n_k·b_i)`.
pub fn kernel_sic_to_fnr(m: f64, n: &Direction, b: &Vector3<f64>) -> f64 {
    (1.0 + 6.0 * m * dot(n, b)) / 6.0
}

fn dot(n: &Direction, b: &Vector3<f64>) -> f64 {
    n.cartesian[0] * b.x + n.cartesian[1] * b.y + n.cartesian[2] * b.z
}

/// Dual basis `l_k` of three directions: `l_k·n_k' = δ_kk'`.
pub fn dual_basis(dirs: &[Direction]) -> Result<[Vector3<f64>; 3]> {
    if dirs.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: dirs.len() });
    }
    let n = Matrix3::from_columns(&dirs.iter().map(|d| Vector3::from(d.cartesian)).collect::<Vec<_>>());
    let inv_t = n
        .try_inverse()
        .ok_or(Error::IllPosedDirections { l: 1, cond: f64::INFINITY })?
        .transpose();
    Ok([inv_t.column(0).into(), inv_t.column(1).into(), inv_t.column(2).into()])
}

/// Max differences between the four closed-form intertwining kernels and
/// the trace formula, in the order Spin→SIC, SIC→Spin, FNR→SIC, SIC→FNR.
///
/// `spin_dirs[k]` is direction `k` of the continuous scheme's points and
/// `fnr_dirs` the three FNR directions; the index points of both spin
/// schemes carry `(m, k)`.
pub fn intertwining_closed_form_residuals(
    param: &QubitSicParam,
    sic: &Scheme,
    spin: &Scheme,
    spin_dirs: &[Direction],
    fnr: &Scheme,
    fnr_dirs: &[Direction],
) -> Result<[f64; 4]> {
    use crate::starprod::IndexPoint;
    let b = param.bloch_vectors();
    let l = dual_basis(fnr_dirs)?;
    let mk = |p: &IndexPoint| match p {
        IndexPoint::SpinDirection { m, k } => Ok((*m, *k)),
        other => Err(Error::Invalid(format!("expected a spin index point, got {other:?}"))),
    };
    let worst = |kernel: Vec<Vec<Complex64>>, f: &dyn Fn(usize, usize) -> Result<f64>| -> Result<f64> {
        let mut w: f64 = 0.0;
        for (a, row) in kernel.iter().enumerate() {
            for (bb, v) in row.iter().enumerate() {
                w = w.max((v - f(a, bb)?).norm());
            }
        }
        Ok(w)
    };
    let spin_dir = |k: usize| spin_dirs.get(k).ok_or_else(|| Error::Missing(format!("direction {k}")));
    let fnr_dir = |k: usize| fnr_dirs.get(k).ok_or_else(|| Error::Missing(format!("direction {k}")));
    let r1 = worst(intertwining_kernel(spin, sic)?, &|x, i| {
        let (m, k) = mk(&spin.points()[x])?;
        Ok(kernel_spin_to_sic(m, spin_dir(k)?, &b[i]))
    })?;
    let r2 = worst(intertwining_kernel(sic, spin)?, &|i, x| {
        let (m, k) = mk(&spin.points()[x])?;
        Ok(kernel_sic_to_spin(m, spin_dir(k)?, &b[i]))
    })?;
    let r3 = worst(intertwining_kernel(fnr, sic)?, &|x, i| {
        let (m, k) = mk(&fnr.points()[x])?;
        Ok(kernel_fnr_to_sic(m, k, &l[k], &b[i]))
    })?;
    let r4 = worst(intertwining_kernel(sic, fnr)?, &|i, x| {
        let (m, k) = mk(&fnr.points()[x])?;
        Ok(kernel_sic_to_fnr(m, fnr_dir(k)?, &b[i]))
    })?;
    Ok([r1, r2, r3, r4])
}

/// Three mutually unbiased qubit bases `(μ_i, ν_i)`.
pub fn mub_bases() -> [(DVector<Complex64>, DVector<Complex64>); 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: Complex64, b: Complex64| DVector::from_vec(vec![a, b]);
    [
        (v(ONE, ZERO), v(ZERO, ONE)),
        (v(c(h, 0.0), c(h, 0.0)), v(c(h, 0.0), c(-h, 0.0))),
        (v(c(h, 0.0), c(0.0, h)), v(c(h, 0.0), c(0.0, -h))),
    ]
}

/// Overlaps of the MUB states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MubReport {
    /// `|⟨μ_i|ν_i⟩|²` for each basis.
    pub intra: [f64; 3],
    /// `max ||⟨a|b⟩|² - 1/2|` over states from different bases.
    pub cross_residual: f64,
    /// Bloch vectors in the order `μ_1, ν_1, μ_2, ν_2, μ_3, ν_3`.
    pub bloch: Vec<[f64; 3]>,
    /// `max ||b|² - 1|` and `max |b_μ + b_ν|`: antipodal points on the sphere.
    pub octahedron_residual: f64,
}

pub fn mub_report() -> MubReport {
    let bases = mub_bases();
    let intra = bases.clone().map(|(m, n)| m.dotc(&n).norm_sqr());
    let mut cross: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            if a == b {
                continue;
            }
            for x in [&bases[a].0, &bases[a].1] {
                for y in [&bases[b].0, &bases[b].1] {
                    cross = cross.max((x.dotc(y).norm_sqr() - 0.5).abs());
                }
            }
        }
    }
    let mut bloch = Vec::new();
    let mut oct: f64 = 0.0;
    for (m, n) in &bases {
        let bm = bloch_vector(&(m * m.adjoint()));
        let bn = bloch_vector(&(n * n.adjoint()));
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        oct = oct
            .max((norm(bm) - 1.0).abs())
            .max((norm(bn) - 1.0).abs())
            .max(norm([bm[0] + bn[0], bm[1] + bn[1], bm[2] + bn[2]]));
        bloch.push(bm);
        bloch.push(bn);
    }
    MubReport { intra, cross_residual: cross, bloch, octahedron_residual: oct }
}

/// Lie structure of a SIC: `[Π_i, Π_j] = Σ_k J_ijk Π_k`.
#[derive(Clone, Debug)]
pub struct LieStructure {
    pub n: usize,
    /// Row-major `[i][j][k]`.
    pub j: Vec<Complex64>,
    /// `max |[Π_i, Π_j] - Σ_k J_ijk Π_k|`.
    pub residual: f64,
    /// `max |J_ijk + J_jik|`.
    pub antisymmetry: f64,
    /// Qubits only: the sign `±` in `J_ijk = ±(i/√3) ε_ijk` and the residual
    /// of that form.
    pub qubit_sign: Option<(i8, f64)>,
}

/// `J_ijk = (K_ijk - K_jik)/(d+1)` from the SIC kernel.
pub fn lie_structure(s: &SicSet) -> LieStructure {
    let n = s.len();
    let d = s.dim() as f64;
    let k = kernel_from_t(&triple_products(s), false);
    let mut j = vec![ZERO; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c_ in 0..n {
                j[(a * n + b) * n + c_] = (k.get(a, b, c_) - k.get(b, a, c_)) / (d + 1.0);
            }
        }
    }
    let p = s.projectors();
    let mut residual: f64 = 0.0;
    let mut antisymmetry: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut expansion = ComplexMatrix::zeros(s.dim(), s.dim());
            for (c_, pc) in p.iter().enumerate() {
                expansion += pc * j[(a * n + b) * n + c_];
                antisymmetry = antisymmetry.max((j[(a * n + b) * n + c_] + j[(b * n + a) * n + c_]).norm());
            }
            residual = residual.max(max_abs_diff(&commutator(&p[a], &p[b]), &expansion));
        }
    }
    let qubit_sign = (s.dim() == 2).then(|| {
        let fit = |sign: f64| {
            let mut w: f64 = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for c_ in 0..4 {
                        let target = I * (sign * levi_civita(a, b, c_) / 3f64.sqrt());
                        w = w.max((j[(a * 4 + b) * 4 + c_] - target).norm());
                    }
                }
            }
            w
        };
        let (plus, minus) = (fit(1.0), fit(-1.0));
        if plus <= minus {
            (1, plus)
        } else {
            (-1, minus)
        }
    });
    LieStructure { n, j, residual, antisymmetry, qubit_sign }
}

/// Generators, Casimir operators and the final commutation relation for a
/// qubit SIC.
#[derive(Clone, Debug)]
pub struct CasimirReport {
    /// Sign found for the input labeling; `-1` means the set was relabeled
    /// by swapping `Π_3` and `Π_4` before the remaining checks.
    pub input_sign: i8,
    pub relabeled: bool,
    pub h: [ComplexMatrix; 3],
    pub f: [ComplexMatrix; 3],
    /// `|Ĉ_1|`.
    pub c1_norm: f64,
    /// `|Ĉ_2 - (3/16)(3 Σ Π_i² - Σ_{i≠j} Π_i Π_j)|`.
    pub c2_closed_form: f64,
    /// `max |[Ĉ_a, Ĥ_k]|, |[Ĉ_a, F̂_k]|`.
    pub casimir_commutators: f64,
    /// `c` in `[Ĥ_+, Ĥ_-] = c Ĥ_3`, with the residual of that fit.
    pub h_plus_minus: (f64, f64),
    /// `|[Π_k, 3 Σ Π_i² - Σ_{i≠j} Π_i Π_j]|` for `k = 1..4`.
    pub final_relation: [f64; 4],
}

impl CasimirReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.c1_norm < tol
            && self.c2_closed_form < tol
            && self.casimir_commutators < tol
            && self.final_relation.iter().all(|v| *v < tol)
    }
}

/// Checks the Casimir relations with
/// `Ĥ_1 = (√3/8)(Π_1 + Π_2 - Π_3 - Π_4)`,
/// `Ĥ_2 = (√3/8)(-Π_1 + Π_2 - Π_3 + Π_4)`,
/// `Ĥ_3 = (√3/8)(Π_1 - Π_2 - Π_3 + Π_4)` and `F̂_k = iĤ_k`, for which
/// `Ĉ_1 = Ĥ² - F̂² + 2i Ĥ·F̂` vanishes and `Ĉ_2 = Ĥ² - F̂² - 2i Ĥ·F̂ = 4Ĥ²`.
pub fn casimir_check(s: &SicSet) -> Result<CasimirReport> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: s.dim() });
    }
    let lie = lie_structure(s);
    let input_sign = lie.qubit_sign.map(|(sign, _)| sign).unwrap_or(1);
    let mut p = s.projectors().to_vec();
    let relabeled = input_sign < 0;
    if relabeled {
        p.swap(2, 3);
    }
    let w = 3f64.sqrt() / 8.0;
    let combo = |signs: [f64; 4]| {
        let mut m = ComplexMatrix::zeros(2, 2);
        for (pi, sg) in p.iter().zip(signs) {
            m += pi.scale(sg * w);
        }
        m
    };
    let h = [combo([1.0, 1.0, -1.0, -1.0]), combo([-1.0, 1.0, -1.0, 1.0]), combo([1.0, -1.0, -1.0, 1.0])];
    let f = h.clone().map(|m| m * I);
    let dot = |a: &[ComplexMatrix; 3], b: &[ComplexMatrix; 3]| {
        a.iter().zip(b).fold(ComplexMatrix::zeros(2, 2), |acc, (x, y)| acc + x * y)
    };
    let h2 = dot(&h, &h);
    let f2 = dot(&f, &f);
    let hf = dot(&h, &f);
    let c1 = &h2 - &f2 + &hf * c(0.0, 2.0);
    let c2 = &h2 - &f2 - &hf * c(0.0, 2.0);

    let bracket = casimir_bracket(&p);
    let c2_closed_form = max_abs_diff(&c2, &bracket.scale(3.0 / 16.0));
    let mut casimir_commutators: f64 = 0.0;
    for cm in [&c1, &c2] {
        for g in h.iter().chain(f.iter()) {
            casimir_commutators = casimir_commutators.max(max_abs(&commutator(cm, g)));
        }
    }
    let hp = &h[0] + &h[1] * I;
    let hm = &h[0] - &h[1] * I;
    let hpm = commutator(&hp, &hm);
    let coef = trace_product(&h[2].adjoint(), &hpm) / trace_product(&h[2].adjoint(), &h[2]);
    let fit = max_abs_diff(&hpm, &(&h[2] * coef));
    let final_relation = std::array::from_fn(|k| max_abs(&commutator(&p[k], &bracket)));
    debug_assert!(max_abs_diff(&p.iter().fold(ComplexMatrix::zeros(2, 2), |a, x| a + x), &identity(2).scale(2.0)) < 1e-9);
    Ok(CasimirReport {
        input_sign,
        relabeled,
        h,
        f,
        c1_norm: max_abs(&c1),
        c2_closed_form,
        casimir_commutators,
        h_plus_minus: (coef.re, fit),
        final_relation,
    })
}

/// `[Π_k, 3 Σ Π_i² - Σ_{i≠j} Π_i Π_j]` for any set of projectors, for
/// experimenting beyond qubits.
pub fn final_relation_commutators(projectors: &[ComplexMatrix]) -> Vec<f64> {
    let bracket = casimir_bracket(projectors);
    projectors.iter().map(|p| max_abs(&commutator(p, &bracket))).collect()
}

/// `3 Σ Π_i² - Σ_{i≠j} Π_i Π_j`.
fn casimir_bracket(projectors: &[ComplexMatrix]) -> ComplexMatrix {
    let d = projectors.first().map_or(0, |p| p.nrows());
    let mut bracket = ComplexMatrix::zeros(d, d);
    for (i, a) in projectors.iter().enumerate() {
        for (j, b) in projectors.iter().enumerate() {
            if i == j {
                bracket += (a * a).scale(3.0);
            } else {
                bracket -= a * b;
            }
        }
    }
    bracket
}
