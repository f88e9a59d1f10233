//! SIC-POVM verification, the SIC quantization scheme, the SIC probability
//! representation, and triple products with the identities they satisfy.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eigen, hermiticity_residual, identity, max_abs_diff, require_square, trace,
    trace_product, validate_density_matrix, ComplexMatrix, RealMatrix, ONE, ZERO,
};
use crate::starprod::{dual_kernel, kernel, IndexPoint, KernelTensor, Scheme};
use crate::tolerance::{TOL_PROBABILITY_SUM, TOL_VERIFY_ANALYTIC};

/// `Γ_ij = (d δ_ij + 1) / (d + 1)`.
pub fn gram_value(d: usize, i: usize, j: usize) -> f64 {
    let df = d as f64;
    (if i == j { df + 1.0 } else { 1.0 }) / (df + 1.0)
}

/// Max residual of each SIC condition for a candidate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dim: usize,
    /// `max_i |Π_i - Π_i†|`.
    pub hermiticity: f64,
    /// `max_i |Tr Π_i - 1|`.
    pub unit_trace: f64,
    /// `max_i max(0, -λ_min(Π_i))`, on the Hermitian part.
    pub positivity: f64,
    /// `max_i |Π_i² - Π_i|`.
    pub idempotence: f64,
    /// `max_ij |Tr[Π_i Π_j] - Γ_ij|`.
    pub pairwise_trace: f64,
    /// `max_i |Tr[Π_i^k] - 1|` for `k = 1, 2, 3`.
    pub trace_powers: [f64; 3],
    /// `|Σ_i Π_i - d Î|`, implied by the conditions above.
    pub completeness: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationReport {
    /// The five conditions that decide `pass`, by name.
    pub fn conditions(&self) -> [(&'static str, f64); 5] {
        [
            ("hermiticity", self.hermiticity),
            ("unit_trace", self.unit_trace),
            ("positivity", self.positivity),
            ("idempotence", self.idempotence),
            ("pairwise_trace", self.pairwise_trace),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

/// Checks hermiticity, unit trace, positivity, idempotence and the pairwise
/// trace condition for `d²` candidate matrices of dimension `d`.
pub fn verify(candidate: &[ComplexMatrix], tol: f64) -> Result<VerificationReport> {
    let first = candidate.first().ok_or_else(|| Error::Invalid("empty candidate set".into()))?;
    let d = require_square(first)?;
    if candidate.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, got: candidate.len() });
    }
    for m in candidate {
        if require_square(m)? != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
        }
    }
    let mut r = VerificationReport {
        dim: d,
        hermiticity: 0.0,
        unit_trace: 0.0,
        positivity: 0.0,
        idempotence: 0.0,
        pairwise_trace: 0.0,
        trace_powers: [0.0; 3],
        completeness: 0.0,
        tolerance: tol,
        pass: false,
    };
    let mut sum = ComplexMatrix::zeros(d, d);
    for p in candidate {
        r.hermiticity = r.hermiticity.max(hermiticity_residual(p));
        let tr = trace(p);
        r.unit_trace = r.unit_trace.max((tr - ONE).norm());
        let herm = (p + p.adjoint()).scale(0.5);
        let (values, _) = hermitian_eigen(&herm)?;
        r.positivity = r.positivity.max((-values[0]).max(0.0));
        let sq = p * p;
        r.idempotence = r.idempotence.max(max_abs_diff(&sq, p));
        let t2 = trace(&sq);
        let t3 = trace_product(&sq, p);
        for (slot, t) in r.trace_powers.iter_mut().zip([tr, t2, t3]) {
            *slot = slot.max((t - ONE).norm());
        }
        sum += p;
    }
    for (i, a) in candidate.iter().enumerate() {
        for (j, b) in candidate.iter().enumerate() {
            let t = trace_product(a, b);
            r.pairwise_trace = r.pairwise_trace.max((t - Complex64::new(gram_value(d, i, j), 0.0)).norm());
        }
    }
    r.completeness = max_abs_diff(&sum, &identity(d).scale(d as f64));
    r.pass = r.max_residual() < tol;
    Ok(r)
}

/// A verified set of `d²` SIC projectors.
#[derive(Clone, Debug)]
pub struct SicSet {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    fiducials: Option<Vec<DVector<Complex64>>>,
    verification: VerificationReport,
}

impl SicSet {
    /// Verifies `projectors` at `tol` and extracts fiducial vectors.
    pub fn new(projectors: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let verification = verify(&projectors, tol)?;
        if !verification.pass {
            return Err(Error::Unverified(format!(
                "max residual {:e} exceeds tolerance {:e}",
                verification.max_residual(),
                tol
            )));
        }
        let fiducials = projectors.iter().map(fiducial_vector).collect::<Result<Vec<_>>>()?;
        Ok(SicSet { dim: verification.dim, projectors, fiducials: Some(fiducials), verification })
    }

    /// Verifies at the analytic tolerance.
    pub fn new_analytic(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(projectors, TOL_VERIFY_ANALYTIC)
    }

    /// Same set with fiducial vectors discarded.
    pub fn without_fiducials(mut self) -> Self {
        self.fiducials = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn fiducials(&self) -> Option<&[DVector<Complex64>]> {
        self.fiducials.as_deref()
    }

    pub fn verification(&self) -> &VerificationReport {
        &self.verification
    }

    /// Label shared by the SIC scheme and kernels built from this set.
    pub fn scheme_label(&self) -> String {
        format!("sic-d{}", self.dim)
    }
}

/// Dominant eigenvector of `Π`, phased so that its first nonzero component
/// is real and positive.
pub fn fiducial_vector(p: &ComplexMatrix) -> Result<DVector<Complex64>> {
    let (_, vectors) = hermitian_eigen(&(p + p.adjoint()).scale(0.5))?;
    let d = vectors.ncols();
    let mut v: DVector<Complex64> = vectors.column(d - 1).into_owned();
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        v *= phase;
    }
    Ok(v)
}

/// Unitary whose first column is `psi` (unit norm), completed by
/// Gram–Schmidt over the standard basis `e_0, e_1, ...` in order.
pub fn completion_unitary(psi: &DVector<Complex64>) -> ComplexMatrix {
    let d = psi.len();
    let mut cols: Vec<DVector<Complex64>> = vec![psi / Complex64::new(psi.norm(), 0.0)];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = DVector::from_element(d, ZERO);
        v[k] = ONE;
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / Complex64::new(n, 0.0));
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// SIC scheme: `Û_i = Π_i / d`, `D̂_i = (d+1) Π_i - Î`, unit weights.
pub fn sic_scheme(s: &SicSet) -> Scheme {
    let d = s.dim as f64;
    let id = identity(s.dim);
    let deq = s.projectors.iter().map(|p| p.scale(1.0 / d)).collect();
    let quant = s.projectors.iter().map(|p| p.scale(d + 1.0) - &id).collect();
    let points = (0..s.len()).map(|i| IndexPoint::Discrete { i }).collect();
    Scheme::new(s.scheme_label(), points, deq, quant, vec![1.0; s.len()])
        .expect("verified set has consistent dimensions")
}

/// `p_i = Tr[ρ̂ Π_i] / d`.
pub fn probabilities(rho: &ComplexMatrix, s: &SicSet) -> Result<Vec<f64>> {
    validate_density_matrix(rho)?;
    if rho.nrows() != s.dim {
        return Err(Error::DimensionMismatch { expected: s.dim, got: rho.nrows() });
    }
    let d = s.dim as f64;
    Ok(s.projectors.iter().map(|p| trace_product(rho, p).re / d).collect())
}

/// `ρ̂ = (d+1) Σ_i p_i Π_i - Î`. Hermitian with unit trace; positivity is
/// not guaranteed for arbitrary `p` and is left to the caller.
pub fn reconstruct_state(p: &[f64], s: &SicSet) -> Result<ComplexMatrix> {
    if p.len() != s.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), got: p.len() });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TOL_PROBABILITY_SUM {
        return Err(Error::Invalid(format!("probabilities sum to {total}, expected 1")));
    }
    let d = s.dim;
    let mut rho = identity(d).scale(-1.0);
    for (pi, proj) in p.iter().zip(&s.projectors) {
        rho += proj.scale((d as f64 + 1.0) * pi);
    }
    Ok(rho)
}

/// `𝒫(m, i) = ⟨jm| u_i† ρ̂ u_i |jm⟩ / d²` with `u_i = completion_unitary(ψ_i)`,
/// so `u_i|jj⟩ = |ψ_i⟩`. Row `r` is `m = j - r`, column `i` the projector.
///
/// Each column sums to `1/d²`, the whole matrix to 1, and row `m = j`
/// (row 0) equals `p_i / d`.
pub fn inverse_portrait(rho: &ComplexMatrix, s: &SicSet) -> Result<RealMatrix> {
    validate_density_matrix(rho)?;
    if rho.nrows() != s.dim {
        return Err(Error::DimensionMismatch { expected: s.dim, got: rho.nrows() });
    }
    let fid = s
        .fiducials()
        .ok_or_else(|| Error::Missing("inverse portrait needs fiducial vectors".into()))?;
    let d = s.dim;
    let norm = 1.0 / (d * d) as f64;
    let mut out = RealMatrix::zeros(d, s.len());
    for (i, psi) in fid.iter().enumerate() {
        let u = completion_unitary(psi);
        let rotated = u.adjoint() * rho * &u;
        for r in 0..d {
            out[(r, i)] = rotated[(r, r)].re * norm;
        }
    }
    Ok(out)
}

/// `T_ijk = Tr[Π_i Π_j Π_k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleProductTensor {
    pub dim: usize,
    pub n: usize,
    /// Row-major `[i][j][k]`.
    pub entries: Vec<Complex64>,
}

impl TripleProductTensor {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.entries[(i * self.n + j) * self.n + k]
    }

    /// `max(|T_ijk - T_jki|, |conj(T_ijk) - T_jik|)`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.get(i, j, k);
                    worst = worst
                        .max((t - self.get(j, k, i)).norm())
                        .max((t.conj() - self.get(j, i, k)).norm());
                }
            }
        }
        worst
    }
}

/// Triple products of any list of `d²` matrices (no verification).
pub fn triple_products_of(projectors: &[ComplexMatrix]) -> TripleProductTensor {
    let n = projectors.len();
    let dim = projectors.first().map_or(0, |p| p.nrows());
    let pairs: Vec<ComplexMatrix> = (0..n * n)
        .into_par_iter()
        .map(|ij| &projectors[ij / n] * &projectors[ij % n])
        .collect();
    let entries = (0..n * n * n)
        .into_par_iter()
        .map(|idx| trace_product(&pairs[idx / n], &projectors[idx % n]))
        .collect();
    TripleProductTensor { dim, n, entries }
}

pub fn triple_products(s: &SicSet) -> TripleProductTensor {
    triple_products_of(&s.projectors)
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// SIC kernel from triple products:
/// `K_ijk = [(d+1)² T_ijk - d(δ_ik + δ_jk) - 1] / d`, or with `dual`,
/// `K^dual_ijk = [(d+1)² T_ijk - (d δ_ij + 1)] / (d²(d+1))`.
pub fn kernel_from_t(t: &TripleProductTensor, dual: bool) -> KernelTensor {
    let d = t.dim as f64;
    let c2 = (d + 1.0) * (d + 1.0);
    KernelTensor::from_fn(format!("sic-d{}", t.dim), t.n, dual, |i, j, k| {
        let tv = t.get(i, j, k) * c2;
        if dual {
            (tv - (d * delta(i, j) + 1.0)) / (d * d * (d + 1.0))
        } else {
            (tv - d * (delta(i, k) + delta(j, k)) - 1.0) / d
        }
    })
}

/// Residuals of the triple-product constraint families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TRelationReport {
    /// `Σ_m (T_ijm T_mkl - T_iml T_jkm) = d/(d+1)³ [Γ'_ij Γ'_kl - Γ'_jk Γ'_il]`
    /// with `Γ'_ij = d δ_ij + 1`.
    pub three: f64,
    /// First four-index relation, right-hand side scaled by `d²/(d+1)²`.
    pub four_first: f64,
    /// Second four-index relation, right-hand side scaled by `d²/(d+1)²`.
    pub four_second: f64,
    /// First four-index relation with the prefactor `(d+1)²/d²` instead.
    pub four_first_inverted_prefactor: f64,
    /// Second four-index relation with the prefactor `(d+1)²/d²` instead.
    pub four_second_inverted_prefactor: f64,
}

/// Evaluates the three- and four-index triple-product relations over all
/// index tuples.
///
/// Both four-index relations hold with the prefactor `d²/(d+1)²` in front
/// of their bracket; the inverted prefactor `(d+1)²/d²` is also evaluated
/// and reported, and does not hold.
pub fn check_t_relations(t: &TripleProductTensor) -> TRelationReport {
    let n = t.n;
    let d = t.dim as f64;
    let g = |i: usize, j: usize| (d * delta(i, j) + 1.0) / (d + 1.0);
    let gp = |i: usize, j: usize| d * delta(i, j) + 1.0;
    let idx4 = |a: usize, b: usize, c: usize, e: usize| ((a * n + b) * n + c) * n + e;

    // A(i,j,k,p) = Σ_n T_ijn T_nkp
    let a: Vec<Complex64> = (0..n * n * n * n)
        .into_par_iter()
        .map(|x| {
            let (i, j, k, p) = (x / (n * n * n), (x / (n * n)) % n, (x / n) % n, x % n);
            (0..n).map(|m| t.get(i, j, m) * t.get(m, k, p)).sum()
        })
        .collect();
    // B(i,j,k,p) = Σ_n T_inp T_jkn
    let b: Vec<Complex64> = (0..n * n * n * n)
        .into_par_iter()
        .map(|x| {
            let (i, j, k, p) = (x / (n * n * n), (x / (n * n)) % n, (x / n) % n, x % n);
            (0..n).map(|m| t.get(i, m, p) * t.get(j, k, m)).sum()
        })
        .collect();

    let three = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs: Complex64 =
                            (0..n).map(|m| t.get(i, j, m) * t.get(m, k, l) - t.get(i, m, l) * t.get(j, k, m)).sum();
                        let rhs = d / (d + 1.0).powi(3) * (gp(i, j) * gp(k, l) - gp(j, k) * gp(i, l));
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let correct = d * d / ((d + 1.0) * (d + 1.0));
    let inverted = 1.0 / correct;
    let four = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut w = [0.0f64; 4];
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        for m in 0..n {
                            let mut chain = ZERO; // Σ_{n,p} T_ijn T_nkp T_plm
                            let mut first = ZERO; // Σ_{n,p} T_inp T_jkn T_plm
                            let mut second = ZERO; // Σ_{n,p} T_ijp T_kln T_pnm
                            for p in 0..n {
                                let tplm = t.get(p, l, m);
                                chain += a[idx4(i, j, k, p)] * tplm;
                                first += b[idx4(i, j, k, p)] * tplm;
                                let mut inner = ZERO;
                                for q in 0..n {
                                    inner += t.get(k, l, q) * t.get(p, q, m);
                                }
                                second += t.get(i, j, p) * inner;
                            }
                            let br1 = g(i, j) * t.get(k, l, m) + g(i, j) * g(l, m)
                                - t.get(i, l, m) * g(j, k)
                                - g(j, k) * g(l, m);
                            let br2 = t.get(i, j, k) * g(l, m) + g(i, j) * g(l, m)
                                - t.get(i, j, m) * g(k, l)
                                - g(i, j) * g(k, l);
                            let lhs1 = chain - first;
                            let lhs2 = chain - second;
                            w[0] = w[0].max((lhs1 - br1 * correct).norm());
                            w[1] = w[1].max((lhs2 - br2 * correct).norm());
                            w[2] = w[2].max((lhs1 - br1 * inverted).norm());
                            w[3] = w[3].max((lhs2 - br2 * inverted).norm());
                        }
                    }
                }
            }
            w
        })
        .reduce(|| [0.0; 4], |x, y| [x[0].max(y[0]), x[1].max(y[1]), x[2].max(y[2]), x[3].max(y[3])]);

    TRelationReport {
        three,
        four_first: four[0],
        four_second: four[1],
        four_first_inverted_prefactor: four[2],
        four_second_inverted_prefactor: four[3],
    }
}

/// Residuals of the four- and five-product formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HigherProductReport {
    /// Over all `d⁸` index 4-tuples.
    pub four_product: f64,
    /// Over `five_samples` random 5-tuples.
    pub five_product: f64,
    pub five_samples: usize,
}

/// Default number of sampled 5-tuples.
pub const FIVE_PRODUCT_SAMPLES: usize = 500;

/// Compares `Tr[Π_iΠ_jΠ_kΠ_l] = ((d+1)/d) Σ_m T_ijm T_mkl - Γ'_ij Γ'_kl/(d+1)²`
/// on every 4-tuple and
/// `Tr[Π_iΠ_jΠ_kΠ_lΠ_m] = ((d+1)/d)² Σ_{n,p} T_ijn T_nkp T_plm - T_ijk Γ_lm - Γ_ij Γ_lm - Γ_ij T_klm`
/// on `samples` seeded random 5-tuples against direct traces.
pub fn higher_products(s: &SicSet, samples: usize, seed: u64) -> HigherProductReport {
    let t = triple_products(s);
    let n = t.n;
    let d = s.dim as f64;
    let g = |i: usize, j: usize| gram_value(s.dim, i, j);
    let p = &s.projectors;
    let pairs: Vec<ComplexMatrix> = (0..n * n).map(|ij| &p[ij / n] * &p[ij % n]).collect();

    let four_product = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let mut worst: f64 = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let direct = trace_product(&pairs[ij], &pairs[k * n + l]);
                    let sum: Complex64 = (0..n).map(|m| t.get(i, j, m) * t.get(m, k, l)).sum();
                    let formula = sum * ((d + 1.0) / d) - g(i, j) * g(k, l);
                    worst = worst.max((direct - formula).norm());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<[usize; 5]> = (0..samples)
        .map(|_| std::array::from_fn(|_| rng.random_range(0..n)))
        .collect();
    let c = ((d + 1.0) / d).powi(2);
    let five_product = tuples
        .par_iter()
        .map(|&[i, j, k, l, m]| {
            let direct = trace_product(&(&pairs[i * n + j] * &pairs[k * n + l]), &p[m]);
            let mut sum = ZERO;
            for a in 0..n {
                for b in 0..n {
                    sum += t.get(i, j, a) * t.get(a, k, b) * t.get(b, l, m);
                }
            }
            let formula =
                sum * c - t.get(i, j, k) * g(l, m) - g(i, j) * g(l, m) - t.get(k, l, m) * g(i, j);
            (direct - formula).norm()
        })
        .reduce(|| 0.0, f64::max);

    HigherProductReport { four_product, five_product, five_samples: samples }
}

/// Max differences between the kernels built from `T` and by direct traces
/// over the SIC scheme: `(K, K^dual)`.
pub fn kernel_route_residuals(s: &SicSet) -> (f64, f64) {
    let t = triple_products(s);
    let scheme = sic_scheme(s);
    (
        kernel_from_t(&t, false).max_abs_diff(&kernel(&scheme)),
        kernel_from_t(&t, true).max_abs_diff(&dual_kernel(&scheme)),
    )
}

/// Draws `count` seeded random states of dimension `d`, for round-trip checks.
pub fn random_states(d: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| crate::qmat::random::random_density_matrix(d, &mut rng)).collect()
}

/// `max |reconstruct_state(probabilities(ρ)) - ρ|` over the given states.
pub fn state_round_trip_residual(s: &SicSet, states: &[ComplexMatrix]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for rho in states {
        let back = reconstruct_state(&probabilities(rho, s)?, s)?;
        worst = worst.max(max_abs_diff(&back, rho));
    }
    Ok(worst)
}

/// Projectors `X^a Z^b |ψ⟩⟨ψ| Z^-b X^-a` for `a, b = 0..d`, ordered `a`-major,
/// with `X|k⟩ = |k+1⟩` and `Z|k⟩ = ω^k |k⟩`.
pub fn weyl_heisenberg_orbit(fiducial: &DVector<Complex64>) -> Vec<ComplexMatrix> {
    let d = fiducial.len();
    let psi = fiducial / Complex64::new(fiducial.norm(), 0.0);
    let omega = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let v = DVector::from_fn(d, |k, _| {
                let src = (k + d - a) % d;
                psi[src] * omega((b * src) % d)
            });
            out.push(&v * v.adjoint());
        }
    }
    out
}
