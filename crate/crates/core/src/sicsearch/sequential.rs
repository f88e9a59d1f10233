use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::qmat::{hermitian_eigenvalues, trace_product, ComplexMatrix, RealMatrix};
use crate::sic::verify;

use super::candidate::{candidate_from_coefficients, matrix_equation_residual};
use super::numopt::{bfgs_maximize, levenberg_marquardt};
use super::optimize::restart_seed;
use super::{GramFactors, SearchConfig, SearchState};

/// Random starts tried for each step of one sequential attempt.
const STARTS_PER_STEP: usize = 8;

/// Orthonormal basis of the orthogonal complement of the columns of `b`
/// (assumed orthonormal) in `R^n`.
fn complement(b: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = (0..b.ncols()).map(|k| b.column(k).into_owned()).collect();
    let fixed = cols.len();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    let free = &cols[fixed..];
    DMatrix::from_fn(n, free.len(), |r, c| free[c][r])
}

fn orthonormalize(vs: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(vs).qr().q()
}

struct StepSpace {
    /// Determined part of `c_i`.
    fixed: DVector<f64>,
    /// Basis of the free directions.
    free: DMatrix<f64>,
    /// Norm of the free part.
    radius: f64,
}

fn step_space(prev: &[DVector<f64>], frame: &[DVector<f64>], i: usize, n: usize) -> StepSpace {
    let b = orthonormalize(prev, n);
    let k = prev.len();
    let fixed = if k == 0 {
        DVector::zeros(n)
    } else {
        // (B x)·c_j = s_i·s_j for j < i
        let a = DMatrix::from_fn(k, k, |j, col| b.column(col).dot(&prev[j]));
        let rhs = DVector::from_fn(k, |j, _| frame[i].dot(&frame[j]));
        let x = a.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k));
        &b * x
    };
    let radius = (frame[i].norm_squared() - fixed.norm_squared()).max(0.0).sqrt();
    StepSpace { fixed, free: complement(&b, n), radius }
}

fn projector(gf: &GramFactors, c: &DVector<f64>) -> ComplexMatrix {
    let d = gf.dim();
    let basis = gf.o_basis();
    let mut p = basis[0].scale(1.0 / (d as f64).sqrt());
    for (a, o) in basis[1..].iter().enumerate() {
        p += o.scale(c[a]);
    }
    p
}

fn psd_residual(p: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(p).map(|v| (-v[0]).max(0.0)).unwrap_or(f64::INFINITY)
}

fn vector_of(space: &StepSpace, u: &DVector<f64>) -> DVector<f64> {
    let norm = u.norm();
    if space.free.ncols() == 0 || norm == 0.0 {
        return space.fixed.clone();
    }
    &space.fixed + &space.free * (u * (space.radius / norm))
}

/// Distinct free-vector choices that make the step's projector PSD within
/// `cfg.verify_tol`, at most `want` of them, plus the smallest PSD residual
/// seen.
fn step_candidates(
    gf: &GramFactors,
    space: &StepSpace,
    rng: &mut ChaCha8Rng,
    cfg: &SearchConfig,
    want: usize,
    iterations: &mut usize,
) -> (Vec<DVector<f64>>, f64) {
    let m = space.free.ncols();
    if m == 0 {
        let c = space.fixed.clone();
        let psd = psd_residual(&projector(gf, &c));
        return (if psd <= cfg.verify_tol { vec![c] } else { Vec::new() }, psd);
    }
    let f = |u: &DVector<f64>| {
        let p = projector(gf, &vector_of(space, u));
        trace_product(&(&p * &p), &p).re
    };
    let r = |u: &DVector<f64>| {
        let p = projector(gf, &vector_of(space, u));
        let e = &p * &p - &p;
        DVector::from_iterator(2 * e.len(), e.iter().flat_map(|z| [z.re, z.im]))
    };
    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for _ in 0..STARTS_PER_STEP {
        let u0 = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
        let asc = bfgs_maximize(&f, u0, cfg.max_iterations.clamp(1, 400), 1.0 - 1e-13);
        *iterations += asc.iterations;
        let (u, _, it) = levenberg_marquardt(&r, asc.x, 50, 1e-14);
        *iterations += it;
        let c = vector_of(space, &u);
        let psd = psd_residual(&projector(gf, &c));
        best_residual = best_residual.min(psd);
        if psd <= cfg.verify_tol && found.iter().all(|x| (x - &c).norm() > 1e-6) {
            found.push(c);
            if found.len() >= want {
                break;
            }
        }
    }
    (found, best_residual)
}

/// Alternatives kept per step when backtracking.
const BRANCHES: usize = 3;
/// Steps attempted per sequential attempt, across all backtracking.
const MAX_NODES: usize = 400;

struct Walk<'a> {
    gf: &'a GramFactors,
    cfg: &'a SearchConfig,
    frame: Vec<DVector<f64>>,
    rng: ChaCha8Rng,
    nodes: usize,
    iterations: usize,
    best_prefix: Vec<DVector<f64>>,
    fail_residual: f64,
}

impl Walk<'_> {
    fn extend(&mut self, cs: &mut Vec<DVector<f64>>) -> bool {
        let size = self.gf.size();
        let i = cs.len();
        if i == size {
            return true;
        }
        if self.nodes >= MAX_NODES {
            return false;
        }
        self.nodes += 1;
        let n = size - 1;
        let space = step_space(&cs[..i.min(n)], &self.frame, i, n);
        let (options, residual) =
            step_candidates(self.gf, &space, &mut self.rng, self.cfg, BRANCHES, &mut self.iterations);
        if options.is_empty() && i >= self.best_prefix.len() {
            if i > self.best_prefix.len() {
                self.best_prefix = cs.clone();
                self.fail_residual = residual;
            } else {
                self.fail_residual = self.fail_residual.min(residual);
            }
        }
        for c in options {
            cs.push(c);
            if cs.len() > self.best_prefix.len() {
                self.best_prefix = cs.clone();
                self.fail_residual = f64::INFINITY;
            }
            if self.extend(cs) {
                return true;
            }
            cs.pop();
            if self.nodes >= MAX_NODES {
                break;
            }
        }
        false
    }
}

/// Builds `Q̃` one projector at a time: step `i` fixes `Π̂_i` by choosing
/// the part of its Bloch-space vector `c_i = Q̃ s_i` that the earlier
/// projectors leave free, so earlier projectors never change. Each step
/// maximizes `Tr[Π̂_i³]`; a step whose best value leaves `Π̂_i` with a
/// negative eigenvalue beyond `cfg.verify_tol` fails.
///
/// `cfg.restarts` whole attempts are made with derived seeds; the one that
/// gets furthest (then by objective) is returned.
pub fn sequential_rotations(gf: &GramFactors, cfg: &SearchConfig) -> Result<SearchState> {
    let mut best: Option<SearchState> = None;
    for attempt in 0..cfg.restarts.max(1) {
        let state = sequential_attempt(gf, cfg, restart_seed(cfg.seed, attempt))?;
        let better = match &best {
            None => true,
            Some(b) => {
                let reach = |s: &SearchState| s.failed_step.unwrap_or(usize::MAX);
                (reach(&state), state.objective) > (reach(b), b.objective)
            }
        };
        let done = state.converged;
        if better {
            best = Some(state);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one attempt"))
}

/// Projectors after each completed step of one attempt; step `k` of the
/// result holds `Π̂_0..Π̂_k`.
#[derive(Clone, Debug)]
pub struct SequentialTrace {
    pub state: SearchState,
    pub snapshots: Vec<Vec<ComplexMatrix>>,
}

fn sequential_attempt(gf: &GramFactors, cfg: &SearchConfig, seed: u64) -> Result<SearchState> {
    Ok(sequential_trace(gf, cfg, seed)?.state)
}

/// One sequential attempt with the given seed, keeping per-step snapshots.
///
/// A step with no PSD-achieving choice backtracks into alternative choices
/// of earlier steps, within a fixed node budget. On failure the longest
/// completed prefix is kept and the rest completed arbitrarily, so `Q̃` is
/// still orthogonal.
pub fn sequential_trace(gf: &GramFactors, cfg: &SearchConfig, seed: u64) -> Result<SequentialTrace> {
    let n = gf.size() - 1;
    let s = gf.s();
    let frame: Vec<DVector<f64>> = (0..gf.size()).map(|i| DVector::from_fn(n, |r, _| s[(r + 1, i)])).collect();
    let mut walk = Walk {
        gf,
        cfg,
        frame: frame.clone(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: 0,
        iterations: 0,
        best_prefix: Vec::new(),
        fail_residual: f64::INFINITY,
    };
    let mut cs = Vec::with_capacity(gf.size());
    let ok = walk.extend(&mut cs);
    let (mut cs, failed_step) = if ok { (cs, None) } else { (walk.best_prefix.clone(), Some(walk.best_prefix.len())) };
    let mut step_residuals: Vec<f64> = cs.iter().map(|c| psd_residual(&projector(gf, c))).collect();
    if failed_step.is_some() {
        step_residuals.push(walk.fail_residual);
    }
    let snapshots = (0..cs.len()).map(|k| cs[..=k].iter().map(|c| projector(gf, c)).collect()).collect();
    while cs.len() < gf.size() {
        let space = step_space(&cs[..cs.len().min(n)], &frame, cs.len(), n);
        let mut u = DVector::zeros(space.free.ncols());
        if !u.is_empty() {
            u[0] = 1.0;
        }
        cs.push(vector_of(&space, &u));
    }
    // Q̃ = C S^{-1} on the first n frame vectors
    let cmat = DMatrix::from_columns(&cs[..n]);
    let smat = DMatrix::from_columns(&frame[..n]);
    let qtilde = polar_orthogonal(&(cmat * smat.try_inverse().expect("frame vectors are independent")));
    let state = state_from(gf, qtilde, seed, walk.iterations, failed_step, step_residuals, cfg)?;
    Ok(SequentialTrace { state, snapshots })
}

/// Nearest orthogonal matrix; removes round-off from `C S^{-1}`.
fn polar_orthogonal(m: &RealMatrix) -> RealMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

fn state_from(
    gf: &GramFactors,
    qtilde: RealMatrix,
    seed: u64,
    iterations: usize,
    failed_step: Option<usize>,
    step_residuals: Vec<f64>,
    cfg: &SearchConfig,
) -> Result<SearchState> {
    let cand = candidate_from_coefficients(gf, &super::candidate::coefficients(gf, &qtilde));
    let v: Vec<f64> = cand.iter().map(|p| trace_product(&(p * p), p).re).collect();
    let objective: f64 = v.iter().sum();
    let report = verify(&cand, cfg.verify_tol)?;
    let residual = matrix_equation_residual(gf, &qtilde)?;
    let converged = failed_step.is_none() && (gf.size() as f64 - objective) < cfg.tol_obj && report.pass;
    Ok(SearchState {
        dim: gf.dim(),
        qtilde,
        objective,
        v,
        residual_matrix_eq: residual.idempotence_form,
        seed,
        iterations,
        converged,
        history: Vec::new(),
        verification: Some(report),
        failed_step,
        step_residuals,
    })
}
