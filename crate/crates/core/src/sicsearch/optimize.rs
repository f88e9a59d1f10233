use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, RealMatrix};
use crate::sic::{verify, VerificationReport};
use crate::spintomo::DEFAULT_DIRECTION_SEED;
use crate::tolerance::TOL_VERIFY_NUMERIC;

use super::candidate::{candidate_unchecked, matrix_equation_residual, objective_unchecked};
use super::numopt::{bfgs_maximize, levenberg_marquardt};
use super::GramFactors;

/// Environment variable capping the number of worker threads for restarts.
pub const THREADS_ENV: &str = "SICFORGE_THREADS";

/// Search budget and tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Iteration budget per restart (ascent, hop and polish iterations
    /// together).
    pub max_iterations: usize,
    /// Convergence requires `d² - Σ V_i < tol_obj`.
    pub tol_obj: f64,
    /// Tolerance of the independent verification of the output.
    pub verify_tol: f64,
    /// Scale of the random angle kicks between basin-hopping rounds.
    pub hop_scale: f64,
    /// Objective gap below which the idempotence polish starts.
    pub polish_gap: f64,
    /// Restarts run concurrently; 0 means one per available thread.
    pub parallel: usize,
    /// Seed of the per-block direction sets.
    pub direction_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 1,
            restarts: 16,
            max_iterations: 3000,
            tol_obj: 1e-6,
            verify_tol: TOL_VERIFY_NUMERIC,
            hop_scale: 0.4,
            polish_gap: 5e-2,
            parallel: 0,
            direction_seed: DEFAULT_DIRECTION_SEED,
        }
    }
}

/// Result of a search.
#[derive(Clone, Debug)]
pub struct SearchState {
    pub dim: usize,
    pub qtilde: RealMatrix,
    /// `Σ_i V_i`.
    pub objective: f64,
    pub v: Vec<f64>,
    /// Idempotence form of the matrix-equation residual.
    pub residual_matrix_eq: f64,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective so far, one entry per iteration.
    pub history: Vec<f64>,
    pub verification: Option<VerificationReport>,
    /// Sequential construction only: first step that failed.
    pub failed_step: Option<usize>,
    /// Sequential construction only: PSD residual of each completed step.
    pub step_residuals: Vec<f64>,
}

impl SearchState {
    pub fn gap(&self) -> f64 {
        (self.dim * self.dim) as f64 - self.objective
    }
}

/// Number of Givens angles for `Q̃` of size `n`.
pub fn givens_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// `Q̃ = R G_{n-2,n-1}(θ) ... G_{0,1}(θ)` with `R = diag(1, ..., 1, -1)` when
/// `reflect` is set. Always exactly orthogonal.
pub fn givens_matrix(n: usize, angles: &[f64], reflect: bool) -> RealMatrix {
    let mut q = RealMatrix::identity(n, n);
    let mut k = 0;
    for p in 0..n {
        for r in (p + 1)..n {
            let (s, c) = angles[k].sin_cos();
            k += 1;
            for col in 0..n {
                let a = q[(p, col)];
                let b = q[(r, col)];
                q[(p, col)] = c * a - s * b;
                q[(r, col)] = s * a + c * b;
            }
        }
    }
    if reflect {
        for col in 0..n {
            q[(n - 1, col)] = -q[(n - 1, col)];
        }
    }
    q
}

fn idempotence_residuals(cand: &[ComplexMatrix]) -> DVector<f64> {
    let d = cand[0].nrows();
    let mut out = Vec::with_capacity(cand.len() * d * d * 2);
    for p in cand {
        let r = p * p - p;
        for a in 0..d {
            for b in a..d {
                out.push(r[(a, b)].re);
                if a != b {
                    out.push(r[(a, b)].im);
                }
            }
        }
    }
    DVector::from_vec(out)
}

fn pad_history(h: &mut Vec<f64>, len: usize, best: f64) {
    h.truncate(len);
    while h.len() < len {
        h.push(best);
    }
    if let Some(last) = h.last_mut() {
        *last = last.max(best);
    }
}

pub(crate) fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(restart as u64)
}

struct Run {
    restart: usize,
    seed: u64,
    angles: Vec<f64>,
    reflect: bool,
    objective: f64,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
}

fn run_restart(gf: &GramFactors, cfg: &SearchConfig, restart: usize) -> Run {
    let n = gf.size() - 1;
    let m = givens_count(n);
    let target = gf.size() as f64;
    let seed = restart_seed(cfg.seed, restart);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reflect = restart % 2 == 1;
    let x0: DVector<f64> = if restart == 0 {
        DVector::zeros(m)
    } else {
        DVector::from_fn(m, |_, _| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
    };
    let f = |x: &DVector<f64>| objective_unchecked(gf, &givens_matrix(n, x.as_slice(), reflect));
    let is_converged = |x: &DVector<f64>, fx: f64| {
        target - fx < cfg.tol_obj
            && verify(&candidate_unchecked(gf, &givens_matrix(n, x.as_slice(), reflect)), cfg.verify_tol)
                .map(|r| r.pass)
                .unwrap_or(false)
    };

    let mut best_x = x0;
    let mut best = f(&best_x);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = is_converged(&best_x, best);
    let mut start = best_x.clone();
    while !converged && iterations < cfg.max_iterations {
        let budget = cfg.max_iterations - iterations;
        let asc = bfgs_maximize(&f, start, budget.min(400), target - 1e-13);
        iterations += asc.iterations.max(1);
        let floor = best;
        history.extend(asc.history.iter().map(|v| v.max(floor)));
        if asc.value > best {
            best = asc.value;
            best_x = asc.x;
        }
        pad_history(&mut history, iterations, best);

        if target - best < cfg.polish_gap && iterations < cfg.max_iterations {
            let r = |x: &DVector<f64>| {
                idempotence_residuals(&candidate_unchecked(gf, &givens_matrix(n, x.as_slice(), reflect)))
            };
            let budget = (cfg.max_iterations - iterations).min(100);
            let (xp, _, it) = levenberg_marquardt(&r, best_x.clone(), budget, 1e-14);
            iterations += it.max(1);
            let fp = f(&xp);
            if fp >= best - 1e-12 {
                best = best.max(fp);
                best_x = xp;
            }
            pad_history(&mut history, iterations, best);
        }
        converged = is_converged(&best_x, best);
        if converged {
            break;
        }
        // basin hop from the best point
        start = DVector::from_fn(m, |k, _| best_x[k] + cfg.hop_scale * rng.random_range(-1.0..1.0));
    }
    Run { restart, seed, angles: best_x.as_slice().to_vec(), reflect, objective: best, iterations, history, converged }
}

/// Worker-thread count: `cfg.parallel` if nonzero, capped by
/// `SICFORGE_THREADS` when set.
pub fn thread_count(cfg: &SearchConfig) -> usize {
    let mut n = if cfg.parallel > 0 { cfg.parallel } else { rayon::current_num_threads() };
    if let Some(cap) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if cap > 0 {
            n = n.min(cap);
        }
    }
    n.max(1)
}

/// Maximizes `Σ_i V_i` over orthogonal `Q̃` with random restarts.
///
/// Restarts run in batches of [`thread_count`]. The result is the
/// lowest-index converged restart if any converges, otherwise the highest
/// objective (lowest restart index on ties); it does not depend on the
/// thread count. Running out of budget is not an error: the best state is
/// returned with `converged = false`.
pub fn optimize(d: usize, cfg: &SearchConfig) -> Result<SearchState> {
    let gf = GramFactors::with_seed(d, cfg.direction_seed)?;
    optimize_with(&gf, cfg)
}

pub fn optimize_with(gf: &GramFactors, cfg: &SearchConfig) -> Result<SearchState> {
    if cfg.restarts == 0 {
        return Err(Error::Invalid("at least one restart is required".into()));
    }
    let threads = thread_count(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let mut runs: Vec<Run> = Vec::with_capacity(cfg.restarts);
    let mut next = 0;
    while next < cfg.restarts {
        let end = (next + threads).min(cfg.restarts);
        let batch: Vec<Run> = pool.install(|| (next..end).into_par_iter().map(|r| run_restart(gf, cfg, r)).collect());
        runs.extend(batch);
        next = end;
        if runs.iter().any(|r| r.converged) {
            break;
        }
    }
    let chosen = runs
        .iter()
        .filter(|r| r.converged)
        .min_by_key(|r| r.restart)
        .or_else(|| {
            runs.iter().max_by(|a, b| {
                a.objective.total_cmp(&b.objective).then(b.restart.cmp(&a.restart))
            })
        })
        .expect("at least one restart ran");
    finish(gf, chosen, cfg)
}

fn finish(gf: &GramFactors, run: &Run, cfg: &SearchConfig) -> Result<SearchState> {
    let n = gf.size() - 1;
    let qtilde = givens_matrix(n, &run.angles, run.reflect);
    let cand = candidate_unchecked(gf, &qtilde);
    let v: Vec<f64> = cand.iter().map(|p| crate::qmat::trace_product(&(p * p), p).re).collect();
    let objective = v.iter().sum::<f64>();
    let report = verify(&cand, cfg.verify_tol)?;
    let residual = matrix_equation_residual(gf, &qtilde)?;
    let converged = (gf.size() as f64 - objective) < cfg.tol_obj && report.pass;
    Ok(SearchState {
        dim: gf.dim(),
        qtilde,
        objective,
        v,
        residual_matrix_eq: residual.idempotence_form,
        seed: run.seed,
        iterations: run.iterations,
        converged,
        history: run.history.clone(),
        verification: Some(report),
        failed_step: None,
        step_residuals: Vec::new(),
    })
}
