//! Small dense optimizers over `R^n` with finite-difference derivatives.

use nalgebra::{DMatrix, DVector};

const GRAD_STEP: f64 = 1e-6;
const JAC_STEP: f64 = 1e-7;

pub(crate) fn gradient(f: &impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let x0 = xp[k];
        xp[k] = x0 + GRAD_STEP;
        let fp = f(&xp);
        xp[k] = x0 - GRAD_STEP;
        let fm = f(&xp);
        xp[k] = x0;
        g[k] = (fp - fm) / (2.0 * GRAD_STEP);
    }
    g
}

pub(crate) struct Ascent {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// Quasi-Newton (BFGS) ascent with backtracking line search. Stops after
/// `max_iter` iterations, on a vanishing step, or once `f >= target`.
pub(crate) fn bfgs_maximize(
    f: &impl Fn(&DVector<f64>) -> f64,
    x0: DVector<f64>,
    max_iter: usize,
    target: f64,
) -> Ascent {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = gradient(f, &x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter && fx < target {
        iterations += 1;
        let mut dir = &h * &g;
        if dir.dot(&g) <= 0.0 {
            h = DMatrix::identity(n, n);
            dir = g.clone();
        }
        let slope = dir.dot(&g);
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-12 {
            let trial = &x + &dir * step;
            let ft = f(&trial);
            if ft >= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            history.push(fx);
            break;
        };
        let gn = gradient(f, &xn);
        let s = &xn - &x;
        // Ascent on f is descent on -f: y = -(g_new - g_old).
        let y = &g - &gn;
        let sy = s.dot(&y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let improvement = fnew - fx;
        x = xn;
        fx = fnew;
        g = gn;
        history.push(fx);
        if improvement < 1e-15 * fx.abs().max(1.0) && g.norm() < 1e-9 {
            break;
        }
    }
    Ascent { x, value: fx, iterations, history }
}

fn jacobian(r: &impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let x0 = xp[k];
        xp[k] = x0 + JAC_STEP;
        let rp = r(&xp);
        xp[k] = x0 - JAC_STEP;
        let rm = r(&xp);
        xp[k] = x0;
        j.set_column(k, &((rp - rm) / (2.0 * JAC_STEP)));
    }
    j
}

/// Levenberg–Marquardt on `|r(x)|²`. Returns the final point, its residual
/// norm and the iteration count.
pub(crate) fn levenberg_marquardt(
    r: &impl Fn(&DVector<f64>) -> DVector<f64>,
    x0: DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, f64, usize) {
    let mut x = x0;
    let mut res = r(&x);
    let mut cost = res.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && cost.sqrt() > tol {
        iterations += 1;
        let j = jacobian(r, &x, res.len());
        let jt = j.transpose();
        let jtj = &jt * &j;
        let grad = &jt * &res;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&grad));
            let xn = &x + &delta;
            let rn = r(&xn);
            let cn = rn.norm_squared();
            if cn < cost {
                x = xn;
                res = rn;
                cost = cn;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt(), iterations)
}
