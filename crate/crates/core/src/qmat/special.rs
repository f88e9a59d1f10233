//! Discrete Chebyshev polynomials, Legendre functions and Gauss–Legendre
//! quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Discrete Chebyshev polynomial `t_L(x, N)` orthogonal on `x = 0..N-1`.
///
/// Normalization: `t_0 = 1`, `t_1(x, N) = 2x - N + 1`, so that
/// `Σ_x t_L(x)² = (N+L)! / ((2L+1)(N-L-1)!)`. Evaluated through the
/// three-term recurrence, which is also the lowest-degree interpolation
/// for non-integer `x`.
pub fn discrete_chebyshev(l: usize, x: f64, n: usize) -> Result<f64> {
    if n == 0 || l >= n {
        return Err(Error::Domain(format!(
            "discrete Chebyshev degree {l} requires L < N = {n}"
        )));
    }
    let nf = n as f64;
    let u = 2.0 * x - nf + 1.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * u * cur - kf * (nf * nf - kf * kf) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `d_L = sqrt((N+L)! / ((2L+1)(N-L-1)!))`, via log-gamma.
pub fn chebyshev_norm(l: usize, n: usize) -> Result<f64> {
    if n == 0 || l >= n {
        return Err(Error::Domain(format!("norm of degree {l} requires L < N = {n}")));
    }
    let (lf, nf) = (l as f64, n as f64);
    let ln_sq = ln_gamma(nf + lf + 1.0) - (2.0 * lf + 1.0).ln() - ln_gamma(nf - lf);
    Ok((0.5 * ln_sq).exp())
}

/// `f_L^{(j)}(m) = t_L(j+m, 2j+1) / d_L`.
///
/// Small spins use the normalized three-term recurrence. The recurrence in
/// `L` loses accuracy once `2j` grows past about 12, so for larger spins and
/// `m` on the grid `-j..j` the values come from an orthonormalized table
/// (Stieltjes process with full reorthogonalization), which is accurate to
/// rounding for every `L`. Off-grid `m` always uses the recurrence.
pub fn f_coeff(l: usize, spin: super::Spin, m: f64) -> Result<f64> {
    let n = spin.dim();
    if l >= n {
        return Err(Error::Domain(format!(
            "f_L requires L <= 2j, got L = {l}, 2j = {}",
            n - 1
        )));
    }
    let x = spin.j() + m;
    if n > RECURRENCE_MAX_DIM && (x - x.round()).abs() < 1e-12 && x >= -0.5 && x < n as f64 - 0.5 {
        let table = chebyshev_table(n);
        return Ok(table[l * n + x.round() as usize]);
    }
    Ok(f_coeff_recurrence(l, n, x))
}

const RECURRENCE_MAX_DIM: usize = 12;

fn f_coeff_recurrence(l: usize, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let u = 2.0 * x - nf + 1.0;
    // ratio d_k / d_{k+1}
    let ratio = |k: f64| {
        ((2.0 * k + 3.0) / ((nf + k + 1.0) * (nf - k - 1.0) * (2.0 * k + 1.0))).sqrt()
    };
    let (mut prev, mut cur) = (0.0, 1.0 / nf.sqrt());
    let mut prev_ratio = 0.0;
    for k in 0..l {
        let kf = k as f64;
        let r = ratio(kf);
        let next =
            ((2.0 * kf + 1.0) * u * cur * r - kf * (nf * nf - kf * kf) * prev * prev_ratio * r)
                / (kf + 1.0);
        prev = cur;
        cur = next;
        prev_ratio = r;
    }
    cur
}

/// Row-major `N×N` table of `f_L` on the grid `x = 0..N-1`, cached per `N`.
fn chebyshev_table(n: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("cache poisoned").get(&n) {
        return t.clone();
    }
    let center = (n as f64 - 1.0) / 2.0;
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for l in 1..n {
        let last = &rows[l - 1];
        let mut w: Vec<f64> = (0..n).map(|x| (x as f64 - center) * last[x]).collect();
        for _ in 0..2 {
            for row in &rows {
                let proj: f64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
                for (wi, ri) in w.iter_mut().zip(row) {
                    *wi -= proj * ri;
                }
            }
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        rows.push(w.into_iter().map(|a| a / norm).collect());
    }
    let table = Arc::new(rows.concat());
    cache.lock().expect("cache poisoned").insert(n, table.clone());
    table
}

/// Legendre polynomial `P_L(x)`.
pub fn legendre_poly(l: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Associated Legendre function `P_L^{(m)}(x)`, Condon–Shortley phase
/// included (`P_1^{(1)}(x) = -sqrt(1-x²)`).
pub fn legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    let norm = legendre_normalized(l, m, x)?;
    let (lf, mf) = (l as f64, m as f64);
    let scale = (0.5 * (ln_gamma(lf + mf + 1.0) - ln_gamma(lf - mf + 1.0))).exp();
    Ok(norm * scale)
}

/// `sqrt((L-m)!/(L+m)!) P_L^{(m)}(x)`, Condon–Shortley phase included.
pub fn legendre_normalized(l: usize, m: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("associated Legendre needs |x| <= 1, got {x}")));
    }
    if m > l {
        return Err(Error::Domain(format!("associated Legendre needs m <= L, got m = {m}, L = {l}")));
    }
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf - 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return Ok(pmm);
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = x * (2.0 * mf + 1.0).sqrt() * pmm;
    for k in (m + 2)..=l {
        let kf = k as f64;
        let next = (x * (2.0 * kf - 1.0) * cur - ((kf + mf - 1.0) * (kf - mf - 1.0)).sqrt() * prev)
            / ((kf - mf) * (kf + mf)).sqrt();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`; exact for polynomials
/// of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
