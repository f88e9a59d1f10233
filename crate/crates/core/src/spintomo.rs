//! Spin tomography schemes: continuous directions on the sphere and a
//! finite number of rotations (FNR).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    condition_number, f_coeff, gauss_legendre, legendre_poly, random::random_direction,
    s_operator, validate_density_matrix, ComplexMatrix, Direction, RealMatrix, Spin,
};
use crate::starprod::{symbol, IndexPoint, Scheme, Symbol};
use crate::tolerance::COND_MAX;

/// Ordered set of directions `n_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    pub directions: Vec<Direction>,
}

#[derive(Serialize, Deserialize)]
struct DirectionsJson {
    directions: Vec<[f64; 3]>,
}

impl DirectionSet {
    pub fn new(directions: Vec<Direction>) -> Self {
        DirectionSet { directions }
    }

    pub fn count(&self) -> usize {
        self.directions.len()
    }

    /// `{"directions": [[nx, ny, nz], ...]}`, each vector of unit norm.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DirectionsJson = serde_json::from_str(text)?;
        let directions = raw
            .directions
            .into_iter()
            .map(Direction::from_unit)
            .collect::<Result<Vec<_>>>()?;
        Ok(DirectionSet { directions })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(DirectionsJson {
            directions: self.directions.iter().map(|d| d.cartesian).collect(),
        })
        .expect("plain data serializes")
    }

    /// `𝔐(L)_{kk'} = P_L(n_k·n_k')` over the first `2L+1` directions.
    pub fn m_matrix(&self, l: usize) -> Result<RealMatrix> {
        m_matrix(&self.directions, l)
    }
}

/// `𝔐(L)_{kk'} = P_L(n_k·n_k')` over the first `2L+1` entries of `dirs`.
pub fn m_matrix(dirs: &[Direction], l: usize) -> Result<RealMatrix> {
    let size = 2 * l + 1;
    if dirs.len() < size {
        return Err(Error::DimensionMismatch { expected: size, got: dirs.len() });
    }
    Ok(RealMatrix::from_fn(size, size, |a, b| {
        legendre_poly(l, dirs[a].dot(&dirs[b]).clamp(-1.0, 1.0))
    }))
}

/// Inverse of `𝔐(L)`, or the ill-posed-directions error when its condition
/// number exceeds [`COND_MAX`].
pub fn m_inverse(dirs: &[Direction], l: usize) -> Result<RealMatrix> {
    let m = m_matrix(dirs, l)?;
    let cond = condition_number(&m);
    if !(cond < COND_MAX) {
        return Err(Error::IllPosedDirections { l, cond });
    }
    m.try_inverse().ok_or(Error::IllPosedDirections { l, cond: f64::INFINITY })
}

/// `count` directions spread by minimizing a Coulomb energy between lines
/// through the origin (each point repels both `n_j` and `-n_j`).
///
/// Repelling lines rather than points keeps small sets from settling into
/// a great circle: three repelled points end up coplanar, which makes
/// `𝔐(1)` singular, while three repelled lines form an orthonormal triad.
pub fn repulsion_directions(count: usize, seed: u64) -> DirectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<[f64; 3]> = (0..count).map(|_| random_direction(&mut rng).cartesian).collect();
    if count >= 2 {
        let mut step = 0.1;
        let mut energy = line_energy(&pts);
        for _ in 0..2000 {
            let forces = line_forces(&pts);
            let trial: Vec<[f64; 3]> = pts
                .iter()
                .zip(&forces)
                .map(|(p, f)| normalize([p[0] + step * f[0], p[1] + step * f[1], p[2] + step * f[2]]))
                .collect();
            let e = line_energy(&trial);
            if e < energy {
                let gain = energy - e;
                pts = trial;
                energy = e;
                step *= 1.2;
                if gain < 1e-15 * energy.max(1.0) {
                    break;
                }
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
    }
    DirectionSet {
        directions: pts
            .into_iter()
            .map(|p| Direction::from_cartesian(p).expect("normalized point"))
            .collect(),
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn line_energy(pts: &[[f64; 3]]) -> f64 {
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let dot: f64 = (0..3).map(|k| pts[i][k] * pts[j][k]).sum();
            // |n_i - n_j|² = 2 - 2 dot, |n_i + n_j|² = 2 + 2 dot
            e += 1.0 / (2.0 - 2.0 * dot).max(1e-300).sqrt() + 1.0 / (2.0 + 2.0 * dot).max(1e-300).sqrt();
        }
    }
    e
}

/// Tangential components of `-∇E`.
fn line_forces(pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = pts.len();
    let mut forces = vec![[0.0; 3]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for sign in [1.0, -1.0] {
                let diff: Vec<f64> = (0..3).map(|k| pts[i][k] - sign * pts[j][k]).collect();
                let r2: f64 = diff.iter().map(|x| x * x).sum::<f64>().max(1e-300);
                let r3 = r2 * r2.sqrt();
                for k in 0..3 {
                    forces[i][k] += diff[k] / r3;
                }
            }
        }
        let p = pts[i];
        let radial: f64 = (0..3).map(|k| forces[i][k] * p[k]).sum();
        for k in 0..3 {
            forces[i][k] -= radial * p[k];
        }
    }
    forces
}

/// Worst condition number of `𝔐(L)` over the given blocks (prefix sets).
pub fn worst_condition(dirs: &[Direction], blocks: &[usize]) -> f64 {
    blocks
        .iter()
        .map(|&l| m_matrix(dirs, l).map(|m| condition_number(&m)).unwrap_or(f64::INFINITY))
        .fold(1.0, f64::max)
}

/// Stochastic hill climb on the worst `𝔐(L)` condition number over
/// `blocks`, starting from `ds`. Deterministic for a given seed.
///
/// Repulsion alone ends in highly symmetric configurations; for seven or
/// more lines these are singular for the top block (e.g. seven points
/// with inversion-like symmetry annihilate every `L = 3` combination).
pub fn refine_conditioning(ds: &DirectionSet, blocks: &[usize], seed: u64) -> DirectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let mut best = ds.directions.clone();
    let mut best_cond = worst_condition(&best, blocks);
    let mut scale = 0.3;
    for _ in 0..3000 {
        if best_cond < 50.0 || scale < 1e-6 {
            break;
        }
        let mut trial = best.clone();
        for d in trial.iter_mut() {
            let p = random_direction(&mut rng).cartesian;
            let v = d.cartesian;
            *d = Direction::from_cartesian([v[0] + scale * p[0], v[1] + scale * p[1], v[2] + scale * p[2]])
                .unwrap_or(*d);
        }
        let cond = worst_condition(&trial, blocks);
        if cond < best_cond {
            best = trial;
            best_cond = cond;
        } else {
            scale *= 0.995;
        }
    }
    DirectionSet { directions: best }
}

/// Direction set for the FNR scheme at spin `j`: `4j+1` repulsion points,
/// refined so that the leading `2L+1` subsets give well-conditioned `𝔐(L)`
/// for every `L <= 2j`. Re-seeds deterministically (`seed`, `seed+1`, ...)
/// until the condition-number guard passes.
pub fn fnr_directions(spin: Spin, seed: u64) -> Result<DirectionSet> {
    let count = 2 * spin.two_j() as usize + 1;
    let blocks: Vec<usize> = (0..=spin.two_j() as usize).collect();
    guarded_directions(count, &blocks, seed)
}

/// `2L+1` directions for block `L` alone, well conditioned for `𝔐(L)`.
pub fn block_directions(l: usize, seed: u64) -> Result<DirectionSet> {
    guarded_directions(2 * l + 1, &[l], seed)
}

fn guarded_directions(count: usize, blocks: &[usize], seed: u64) -> Result<DirectionSet> {
    let mut last_err = None;
    for attempt in 0..16 {
        let s = seed.wrapping_add(attempt);
        let set = refine_conditioning(&repulsion_directions(count, s), blocks, s);
        match blocks.iter().try_for_each(|&l| m_inverse(&set.directions, l).map(|_| ())) {
            Ok(()) => return Ok(set),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Default seed for generated direction sets.
pub const DEFAULT_DIRECTION_SEED: u64 = 20_100;

/// Directions and weights (summing to 1, i.e. already divided by `4π`)
/// of the quadrature grid used by [`continuous_scheme`]; direction `k` of
/// the scheme's index points is entry `k` here.
pub fn quadrature_grid(spin: Spin, quadrature_order: usize) -> Result<Vec<(Direction, f64)>> {
    let degree = quadrature_order.max(2 * spin.two_j() as usize + 2);
    let n_theta = degree / 2 + 1;
    let n_phi = degree + 1;
    let (nodes, gl_weights) = gauss_legendre(n_theta);
    let mut grid = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in nodes.iter().zip(&gl_weights) {
        for p in 0..n_phi {
            let phi = 2.0 * PI * p as f64 / n_phi as f64;
            let dir = Direction::from_angles(x.clamp(-1.0, 1.0).acos(), phi)?;
            grid.push((dir, w * 2.0 * PI / n_phi as f64 / (4.0 * PI)));
        }
    }
    Ok(grid)
}

/// Continuous spin-tomography scheme on a product quadrature grid.
///
/// Index points are `(m, n_g)` over grid directions `n_g`; `Û(m,n) =
/// Σ_L f_L(m) Ŝ_L(n)`, `D̂(m,n) = Σ_L (2L+1) f_L(m) Ŝ_L(n)`, and the weight of
/// `(m, n_g)` is the quadrature weight of `n_g` divided by `4π`. The grid
/// (Gauss–Legendre in `cos θ` times uniform `φ`) integrates polynomials in
/// `n` exactly up to degree `max(quadrature_order, 4j+2)`.
pub fn continuous_scheme(spin: Spin, quadrature_order: usize) -> Result<Scheme> {
    let grid = quadrature_grid(spin, quadrature_order)?;
    let two_j = spin.two_j() as usize;
    let mut points = Vec::new();
    let mut deq = Vec::new();
    let mut quant = Vec::new();
    let mut weights = Vec::new();
    for (k, (dir, w)) in grid.iter().enumerate() {
        let s_ops = (0..=two_j)
            .map(|l| s_operator(l, spin, dir))
            .collect::<Result<Vec<_>>>()?;
        for m in spin.projections() {
            let mut u = ComplexMatrix::zeros(spin.dim(), spin.dim());
            let mut d = ComplexMatrix::zeros(spin.dim(), spin.dim());
            for (l, s) in s_ops.iter().enumerate() {
                let f = f_coeff(l, spin, m)?;
                u += s.scale(f);
                d += s.scale((2 * l + 1) as f64 * f);
            }
            points.push(IndexPoint::SpinDirection { m, k });
            deq.push(u);
            quant.push(d);
            weights.push(*w);
        }
    }
    Scheme::new(format!("spin-j{}", spin.two_j()), points, deq, quant, weights)
}

/// FNR scheme at spin `j` over `4j+1` directions.
///
/// `Û(m,k) = (4j+1)⁻¹ Σ_L f_L(m) Ŝ_L(n_k)` and
/// `D̂(m,k) = (4j+1) Σ_{L >= ⌈(k-1)/2⌉} f_L(m) Σ_{k' <= 2L+1} 𝔐⁻¹(L)_{kk'} Ŝ_L(n_k')`
/// with 1-based `k`; `𝔐(L)` is built from the first `2L+1` directions. Unit
/// weights.
pub fn fnr_scheme(spin: Spin, ds: &DirectionSet) -> Result<Scheme> {
    let two_j = spin.two_j() as usize;
    let count = 2 * two_j + 1;
    if ds.count() != count {
        return Err(Error::DimensionMismatch { expected: count, got: ds.count() });
    }
    let inverses = (0..=two_j)
        .map(|l| m_inverse(&ds.directions, l))
        .collect::<Result<Vec<_>>>()?;
    // s_ops[l][k] = Ŝ_L(n_k), for k < 2L+1 (plus all k for the dequantizer)
    let s_ops = (0..=two_j)
        .map(|l| {
            ds.directions
                .iter()
                .map(|n| s_operator(l, spin, n))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = count as f64;
    let dim = spin.dim();
    let mut points = Vec::new();
    let mut deq = Vec::new();
    let mut quant = Vec::new();
    let f_table: Vec<Vec<f64>> = spin
        .projections()
        .into_iter()
        .map(|m| (0..=two_j).map(|l| f_coeff(l, spin, m)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    for k in 0..count {
        for (m, f) in spin.projections().into_iter().zip(&f_table) {
            let mut u = ComplexMatrix::zeros(dim, dim);
            for l in 0..=two_j {
                u += s_ops[l][k].scale(f[l] / scale);
            }
            let mut d = ComplexMatrix::zeros(dim, dim);
            // 0-based k: the 1-based condition (k-1)/2 <= L reads k <= 2L
            for l in k.div_ceil(2)..=two_j {
                let inv = &inverses[l];
                for kp in 0..(2 * l + 1) {
                    d += s_ops[l][kp].scale(scale * f[l] * inv[(k, kp)]);
                }
            }
            points.push(IndexPoint::SpinDirection { m, k });
            deq.push(u);
            quant.push(d);
        }
    }
    let n = points.len();
    Scheme::new(format!("fnr-j{}", spin.two_j()), points, deq, quant, vec![1.0; n])
}

/// Tomogram `w(x) = Tr[ρ̂ Û(x)]` of a density matrix.
pub fn tomogram(rho: &ComplexMatrix, s: &Scheme) -> Result<Symbol> {
    validate_density_matrix(rho)?;
    let w = symbol(rho, s)?;
    let imag = w.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if imag > 1e-10 {
        return Err(Error::InvalidState(format!("tomogram has imaginary part {imag:e}")));
    }
    Ok(w)
}

/// Uniformly random directions, for tests and experiments.
pub fn random_directions<R: Rng + ?Sized>(count: usize, rng: &mut R) -> DirectionSet {
    DirectionSet { directions: (0..count).map(|_| random_direction(rng)).collect() }
}
