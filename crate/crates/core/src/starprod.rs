//! Generic star-product schemes: symbols, reconstruction, the delta kernel,
//! star-product kernels and their associativity constraints.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{max_abs_diff, require_square, trace_product, ComplexMatrix, ZERO};

/// Label of one point of a scheme's index space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexPoint {
    /// Plain discrete label, e.g. the SIC index `i`.
    Discrete { i: usize },
    /// Spin projection `m` along direction number `k`.
    SpinDirection { m: f64, k: usize },
    /// Block `L` and direction number `k` of a block-diagonal scheme.
    Block { l: usize, k: usize },
}

/// Paired dequantizer/quantizer families over a finite index space, with
/// the per-point weight used by `∫ dx`.
#[derive(Clone, Debug)]
pub struct Scheme {
    label: String,
    dim: usize,
    points: Vec<IndexPoint>,
    dequantizers: Vec<ComplexMatrix>,
    quantizers: Vec<ComplexMatrix>,
    weights: Vec<f64>,
}

impl Scheme {
    pub fn new(
        label: impl Into<String>,
        points: Vec<IndexPoint>,
        dequantizers: Vec<ComplexMatrix>,
        quantizers: Vec<ComplexMatrix>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = points.len();
        for len in [dequantizers.len(), quantizers.len(), weights.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let first = dequantizers
            .first()
            .ok_or_else(|| Error::Invalid("scheme with empty index space".into()))?;
        let dim = require_square(first)?;
        for m in dequantizers.iter().chain(&quantizers) {
            if require_square(m)? != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
            }
        }
        Ok(Scheme { label: label.into(), dim, points, dequantizers, quantizers, weights })
    }

    /// Scheme with `Û` and `D̂` swapped; its symbols are the dual symbols
    /// `Tr[Â D̂(x)]`.
    pub fn dual(&self) -> Scheme {
        Scheme {
            label: format!("{}-dual", self.label),
            dim: self.dim,
            points: self.points.clone(),
            dequantizers: self.quantizers.clone(),
            quantizers: self.dequantizers.clone(),
            weights: self.weights.clone(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[IndexPoint] {
        &self.points
    }

    pub fn dequantizers(&self) -> &[ComplexMatrix] {
        &self.dequantizers
    }

    pub fn quantizers(&self) -> &[ComplexMatrix] {
        &self.quantizers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_symbol(&self, f: &Symbol) -> Result<()> {
        if f.scheme_label != self.label {
            return Err(Error::SchemeMismatch {
                symbol: f.scheme_label.clone(),
                scheme: self.label.clone(),
            });
        }
        if f.values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: f.values.len() });
        }
        Ok(())
    }
}

/// Values `f_A(x)` of an operator's symbol over a scheme's index space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub scheme_label: String,
    pub values: Vec<Complex64>,
}

impl Symbol {
    pub fn max_abs_diff(&self, other: &Symbol) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `f_A(x) = Tr[Â Û(x)]`.
pub fn symbol(a: &ComplexMatrix, s: &Scheme) -> Result<Symbol> {
    if require_square(a)? != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: a.nrows() });
    }
    Ok(Symbol {
        scheme_label: s.label.clone(),
        values: s.dequantizers.iter().map(|u| trace_product(a, u)).collect(),
    })
}

/// `Â = Σ_x w(x) f(x) D̂(x)`.
pub fn reconstruct(f: &Symbol, s: &Scheme) -> Result<ComplexMatrix> {
    s.check_symbol(f)?;
    let mut out = ComplexMatrix::zeros(s.dim, s.dim);
    for ((v, d), w) in f.values.iter().zip(&s.quantizers).zip(&s.weights) {
        out += d * (v * *w);
    }
    Ok(out)
}

/// `𝔇(x, x') = Tr[Û(x) D̂(x')]`, as an `n×n` matrix.
pub fn delta_kernel(s: &Scheme) -> ComplexMatrix {
    let n = s.len();
    ComplexMatrix::from_fn(n, n, |a, b| trace_product(&s.dequantizers[a], &s.quantizers[b]))
}

/// `max_x |Σ_x' w(x') 𝔇(x,x') f(x') - f(x)|`.
pub fn delta_reproduction_residual(s: &Scheme, f: &Symbol) -> Result<f64> {
    s.check_symbol(f)?;
    let delta = delta_kernel(s);
    let n = s.len();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let mut acc = ZERO;
        for b in 0..n {
            acc += delta[(a, b)] * f.values[b] * s.weights[b];
        }
        worst = worst.max((acc - f.values[a]).norm());
    }
    Ok(worst)
}

/// Star-product kernel `K(x1, x2, x)` with the integration weights of
/// `x1` and `x2` folded in, so that `(f ⋆ g)(x) = Σ f(x1) g(x2) K[x1][x2][x]`.
///
/// The fold also makes every associativity contraction a plain sum: each
/// internal index carries exactly one weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelTensor {
    pub scheme_label: String,
    pub n: usize,
    pub dual: bool,
    /// Row-major `[x1][x2][x]`.
    pub entries: Vec<Complex64>,
}

impl KernelTensor {
    pub fn from_fn(
        scheme_label: impl Into<String>,
        n: usize,
        dual: bool,
        f: impl Fn(usize, usize, usize) -> Complex64 + Sync,
    ) -> Self {
        let entries = (0..n * n * n)
            .into_par_iter()
            .map(|idx| f(idx / (n * n), (idx / n) % n, idx % n))
            .collect();
        KernelTensor { scheme_label: scheme_label.into(), n, dual, entries }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.entries[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs_diff(&self, other: &KernelTensor) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn kernel_of(s: &Scheme, left: &[ComplexMatrix], right: &[ComplexMatrix], dual: bool) -> KernelTensor {
    let n = s.len();
    let products: Vec<ComplexMatrix> = (0..n * n)
        .into_par_iter()
        .map(|ab| &left[ab / n] * &left[ab % n])
        .collect();
    let w = &s.weights;
    KernelTensor::from_fn(s.label.clone(), n, dual, |a, b, x| {
        trace_product(&products[a * n + b], &right[x]) * (w[a] * w[b])
    })
}

/// `K(x1, x2, x) = Tr[D̂(x1) D̂(x2) Û(x)]` (weight-folded).
pub fn kernel(s: &Scheme) -> KernelTensor {
    kernel_of(s, &s.quantizers, &s.dequantizers, false)
}

/// `K^dual(x1, x2, x) = Tr[Û(x1) Û(x2) D̂(x)]` (weight-folded).
pub fn dual_kernel(s: &Scheme) -> KernelTensor {
    kernel_of(s, &s.dequantizers, &s.quantizers, true)
}

/// `(f ⋆ g)(x) = Σ_{x1,x2} f(x1) g(x2) K[x1][x2][x]`.
pub fn star(f: &Symbol, g: &Symbol, k: &KernelTensor) -> Result<Symbol> {
    for sym in [f, g] {
        if sym.scheme_label != k.scheme_label {
            return Err(Error::SchemeMismatch {
                symbol: sym.scheme_label.clone(),
                scheme: k.scheme_label.clone(),
            });
        }
        if sym.values.len() != k.n {
            return Err(Error::DimensionMismatch { expected: k.n, got: sym.values.len() });
        }
    }
    let n = k.n;
    let mut out = vec![ZERO; n];
    for a in 0..n {
        for b in 0..n {
            let fg = f.values[a] * g.values[b];
            if fg == ZERO {
                continue;
            }
            let base = (a * n + b) * n;
            for (o, kv) in out.iter_mut().zip(&k.entries[base..base + n]) {
                *o += fg * kv;
            }
        }
    }
    Ok(Symbol { scheme_label: f.scheme_label.clone(), values: out })
}

/// Max residual between the two expansions of the three-fold kernel:
/// `Σ_y K(x1,x2,y) K(y,x3,x)` and `Σ_y K(x1,y,x) K(x2,x3,y)`.
pub fn check_assoc3(k: &KernelTensor) -> f64 {
    let n = k.n;
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            for b in 0..n {
                for c in 0..n {
                    for x in 0..n {
                        let mut left = ZERO;
                        let mut right = ZERO;
                        for y in 0..n {
                            left += k.get(a, b, y) * k.get(y, c, x);
                            right += k.get(a, y, x) * k.get(b, c, y);
                        }
                        worst = worst.max((left - right).norm());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Max pairwise discrepancy among the five expansions of the four-fold
/// kernel `K^(4)(x1, x2, x3, x4, x)`:
///
/// 1. `Σ K(x1,x2,y) K(y,x3,z) K(z,x4,x)`
/// 2. `Σ K(x1,x2,y) K(y,z,x) K(x3,x4,z)`
/// 3. `Σ K(x1,y,z) K(x2,x3,y) K(z,x4,x)`
/// 4. `Σ K(x1,y,x) K(x2,x3,z) K(z,x4,y)`
/// 5. `Σ K(x1,y,x) K(x2,z,y) K(x3,x4,z)`
pub fn check_assoc4(k: &KernelTensor) -> f64 {
    let n = k.n;
    let idx4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    // two-kernel intermediates, each O(n^5)
    let build = |f: &(dyn Fn(usize, usize, usize, usize) -> Complex64 + Sync)| -> Vec<Complex64> {
        (0..n * n * n * n)
            .into_par_iter()
            .map(|i| f(i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n))
            .collect()
    };
    // A(x1,x2,x3,z) = Σ_y K(x1,x2,y) K(y,x3,z)
    let a3 = build(&|a, b, c, z| (0..n).map(|y| k.get(a, b, y) * k.get(y, c, z)).sum());
    // B(y,x3,x4,x) = Σ_z K(y,z,x) K(x3,x4,z)
    let b3 = build(&|y, c, d, x| (0..n).map(|z| k.get(y, z, x) * k.get(c, d, z)).sum());
    // C(x1,x2,x3,z) = Σ_y K(x1,y,z) K(x2,x3,y)
    let c3 = build(&|a, b, c, z| (0..n).map(|y| k.get(a, y, z) * k.get(b, c, y)).sum());
    // E(x2,x3,x4,y) = Σ_z K(x2,x3,z) K(z,x4,y)
    let e3 = build(&|b, c, d, y| (0..n).map(|z| k.get(b, c, z) * k.get(z, d, y)).sum());
    // G(x2,x3,x4,y) = Σ_z K(x2,z,y) K(x3,x4,z)
    let g3 = build(&|b, c, d, y| (0..n).map(|z| k.get(b, z, y) * k.get(c, d, z)).sum());

    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            let mut vals = [ZERO; 5];
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        for x in 0..n {
                            vals.iter_mut().for_each(|v| *v = ZERO);
                            for y in 0..n {
                                vals[0] += a3[idx4(a, b, c, y)] * k.get(y, d, x);
                                vals[1] += k.get(a, b, y) * b3[idx4(y, c, d, x)];
                                vals[2] += c3[idx4(a, b, c, y)] * k.get(y, d, x);
                                vals[3] += k.get(a, y, x) * e3[idx4(b, c, d, y)];
                                vals[4] += k.get(a, y, x) * g3[idx4(b, c, d, y)];
                            }
                            for p in 0..5 {
                                for q in (p + 1)..5 {
                                    worst = worst.max((vals[p] - vals[q]).norm());
                                }
                            }
                        }
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Max `|reconstruct(symbol(A)) - A|` over all `d²` matrix units.
pub fn reconstruction_residual(s: &Scheme) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for unit in crate::qmat::matrix_units(s.dim) {
        let back = reconstruct(&symbol(&unit, s)?, s)?;
        worst = worst.max(max_abs_diff(&back, &unit));
    }
    Ok(worst)
}
