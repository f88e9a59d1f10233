//! JSON and CSV formats shared with the command-line tool.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested
//! arrays, and every float is written with 17 significant digits so that
//! values round-trip exactly.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, RealMatrix};
use crate::sic::SicSet;
use crate::sicsearch::{SearchConfig, SearchState};
use crate::starprod::{IndexPoint, KernelTensor, Symbol};

/// Compact JSON formatter writing floats as `{:.16e}` and non-finite
/// values as `null`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundTripFormatter;

impl serde_json::ser::Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with [`RoundTripFormatter`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTripFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Float as written by the formatter, for CSV cells.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: Complex64) -> JsonComplex {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| complex_to_json(m[(r, c)])).collect())
        .collect()
}

/// Square matrix from row-major `[re, im]` rows.
pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
}

pub fn real_matrix_to_json(m: &RealMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub fn real_matrix_from_json(rows: &[Vec<f64>]) -> Result<RealMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Invalid("ragged matrix rows".into()));
    }
    Ok(RealMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

/// Provenance recorded with a projector set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SicMeta {
    pub source: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// `{"dim", "projectors", "meta": {"source", "seed", "tolerance"}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SicSetJson {
    pub dim: usize,
    pub projectors: Vec<JsonMatrix>,
    #[serde(default)]
    pub meta: SicMeta,
}

impl SicSetJson {
    pub fn from_matrices(projectors: &[ComplexMatrix], meta: SicMeta) -> Self {
        SicSetJson {
            dim: projectors.first().map_or(0, |p| p.nrows()),
            projectors: projectors.iter().map(matrix_to_json).collect(),
            meta,
        }
    }

    pub fn from_set(s: &SicSet, meta: SicMeta) -> Self {
        Self::from_matrices(s.projectors(), meta)
    }

    /// Parses and checks shapes; no SIC verification.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: SicSetJson = serde_json::from_str(text)?;
        if raw.dim == 0 {
            return Err(Error::Invalid("dim must be positive".into()));
        }
        for p in &raw.projectors {
            if p.len() != raw.dim {
                return Err(Error::DimensionMismatch { expected: raw.dim, got: p.len() });
            }
        }
        Ok(raw)
    }

    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        self.projectors.iter().map(matrix_from_json).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// `{"dim", "matrix"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub matrix: JsonMatrix,
}

impl DensityMatrixJson {
    pub fn new(m: &ComplexMatrix) -> Self {
        DensityMatrixJson { dim: m.nrows(), matrix: matrix_to_json(m) }
    }

    pub fn parse(text: &str) -> Result<ComplexMatrix> {
        let raw: DensityMatrixJson = serde_json::from_str(text)?;
        let m = matrix_from_json(&raw.matrix)?;
        if m.nrows() != raw.dim {
            return Err(Error::DimensionMismatch { expected: raw.dim, got: m.nrows() });
        }
        Ok(m)
    }
}

/// `{"scheme", "points", "values"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolJson {
    pub scheme: String,
    pub points: Vec<IndexPoint>,
    pub values: Vec<JsonComplex>,
}

impl SymbolJson {
    pub fn new(f: &Symbol, points: &[IndexPoint]) -> Self {
        SymbolJson {
            scheme: f.scheme_label.clone(),
            points: points.to_vec(),
            values: f.values.iter().map(|z| complex_to_json(*z)).collect(),
        }
    }

    pub fn symbol(&self) -> Symbol {
        Symbol {
            scheme_label: self.scheme.clone(),
            values: self.values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
        }
    }
}

/// `{"scheme", "dual", "n", "entries": [x1][x2][x]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub scheme: String,
    pub dual: bool,
    pub n: usize,
    pub entries: Vec<Vec<Vec<JsonComplex>>>,
}

impl TensorJson {
    fn nest(n: usize, get: impl Fn(usize, usize, usize) -> Complex64) -> Vec<Vec<Vec<JsonComplex>>> {
        (0..n)
            .map(|a| (0..n).map(|b| (0..n).map(|c| complex_to_json(get(a, b, c))).collect()).collect())
            .collect()
    }

    pub fn from_kernel(k: &KernelTensor) -> Self {
        TensorJson { scheme: k.scheme_label.clone(), dual: k.dual, n: k.n, entries: Self::nest(k.n, |a, b, c| k.get(a, b, c)) }
    }

    pub fn from_triple_products(t: &crate::sic::TripleProductTensor, scheme: &str) -> Self {
        TensorJson { scheme: scheme.to_string(), dual: false, n: t.n, entries: Self::nest(t.n, |a, b, c| t.get(a, b, c)) }
    }
}

/// `{"dim", "qtilde", "objective", "v", "residual_eq41", "seed",
/// "iterations", "converged", ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchStateJson {
    pub dim: usize,
    pub qtilde: Vec<Vec<f64>>,
    pub objective: f64,
    pub v: Vec<f64>,
    #[serde(rename = "residual_eq41")]
    pub residual_matrix_eq: f64,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub method: String,
    pub failed_step: Option<usize>,
    pub step_residuals: Vec<f64>,
    pub config: SearchConfig,
}

impl SearchStateJson {
    pub fn new(s: &SearchState, method: &str, config: &SearchConfig) -> Self {
        SearchStateJson {
            dim: s.dim,
            qtilde: real_matrix_to_json(&s.qtilde),
            objective: s.objective,
            v: s.v.clone(),
            residual_matrix_eq: s.residual_matrix_eq,
            seed: s.seed,
            iterations: s.iterations,
            converged: s.converged,
            method: method.to_string(),
            failed_step: s.failed_step,
            step_residuals: s.step_residuals.clone(),
            config: config.clone(),
        }
    }
}

/// Named residuals with their tolerances, written as CSV
/// `name,value,tolerance,pass`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub rows: Vec<ResidualRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub name: String,
    pub value: f64,
    /// `None` for informational rows that do not gate the result.
    pub tolerance: Option<f64>,
}

impl ResidualRow {
    pub fn pass(&self) -> bool {
        self.tolerance.is_none_or(|t| self.value < t)
    }
}

impl ResidualTable {
    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: Option<f64>) {
        self.rows.push(ResidualRow { name: name.into(), value, tolerance });
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(ResidualRow::pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance,pass\n");
        for r in &self.rows {
            let tol = r.tolerance.map(format_f64).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.name, format_f64(r.value), tol, r.pass()));
        }
        out
    }
}
