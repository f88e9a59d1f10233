//! Star-product quantization schemes for finite-dimensional quantum
//! systems, SIC-POVM verification and search, and the kernel identities
//! that tie them together.
//!
//! Modules, bottom up:
//! - [`qmat`]: dense complex linear algebra, special functions, spin operators.
//! - [`starprod`]: generic schemes, symbols, star-product kernels, associativity checks.
//! - [`spintomo`]: continuous and finite-rotation spin tomography schemes.
//! - [`sic`]: SIC verification, the SIC scheme, triple products and their identities.
//! - [`sicsearch`]: Gram factors, candidate construction from an orthogonal matrix, search.
//! - [`qubitlab`]: closed forms for qubits, intertwining kernels, MUBs, Lie structure.
//! - [`io`]: JSON/CSV formats shared with the command-line tool.

// `!(x < tol)` is used on purpose so that NaN residuals fail checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod qmat;
pub mod qubitlab;
pub mod sic;
pub mod sicsearch;
pub mod spintomo;
pub mod starprod;
pub mod tolerance;

pub use error::{Error, Result};
