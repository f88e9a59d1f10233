//! Construction of SIC candidates from an orthogonal matrix `Q` and the
//! search for one that makes every candidate a rank-1 projector.
//!
//! Candidates are `Π̂ = 𝒮ᵀ Qᵀ 𝔖^{-T} Ŝ` with `Q = diag(1, Q̃)`: Hermitian, unit
//! trace and with SIC pairwise traces for any orthogonal `Q̃`. The search
//! maximizes `Σ_i Tr[Π̂_i³]`, whose maximum `d²` is reached exactly at SICs.

mod candidate;
mod frame;
mod gram;
mod numopt;
mod optimize;
mod sequential;

pub use candidate::{
    build_candidate, coefficients, construction_residuals, f_matrix, full_q, functional_v,
    matrix_equation_residual, qtilde_from_sic, ConstructionResiduals, FunctionalV,
    MatrixEquationResidual, QTILDE_ORTHOGONALITY_TOL,
};
pub use frame::{equiangular_frame, unitary_orbit, EquiangularFrame};
pub use gram::{s_scr, sigma_block, GramFactors, GramResiduals};
pub use optimize::{
    givens_count, givens_matrix, optimize, optimize_with, thread_count, SearchConfig, SearchState,
    THREADS_ENV,
};
pub use sequential::{sequential_rotations, sequential_trace, SequentialTrace};
