//! Finite-difference Hamiltonians on Dirichlet boxes and localization
//! diagnostics for their eigenstates.
//!
//! Small operators are diagonalized densely (Householder reduction and
//! implicit QL). Larger ones use bisection on the Sylvester inertia of a
//! banded `LDLᵀ` factorization for the eigenvalues and inverse iteration
//! with a pivoted band LU for the eigenvectors. All statements concern the
//! discretized operator.

mod diag;
mod grid;
mod solve;

pub use diag::{
    auto_resolution, combes_thomas_table, decay_fit, decay_rate_fit, distance_to_spectrum,
    grid_decay_fit, ipr, localization_report, resolvent_decay, spectrum_gaps, DecayRate, Gap,
    LocalizationOptions, LocalizationReport, LocalizationVerdict, ResolventDecay, StateRecord,
    AMPLITUDE_FLOOR,
};
pub use grid::{discretize, discretize_background, discretize_scaled, GridBox, GridOperator};
pub use solve::{
    count_below, eigenpairs, eigenvalue_by_index, eigenvalues, eigenvalues_in, solve_shifted,
    EnergyWindow, SolverPath, SpectralWindowResult, Tridiagonal, DENSE_LIMIT, RESIDUAL_TOL,
};
