//! Probabilities of ε-free annuli: Monte Carlo estimates, exact oracles
//! and the closed-form bounds used to show `Σ_n a_n < ∞`.
//!
//! Every sampler draws trial `t` of an experiment seeded with `s` from the
//! coupling map `sample_couplings(model, trial_seed(s, t), ..)`, so a trial
//! can be replayed on its own and counts over disjoint trial ranges can be
//! added in any order.

mod bounds;
mod estimate;
mod exact;
mod series;

pub use bounds::{
    a_n_bound, best_eta, disjoint_annuli, empirical_shell_constant, product_bound,
    quasi1d_threshold, BoundValue, ShellConstant, ETA_GRID,
};
pub use estimate::{
    estimate_a_n, estimate_free_probability, AnnulusSampler, EstimateRecord, ScaleSampler,
};
pub use exact::{brute_force_a_n, exact_a_n, ENUMERATION_BUDGET};
pub use series::{
    an_series_row, borel_cantelli_report, ANSeriesReport, ANSeriesRow, ExactMethod, Summability,
};
