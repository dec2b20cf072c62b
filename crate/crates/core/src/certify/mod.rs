//! ε-free annulus search, decomposition constructions and summability
//! certificates.
//!
//! A certificate evaluates the series `Σ_n σ(S_n) e^{-γ δ_n}` (or its
//! volume analogue for nested balls) over the constructed scales and
//! decides, from the observed ratio and the construction's tail rule,
//! whether the full series converges.

mod certificate;
mod construct;
mod free;

pub use certificate::{
    certify_ac, certify_pp, certify_terms, member_sigma, term_value, DecompositionCertificate,
    ScaleTerm, SeriesKind, TermRecord, Verdict, RATIO_WINDOW,
};
pub use construct::{
    build_decomposition_quasi1d, build_decomposition_sparse, build_shell_sequence_pp,
    growth_ratio_ac, growth_ratio_pp, max_scale_within, smallest_integer_above, PpConstruction,
    Quasi1dConstruction, ScaleCounts, SparseConstruction,
};
pub use free::{
    candidate_range, difference_support, find_free_subannulus, find_free_subannulus_excluding,
    first_free_radius, is_epsilon_free, required_coverage, truncate_couplings, FreeAnnulusRecord,
};
