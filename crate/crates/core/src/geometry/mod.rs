//! Compact sets, distances, unit-shell measures, generalized surface area
//! and total decompositions.
//!
//! Surfaces (spheres, caps, perforated spheres) are represented
//! symbolically, so members of a decomposition have Lebesgue measure zero
//! exactly rather than up to a voxel thickness.

mod decomposition;
mod region;
mod shell;

pub use decomposition::{
    sphere_shell_decomposition, Component, DecompositionKind, DecompositionMember, MemberRole,
    ShellSequence, StructureReport, TailRule, TotalDecomposition,
};
pub use region::{
    distance_between, make_annulus, spherical_cap, Distance, Hole, Primitive, RegionSet,
    MAX_SURFACE_SAMPLES,
};
pub use shell::{
    exact_generalized_surface_area, exact_shell_measure, generalized_surface_area, shell_measure,
    sigma_volume_bound, ShellMeasure, ShellProfile, SurfaceArea, DEFAULT_RESOLUTION,
};
