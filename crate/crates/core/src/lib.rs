//! Core algorithms for nonstationary random Schrödinger operators
//! `H(ω) = -Δ + V₀ + V_ω`.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO. It covers:
//!
//! * [`geometry`]: compact sets built from spheres, balls, caps and boxes,
//!   distances between them, unit-shell measures, generalized surface area
//!   and total decompositions of `ℝ^d`.
//! * [`models`]: uniformly discrete site sets, single-site potentials,
//!   coupling laws, counter-based coupling sampling and assumption checks.
//! * [`certify`]: ε-free annulus search, the sphere-shell and cap/cheese
//!   decomposition constructions and summability certificates.
//! * [`stochastic`]: Monte Carlo, exact enumeration and exact dynamic
//!   programming for the free-annulus probabilities `a_n`.
//! * [`spectral`]: finite-difference Hamiltonians, banded eigensolvers,
//!   resolvent decay and localization diagnostics.
//!
//! File formats, configuration and the experiment runner live in the
//! companion `sparseloc` crate.

#![no_std]
#![warn(rust_2018_idioms, missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certify;
mod error;
pub mod geometry;
pub mod math;
pub mod models;
pub mod rng;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
