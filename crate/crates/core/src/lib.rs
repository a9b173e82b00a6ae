//! Exact modular data for affine A1 at any level, its fusion ring and Galois
//! symmetry, a complete enumeration of physical invariants, and a truncated
//! rational q-series engine that checks the classical moonshine identities.

#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod ade;
pub mod classifier;
pub mod exactnum;
pub mod fusion;
pub mod galois;
pub mod modular_data;
pub mod moonshine;
pub mod qseries;
pub mod verify;
