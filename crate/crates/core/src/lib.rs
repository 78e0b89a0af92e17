//! Even-parity discretization of the stationary radiative transfer equation
//! with source iteration accelerated by residual minimization.
//!
//! The crate builds on `alloc` only. The default `std` feature adds
//! wall-clock timing and parallel per-pair solves through rayon.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assembly;
pub mod benchmark;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod minimizer;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod subspace;

mod math;
mod par;

pub use assembly::{OpticalField, SourceSpec, SystemMatrices};
pub use error::{Error, Result};
pub use geometry::{AngularMesh, SpatialMesh};
pub use operators::{BlockVector, Layout, TransportProblem};
pub use solver::{ConvergenceHistory, IterationConfig, SpaceKind};
