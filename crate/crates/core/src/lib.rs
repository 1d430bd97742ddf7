//! Simulation core for a relativistic collapse model in which a pointer field,
//! one bosonic mode per spacetime cell, records a matter density and mediates
//! stochastic state reduction.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no I/O. It provides
//!
//! * [`lattice`]: a discrete 1+1D spacetime with spacelike surfaces, their
//!   partial order, foliations, and light cones;
//! * [`noise`]: the counter-based Brownian noise field;
//! * [`kernel`] and [`pointer`]: smearing kernels, coherent-state records, and
//!   the smeared number statistics of those records;
//! * [`dynamics`], [`path`] and [`beable`]: branch-diagonal collapse dynamics
//!   under both the defining (linear) and physical (nonlinear) measures;
//! * [`fock`]: an exact truncated-Fock realization for tiny lattices, used as
//!   a brute-force oracle.
#![no_std]

extern crate alloc;

pub mod beable;
pub mod dynamics;
mod error;
pub mod field;
pub mod fock;
pub mod kernel;
pub mod lattice;
pub mod noise;
pub mod path;
pub mod pointer;

pub use error::{Error, Result};
pub use field::CellField;
pub use lattice::{Cell, Foliation, LatticeSpec, Surface};
pub use noise::{NoiseField, NoiseSource};

pub use num_complex::Complex64;
