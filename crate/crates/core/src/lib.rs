//! Nonlocal p-Laplacian eigenvalues on planar grids, optimal transport with
//! Hölder costs `d(x, y)^s`, and the large-`p` limits that connect the two.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: domains, metrics, node grids, inradius and metric diameter;
//! * [`discretization`]: quadrature of the nonlocal forms and operators;
//! * [`eigen`]: constrained Rayleigh-quotient minimisation and a dense `p = 2`
//!   reference solver;
//! * [`transport`]: exact discrete transport, c-transforms and the extremal
//!   transport problems over the grid;
//! * [`asymptotics`]: `p`-sweeps compared with their closed-form limits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod discretization;
pub mod eigen;
pub mod error;
pub mod geometry;
mod kernel;
pub mod parallel;
mod simplex;
pub mod transport;

pub use error::{Error, Result};
