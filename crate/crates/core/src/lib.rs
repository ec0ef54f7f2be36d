//! Numerical laboratory for a quantum particle driven by a Gaussian
//! potential that is white in time and correlated in space.
//!
//! Three independent routes compute the mean-square displacement: closed
//! forms of the disorder-averaged kernel ([`continuum`], [`lattice`]),
//! deterministic evolution of the averaged equation on a lattice
//! ([`evolve`]), and Monte Carlo integration of the stochastic equation
//! ([`mc`]). [`transforms`] holds the shared fitting and Laplace numerics.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod dump;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod lattice;
pub mod mc;
pub mod model;
pub mod noise;
pub mod quad;
pub mod rng;
pub mod series;
pub mod transforms;

pub use error::{Error, Result};
pub use model::{CorrelationSpec, LatticeCorrelationData, ModelParams, SpaceKind};
pub use series::{MomentSeries, Provenance};
pub use transforms::FitResult;
