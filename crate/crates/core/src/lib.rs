//! Arbitrary-order Active Flux schemes for one-dimensional hyperbolic
//! conservation laws.
//!
//! Three high-order extensions share the Active Flux degrees of freedom
//! (cell averages plus point values shared at cell interfaces):
//!
//! * **Variant A** keeps the classical degrees of freedom and updates the
//!   point values with wide finite-difference stencils on mixed
//!   average/point data ([`stencils::FdTableau`]), integrated with
//!   Runge-Kutta.
//! * **Variant B** adds point values inside every cell and evolves all of
//!   them along characteristics, with a time quadrature for the fluxes.
//! * **Variant C** adds higher moments and differentiates the
//!   moment-constrained reconstruction ([`stencils::MdTableau`]).
//!
//! The [`stability`] module computes the von Neumann symbol of each variant
//! for linear advection and decides spectral containment with the
//! Schur-Cohn recursion.

pub mod error;
pub mod evolution;
pub mod experiment;
pub mod grid;
pub mod models;
pub mod output;
pub mod problems;
pub mod quadrature;
pub mod reconstruction;
pub mod schemes;
pub mod stability;
pub mod state;
pub mod stencils;

pub use error::{Error, Result};
pub use grid::Grid;
pub use models::Model;
pub use state::{Field, State, StateA, StateB, StateC};
