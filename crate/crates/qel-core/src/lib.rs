//! Numerical laboratory for locally conserved quantum-mechanical energy
//! densities: the symmetrized (Terletsky-Margenau-Hill) energy density and
//! its current, the spin-dependent holographic energy, analytic oracle
//! states, spectral time evolution, conservation-law verification, and a
//! negativity-conjecture search harness.

pub mod calculus;
pub mod catalog;
pub mod observables;
pub mod potential;
pub mod propagate;
pub mod transport;
pub mod verify;
pub mod error;
pub mod explorer;
pub mod field;
pub mod grid;
pub mod special;

pub use calculus::{divergence, integrate, surface_integral, BoxRegion};
pub use error::{QelError, Result};
pub use field::{BispinorField, PhysConstants, ScalarField, SpinorField, VectorField};
pub use grid::{AxisSpec, Grid};
