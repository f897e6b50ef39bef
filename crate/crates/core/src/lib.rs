//! Stationary vortices of the two-dimensional vorticity equation in an
//! axisymmetric strain field, their large-circulation limit, and the
//! linearized dynamics around them.
//!
//! Fields live on a disk and are represented by azimuthal Fourier modes
//! with radial profiles collocated on a Gauss-Radau grid.  All norms are
//! taken in the Gaussian-weighted space whose weight is the inverse of
//! the reference vortex profile, which is where the stationary problem is
//! well posed and the linearization is dissipative.

pub mod banded;
pub mod biot_savart;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod ivp;
pub mod operators;
pub mod profiles;
pub mod report;
pub mod stability;
pub mod vortex;
pub mod winfty;

pub use config::SpectralConfig;
pub use error::{Result, VortexError};
pub use field::{C64, ModeField, PhysicalField, VelocityField};
pub use grid::{make_grid, Parity, RadialGrid};
