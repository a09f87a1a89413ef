//! Ground states, critical mass and 1D dynamics for the Half-Wave equation
//! with a defocusing and a focusing mass-subcritical power,
//!
//! ```text
//! i ψ_t = √(-Δ) ψ + |ψ|^{q-1} ψ - |ψ|^{p-1} ψ,     1 < q < p < 1 + 2/d,
//! ```
//!
//! discretised pseudospectrally on a periodic box.

pub mod dynamics;
pub mod error;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod params;
pub mod scan;
pub mod stability;
pub mod variational;

pub use error::{Error, Result};
pub use field::Field;
pub use functionals::{hhalf_norm_sq, rescale, FunctionalReport, GnDiagnostics, Model};
pub use grid::Grid;
pub use params::ModelParams;

/// Builds the lattice a parameter set describes.
pub fn make_grid(params: &ModelParams) -> Result<Grid> {
    Grid::from_params(params)
}
