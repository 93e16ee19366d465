//! Dirichlet and Neumann Laplacian spectra on planar polygons, the div-curl
//! vector operator whose spectrum is their merged positive part, and checks
//! of the shifted inequality `mu_{k+2} <= lambda_k`.

pub mod analytic;
pub mod cli;
mod delaunay;
pub mod eig;
pub mod error;
pub mod fem_scalar;
pub mod fem_vector;
pub mod geometry;
pub mod report;
pub mod sparse;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
