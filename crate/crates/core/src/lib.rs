//! Holomorphic and meromorphic differentials on Riemann surfaces built by
//! opening the nodes of a graph of spheres.

pub mod bipartite;
pub mod differential;
pub mod error;
pub mod graph;
pub mod io;
pub mod norms;
pub mod poles;
pub mod quadrature;
pub mod solver;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
