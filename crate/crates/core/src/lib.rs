//! Verification library for the Hubbard model's Lax operator, R-matrix,
//! spectral curves and their elliptic uniformization.

pub mod curves;
pub mod elliptic;
pub mod lax;
mod error;
pub mod fibration;
pub mod matrix;
pub mod numeric;
pub mod ratpoly;
pub mod rmatrix;
pub mod suite;

pub use curves::{Coupling, ProjPointE1, ProjPointE2, WeierstrassCurve};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use ratpoly::{Monomial, Rat, RatPoly, RewriteRule};
