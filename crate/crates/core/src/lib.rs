//! Landau-level reductions for Pauli operators near zero energy.

pub mod axial;
pub mod charvals;
pub mod effective;
pub mod error;
pub mod landau;
pub mod quadrature;
pub mod spectra;

pub use error::{Error, Result};
