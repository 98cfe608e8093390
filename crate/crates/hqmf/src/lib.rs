//! Computational core for Hermitian quasi-modular forms: exact arithmetic in
//! imaginary quadratic fields, Hermitian lattices and their Weil
//! representations, the sl2-modules F_{n,g}, the cohomology of E^n with its
//! special cycles, and numeric certification of theta functional equations.

pub mod boundary;
pub mod cycles;
pub mod error;
pub mod fpoly;
pub mod hlattice;
pub mod linalg;
pub mod par;
pub mod qfield;
pub mod thetagen;
pub mod torcoh;
pub mod weilrep;

pub use error::{Error, Result};
