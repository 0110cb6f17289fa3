//! Configuration-averaged double-scattering coherent backscattering spectra
//! of two laser-driven two-level atoms.

pub mod atom;
pub mod disorder;
pub mod error;
pub mod integrals;
pub mod linalg;
pub mod pump_probe;
pub mod spectra;
pub mod two_atom;

pub use error::{CbsError, Result};
