//! Plane-strain finite element solver for crack-tip fields in transversely
//! isotropic, strain-limiting elastic solids.

pub mod app;
pub mod constitutive;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod picard;
pub mod postprocess;
pub mod tensor;

pub use error::{Error, Result};
