//! Exact theta-lift computations for SL₂ over local and global function
//! fields, including the square-zero (dual number) deformation.

pub mod classical;
pub mod curve;
pub mod dictionary;
pub mod cyclo;
pub mod error;
pub mod field;
pub mod fspace;
pub mod grid;
pub mod hecke;
pub mod local;
pub mod poly;
pub mod quad;
pub mod quadric;
pub mod theta;
pub mod verify;
pub mod weil;

pub use cyclo::CycNumber;
pub use error::{Error, Result};
pub use field::{Fe, Field};
pub use local::{LocalElem, LocalRing, Mat2};
pub use quad::{Flavor, QuadElem, QuadRing};
