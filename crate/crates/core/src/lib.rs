pub mod circuit;
pub mod codes;
pub mod decoder;
pub mod distillation;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod gf2;
pub mod par;
pub mod spacetime;
pub mod surgery;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
