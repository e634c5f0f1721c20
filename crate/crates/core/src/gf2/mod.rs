//! Linear algebra over GF(2).

mod bitvec;
mod matrix;
mod span;

pub use bitvec::{words_for, BitVec};
pub use matrix::{BitMatrix, Echelon};
pub use span::SpanBuilder;
