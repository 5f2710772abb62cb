//! Quadrature on the Korányi ball and its boundary, and Nyström matrices
//! for the kernels and their iterates.

pub mod adapt;
mod cache;
mod grid;
mod matrix;
pub mod product;

pub use cache::*;
pub use grid::*;
pub use matrix::*;
