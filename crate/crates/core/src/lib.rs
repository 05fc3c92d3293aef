//! Term-sparsity SOS (TSSOS) hierarchy for polynomial optimization.

pub mod basis;
pub mod gen;
pub mod lp;
pub mod poly;
pub mod relax;
pub mod sdp;
pub mod signsym;
pub mod tsp;

pub use basis::{newton_half_basis, standard_basis, BasisError, MonomialBasis};
pub use poly::{parse_polynomial, Exponent, PolyError, Polynomial};
