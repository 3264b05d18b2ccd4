//! Higher Bott-Chern forms of metrized exact cubes of hermitian vector spaces,
//! computed through transgression bundles over products of projective lines.
#![no_std]

extern crate alloc;
#[cfg(feature = "parallel")]
extern crate std;

pub mod bott_chern;
pub mod chern_weil;
pub mod cube;
pub mod error;
pub mod family;
pub mod forms;
pub mod linalg;
pub mod quadrature;
pub mod random;
pub mod simplex;
pub mod transgression;
