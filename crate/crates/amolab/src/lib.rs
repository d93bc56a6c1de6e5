//! A numerical laboratory for the almost Mathieu operator
//! `(H u)(n) = u(n+1) + u(n-1) + 2 lambda cos(2 pi (theta + n alpha)) u(n)`
//! at completely resonant phases `2 theta in alpha Z + Z`.
//!
//! The crate provides the computable objects behind localization analysis at
//! desk scale: exact continued-fraction frequencies and resonance
//! classification ([`cfrac`]), overflow-free determinants and Lyapunov
//! exponents ([`detkernel`]), interval Green functions with regularity
//! testing and block expansion ([`green`]), Lagrange interpolation terms and
//! subharmonicity bounds ([`interp`]), and finite-volume eigensolving with
//! resonance-peak decay profiles ([`spectral`]). The [`verify`] module runs
//! the whole property suite and renders a machine-readable verdict.

pub mod cfrac;
pub mod detkernel;
pub mod error;
pub mod exec;
pub mod green;
pub(crate) mod linalg;
pub mod mp;
pub mod spectral;

pub use error::{Error, Result};
