//! Numerical machinery for Toeplitz operators on classical tube-type domains.
//!
//! The crate covers the Jordan triple structure of the four classical
//! tube-type factors, sampling of their Shilov boundaries, winding vectors of
//! non-vanishing symbols, concrete Hardy-space models on the circle and on
//! `U(2)`, and finite-section index computations.

pub mod domain;
pub mod element;
pub mod error;
pub mod jordan;
pub mod linalg;
pub mod hardy;
pub mod pfaffian;
pub mod quadrature;
pub mod shilov;
pub mod symbol;
pub mod toeplitz;
pub mod verify;
pub mod winding;

pub use domain::{DomainFactor, ProductDomain};
pub use element::Element;
pub use error::{Error, Result};
pub use jordan::Tolerances;
pub use num_complex::Complex64;
