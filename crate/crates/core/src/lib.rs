//! Calculus of distributions with dynamic test functions.
//!
//! The crate is layered bottom-up:
//!
//! - [`poly`] and [`piecewise`]: exact arithmetic on piecewise polynomials.
//! - [`dynamic`]: regulated functions, transition profiles, dynamic functions
//!   and delta shapes.
//! - [`distribution`]: test functions, distributions in closed form, their
//!   pairing, products with dynamic functions, derivatives and mollification.
//! - [`battery`]: the reproducible family of test functions used to compare
//!   distributions.
//! - [`ode`]: impulsive ODEs `ẋ = f(t,x) + g(t,x)δ_τ^α`, their mollified
//!   regularizations and the Frobenius check.

pub mod battery;
pub mod distribution;
pub mod dynamic;
pub mod error;
pub mod ode;
pub mod piecewise;
pub mod poly;

pub use distribution::{Atom, Distribution, TestFn};
pub use dynamic::{DynamicFn, Profile, RegulatedFn, Shape};
pub use error::{Error, Result};
pub use piecewise::{PiecewisePoly, Side};
pub use poly::Poly;
