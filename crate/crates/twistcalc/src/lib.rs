//! Exact twisted differential calculus over `Q[x_1..x_d]`.
//!
//! A *twist* is a family of commuting substitution endomorphisms
//! `sigma_i(x_i) = s_i(x_i)` (q-dilation, shift, Mahler power, or a custom
//! univariate image), each acting on its own variable. The library builds the
//! calculus these twists generate, entirely in exact rational arithmetic:
//!
//! - twisted derivations `d_i(f) = (sigma_i(f) - f) / (sigma_i(x_i) - x_i)`
//!   and their Leibniz/Schwarz diagnostics ([`twist`]);
//! - jets in the twisted basis `xi^(k)`, the Taylor morphism, jet products,
//!   comultiplication and evaluation maps ([`jets`]);
//! - the divided-power operator algebra, normal forms for operator words,
//!   and composition by action recovery ([`operators`]);
//! - twisted connections on free modules and their de Rham cohomology at a
//!   truncation ([`connection`]);
//! - Gauss and eta-norms in the exact log domain, the x-radius, and radius
//!   evidence reports ([`analysis`]);
//! - conversion between twisted and classical differential operators
//!   (confluence) with isometry witnesses ([`confluence`]).
//!
//! The `twistcalc` binary exposes the same operations as batch commands; see
//! the [`cli`] module and the book under `book/` for a guided tour.

pub mod analysis;
pub mod cli;
pub mod coefficients;
pub mod config;
pub mod confluence;
pub mod connection;
pub mod error;
pub mod jets;
pub(crate) mod linalg;
pub mod operators;
pub mod parse;
pub mod poly;
#[cfg(test)]
pub(crate) mod testutil;
pub mod twist;

pub use coefficients::{NormContext, NormValue, Scalar};
pub use error::{Error, Result};
pub use jets::{BiJet, Jet};
pub use poly::{Monomial, Poly};
pub use twist::{TwistKind, TwistSpec};
