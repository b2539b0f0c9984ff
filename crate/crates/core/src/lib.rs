//! Exact tools for definite integral quadratic forms.
//!
//! * [`form`] and [`equivalence`]: Gram matrices, dual forms, characteristic
//!   vectors, and isometry testing.
//! * [`reduction`]: reduced representatives and complete enumeration at
//!   ranks 1 to 4.
//! * [`char_search`]: exact coset extremization and the characteristic
//!   vector/covector inequality checkers.
//! * [`embedding`]: embeddings into cubic lattices and rigidity.
//! * [`theta`]: truncated theta series and transformation checks.
//! * [`plumbing`]: Seifert invariants, plumbings, Spin^c classes, and
//!   correction terms.
//! * [`knots`]: four-ball genus certificates for pretzel and Montesinos
//!   families.

pub mod arith;
pub mod campaign;
pub mod char_search;
pub mod embedding;
pub mod equivalence;
pub mod error;
pub mod fincke_pohst;
pub mod form;
pub mod knots;
pub mod par;
pub mod plumbing;
pub mod reduction;
pub mod report;
pub mod theta;

pub use arith::Rational;
pub use error::{Error, Result};
pub use form::{Definiteness, QuadraticForm, Sign, UnimodularMap};
