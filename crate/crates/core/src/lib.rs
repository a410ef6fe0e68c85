//! Computable pieces of the construction of domains of discontinuity for
//! Anosov representations into `SL(d, R)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`weyl`]: permutations, Bruhat order and parabolic double cosets.
//! * [`spaces`]: flags, the supported homogeneous spaces and the classifiers
//!   computing relative positions.
//! * [`poset`]: finite posets of relative positions with closure order,
//!   the `w0` involution and the transverse relation.
//! * [`ideals`]: fat and `w0`-fat ideals.
//! * [`anosov`]: Cartan projections, word balls, limit sets and domains.

pub mod anosov;
pub mod error;
pub mod ideals;
pub mod linalg;
pub mod poset;
pub mod spaces;
pub mod weyl;

pub use error::{Error, Result};
