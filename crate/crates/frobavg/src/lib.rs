//! Frobenius trace statistics over families of short Weierstrass curves:
//! trace counting, Hurwitz/Kronecker class numbers, short-interval
//! character sums, averaged Lang-Trotter and Sato-Tate experiments, and
//! the exact character-sum decomposition tying them together.

pub mod analytic;
pub mod charsum;
pub mod classnum;
pub mod cli;
pub mod curvecount;
pub mod error;
pub mod familylab;
pub mod ffield;
pub mod report;

pub use error::{Error, Result};
