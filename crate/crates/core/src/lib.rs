pub mod appendixprops;
pub mod callias;
pub mod dirac1d;
pub mod error;
pub mod opcore;
pub mod relindex;
pub mod scenarios;
pub mod specflow;
pub mod surgery;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use faer::c64;
pub use opcore::{CMat, HermitianOperator, Projection, Tolerances};
