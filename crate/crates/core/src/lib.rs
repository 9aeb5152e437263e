//! Group-averaged second-order estimation over finite permutation groups.
//!
//! The crate is `no_std` and needs only `alloc`. Monte Carlo harnesses are
//! split into per-trial functions and serial aggregators so that callers with
//! threads can fan trials out and merge them by index.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod eigentensor;
pub mod equalize;
pub mod error;
pub mod estimators;
pub mod groups;
pub mod linalg;
pub mod matching;
pub mod rankpromo;
pub mod rng;
pub mod signals;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix, C64};
