//! Primitive three-term arithmetic progressions of squares.
//!
//! The crate enumerates and counts primitive APs `{a^2, b^2, c^2}` under four
//! families of constraints, compares the counts with their closed-form main
//! terms, and evaluates both sides of the spectral expansions of the shifted
//! convolution series `D_h(s)` and the double series `D(s, w)` built from
//! dihedral Maass forms of level 8.

pub mod ap;
pub mod arith;
pub mod cli;
pub mod error;
pub mod lfun;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
