//! Correctly rounded trigonometric functions (sin, cos, tan) for binary32
//! inputs, producing correct results for every floating-point format of
//! 10..=32 total bits (8 exponent bits) under all five IEEE rounding modes.
//!
//! The pipeline computes a 34-bit round-to-odd intermediate in binary64:
//! range reduction to x' in [-pi/512, pi/512] with a table index k' in
//! [0, 512), polynomial evaluation of sin(x')/cos(x'), table-based output
//! compensation, and a final double rounding that is exact by construction.

pub mod artifacts;
pub mod fpcore;
pub mod generator;
pub mod kernels;
pub mod poly;
pub mod rangered;
pub mod tables;
pub mod oracle;

pub use fpcore::{decode32, encode32, round_from_34, round_to_odd_34, FpFormat, FpTriple, RoundingMode};
pub use kernels::Func;
