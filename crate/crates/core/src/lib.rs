//! Analysis of Liénard systems `x'' + f(x) x' + g(x) = 0`.
//!
//! The crate checks sufficient conditions for existence and uniqueness of a
//! limit cycle, detects cycles numerically through a return map on the
//! positive `x` axis, builds deformations that make the uniqueness conditions
//! hold, and predicts small-amplitude cycles by first-order averaging.

pub mod avg;
pub mod cycles;
pub mod deform;
pub mod error;
mod exact;
pub mod funcs;
pub mod hypo;
pub mod ode;
pub mod roots;

pub use error::{Error, Result};
pub use funcs::{LienardSystem, Pieces, Polynomial, ScalarFn, SystemSpec};
