//! Strong Muckenhoupt and Reverse Hölder weights on tensor grids.
//!
//! * [`exponents`]: sharp self-improvement ranges from the implicit equations.
//! * [`grid`]: weighted grids, boxes, summed-area tables, the grid file format.
//! * [`characteristics`]: exhaustive box suprema `[w]_{A_q}`, `[w]_{RH_q}`.
//! * [`splitting`]: recursive splitting that keeps segments inside `Ω_Q`.
//! * [`bellman`]: `Ω_Q` geometry, candidate verification, refinement probes.
//! * [`cli`]: the `strong-weights` command line.

// `!(a < b)` is used on purpose where NaN must be rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellman;
pub mod characteristics;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod splitting;

pub use error::{Error, Result};
