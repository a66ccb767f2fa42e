//! Decides whether an evader can avoid a time-varying planar coverage region.
//!
//! The time axis is stratified at the critical times of the coverage; each
//! cell carries the free positive cone on the local gap components, and the
//! global sections of that cellular sheaf of cones are tested for a nonzero
//! element by an exact rational linear program. A feasible witness is turned
//! back into a concrete evasion path; an infeasible system comes with a
//! Stiemke certificate that can be re-checked independently.

pub mod cli;
pub mod cones;
pub mod error;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod sheaf;
mod union_find;

pub use error::{Error, Result};
