//! Smallest-component statistics of random permutations and the Buchstab
//! functions that govern their limits.
//!
//! [`enumeration`] counts objects exactly by smallest component size.
//! [`omega`] evaluates the Buchstab function ω and its moment constants,
//! [`omega_k`] the generalized Ω_K. [`store`] and [`output`] handle
//! persistence and tabular output.

pub mod enumeration;
pub mod error;
pub mod numeric;
pub mod omega;
pub mod omega_k;
pub mod output;
pub mod store;
pub mod taylor;

pub use error::{Error, Result};
