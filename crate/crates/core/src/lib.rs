//! Secrecy performance of RIS-aided backscatter links under Fisher-Snedecor
//! F fading.
//!
//! Closed-form densities and secrecy metrics are evaluated as Meijer-G and
//! Fox-H Mellin–Barnes integrals ([`specfun`]); a Monte-Carlo channel
//! simulator ([`montecarlo`]) provides the independent check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod par;
pub mod quad;
pub mod secrecy;
pub mod snrdist;
pub mod specfun;

pub use error::{Error, Result};
pub use par::Execution;
