//! Special functions: complex log-gamma, Meijer G and multivariate Fox H.

pub mod foxh;
pub mod gamma;
pub mod meijer;
pub mod mellin;

pub use foxh::{fox_h, fox_h_bivariate, fox_h_multivariate, FoxHSpec, HBlock, HParam, VariableBlock};
pub use gamma::{beta, digamma, gamma, gamma_sign, ln_beta, ln_gamma, log_gamma_complex};
pub use meijer::{meijer_g, MeijerGSpec};
pub use mellin::{ContourSpec, Evaluation, GammaTerm, MellinIntegrand, Placement};
