//! Ion Coulomb crystals in a pumped optical cavity: equilibrium structures,
//! cavity-induced bistability, and Gaussian fluctuations of the coupled
//! light and motion.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod crystal;
pub mod error;
pub mod fluctuations;
pub mod params;
pub mod scenario;
pub mod structural;
