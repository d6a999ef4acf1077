//! Sample quantiles, empirical processes and Bahadur remainders for
//! associated stationary sequences.
//!
//! Paths come from a Gaussian copula with nonnegative latent correlations, so
//! every generated sequence is associated. On top of the generator sit exact
//! estimators ([`empirical`]), the closed-form rate exponents ([`theory`]),
//! Monte Carlo checks of the covariance and moment inequalities
//! ([`ineq_check`]), and the rate and VaR experiments ([`rate_lab`]).

// `!(x > 0.0)` is used on purpose so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc_gen;
pub mod cli;
pub mod config;
pub mod empirical;
pub mod error;
pub mod exec;
pub mod ineq_check;
pub mod marginals;
pub mod rate_lab;
pub mod stats;
pub mod streams;
pub mod theory;

pub use error::{Error, Result};
