//! Liability-side derivatives pricing with initial-margin funding cost.
//!
//! One-factor short-rate models ([`ratemodels`]) and lognormal equity drive a
//! Crank-Nicolson engine ([`pde`]) whose discount rate switches on the sign of
//! the value and whose margin cost follows the local Greeks ([`im`]). The
//! [`xva`] layer assembles the solve ladder that splits the all-in price into
//! CVA, DVA, CFA, DFA and MVA; [`mc`] is a regression/simulation cross-check.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod im;
pub mod instruments;
pub mod mc;
pub mod pde;
pub mod ratemodels;
pub mod registry;
pub mod xva;

pub use error::{Error, Result};
