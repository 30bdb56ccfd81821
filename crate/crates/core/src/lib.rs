//! Lagrangian finite-volume simulation of spherically symmetric compressible
//! Navier-Stokes flow with a free boundary against vacuum, together with
//! monitors for its energy balance and a-priori bounds.
//!
//! The pipeline is [`profile`] → [`initial`] → [`stepper`], observed by the
//! monitors of [`energy`], [`diagnostics`] and [`io::recorder`]. [`mms`]
//! measures convergence orders against a manufactured solution.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod grid;
pub mod initial;
pub mod io;
pub mod mms;
pub mod operators;
pub mod par;
pub mod params;
pub mod profile;
pub mod state;
pub mod stepper;
