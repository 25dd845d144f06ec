//! Region-2 wind turbine speed tracking: a one-mass rotor plant, synthetic
//! wind, sliding-mode control with an adaptive fuzzy disturbance observer,
//! a PID baseline and the simulation loop that ties them together.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afdo;
pub mod cli;
pub mod control;
pub mod error;
pub mod format;
pub mod integrate;
pub mod plant;
pub mod sim;
pub mod wind;

pub use error::{Error, Result};
