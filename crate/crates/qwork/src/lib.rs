//! Work statistics for driven quantum systems, with classical phase-space
//! counterparts and diagnostics for how close a state is to classical behaviour.

pub mod airy_osc;
pub mod classical;
pub mod classicality;
pub mod dynamics;
pub mod error;
pub mod numkit;
pub mod quantum;
pub mod workstats;

pub use error::{Error, Result};
