//! Majorana nanowire edge states, a driven-junction quantum bus and
//! cavity-mediated GHZ generation.
//!
//! Bus and cavity dynamics use ħ = 1 with frequencies in rad/ns; the
//! nanowire model uses meV and nm.

pub mod qcore;
pub mod units;
pub mod nanowire;
pub mod perturb;
pub mod drivebus;
pub mod openqs;
pub mod ghzgen;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
