//! Core library for connected-vehicle platoon simulation and string-stability
//! analysis.
//!
//! Three platoon families are covered: constant-spacing (CS) platoons with a
//! leader-predecessor-follower topology, constant-time-gap (CTG) platoons with
//! an `r`-predecessor topology, and hybrid platoons whose first vehicle runs a
//! CTG policy against an exogenous leader while the rest hold constant spacing.
//! All spacing policies are delay-compensated: controllers consume historical
//! predecessor states shifted by a compensation delay so that sensing and
//! communication lags cancel at equilibrium.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion `platoon-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod control;
pub mod error;
pub mod model;
pub mod moe;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
pub use model::{StateHistory, VehicleParams, VehicleState};
pub use sim::{PlatoonConfig, PlatoonKind, Scenario, SimulationTrace};
pub use stability::StabilityReport;
