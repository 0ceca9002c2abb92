//! Long-term community-battery investment planning for a PV-rich area with
//! EV charging.
//!
//! The library finds the battery duration type, per-year capacity build-out
//! and hourly dispatch that minimize discounted capital plus grid-purchase
//! cost under a strict no-export rule, then quantifies how robust that plan
//! is to PV and EV uncertainty with info-gap decision theory.
//!
//! Start from the runnable examples (`cargo run --example plan_battery`)
//! or the `gridvest` binary for the end-to-end workflows.

pub mod catalog;
pub mod cashflow;
pub mod cli;
pub mod config;
mod error;
pub mod grid;
pub mod igdt;
pub mod parallel;
pub mod planner;
pub mod pv;
pub mod report;
pub mod scenario;
pub mod synth;

pub use error::{Error, Result};

/// Re-export of the embedded MILP facility.
pub use gridvest_milp as milp;
