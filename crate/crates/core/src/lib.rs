//! Correlator-level GNSS receiver simulation framework.
//!
//! Simulates a dual-constellation (GPS L1 C/A + Galileo E1) receiver at the
//! correlator output level and compares three tracking/positioning
//! architectures under signal outages:
//!
//! - scalar tracking (per-channel DLL + PLL) with a Kalman positioning
//!   module at 1 Hz,
//! - the same scalar tracking with the Kalman module at 50 Hz,
//! - a vector delay/frequency lock loop (VDFLL) in which one navigation EKF
//!   closes every channel's code and carrier NCO.
//!
//! Signals are never synthesized at the sample level. Each 20 ms integration
//! interval produces early/prompt/late correlator outputs semi-analytically
//! from the gap between the true signal parameters and the channel's NCO
//! state, with noise statistics matching the channel C/N0.
//!
//! Entry points: [`scenario::ScenarioConfig`] describes a run (trajectory,
//! constellation, C/N0 schedule, seed); [`scenario::run_scenario`] executes
//! one architecture; [`scenario::run_compare`] runs all three with common
//! random numbers.

pub mod channel;
pub mod constants;
pub mod constellation;
pub mod correlator;
pub mod ekf;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod tracking;
pub mod trajectory;
pub mod vdfll;

pub use error::{Error, Result};
