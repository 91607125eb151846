//! Flow-level LEO satellite network simulator with per-satellite bandit routing.

pub mod channel;
pub mod ephemeris;
pub mod error;
pub mod flow;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod routers;
pub mod skylink;
pub mod topology;
pub mod traffic;

pub use error::{Error, Result};
