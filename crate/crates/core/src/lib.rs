//! Two-stage radio-resource allocation for a four-arm urban V2X intersection.
//!
//! Stage one splits the RB pool between the four arms from their traffic
//! densities in closed form ([`stage1`]). Stage two schedules each arm's
//! links slot by slot from queue and channel state with a relative value
//! iteration policy ([`stage2`]). [`sim`] ties both together over time and
//! produces the delay-versus-load datasets.

pub mod channel;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod mobility;
pub mod model;
pub mod oracle;
pub mod queue;
pub mod rng;
pub mod sim;
pub mod stage1;
pub mod stage2;

pub use error::{ConfigError, SimError, SolveError};
