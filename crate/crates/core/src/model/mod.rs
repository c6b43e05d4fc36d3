//! Scenario parameters and the RB/link bookkeeping shared by every stage.

mod alloc;
mod config;

pub use alloc::{
    action_count, enumerate_feasible_actions, validate_allocation, AllocationMatrix, LinkClass, Segment, Subregion,
};
pub use config::{
    ArrivalKind, ChannelConfig, LeftoverMode, LogBase, MultiplierConfig, PlanningMode, QosConfig, QueueConfig,
    RadioConfig, ScenarioConfig, SimConfig, Stage2Config, TimingConfig, TrafficConfig, UtilityConfig,
};
