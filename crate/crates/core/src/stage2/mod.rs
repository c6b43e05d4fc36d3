//! Intra-subregion scheduling as a constrained average-cost MDP.
//!
//! The Lagrangian per-stage cost splits into a queue part and a
//! channel-and-action part. Value iteration runs either on the queue state
//! alone, with channel effects folded into expected costs and a departure
//! law per action, or on (channel scenario, queue) pairs for the full-state
//! baseline.

mod cost;
mod dual;
mod plan;
mod solver;
mod space;
mod table;

pub use cost::{per_stage_cost, ActionCells, CostModel, LagrangeMultipliers, PairTable};
pub use dual::{dual_step, update_multipliers, MeasuredAverages};
pub use plan::{action_list, greedy_schedule, random_schedule, Planner, Shape};
pub use solver::{
    build_full_mdp, build_reduced_mdp, evaluate_scenarios, EvaluatedScenarios, Outcome, RviOptions, RviSolution,
    ScenarioMdp, ScenarioSet,
};
pub use space::{QueueSpace, MAX_LINKS};
pub use table::{TableKind, ValueTable};
