//! End-to-end simulation: TDI epochs drive the share computation and RB
//! budgets, and every slot runs the per-subregion scheduler.

mod budget;
mod planning;
mod runner;
mod sweep;

use std::fmt;
use std::str::FromStr;

pub use budget::{budget_rbs, rb_ranges};
pub use planning::{
    build_planner, draw_scenario, epoch_scenarios, regime_scenarios, scenario_count, shape_for, PlanKey, PlannerCache,
};
pub use runner::{run, EpochRecord, MetricsReport, RunSpec};
pub use sweep::{
    config_sha256, provenance_path, sweep, write_csv, write_provenance, write_rows, SweepRow, SweepSpec, CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Stage-one shares with the reduced-state scheduler.
    TwoStage,
    /// Stage-one shares with the full-state scheduler.
    FullOptimal,
    /// Stage-one shares with a uniformly random feasible action each slot.
    Random,
    /// Equal RB shares with the reduced-state scheduler.
    EqualSplit,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [Self::TwoStage, Self::FullOptimal, Self::Random, Self::EqualSplit];

    pub fn label(self) -> &'static str {
        match self {
            Self::TwoStage => "two_stage",
            Self::FullOptimal => "full_optimal",
            Self::Random => "random",
            Self::EqualSplit => "equal_split",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected two_stage, full_optimal, random or equal_split)"))
    }
}
