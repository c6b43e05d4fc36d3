use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read configuration: {0}")]
    Io(String),
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("allocation is {got_rbs}x{got_links} but the subregion needs {want_rbs}x{want_links}")]
    Dimension { got_rbs: usize, got_links: usize, want_rbs: usize, want_links: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(
        "action space too large: {count} feasible allocations exceed the cap of {cap}; \
         schedule this subregion with the greedy per-slot path instead"
    )]
    ActionSpaceTooLarge { count: u128, cap: usize },
    #[error("value iteration did not converge after {iterations} sweeps (span residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("malformed value table: {0}")]
    Table(String),
    #[error("linear program failed: {0}")]
    Lp(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("horizon of {slots} slots is shorter than one TDI interval ({per_epoch} slots)")]
    HorizonTooShort { slots: usize, per_epoch: usize },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o failed: {0}")]
    Io(#[from] std::io::Error),
}
