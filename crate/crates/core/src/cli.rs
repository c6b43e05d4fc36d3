//! Command-line front end. Every flag can also come from an environment
//! variable named `V2X_<FLAG>` (for example `V2X_CONFIG`, `V2X_SEED`);
//! an explicit flag wins over the environment.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{ConfigError, SimError};
use crate::mobility::{TdiRegime, TdiVector};
use crate::model::ScenarioConfig;
use crate::oracle::{mdp_oracle_check, stage1_oracle_check};
use crate::sim::{sweep, write_csv, write_provenance, write_rows, PlannerCache, PolicyKind, SweepRow, SweepSpec};
use crate::stage1::{allocate_shares, UtilityParams};
use crate::stage2::ValueTable;

#[derive(Debug, Parser)]
#[command(name = "v2x-twostage", version, about = "Two-stage RB allocation simulator for a V2X intersection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Low,
    High,
    Both,
}

impl RegimeArg {
    fn regimes(self) -> Vec<TdiRegime> {
        match self {
            Self::Low => vec![TdiRegime::Low],
            Self::High => vec![TdiRegime::High],
            Self::Both => vec![TdiRegime::Low, TdiRegime::High],
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long, env = "V2X_CONFIG")]
    pub config: Option<PathBuf>,
    /// Overrides the configured root seed.
    #[arg(long, env = "V2X_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct Experiment {
    #[command(flatten)]
    pub common: Common,
    /// CSV destination; stdout when omitted.
    #[arg(long, env = "V2X_OUT")]
    pub out: Option<PathBuf>,
    /// Append to the CSV instead of overwriting it.
    #[arg(long, env = "V2X_APPEND")]
    pub append: bool,
    /// Arrival rates in packets/s, comma separated.
    #[arg(long, env = "V2X_RATES", value_delimiter = ',', default_value = "5,10,15,20,25,30")]
    pub rates: Vec<f64>,
    /// Number of TDI epochs per run; the configured count when omitted.
    #[arg(long, env = "V2X_EPOCHS")]
    pub epochs: Option<usize>,
    /// Value table used as the initial guess of the first solve.
    #[arg(long, env = "V2X_WARM_START")]
    pub warm_start: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one policy and regime, one CSV row per rate.
    Run {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, env = "V2X_POLICY", default_value = "two_stage")]
        policy: PolicyKind,
        #[arg(long, env = "V2X_REGIME", value_enum, default_value = "low")]
        regime: RegimeArg,
    },
    /// Full grid over policies, regimes, rates and repetitions.
    Sweep {
        #[command(flatten)]
        exp: Experiment,
        /// Policies, comma separated.
        #[arg(long, env = "V2X_POLICY", value_delimiter = ',', default_value = "two_stage,full_optimal,random")]
        policy: Vec<PolicyKind>,
        #[arg(long, env = "V2X_REGIME", value_enum, default_value = "both")]
        regime: RegimeArg,
        #[arg(long, env = "V2X_REPS", default_value_t = 20)]
        reps: usize,
    },
    /// Print the shares, active count and multiplier for given densities.
    SolveStage1 {
        #[command(flatten)]
        common: Common,
        /// Four densities, comma separated; the pinned densities of the
        /// config when omitted.
        #[arg(long, env = "V2X_KAPPA", value_delimiter = ',')]
        kappa: Option<Vec<f64>>,
    },
    /// Check a config and print the resolved parameters, defaults included.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the oracle cross-checks on the built-in fixtures.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Density draws per regime for the share check.
        #[arg(long, env = "V2X_DRAWS", default_value_t = 1000)]
        draws: usize,
    },
}

fn load_config(c: &Common) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = match &c.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.rng_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(rows: &[SweepRow], exp: &Experiment, cfg: &ScenarioConfig, command: &str) -> Result<(), SimError> {
    match &exp.out {
        Some(path) => {
            write_csv(path, rows, exp.append)?;
            write_provenance(path, cfg, cfg.rng_seed, rows.len(), command)?;
            log::info!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_rows(std::io::stdout().lock(), rows, true)?,
    }
    Ok(())
}

fn load_warm(path: Option<&Path>) -> Result<Option<ValueTable>, SimError> {
    let Some(p) = path else { return Ok(None) };
    let text = std::fs::read_to_string(p)?;
    Ok(Some(ValueTable::from_text(&text)?))
}

fn experiment(
    cfg: &ScenarioConfig,
    exp: &Experiment,
    policies: Vec<PolicyKind>,
    regimes: Vec<TdiRegime>,
    reps: usize,
    command: &str,
) -> Result<(), SimError> {
    let spec = SweepSpec { policies, regimes, rates: exp.rates.clone(), reps, base_seed: cfg.rng_seed, epochs: exp.epochs };
    let warm = load_warm(exp.warm_start.as_deref())?;
    let mut cache = PlannerCache::new();
    let rows = if let Some(table) = warm {
        // a warm start applies per run, so the grid is walked here
        let mut rows = Vec::new();
        for &regime in &spec.regimes {
            for &rate in &spec.rates {
                for &policy in &spec.policies {
                    let mut reports = Vec::new();
                    for r in 0..reps.max(1) {
                        let mut rs = crate::sim::RunSpec::new(policy, regime, rate, spec.base_seed + r as u64);
                        rs.epochs = spec.epochs;
                        rs.warm_start = Some(table.clone());
                        reports.push(crate::sim::run(cfg, &rs, &mut cache)?);
                    }
                    rows.push(SweepRow::from_reports(&reports));
                }
            }
        }
        rows
    } else {
        sweep(cfg, &spec, &mut cache, |row, _| {
            log::info!("{} {} {} pkt/s: delay {:?}", row.policy, row.regime.label(), row.arrival_rate, row.mean_delay)
        })?
    };
    emit(&rows, exp, cfg, command)
}

fn dispatch(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run { exp, policy, regime } => {
            let cfg = load_config(&exp.common)?;
            let regimes = regime.regimes();
            experiment(&cfg, &exp, vec![policy], regimes, 1, "run")
        }
        Command::Sweep { exp, policy, regime, reps } => {
            let cfg = load_config(&exp.common)?;
            experiment(&cfg, &exp, policy, regime.regimes(), reps, "sweep")
        }
        Command::SolveStage1 { common, kappa } => {
            let cfg = load_config(&common)?;
            let k = match kappa {
                Some(v) => <[f64; 4]>::try_from(v.as_slice()).map_err(|_| ConfigError::Invalid {
                    key: "kappa".into(),
                    reason: format!("expected 4 densities, got {}", v.len()),
                })?,
                None => cfg.sim.pinned_tdi.ok_or_else(|| ConfigError::Invalid {
                    key: "sim.pinned_tdi".into(),
                    reason: "no densities given: pass --kappa or set this key".into(),
                })?,
            };
            if let Some(bad) = k.iter().position(|x| !(*x >= 0.0)) {
                return Err(ConfigError::Invalid { key: format!("kappa[{bad}]"), reason: "must be >= 0".into() }.into());
            }
            let shares = allocate_shares(&TdiVector(k), &UtilityParams::from_config(&cfg));
            let mut out = std::io::stdout().lock();
            writeln!(out, "subregion,kappa,epsilon,active_count,omega")?;
            for i in 0..4 {
                writeln!(out, "{},{},{},{},{}", i + 1, k[i], shares.epsilon[i], shares.active_count, shares.multiplier)?;
            }
            Ok(())
        }
        Command::Validate { common } => {
            let cfg = load_config(&common)?;
            print!("{}", cfg.to_toml_string());
            Ok(())
        }
        Command::OracleCheck { common, draws } => {
            let cfg = load_config(&common)?;
            let s1 = stage1_oracle_check(draws, cfg.rng_seed, &UtilityParams::from_config(&cfg));
            let m = mdp_oracle_check()?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "check,value")?;
            writeln!(out, "stage1_draws,{}", s1.draws)?;
            writeln!(out, "stage1_max_share_error,{:e}", s1.max_share_error)?;
            writeln!(out, "stage1_max_utility_error,{:e}", s1.max_utility_error)?;
            writeln!(out, "mdp_policies_enumerated,{}", m.policies_enumerated)?;
            writeln!(out, "mdp_small_rvi_vs_enumeration,{:e}", (m.small_rvi_theta - m.small_enumerated_theta).abs())?;
            writeln!(out, "mdp_small_lp_vs_enumeration,{:e}", (m.small_lp_theta - m.small_enumerated_theta).abs())?;
            writeln!(out, "mdp_rvi_vs_lp,{:e}", (m.full_theta - m.lp_theta).abs())?;
            writeln!(out, "mdp_reduced_relative_gap,{:e}", m.reduced_relative_gap())?;
            writeln!(out, "mdp_deterministic_theta_gap,{:e}", m.deterministic_theta_gap)?;
            writeln!(out, "mdp_deterministic_value_gap,{:e}", m.deterministic_value_gap)?;
            Ok(())
        }
    }
}

/// Parses `args`, runs the verb and maps failures to exit codes: 2 for a
/// bad configuration, 1 for anything else.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SimError::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
