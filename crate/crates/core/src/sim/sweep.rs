use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::SimError;
use crate::mobility::TdiRegime;
use crate::model::ScenarioConfig;

use super::planning::PlannerCache;
use super::runner::{run, MetricsReport, RunSpec};
use super::PolicyKind;

pub const CSV_HEADER: [&str; 10] = [
    "policy",
    "tdi_regime",
    "arrival_rate_pkt_s",
    "seed",
    "mean_delay_s",
    "se_delay_s",
    "mean_prr",
    "mean_rate_bps",
    "mean_queue_pkts",
    "overflow_frac",
];

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub policies: Vec<PolicyKind>,
    pub regimes: Vec<TdiRegime>,
    pub rates: Vec<f64>,
    pub reps: usize,
    /// Repetition `r` runs with seed `base_seed + r`.
    pub base_seed: u64,
    pub epochs: Option<usize>,
}

/// One CSV row: a (policy, regime, rate) cell aggregated over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub regime: TdiRegime,
    pub arrival_rate: f64,
    pub seed: u64,
    pub mean_delay: Option<f64>,
    pub se_delay: Option<f64>,
    pub mean_prr: Option<f64>,
    pub mean_rate: Option<f64>,
    pub mean_queue: Option<f64>,
    pub overflow_frac: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Standard error of the mean; `None` below two samples.
fn std_error(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some((var / xs.len() as f64).sqrt())
}

impl SweepRow {
    /// Aggregates repetitions. With several repetitions the error is taken
    /// across them; with one it comes from batch means over its epochs, so
    /// a single-cell sweep reports exactly what a direct run does.
    pub fn from_reports(reports: &[MetricsReport]) -> Self {
        let first = &reports[0];
        let collect = |f: &dyn Fn(&MetricsReport) -> Option<f64>| reports.iter().filter_map(f).collect::<Vec<_>>();
        let delays = collect(&|r| r.mean_delay());
        let se_delay = if reports.len() == 1 { std_error(&first.epoch_delays()) } else { std_error(&delays) };
        Self {
            policy: first.policy,
            regime: first.regime,
            arrival_rate: first.arrival_rate,
            seed: first.seed,
            mean_delay: mean(&delays),
            se_delay,
            mean_prr: mean(&collect(&|r| r.mean_prr())),
            mean_rate: mean(&collect(&|r| r.mean_rate())),
            mean_queue: mean(&collect(&|r| r.mean_queue())),
            overflow_frac: mean(&collect(&|r| r.overflow_frac())),
        }
    }

    fn record(&self) -> [String; 10] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.policy.label().to_string(),
            self.regime.label().to_string(),
            self.arrival_rate.to_string(),
            self.seed.to_string(),
            opt(self.mean_delay),
            opt(self.se_delay),
            opt(self.mean_prr),
            opt(self.mean_rate),
            opt(self.mean_queue),
            opt(self.overflow_frac),
        ]
    }
}

/// Runs every (regime, rate, policy) cell for `reps` seeds. `on_cell` sees
/// each finished cell with its raw reports.
pub fn sweep(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    cache: &mut PlannerCache,
    mut on_cell: impl FnMut(&SweepRow, &[MetricsReport]),
) -> Result<Vec<SweepRow>, SimError> {
    let mut rows = Vec::new();
    for &regime in &spec.regimes {
        for &rate in &spec.rates {
            for &policy in &spec.policies {
                let mut reports = Vec::with_capacity(spec.reps);
                for r in 0..spec.reps.max(1) {
                    let mut rs = RunSpec::new(policy, regime, rate, spec.base_seed + r as u64);
                    rs.epochs = spec.epochs;
                    reports.push(run(cfg, &rs, cache)?);
                }
                let row = SweepRow::from_reports(&reports);
                on_cell(&row, &reports);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Writes rows to `out`, with the header unless `header` is false.
pub fn write_rows<W: Write>(out: W, rows: &[SweepRow], header: bool) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the dataset to `path`, overwriting unless `append` is set; an
/// appended file gets a header only when it starts empty.
pub fn write_csv(path: &Path, rows: &[SweepRow], append: bool) -> Result<(), SimError> {
    let existing = append && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    let file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
    write_rows(file, rows, !existing)
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    artifact: &'a str,
    version: &'a str,
    config_sha256: String,
    seed: u64,
    rows: usize,
    command: &'a str,
}

pub fn config_sha256(cfg: &ScenarioConfig) -> String {
    Sha256::digest(cfg.to_toml_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn provenance_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".provenance.json");
    csv.with_file_name(name)
}

/// Sidecar next to a CSV recording what produced it.
pub fn write_provenance(csv: &Path, cfg: &ScenarioConfig, seed: u64, rows: usize, command: &str) -> Result<PathBuf, SimError> {
    let p = Provenance {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_sha256(cfg),
        seed,
        rows,
        command,
    };
    let path = provenance_path(csv);
    let text = serde_json::to_string_pretty(&p).map_err(std::io::Error::other)?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[], true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "policy,tdi_regime,arrival_rate_pkt_s,seed,mean_delay_s,se_delay_s,mean_prr,mean_rate_bps,mean_queue_pkts,overflow_frac\n"
        );
    }

    #[test]
    fn std_error_of_pair() {
        assert_eq!(std_error(&[1.0]), None);
        assert!((std_error(&[1.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }
}
