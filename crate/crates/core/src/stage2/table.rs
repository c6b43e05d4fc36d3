//! Plain-text value tables for warm restarts.
//!
//! ```text
//! # kind reduced
//! # nds 1
//! # ds 1
//! # capacity 2
//! # scenarios 1
//! # theta 0.125
//! 0 0 0
//! 0 1 0.5
//! ```
//!
//! Each data line is the queue vector followed by its relative value. Full
//! tables prefix every line with the scenario index. Values are printed with
//! shortest round-trip formatting, so a table read back is bit-identical.

use std::fmt::Write as _;

use crate::error::SolveError;

use super::space::QueueSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub kind: TableKind,
    pub n_nds: usize,
    pub n_ds: usize,
    pub capacity: u32,
    pub theta: f64,
    pub scenarios: usize,
    /// Scenario-major relative values.
    pub values: Vec<f64>,
}

impl ValueTable {
    pub fn space(&self) -> QueueSpace {
        QueueSpace::new(self.n_nds + self.n_ds, self.capacity)
    }

    /// Channel-averaged values with equal scenario weights.
    pub fn averaged(&self) -> Vec<f64> {
        let n = self.space().size();
        if self.scenarios == 1 {
            return self.values.clone();
        }
        let w = 1.0 / self.scenarios as f64;
        let mut out = vec![0.0; n];
        for s in 0..self.scenarios {
            for (o, v) in out.iter_mut().zip(&self.values[s * n..(s + 1) * n]) {
                *o += w * v;
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = match self.kind {
            TableKind::Reduced => "reduced",
            TableKind::Full => "full",
        };
        let _ = writeln!(s, "# kind {kind}");
        let _ = writeln!(s, "# nds {}", self.n_nds);
        let _ = writeln!(s, "# ds {}", self.n_ds);
        let _ = writeln!(s, "# capacity {}", self.capacity);
        let _ = writeln!(s, "# scenarios {}", self.scenarios);
        let _ = writeln!(s, "# theta {}", self.theta);
        let space = self.space();
        let n = space.size();
        for (i, v) in self.values.iter().enumerate() {
            let (sc, x) = (i / n, i % n);
            if self.kind == TableKind::Full {
                let _ = write!(s, "{sc} ");
            }
            for q in space.decode(x) {
                let _ = write!(s, "{q} ");
            }
            let _ = writeln!(s, "{v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SolveError> {
        let err = |m: String| SolveError::Table(m);
        let mut kind = None;
        let (mut nds, mut ds, mut cap, mut scen, mut theta) = (None, None, None, None, None);
        let mut rows: Vec<(usize, Vec<u32>, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let mut it = h.split_whitespace();
                let (Some(k), Some(v)) = (it.next(), it.next()) else { continue };
                let num = |v: &str| v.parse::<usize>().map_err(|e| err(format!("line {}: {e}", lineno + 1)));
                match k {
                    "kind" => {
                        kind = Some(match v {
                            "reduced" => TableKind::Reduced,
                            "full" => TableKind::Full,
                            o => return Err(err(format!("unknown table kind `{o}`"))),
                        })
                    }
                    "nds" => nds = Some(num(v)?),
                    "ds" => ds = Some(num(v)?),
                    "capacity" => cap = Some(num(v)? as u32),
                    "scenarios" => scen = Some(num(v)?),
                    "theta" => theta = Some(v.parse::<f64>().map_err(|e| err(format!("theta: {e}")))?),
                    _ => {}
                }
                continue;
            }
            let kind = kind.ok_or_else(|| err("data before `# kind` header".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some((last, head)) = toks.split_last() else { continue };
            let value = last.parse::<f64>().map_err(|e| err(format!("line {}: {e}", lineno + 1)))?;
            let mut ints = head
                .iter()
                .map(|t| t.parse::<u32>().map_err(|e| err(format!("line {}: {e}", lineno + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            let sc = if kind == TableKind::Full {
                if ints.is_empty() {
                    return Err(err(format!("line {}: missing scenario index", lineno + 1)));
                }
                ints.remove(0) as usize
            } else {
                0
            };
            rows.push((sc, ints, value));
        }
        let kind = kind.ok_or_else(|| err("missing `# kind` header".into()))?;
        let n_nds = nds.ok_or_else(|| err("missing `# nds` header".into()))?;
        let n_ds = ds.ok_or_else(|| err("missing `# ds` header".into()))?;
        let capacity = cap.ok_or_else(|| err("missing `# capacity` header".into()))?;
        let scenarios = scen.unwrap_or(1);
        let theta = theta.unwrap_or(f64::NAN);
        let space = QueueSpace::new(n_nds + n_ds, capacity);
        let n = space.size();
        let mut values = vec![f64::NAN; n * scenarios];
        for (sc, q, v) in rows {
            if q.len() != n_nds + n_ds || q.iter().any(|&x| x > capacity) || sc >= scenarios {
                return Err(err(format!("state {q:?} in scenario {sc} is outside the declared space")));
            }
            values[sc * n + space.encode(&q)] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(err("table does not cover every state".into()));
        }
        Ok(Self { kind, n_nds, n_ds, capacity, theta, scenarios, values })
    }
}
