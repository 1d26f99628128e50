//! CSV rows and the run manifest.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ancss_core::{AnalyticPoint, BerPoint};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub const HEADER: [&str; 8] = ["kind", "ebn0_db", "L", "beta", "ber", "ci95", "trials", "errors"];

/// Row kinds, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Analytic,
    Simulated,
    Bpsk,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Analytic => "analytic",
            Kind::Simulated => "simulated",
            Kind::Bpsk => "bpsk",
        }
    }
}

/// Single-user BPSK reference at one Eb/N0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpskPoint {
    pub ebn0_db: f64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub kind: Kind,
    pub ebn0_db: f64,
    pub users: Option<usize>,
    pub beta: Option<usize>,
    pub ber: f64,
    pub ci95: Option<f64>,
    pub trials: Option<u64>,
    pub errors: Option<u64>,
}

impl Row {
    fn key_cmp(&self, other: &Row) -> Ordering {
        (self.kind, self.users, self.beta)
            .cmp(&(other.kind, other.users, other.beta))
            .then(self.ebn0_db.total_cmp(&other.ebn0_db))
    }

    fn record(&self) -> [String; 8] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.kind.as_str().to_string(),
            format!("{}", self.ebn0_db),
            opt(self.users.map(|v| v.to_string())),
            opt(self.beta.map(|v| v.to_string())),
            sig10(self.ber),
            opt(self.ci95.map(sig10)),
            opt(self.trials.map(|v| v.to_string())),
            opt(self.errors.map(|v| v.to_string())),
        ]
    }
}

/// Ten significant digits.
fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

/// All rows in `(kind, L, beta, Eb/N0)` order.
pub fn collect_rows(analytic: &[AnalyticPoint], bpsk: &[BpskPoint], simulated: &[BerPoint]) -> Vec<Row> {
    let mut rows: Vec<Row> = analytic
        .iter()
        .map(|p| Row {
            kind: Kind::Analytic,
            ebn0_db: p.ebn0_db,
            users: Some(p.users),
            beta: Some(p.beta),
            ber: p.ber,
            ci95: None,
            trials: None,
            errors: None,
        })
        .chain(simulated.iter().map(|p| Row {
            kind: Kind::Simulated,
            ebn0_db: p.ebn0_db,
            users: Some(p.users),
            beta: Some(p.beta),
            ber: p.ber_hat,
            ci95: Some(p.ci95_halfwidth),
            trials: Some(p.trials),
            errors: Some(p.errors),
        }))
        .chain(bpsk.iter().map(|p| Row {
            kind: Kind::Bpsk,
            ebn0_db: p.ebn0_db,
            users: None,
            beta: None,
            ber: p.ber,
            ci95: None,
            trials: None,
            errors: None,
        }))
        .collect();
    rows.sort_by(Row::key_cmp);
    rows
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV file for the given points and returns the rows written.
pub fn emit_csv(
    analytic: &[AnalyticPoint],
    bpsk: &[BpskPoint],
    simulated: &[BerPoint],
    path: &Path,
) -> Result<Vec<Row>> {
    let rows = collect_rows(analytic, bpsk, simulated);
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(&rows, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub row: usize,
    pub kind: Kind,
    #[serde(rename = "L")]
    pub users: Option<usize>,
    pub beta: Option<usize>,
    pub ebn0_db: f64,
    pub source: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub csv: String,
    pub config: RunConfig,
    pub rows: Vec<Provenance>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, rows: &[Row]) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let analytic_source = if config.exact_ser {
            "analytic: ternary symbol error rate"
        } else {
            "analytic: closed form"
        };
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Provenance {
                row: i + 1,
                kind: r.kind,
                users: r.users,
                beta: r.beta,
                ebn0_db: r.ebn0_db,
                source: match r.kind {
                    Kind::Analytic => analytic_source,
                    Kind::Simulated => "simulated: monte carlo",
                    Kind::Bpsk => "analytic: bpsk reference",
                },
            })
            .collect();
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            timestamp,
            csv: config.out.display().to_string(),
            config: config.clone(),
            rows,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self).with_context(|| format!("writing {}", path.display()))?;
        writeln!(w)
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.2373079318813705), "2.373079319e-1");
        assert_eq!(sig10(0.0), "0.000000000e0");
    }

    #[test]
    fn rows_sort_by_kind_then_l_beta_ebn0() {
        let a = |db, l, beta| AnalyticPoint {
            ebn0_db: db,
            users: l,
            beta,
            sigma2: 1.0,
            ber: 0.1,
        };
        let rows = collect_rows(
            &[a(4.0, 4, 100), a(2.0, 2, 200), a(0.0, 2, 200), a(6.0, 2, 100)],
            &[BpskPoint {
                ebn0_db: 1.0,
                ber: 0.05,
            }],
            &[],
        );
        let keys: Vec<_> = rows.iter().map(|r| (r.kind, r.users, r.beta, r.ebn0_db)).collect();
        assert_eq!(
            keys,
            vec![
                (Kind::Analytic, Some(2), Some(100), 6.0),
                (Kind::Analytic, Some(2), Some(200), 0.0),
                (Kind::Analytic, Some(2), Some(200), 2.0),
                (Kind::Analytic, Some(4), Some(100), 4.0),
                (Kind::Bpsk, None, None, 1.0),
            ]
        );
    }
}
