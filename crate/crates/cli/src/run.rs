//! Mode dispatch and the agreement check.

use std::fmt::Write as _;

use ancss_core::analysis::{ber_for_model, bpsk_ber, decision_variance};
use ancss_core::channel::ebn0_to_n0;
use ancss_core::montecarlo::{agreement_gate, run_sweep};
use ancss_core::{AnalyticPoint, BerModel, BerPoint, GateVerdict};
use anyhow::Result;

use crate::config::{Mode, RunConfig};
use crate::output::{emit_csv, BpskPoint, RunManifest};

/// Analytic point with the configured model and variance scale.
fn analytic_at(config: &RunConfig, ebn0_db: f64, users: usize, beta: usize, model: BerModel) -> Result<AnalyticPoint> {
    let e_b = beta as f64;
    let sigma2 = decision_variance(e_b, ebn0_to_n0(ebn0_db, beta), users)? * config.variance_scale;
    let ber = ber_for_model(model, e_b, sigma2)?;
    Ok(AnalyticPoint {
        ebn0_db,
        users,
        beta,
        sigma2,
        ber,
    })
}

pub fn analytic_points(config: &RunConfig) -> Result<Vec<AnalyticPoint>> {
    let model = if config.exact_ser {
        BerModel::ExactSer
    } else {
        BerModel::AsPrinted
    };
    config
        .sweep()
        .points()
        .into_iter()
        .map(|(l, beta, db)| analytic_at(config, db, l, beta, model))
        .collect()
}

pub fn bpsk_points(config: &RunConfig) -> Vec<BpskPoint> {
    config
        .ebn0_db
        .iter()
        .map(|&db| BpskPoint {
            ebn0_db: db,
            ber: bpsk_ber(db),
        })
        .collect()
}

pub fn simulated_points(config: &RunConfig) -> Result<Vec<BerPoint>> {
    Ok(run_sweep(&config.sweep())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub point: BerPoint,
    /// Analytic BER of the printed model, the gate's reference.
    pub analytic: f64,
    pub verdict: GateVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict.failed()).count()
    }

    pub fn checked(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r.verdict, GateVerdict::Checked { .. }))
            .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>3} {:>6} {:>7} {:>11} {:>8} {:>12} {:>12} {:>8}  verdict",
            "L", "beta", "ebn0_db", "trials", "errors", "ber_hat", "analytic", "z"
        );
        for r in &self.rows {
            let p = &r.point;
            let (z, verdict) = match r.verdict {
                GateVerdict::Excluded => ("-".to_string(), "skip"),
                GateVerdict::Checked { z, pass } => (format!("{z:+.2}"), if pass { "pass" } else { "FAIL" }),
            };
            let _ = writeln!(
                s,
                "{:>3} {:>6} {:>7} {:>11} {:>8} {:>12.4e} {:>12.4e} {:>8}  {}",
                p.users, p.beta, p.ebn0_db, p.trials, p.errors, p.ber_hat, r.analytic, z, verdict
            );
        }
        let _ = writeln!(
            s,
            "{} points, {} gated, {} failed",
            self.rows.len(),
            self.checked(),
            self.failures()
        );
        s
    }
}

/// Simulates the sweep and gates each point against the printed model.
pub fn verify(config: &RunConfig) -> Result<VerifyReport> {
    let simulated = simulated_points(config)?;
    verify_points(config, simulated)
}

fn verify_points(config: &RunConfig, simulated: Vec<BerPoint>) -> Result<VerifyReport> {
    let rows = simulated
        .into_iter()
        .map(|point| {
            let analytic = analytic_at(config, point.ebn0_db, point.users, point.beta, BerModel::AsPrinted)?.ber;
            Ok(VerifyRow {
                point,
                analytic,
                verdict: agreement_gate(&point, analytic),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { rows })
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows_written: usize,
    pub report: Option<VerifyReport>,
}

impl RunOutcome {
    pub fn gate_failed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| !r.passed())
    }
}

/// Runs the configured mode, writes the CSV and its manifest.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let with_analytic = matches!(config.mode, Mode::Analytic | Mode::Both | Mode::Verify);
    let with_sim = matches!(config.mode, Mode::Simulate | Mode::Both | Mode::Verify);

    let analytic = if with_analytic {
        analytic_points(config)?
    } else {
        Vec::new()
    };
    let bpsk = if with_analytic { bpsk_points(config) } else { Vec::new() };
    let simulated = if with_sim {
        simulated_points(config)?
    } else {
        Vec::new()
    };

    let report = match config.mode {
        Mode::Verify => Some(verify_points(config, simulated.clone())?),
        _ => None,
    };
    let rows = emit_csv(&analytic, &bpsk, &simulated, &config.out)?;
    RunManifest::new(config, &rows).write(&config.manifest_path())?;
    Ok(RunOutcome {
        rows_written: rows.len(),
        report,
    })
}
