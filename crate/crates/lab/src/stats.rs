//! Campaign aggregation and CSV output.

use std::io::Write;

use qka_core::adversary::AdversarySpec;
use qka_core::transcript::EventKind;
use qka_core::{Phase, RunReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::LabError;
use crate::scenario::{protocol_name, ScenarioConfig};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CampaignStats {
    pub trials: usize,
    pub completed: usize,
    /// Server and party-to-party decoy checks.
    pub aborted_external: usize,
    pub aborted_internal: usize,
    pub attack_success: usize,
    /// Decoy mismatches and comparisons summed over every external check.
    pub decoy_mismatches: usize,
    pub decoys_compared: usize,
}

impl CampaignStats {
    pub fn of(report: &RunReport, spec: Option<&AdversarySpec>) -> Self {
        let mut s = CampaignStats { trials: 1, ..Default::default() };
        match report.outcome.abort_phase() {
            None => s.completed = 1,
            Some(Phase::InternalCheck) => s.aborted_internal = 1,
            Some(_) => s.aborted_external = 1,
        }
        if spec.is_some_and(|spec| spec.succeeded(report)) {
            s.attack_success = 1;
        }
        for e in &report.events {
            if let EventKind::CheckResult { phase, mismatches, compared, .. } = e.kind {
                if phase.is_external() {
                    s.decoy_mismatches += mismatches;
                    s.decoys_compared += compared;
                }
            }
        }
        s
    }

    pub fn merge(self, o: Self) -> Self {
        CampaignStats {
            trials: self.trials + o.trials,
            completed: self.completed + o.completed,
            aborted_external: self.aborted_external + o.aborted_external,
            aborted_internal: self.aborted_internal + o.aborted_internal,
            attack_success: self.attack_success + o.attack_success,
            decoy_mismatches: self.decoy_mismatches + o.decoy_mismatches,
            decoys_compared: self.decoys_compared + o.decoys_compared,
        }
    }

    pub fn aborted(&self) -> usize {
        self.aborted_external + self.aborted_internal
    }

    /// Fraction of trials that aborted.
    pub fn detection_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.aborted() as f64 / self.trials as f64
        }
    }

    pub fn detection_ci(&self) -> (f64, f64) {
        wilson(self.aborted(), self.trials)
    }

    pub fn mean_error_rate(&self) -> f64 {
        if self.decoys_compared == 0 {
            0.0
        } else {
            self.decoy_mismatches as f64 / self.decoys_compared as f64
        }
    }
}

/// Runs every trial of `cfg`, in parallel, and aggregates.
pub fn run_campaign(cfg: &ScenarioConfig) -> Result<CampaignStats, LabError> {
    cfg.validate()?;
    let spec = cfg.adversary_spec()?;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| cfg.run_trial(spec.as_ref(), k).map(|r| CampaignStats::of(&r, spec.as_ref())))
        .try_reduce(CampaignStats::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    protocol: &'a str,
    n: usize,
    m: usize,
    ell: usize,
    d: String,
    adversary: &'a str,
    trials: usize,
    completed: usize,
    aborted_external: usize,
    aborted_internal: usize,
    attack_success: usize,
    detection_rate: String,
    detection_ci_lo: String,
    detection_ci_hi: String,
    mean_error_rate: String,
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

/// Writes a header and one row. Floats use six fixed decimals.
pub fn write_csv<W: Write>(out: W, cfg: &ScenarioConfig, stats: &CampaignStats) -> Result<(), LabError> {
    let (lo, hi) = stats.detection_ci();
    let row = CsvRow {
        protocol: protocol_name(cfg.protocol),
        n: cfg.n,
        m: cfg.m,
        ell: cfg.ell,
        d: cfg.decoys.map_or_else(|| "auto".to_string(), |d| d.to_string()),
        adversary: cfg.adversary.as_str(),
        trials: stats.trials,
        completed: stats.completed,
        aborted_external: stats.aborted_external,
        aborted_internal: stats.aborted_internal,
        attack_success: stats.attack_success,
        detection_rate: fixed(stats.detection_rate()),
        detection_ci_lo: fixed(lo),
        detection_ci_hi: fixed(hi),
        mean_error_rate: fixed(stats.mean_error_rate()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}
