//! Command-line front end of the probe analyzer.

use qka_core::adversary::probe::{Complex64, Gram};
use qka_core::adversary::{probe_distinguishability, DetectionProfile, ProbeParams};
use qka_core::Error as CoreError;
use serde::Serialize;

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub detection: DetectionProfile,
    /// `None` when an undisturbed branch has zero amplitude.
    pub distinguishability: Option<f64>,
}

fn reals(s: &str, want: usize, what: &str) -> Result<Vec<f64>, LabError> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| LabError::Config(format!("bad number {t:?} in {what}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != want {
        return Err(LabError::Config(format!("{what} needs {want} reals, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Config(format!("{what} has a non-finite entry")));
    }
    Ok(values)
}

/// `a1r,a1i,a2r,a2i,a3r,a3i,a4r,a4i`.
pub fn parse_alpha(s: &str) -> Result<[Complex64; 4], LabError> {
    let v = reals(s, 8, "alpha")?;
    Ok([0, 1, 2, 3].map(|k| Complex64::new(v[2 * k], v[2 * k + 1])))
}

/// Sixteen reals row by row, or `identity`.
pub fn parse_gram(s: &str) -> Result<Option<Gram>, LabError> {
    if s.trim() == "identity" {
        return Ok(None);
    }
    Ok(Some(ProbeParams::gram_from_reals(&reals(s, 16, "gram")?)?))
}

pub fn analyze(alpha: [Complex64; 4], gram: Option<Gram>) -> Result<ProbeReport, LabError> {
    let params = match gram {
        Some(g) => ProbeParams::new(alpha, g)?,
        None => ProbeParams::with_identity_gram(alpha)?,
    };
    let distinguishability = match probe_distinguishability(&params) {
        Ok(v) => Some(v),
        Err(CoreError::DegenerateCondition) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(ProbeReport { detection: params.detection_profile(), distinguishability })
}
