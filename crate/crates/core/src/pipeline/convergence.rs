use serde::{Deserialize, Serialize};

use super::{compute_case, CaseSpec, ConstantsReport, PipelineError};

/// A sequence of discrete constants with a one-step Richardson extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
    pub extrapolated_value: Option<f64>,
    /// `log₂` of the ratio of the last two successive differences.
    pub estimated_rate: Option<f64>,
    /// Why the extrapolation was withheld, when it was.
    pub diagnostic: Option<String>,
}

/// Extrapolates from the last three values `c₁, c₂, c₃`: with
/// `ρ = (c₂ − c₁)/(c₃ − c₂)`, rate `log₂ ρ` and limit `c₃ + (c₃ − c₂)/(ρ − 1)`.
/// Withheld unless the differences share a sign and shrink.
pub fn extrapolate(levels: Vec<usize>, values: Vec<f64>) -> Result<ConvergenceSeries, PipelineError> {
    let n = values.len();
    if n < 3 || levels.len() != n {
        return Err(PipelineError::InsufficientLevels(n.min(levels.len())));
    }
    let mut series = ConvergenceSeries {
        levels,
        values,
        extrapolated_value: None,
        estimated_rate: None,
        diagnostic: None,
    };
    let v = &series.values;
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let same_sign = diffs.iter().all(|&d| d > 0.0) || diffs.iter().all(|&d| d < 0.0);
    let shrinking = diffs.windows(2).all(|w| w[1].abs() < w[0].abs());
    if !same_sign {
        series.diagnostic = Some("successive differences change sign".into());
        return Ok(series);
    }
    if !shrinking {
        series.diagnostic = Some("successive differences do not shrink".into());
        return Ok(series);
    }
    let (d1, d2) = (diffs[n - 3], diffs[n - 2]);
    let ratio = d1 / d2;
    series.estimated_rate = Some(ratio.log2());
    series.extrapolated_value = Some(v[n - 1] + d2 / (ratio - 1.0));
    Ok(series)
}

/// Computes the case and extrapolates its `C_h` sequence.
pub fn convergence_study(spec: &CaseSpec) -> Result<(ConstantsReport, ConvergenceSeries), PipelineError> {
    if spec.refinement_levels.len() < 3 {
        return Err(PipelineError::InsufficientLevels(spec.refinement_levels.len()));
    }
    let report = compute_case(spec)?;
    let (levels, values) = report.c_series();
    let series = extrapolate(levels, values)?;
    Ok((report, series))
}
