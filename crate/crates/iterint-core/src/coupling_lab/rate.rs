use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Estimates on a grid with a fitted power-law exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Strictly increasing grid (truncation levels or step sizes).
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Least-squares slope of `ln value` against `ln grid`.
    pub slope: f64,
    /// Standard error of the slope from the regression residuals.
    pub slope_se: f64,
    #[serde(flatten)]
    pub metadata: RateMetadata,
}

/// Provenance attached to a [`RateReport`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateMetadata {
    pub estimator: String,
    pub seed: u64,
    pub samples: u64,
    /// Free-form `key=value` notes such as reference truncations.
    pub notes: Vec<String>,
}

impl RateReport {
    /// Validates the grid and values and fits the slope.
    pub fn new(grid: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>, metadata: RateMetadata) -> Result<Self> {
        if grid.len() != values.len() || grid.len() != stderr.len() {
            return Err(Error::contract("grid, values and stderr lengths differ"));
        }
        if grid.len() < 4 {
            return Err(Error::domain("a rate report needs at least 4 grid points"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        if grid.iter().chain(&values).any(|&g| !(g.is_finite() && g > 0.0)) {
            return Err(Error::domain("grid and values must be positive and finite"));
        }
        let (slope, slope_se) = fit_slope(&grid, &values)?;
        Ok(RateReport { grid, values, stderr, slope, slope_se, metadata })
    }
}

/// Ordinary least-squares slope of `ln y` on `ln x` and its standard error.
///
/// The points are sorted by `x` before fitting, so the result does not depend
/// on input order.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("slope fit needs at least two paired points"));
    }
    let mut pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (libm::log(a), libm::log(b))).collect();
    if pts.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::domain("slope fit needs positive finite values"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let se = if pts.len() > 2 {
        let ssr: f64 = pts.iter().map(|p| p.1 - my - slope * (p.0 - mx)).map(|e| e * e).sum();
        libm::sqrt(ssr / (n - 2.0) / sxx)
    } else {
        0.0
    };
    Ok((slope, se))
}
