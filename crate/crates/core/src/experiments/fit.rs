//! Least-squares power-law and linear fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest |y - fit| in the fitted coordinates (log space for power laws).
    pub max_residual: f64,
    pub points_used: usize,
}

impl SlopeFit {
    /// Fitted value at x, in the fitted coordinates.
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "a fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateInput("fit points must be finite".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInput(
            "fit abscissae must be distinct".into(),
        ));
    }
    Ok(())
}

fn fit_line(points: &[(f64, f64)]) -> SlopeFit {
    let (slope, intercept) = least_squares(points);
    let max_residual = points
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    SlopeFit {
        slope,
        intercept,
        max_residual,
        points_used: points.len(),
    }
}

/// Least-squares line through (ln x, ln y).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    check_points(points)?;
    if points.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return Err(Error::DegenerateInput(
            "log-log fits need positive coordinates".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    check_points(&logs)?;
    Ok(fit_line(&logs))
}

/// Least-squares line through (x, y).
pub fn fit_linear(points: &[(f64, f64)]) -> Result<SlopeFit> {
    check_points(points)?;
    Ok(fit_line(points))
}
