//! Frequency-scaling sweep of ‖u‖_{L^q(ℝ×X)} for data normalized in Ḣ^{-1/2}.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::fit::fit_loglog_slope;
use super::report::{CheckKind, ScenarioReport, SummaryRow};
use super::{exponent_tag, step_for, Setup};
use crate::error::{Error, Result};
use crate::norms::{
    mixed_norm, rhs_restriction_norm, schur_exponents, schur_partial_sums, time_tail_estimate,
    NormSpec, ResultTable, SchurCase,
};
use crate::propagator::{DataSpec, Propagator};

/// Time window is [−T, T] with T = this / (lowest frequency).
const TIME_REACH: f64 = 64.0;
/// Radial grid extends this many wavelengths beyond the time window.
const RADIAL_MARGIN: f64 = 16.0;
/// Largest dyadic half-width of the Schur partial-sum table.
const SCHUR_J_MAX: u32 = 24;

/// Fails unless q passes the lower bound and, when ν₀ < (n−2)/2, the
/// additional upper bound.
pub(crate) fn check_exponent(n: usize, q: f64, nu0: f64) -> Result<()> {
    let nf = n as f64;
    let lower = 2.0 * nf / (nf - 1.0);
    if !(q > lower) {
        return Err(Error::AdmissibilityViolated(format!(
            "q = {q} must exceed 2n/(n-1) = {lower}"
        )));
    }
    if nu0 < (nf - 2.0) / 2.0 {
        let upper = 2.0 * nf / (nf - 2.0 - 2.0 * nu0);
        if !(q < upper) {
            return Err(Error::AdmissibilityViolated(format!(
                "q = {q} must stay below 2n/(n-2-2 nu0) = {upper}"
            )));
        }
    }
    Ok(())
}

struct Point {
    value: f64,
    tail: f64,
}

fn point(setup: &Setup, spec: &DataSpec, q: f64) -> Result<Point> {
    let res = setup.resolution;
    let n = setup.n;
    let (lo, hi) = spec.support();
    let t_star = TIME_REACH / lo;
    let r_max = t_star + RADIAL_MARGIN / lo;
    let spectral = res.spectral((lo, hi), r_max + t_star, n)?;
    let rho_top = spectral.span().1;
    let step = step_for(rho_top, 2.0 * q + 8.0);
    let inner = res.log(1e-4 / hi, 1.0 / hi, n)?;
    let outer = res.linear(1.0 / hi, r_max, step, n)?;
    let physical = Arc::new(inner.concat(&outer)?);
    let data = setup.data(spec, spectral.clone())?;
    let data = data.scaled(1.0 / rhs_restriction_norm(&data, 2.0)?);
    let prop = Propagator::new(spectral, physical)?;
    let times = res.times(-t_star, t_star, step);
    let field = prop.wave_field(&data, &times, "strichartz_scaling")?;
    let norm = NormSpec::new(q);
    Ok(Point {
        value: mixed_norm(&field, &norm)?,
        tail: time_tail_estimate(&field, &norm)?,
    })
}

pub fn run_strichartz_scaling(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let setup = Setup::new(config)?;
    let n = setup.n;
    let nf = n as f64;
    let base = config.data_spec();
    let scales = config.sweep_values();
    let tol = config.tolerances;
    let mut report = ScenarioReport::new(config.scenario, tol);
    for norm in &config.norms {
        let q = norm.q;
        if q.is_infinite() {
            return Err(Error::Config("strichartz_scaling needs finite q".into()));
        }
        check_exponent(n, q, setup.nu0)?;
        let points: Vec<Point> = scales
            .par_iter()
            .map(|&m| point(&setup, &base.scaled(m), q))
            .collect::<Result<_>>()?;
        let predicted = (nf - 1.0) / 2.0 - (nf + 1.0) / q;
        let tag = format!("est_stri_q{}", exponent_tag(q));
        let mut table = ResultTable::new(&tag, "M", &["normalized", "time_tail"]);
        let mut normalized = Vec::with_capacity(scales.len());
        for (&m, p) in scales.iter().zip(&points) {
            let scaled = p.value / m.powf(predicted);
            normalized.push(scaled);
            table.push(m, p.value, vec![scaled, p.tail])?;
        }
        let fit = fit_loglog_slope(&table.points())?;
        table.fitted = Some(fit);
        let tail = points.iter().map(|p| p.tail).fold(0.0, f64::max);
        report.summary.push(
            SummaryRow::slope(
                format!("{tag}_slope_envelope"),
                CheckKind::SlopeUpper,
                predicted,
                &fit,
                tol.slope_envelope,
            )
            .with_tail(tail),
        );
        report.summary.push(
            SummaryRow::slope(
                format!("{tag}_slope_saturation"),
                CheckKind::SlopeLower,
                predicted,
                &fit,
                tol.slope_saturation,
            )
            .with_tail(tail),
        );
        report.summary.push(
            SummaryRow::ratio(format!("{tag}_ratio"), &normalized, tol.ratio_factor)
                .with_tail(tail),
        );
        report.tables.push(table);
        report
            .tables
            .push(schur_table(n, q, setup.nu0, SchurCase::LargeP)?);
    }
    Ok(report)
}

/// Partial sums of the dyadic Schur series, for display only.
pub(crate) fn schur_table(n: usize, q: f64, nu0: f64, case: SchurCase) -> Result<ResultTable> {
    let (a, b) = schur_exponents(n as i64, q, nu0, case);
    let mut table = ResultTable::new(
        format!("schur_q{}", exponent_tag(q)),
        "half_width",
        &["tail", "exponent_a", "exponent_b"],
    );
    for row in schur_partial_sums(a, b, SCHUR_J_MAX) {
        table.push(row.half_width as f64, row.partial, vec![row.tail, a, b])?;
    }
    Ok(table)
}
