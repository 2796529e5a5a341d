//! Growth of ‖u‖_{L^q([π/6, π/4]×{ε < r < 1}×Y)} as ε → 0 for f = H_{ν₀}χ in
//! the lowest mode, in the regime 0 < ν₀ < (n−2)/2.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::fit::{fit_linear, fit_loglog_slope};
use super::report::{CheckKind, ScenarioReport, SummaryRow};
use super::strichartz::schur_table;
use super::{exponent_tag, Setup};
use crate::error::{Error, Result};
use crate::norms::{
    admissible, mixed_norm, rhs_restriction_norm, scaling_exponent_p, NormSpec, ResultTable,
    SchurCase, TimeWindow,
};
use crate::propagator::{DataSpec, Propagator};

const T_MIN: f64 = PI / 6.0;
const T_MAX: f64 = PI / 4.0;
/// Time samples on [T_MIN, T_MAX] at base resolution.
const TIME_SAMPLES: f64 = 64.0;

fn point(setup: &Setup, spec: &DataSpec, q: f64, eps: f64) -> Result<f64> {
    let res = setup.resolution;
    let n = setup.n;
    let physical = std::sync::Arc::new(res.log(eps, 1.0, n)?);
    let spectral = res.spectral(spec.support(), 1.0 + T_MAX, n)?;
    let data = setup.data(spec, spectral.clone())?;
    let prop = Propagator::new(spectral, physical)?;
    let times = res.times(T_MIN, T_MAX, (T_MAX - T_MIN) / TIME_SAMPLES);
    let field = prop.wave_field(&data, &times, "counterexample")?;
    let norm = NormSpec::new(q).with_time_window(TimeWindow::Interval {
        t_min: T_MIN,
        t_max: T_MAX,
    });
    mixed_norm(&field, &norm)
}

pub fn run_counterexample(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let setup = Setup::new(config)?;
    let n = setup.n;
    let nf = n as f64;
    let nu0 = setup.nu0;
    if n < 3 || !(nu0 < (nf - 2.0) / 2.0) {
        return Err(Error::RegimeUnavailable(format!(
            "needs n >= 3 and 0 < nu0 < (n-2)/2, got n = {n}, nu0 = {nu0}"
        )));
    }
    let spec = match &config.data {
        None => DataSpec::CounterexampleChi { nu0 },
        Some(s @ DataSpec::CounterexampleChi { .. }) => s.clone(),
        Some(_) => {
            return Err(Error::Config(
                "counterexample data must be of type counterexample_chi".into(),
            ))
        }
    };
    let eps = config.sweep_values();
    if eps.iter().any(|e| !(*e < 1.0)) {
        return Err(Error::Config(
            "counterexample sweep values must be below 1".into(),
        ));
    }
    let tol = config.tolerances;
    let mut report = ScenarioReport::new(config.scenario, tol);
    let critical = 2.0 * nf / (nf - 2.0 - 2.0 * nu0);
    for norm in &config.norms {
        let q = norm.q;
        if q.is_infinite() {
            return Err(Error::Config("counterexample needs finite q".into()));
        }
        if q < critical * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "counterexample needs q >= 2n/(n-2-2 nu0) = {critical}, got {q}"
            )));
        }
        let lower = 2.0 * nf / (nf - 1.0);
        if !(q > lower) {
            return Err(Error::AdmissibilityViolated(format!(
                "q = {q} must exceed 2n/(n-1) = {lower}"
            )));
        }
        let p = scaling_exponent_p(n as i64, q);
        let spectral = setup.resolution.spectral(spec.support(), 1.0 + T_MAX, n)?;
        let rhs = rhs_restriction_norm(&setup.data(&spec, spectral)?, p)?;
        let (_, why) = admissible(n as i64, q, p, nu0);

        let values: Vec<f64> = eps
            .par_iter()
            .map(|&e| point(&setup, &spec, q, e))
            .collect::<Result<_>>()?;
        let tag = format!("counterexample_q{}", exponent_tag(q));
        let mut table = ResultTable::new(&tag, "epsilon", &["value_pow_q", "log_inv_epsilon"]);
        for (&e, &v) in eps.iter().zip(&values) {
            table.push(e, v, vec![v.powf(q), -e.ln()])?;
        }
        let boundary = (1.0 / q - (0.5 - (nu0 + 1.0) / nf)).abs() <= 1e-12;
        let note = format!("p = {p}; {}", why.reason());
        if boundary {
            let pts: Vec<(f64, f64)> = table
                .rows
                .iter()
                .map(|r| (r.extra[1], r.extra[0]))
                .collect();
            let fit = fit_linear(&pts)?;
            let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
            let residual = if fit.slope > 0.0 {
                fit.max_residual / scale
            } else {
                f64::INFINITY
            };
            report.summary.push(
                SummaryRow::new(
                    format!("{tag}_log_fit"),
                    CheckKind::Residual,
                    0.0,
                    residual,
                    tol.log_fit_residual,
                )
                .with_note(format!("{note}; growth rate {}", fit.slope)),
            );
            table.fitted = Some(fit);
        } else {
            let fit = fit_loglog_slope(&table.points())?;
            let predicted = nu0 - (nf - 2.0) / 2.0 + nf / q;
            report.summary.push(
                SummaryRow::slope(
                    format!("{tag}_slope"),
                    CheckKind::SlopeSaturated,
                    predicted,
                    &fit,
                    tol.slope_envelope,
                )
                .with_note(note),
            );
            table.fitted = Some(fit);
        }
        report.summary.push(
            SummaryRow::new(
                format!("{tag}_rhs_finite"),
                CheckKind::Bound,
                0.0,
                rhs,
                f64::MAX,
            )
            .with_note(format!("restriction norm with p = {p}")),
        );
        report.tables.push(table);
        let case = if p <= 2.0 {
            SchurCase::SmallP
        } else {
            SchurCase::LargeP
        };
        report.tables.push(schur_table(n, q, nu0, case)?);
    }
    Ok(report)
}
