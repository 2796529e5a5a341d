//! Weighted space-time L² growth in T and the local energy supremum over
//! dyadic radii, for data normalized in Ḣ^{-1}.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::fit::{fit_linear, fit_loglog_slope};
use super::report::{CheckKind, ScenarioReport, SummaryRow};
use super::{exponent_tag, step_for, Setup};
use crate::error::{Error, Result};
use crate::hankel::RadialGrid;
use crate::norms::{
    local_energy_from_density, time_l2_density, weighted_norm, Evolution, ResultTable,
};
use crate::propagator::{sobolev_norm, DataSpec, ModeCoefficients, Propagator, WaveField};

/// Radial grid extends this many wavelengths beyond the largest time.
const RADIAL_MARGIN: f64 = 16.0;
/// Time samples per period of the largest frequency.
const SAMPLES_PER_PERIOD: f64 = 8.0;
/// Radial nodes per wavelength of the largest frequency, at base resolution.
const RADIAL_PER_PERIOD: f64 = 10.0;

fn normalized_data(
    setup: &Setup,
    spec: &DataSpec,
    grid: Arc<RadialGrid>,
) -> Result<ModeCoefficients> {
    let data = setup.data(spec, grid)?;
    let norm = sobolev_norm(&data, -1.0)?;
    Ok(data.scaled(1.0 / norm))
}

/// Largest relative gap between ‖u(t)‖_{L²(X)} on the grid and its exact
/// spectral value ‖ρ^{-1} sin(tρ) b‖, a bound on radial truncation.
fn radial_truncation(field: &WaveField, data: &ModeCoefficients) -> f64 {
    let grid = &data.grid;
    let b_sq = data.pointwise_norm_sq();
    field
        .times
        .iter()
        .zip(&field.states)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, state)| {
            let exact: f64 = grid
                .nodes()
                .iter()
                .zip(grid.weights())
                .zip(&b_sq)
                .map(|((rho, w), b)| w * b * ((t * rho).sin() / rho).powi(2))
                .sum();
            let sampled = state.norm_sq();
            (sampled.sqrt() - exact.sqrt()).abs() / exact.sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn run_kss(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let setup = Setup::new(config)?;
    let res = setup.resolution;
    let n = setup.n;
    let spec = config.data_spec();
    let opts = &config.kss;
    let ends = config.sweep_values();
    let t_end = *ends.last().expect("validated sweep");
    let (lo, hi) = spec.support();
    let r_max = t_end + RADIAL_MARGIN / lo;
    let spectral = res.spectral((lo, hi), r_max + t_end, n)?;
    let rho_top = spectral.span().1;
    let inner = res.log(1e-4 / hi, 1.0 / hi, n)?;
    let outer = res.linear(1.0 / hi, r_max, step_for(rho_top, RADIAL_PER_PERIOD), n)?;
    let physical = Arc::new(inner.concat(&outer)?);
    let data = normalized_data(&setup, &spec, spectral.clone())?;
    let prop = Propagator::new(spectral, physical)?;
    let times = res.times(0.0, t_end, step_for(rho_top, SAMPLES_PER_PERIOD));
    let field = prop.wave_field(&data, &times, "kss")?;
    let tail = radial_truncation(&field, &data);

    let tol = config.tolerances;
    let mut report = ScenarioReport::new(config.scenario, tol);
    let fitted_range = |t: f64| t >= opts.t_fit_min;
    if ends.iter().filter(|t| fitted_range(**t)).count() < 3 {
        return Err(Error::Config(format!(
            "kss needs 3 sweep values >= t_fit_min = {}",
            opts.t_fit_min
        )));
    }
    for &beta in &opts.betas {
        let values: Vec<f64> = ends
            .par_iter()
            .map(|&t| weighted_norm(&field, beta, t, opts.weight))
            .collect::<Result<_>>()?;
        let tag = format!("kss_beta{}", exponent_tag(beta));
        let mut table = ResultTable::new(&tag, "T", &["squared", "log_2_plus_t"]);
        for (&t, &v) in ends.iter().zip(&values) {
            table.push(t, v, vec![v * v, (2.0 + t).ln()])?;
        }
        let fit_pts: Vec<(f64, f64)> = table
            .points()
            .into_iter()
            .filter(|p| fitted_range(p.0))
            .collect();
        if (beta - 0.5).abs() < 1e-12 {
            let pts: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| fitted_range(r.key))
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
                .with_tail(tail)
                .with_note(format!("growth rate {}", fit.slope)),
            );
            table.fitted = Some(fit);
        } else if beta < 0.5 {
            let fit = fit_loglog_slope(&fit_pts)?;
            report.summary.push(
                SummaryRow::slope(
                    format!("{tag}_slope"),
                    CheckKind::SlopeUpper,
                    0.5 - beta,
                    &fit,
                    tol.slope_envelope,
                )
                .with_tail(tail),
            );
            table.fitted = Some(fit);
        } else {
            let fit = fit_loglog_slope(&fit_pts)?;
            report.summary.push(
                SummaryRow::slope(
                    format!("{tag}_slope"),
                    CheckKind::SlopeUpper,
                    0.0,
                    &fit,
                    tol.bounded_slope,
                )
                .with_tail(tail),
            );
            report.summary.push(
                SummaryRow::ratio(format!("{tag}_ratio"), &values, tol.bounded_ratio_factor)
                    .with_tail(tail),
            );
            table.fitted = Some(fit);
        }
        report.tables.push(table);
    }
    local_energy(config, &setup, &spec, &opts.radii, &mut report)?;
    Ok(report)
}

pub fn run_local_energy(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let setup = Setup::new(config)?;
    let spec = config.data_spec();
    let mut report = ScenarioReport::new(config.scenario, config.tolerances);
    local_energy(config, &setup, &spec, &config.sweep_values(), &mut report)?;
    Ok(report)
}

/// sup over `radii` of R^{-1/2}‖u‖_{L²(ℝ; L²(r ≤ R))} for each data scale.
fn local_energy_sup(setup: &Setup, spec: &DataSpec, radii: &[f64]) -> Result<Vec<f64>> {
    let res = setup.resolution;
    let n = setup.n;
    let (lo, hi) = spec.support();
    let r_last = *radii.last().expect("validated radii");
    let spectral = res.spectral((lo, hi), r_last, n)?;
    let rho_top = spectral.span().1;
    let wavelength = step_for(rho_top, RADIAL_PER_PERIOD);
    let mut grid = res.log(1e-3 * radii[0].min(1.0 / hi), radii[0], n)?;
    for w in radii.windows(2) {
        let spacing = wavelength.min(0.25 * (w[1] - w[0]));
        grid = grid.concat(&res.linear(w[0], w[1], spacing, n)?)?;
    }
    let physical = Arc::new(grid);
    let data = normalized_data(setup, spec, spectral.clone())?;
    let prop = Propagator::new(spectral, physical.clone())?;
    let density = time_l2_density(&prop, &data, Evolution::Sine)?;
    radii
        .iter()
        .map(|&r| local_energy_from_density(&physical, &density, r))
        .collect()
}

fn local_energy(
    config: &ExperimentConfig,
    setup: &Setup,
    spec: &DataSpec,
    radii: &[f64],
    report: &mut ScenarioReport,
) -> Result<()> {
    let scales = &config.kss.data_scales;
    let values: Vec<Vec<f64>> = scales
        .par_iter()
        .map(|&m| local_energy_sup(setup, &spec.scaled(m), radii))
        .collect::<Result<_>>()?;
    let mut sups = Vec::with_capacity(scales.len());
    for (&m, le) in scales.iter().zip(&values) {
        let tag = format!("est_locendec_m{}", exponent_tag(m));
        let mut table = ResultTable::new(&tag, "R", &[]);
        for (&r, &v) in radii.iter().zip(le) {
            table.push(r, v, vec![])?;
        }
        sups.push(le.iter().copied().fold(0.0, f64::max));
        report.tables.push(table);
    }
    report.summary.push(SummaryRow::ratio(
        "est_locendec_sup_ratio",
        &sups,
        config.tolerances.ratio_factor,
    ));
    Ok(())
}
