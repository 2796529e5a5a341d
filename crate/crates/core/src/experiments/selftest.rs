//! Quick closed-form checks of each module.

use std::f64::consts::PI;
use std::sync::Arc;

use super::config::ExperimentConfig;
use super::fit::fit_loglog_slope;
use super::report::{format_float, CheckKind, Listing, ScenarioReport, SummaryRow};
use crate::bessel::{
    bessel_j, envelope_fit_orders, envelope_regime_points, j, regime_envelope, schlafli_split,
    BesselRegime,
};
use crate::cross_section::{orthonormality_check, CrossSection};
use crate::error::{Error, Result};
use crate::hankel::{
    hankel_transform, make_log_grid, verify_plancherel, RadialGrid, RadialProfile,
};
use crate::norms::{admissible, Admissibility};
use crate::propagator::{spectral_data, BumpShape, DataSpec, Propagator};

pub const SELFTEST_MODULES: [&str; 6] = [
    "cross_section",
    "bessel",
    "hankel",
    "propagator",
    "norms",
    "experiments",
];

fn row(module: &str, check: &str, defect: f64, tolerance: f64) -> SummaryRow {
    SummaryRow::new(
        format!("selftest_{module}_{check}"),
        CheckKind::Bound,
        0.0,
        defect,
        tolerance,
    )
}

fn cross_section_rows() -> Result<Vec<SummaryRow>> {
    let sphere = CrossSection::sphere(4, 0.0)?;
    let modes = sphere.spectrum(3)?;
    let ortho = orthonormality_check(&modes, &sphere.quadrature(8));
    let circle = CrossSection::circle(1.0, 0.25, 2)?;
    let lowest = circle.spectrum(2)?[0].nu;
    Ok(vec![
        row("cross_section", "sphere_orthonormality", ortho, 1e-10),
        row(
            "cross_section",
            "circle_lowest_order",
            (lowest - 0.5).abs(),
            1e-12,
        ),
    ])
}

fn bessel_rows(envelope: f64) -> Result<Vec<SummaryRow>> {
    let mut closed = 0.0_f64;
    for k in 1..=400 {
        let x = 0.1 * k as f64;
        let exact = (2.0 / (PI * x)).sqrt() * x.sin();
        closed = closed.max((j(0.5, x)? - exact).abs());
    }
    let split = schlafli_split(2.3, 7.0, Some(0.1))?;
    let recombined = (split.oscillatory - split.exponential - j(2.3, 7.0)?).abs();
    let pieces = split.pieces.expect("split requested");
    let three = ((pieces[0] + pieces[1] + pieces[2]).re - split.oscillatory).abs();
    Ok(vec![
        row("bessel", "half_order_closed_form", closed, 1e-10),
        row("bessel", "schlafli_recombination", recombined, 1e-8),
        row("bessel", "three_piece_sum", three, 1e-8),
        row("bessel", "envelope_ratio", envelope, 1.0),
    ])
}

/// Points per regime of the bessel listing.
const LISTING_POINTS: usize = 16;

/// (ν, r, value, method, envelope, regime) over the envelope-fit orders;
/// also returns the largest |J_ν|/envelope seen.
fn bessel_listing() -> Result<(Listing, f64)> {
    use rayon::prelude::*;
    let mut args = Vec::new();
    for nu in envelope_fit_orders() {
        for regime in [
            BesselRegime::Small,
            BesselRegime::Transition,
            BesselRegime::Large,
        ] {
            for r in envelope_regime_points(nu, regime, LISTING_POINTS) {
                args.push((nu, r));
            }
        }
    }
    let rows: Vec<(Vec<String>, f64)> = args
        .par_iter()
        .map(|&(nu, r)| {
            let eval = bessel_j(nu, r)?;
            let env = regime_envelope(nu, r)?;
            let row = vec![
                format_float(nu),
                format_float(r),
                format_float(eval.value),
                eval.method.as_str().to_string(),
                format_float(env.bound),
                env.regime.as_str().to_string(),
            ];
            Ok((row, eval.value.abs() / env.bound))
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let listing = Listing {
        tag: "selftest_bessel_sweep".into(),
        header: ["nu", "r", "value", "method", "envelope", "regime"]
            .map(String::from)
            .to_vec(),
        rows: rows.into_iter().map(|r| r.0).collect(),
    };
    Ok((listing, worst))
}

fn hankel_rows() -> Result<Vec<SummaryRow>> {
    let physical = Arc::new(make_log_grid(1e-2, 4.0, 256, 3)?);
    let spectral = Arc::new(make_log_grid(1e-7, 32.0, 128, 3)?);
    let f = RadialProfile::from_fn(physical.clone(), |r| (-8.0 * (r - 2.0).powi(2)).exp());
    let isometry = verify_plancherel(0.5, &f, &spectral)?;
    let back = hankel_transform(0.5, &hankel_transform(0.5, &f, &spectral)?, &physical)?;
    let diff: f64 = back
        .samples
        .iter()
        .zip(&f.samples)
        .zip(physical.weights())
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum();
    Ok(vec![
        row("hankel", "plancherel", isometry, 1e-6),
        row("hankel", "involution", diff.sqrt() / f.l2_norm(), 1e-6),
    ])
}

fn propagator_rows() -> Result<Vec<SummaryRow>> {
    let modes = Arc::new(CrossSection::sphere(3, 0.0)?.spectrum(1)?);
    let t = 5.0;
    // Gaussian data decays like e^{-(0.2 r)²/2} in r, negligible at the outer end.
    let spec = DataSpec::ModeBump {
        nu_index: 0,
        ell: 1,
        rho_center: 2.0,
        rho_width: 0.2,
        shape: BumpShape::Gaussian,
    };
    let spectral = Arc::new(RadialGrid::linear_gauss(0.2, 3.8, 60, 8, 3)?);
    let inner = make_log_grid(1e-4, 1.0, 64, 3)?;
    let outer = RadialGrid::linear_gauss(1.0, 40.0, 60, 8, 3)?;
    let physical = Arc::new(inner.concat(&outer)?);
    let data = spectral_data(modes, spectral.clone(), &spec)?;
    let prop = Propagator::new(spectral.clone(), physical)?;
    let state = prop.evolve(&data, t)?;
    let exact: f64 = spectral
        .nodes()
        .iter()
        .zip(spectral.weights())
        .zip(data.pointwise_norm_sq())
        .map(|((rho, w), b)| w * b * ((t * rho).sin() / rho).powi(2))
        .sum();
    let defect = (state.norm_sq().sqrt() - exact.sqrt()).abs() / exact.sqrt();
    Ok(vec![row("propagator", "plancherel_in_space", defect, 1e-6)])
}

fn norms_rows() -> Vec<SummaryRow> {
    let cases = [
        ((3, 6.0, 1.5, 1.0), Admissibility::Admissible),
        ((2, 4.0, 2.0, 1.0), Admissibility::LowerBound),
        ((4, 6.0, 2.0, 1.0), Admissibility::Scaling),
        ((5, 16.0, 32.0 / 29.0, 0.25), Admissibility::AdditionalBound),
    ];
    let wrong = cases
        .iter()
        .filter(|((n, q, p, nu0), want)| admissible(*n, *q, *p, *nu0).1 != *want)
        .count();
    vec![row("norms", "admissibility_cases", wrong as f64, 0.5)]
}

fn experiments_rows() -> Result<Vec<SummaryRow>> {
    let pts: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let x = 2f64.powi(k);
            (x, 3.0 * x.powf(-0.75))
        })
        .collect();
    let fit = fit_loglog_slope(&pts)?;
    Ok(vec![row(
        "experiments",
        "power_law_slope",
        (fit.slope + 0.75).abs(),
        1e-12,
    )])
}

pub fn run_selftest(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let wanted: Vec<&str> = match config.module.as_deref() {
        None => SELFTEST_MODULES.to_vec(),
        Some(m) if SELFTEST_MODULES.contains(&m) => vec![m],
        Some(m) => {
            return Err(Error::Config(format!(
                "unknown module {m}; expected one of {}",
                SELFTEST_MODULES.join(", ")
            )))
        }
    };
    let mut report = ScenarioReport::new(config.scenario, config.tolerances);
    for module in wanted {
        let rows = match module {
            "cross_section" => cross_section_rows()?,
            "bessel" => {
                let (listing, envelope) = bessel_listing()?;
                report.listings.push(listing);
                bessel_rows(envelope)?
            }
            "hankel" => hankel_rows()?,
            "propagator" => propagator_rows()?,
            "norms" => norms_rows(),
            _ => experiments_rows()?,
        };
        report.summary.extend(rows);
    }
    Ok(report)
}
