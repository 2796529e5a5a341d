//! Dyadic sweeps that evaluate norms, fit log-log slopes and compare them
//! with predicted exponents; results go to CSV reports.

mod config;
mod counterexample;
mod fit;
mod kss;
mod prop31;
mod report;
mod selftest;
mod strichartz;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::cross_section::{validate_positivity, SpectralMode};
use crate::error::{Error, Result};
use crate::hankel::{make_log_grid, required_spacing, RadialGrid};
use crate::propagator::{spectral_data, DataSpec, ModeCoefficients};

pub use config::{
    default_data, CrossSectionSpec, ExperimentConfig, KssOptions, Scenario, Tolerances,
};
pub use counterexample::run_counterexample;
pub use fit::{fit_linear, fit_loglog_slope, SlopeFit};
pub use kss::{run_kss, run_local_energy};
pub use prop31::run_prop31;
pub use report::{
    emit_report, format_float, spread, CheckKind, Listing, ScenarioReport, SummaryRow, Verdict,
};
pub use selftest::{run_selftest, SELFTEST_MODULES};
pub use strichartz::run_strichartz_scaling;

/// Points per decade at which node densities take their base values.
pub const BASE_POINTS_PER_DECADE: usize = 64;

/// Gauss–Legendre order of linear panels.
const PANEL_ORDER: usize = 8;

/// Node densities derived from `points_per_decade`: log grids use it
/// directly, linear grids and time lattices scale their node counts by
/// ppd / [`BASE_POINTS_PER_DECADE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub points_per_decade: usize,
}

impl Resolution {
    pub fn new(points_per_decade: usize) -> Self {
        Resolution { points_per_decade }
    }

    pub fn factor(self) -> f64 {
        self.points_per_decade as f64 / BASE_POINTS_PER_DECADE as f64
    }

    pub fn log(self, a: f64, b: f64, n: usize) -> Result<RadialGrid> {
        make_log_grid(a, b, self.points_per_decade, n)
    }

    fn panels(a: f64, b: f64, spacing: f64) -> usize {
        // Adjacent order-8 nodes are at most 0.19 of a panel apart.
        ((b - a) / (5.0 * spacing)).ceil().max(1.0) as usize
    }

    /// Order-8 Gauss–Legendre panels on [a, b], adjacent nodes at most
    /// spacing/factor apart.
    pub fn linear(self, a: f64, b: f64, spacing: f64, n: usize) -> Result<RadialGrid> {
        let panels = Self::panels(a, b, spacing / self.factor());
        RadialGrid::linear_gauss(a, b, panels, PANEL_ORDER, n)
    }

    /// Spectral grid on `support` widened by a quarter of its width on both
    /// sides, fine enough for kernel phases up to `reach`·ρ at any factor.
    pub fn spectral(self, support: (f64, f64), reach: f64, n: usize) -> Result<Arc<RadialGrid>> {
        let (lo, hi) = support;
        let pad = 0.25 * (hi - lo);
        let a = (lo - pad).max(0.5 * lo);
        let b = hi + pad;
        let spacing = required_spacing(reach) / self.factor().max(1.0);
        let panels = Self::panels(a, b, spacing);
        Ok(Arc::new(RadialGrid::linear_gauss(
            a,
            b,
            panels,
            PANEL_ORDER,
            n,
        )?))
    }

    /// Uniform samples of [a, b] with step at most step/factor.
    pub fn times(self, a: f64, b: f64, step: f64) -> Vec<f64> {
        let count = ((b - a) / (step / self.factor())).ceil().max(1.0) as usize;
        (0..=count)
            .map(|k| a + (b - a) * k as f64 / count as f64)
            .collect()
    }
}

/// Step resolving frequencies up to rho_max with `per_period` samples.
pub(crate) fn step_for(rho_max: f64, per_period: f64) -> f64 {
    2.0 * PI / (per_period * rho_max)
}

/// Cross-section spectrum shared by every sweep point of a run.
pub(crate) struct Setup {
    pub modes: Arc<Vec<SpectralMode>>,
    pub nu0: f64,
    pub n: usize,
    pub resolution: Resolution,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let cross = config.cross_section()?;
        let modes = cross.spectrum(config.k_max)?;
        let nu0 = validate_positivity(&modes)?;
        Ok(Setup {
            modes: Arc::new(modes),
            nu0,
            n: cross.n,
            resolution: Resolution::new(config.points_per_decade),
        })
    }

    /// Spectral data on `grid`, restricted to its nonzero modes.
    pub fn data(&self, spec: &DataSpec, grid: Arc<RadialGrid>) -> Result<ModeCoefficients> {
        Ok(spectral_data(self.modes.clone(), grid, spec)?.restrict_to_active())
    }
}

/// Tag fragment for an exponent: "6", "2p5", "inf".
pub(crate) fn exponent_tag(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}").replace('.', "p")
    }
}

/// Runs the configured scenario once, without stability reruns.
pub fn run_once(config: &ExperimentConfig) -> Result<ScenarioReport> {
    config.validate()?;
    match config.scenario {
        Scenario::Prop31 => run_prop31(config),
        Scenario::StrichartzScaling => run_strichartz_scaling(config),
        Scenario::Counterexample => run_counterexample(config),
        Scenario::Kss => run_kss(config),
        Scenario::LocalEnergy => run_local_energy(config),
        Scenario::Selftest => run_selftest(config),
    }
}

/// Runs the scenario and, when `stability_check` is set, reruns it with
/// doubled k_max and doubled points per decade; slopes that move by the
/// stability tolerance or more are flagged UNCONVERGED.
pub fn run(config: &ExperimentConfig) -> Result<ScenarioReport> {
    let mut report = run_once(config)?;
    if config.stability_check && config.scenario != Scenario::Selftest {
        let mut doubled_k = config.clone();
        doubled_k.k_max *= 2;
        let mut doubled_res = config.clone();
        doubled_res.points_per_decade *= 2;
        let k = run_once(&doubled_k)?;
        let r = run_once(&doubled_res)?;
        report.mark_stability(&k, &r);
    }
    Ok(report)
}

/// Errors that mean the configuration cannot describe a valid run.
pub fn is_configuration_error(err: &Error) -> bool {
    matches!(
        err,
        Error::Config(_)
            | Error::AdmissibilityViolated(_)
            | Error::RegimeUnavailable(_)
            | Error::InvalidDimension(_)
            | Error::PositivityViolated { .. }
    )
}
