//! Experiment configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cross_section::CrossSection;
use crate::error::{Error, Result};
use crate::norms::{NormSpec, WeightKind};
use crate::propagator::{BumpShape, DataSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Prop31,
    StrichartzScaling,
    Counterexample,
    Kss,
    LocalEnergy,
    Selftest,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Prop31,
        Scenario::StrichartzScaling,
        Scenario::Counterexample,
        Scenario::Kss,
        Scenario::LocalEnergy,
        Scenario::Selftest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Prop31 => "prop31",
            Scenario::StrichartzScaling => "strichartz_scaling",
            Scenario::Counterexample => "counterexample",
            Scenario::Kss => "kss",
            Scenario::LocalEnergy => "local_energy",
            Scenario::Selftest => "selftest",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        Scenario::ALL.into_iter().find(|x| x.as_str() == s)
    }

    /// Sweep used when the config gives none.
    pub fn default_sweep(self) -> Vec<f64> {
        let dyadic = |a: i32, b: i32| (a..=b).map(|j| 2f64.powi(j)).collect();
        match self {
            Scenario::Prop31 | Scenario::StrichartzScaling => dyadic(-6, 6),
            Scenario::Counterexample => dyadic(-8, -1),
            Scenario::Kss => dyadic(0, 8),
            Scenario::LocalEnergy => dyadic(-4, 6),
            Scenario::Selftest => Vec::new(),
        }
    }
}

/// Cross-section description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrossSectionSpec {
    Sphere {
        n: i64,
        #[serde(default)]
        v0: f64,
    },
    Circle {
        rho0: f64,
        #[serde(default)]
        v0: f64,
        #[serde(default = "two")]
        n: i64,
    },
    CircleWithPotential {
        samples: Vec<f64>,
        #[serde(default = "two")]
        n: i64,
    },
}

fn two() -> i64 {
    2
}

impl CrossSectionSpec {
    pub fn build(&self) -> Result<CrossSection> {
        match self {
            CrossSectionSpec::Sphere { n, v0 } => CrossSection::sphere(*n, *v0),
            CrossSectionSpec::Circle { rho0, v0, n } => CrossSection::circle(*rho0, *v0, *n),
            CrossSectionSpec::CircleWithPotential { samples, n } => {
                CrossSection::circle_with_potential(samples.clone(), *n)
            }
        }
    }
}

/// PASS thresholds; all recorded in the summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// One-sided slack on fitted slopes against an upper envelope.
    pub slope_envelope: f64,
    /// Two-sided slack on fitted slopes of saturating data.
    pub slope_saturation: f64,
    /// Largest max/min of normalized ratios across a sweep.
    pub ratio_factor: f64,
    /// Largest max/min across T of the bounded KSS regime.
    pub bounded_ratio_factor: f64,
    /// Largest T-slope of the bounded KSS regime.
    pub bounded_slope: f64,
    /// Largest relative residual of logarithmic fits.
    pub log_fit_residual: f64,
    /// Largest change of a fitted slope under doubling k_max or resolution.
    pub stability: f64,
    /// Largest distance in octaves between fitted and predicted crossovers.
    pub crossover_octaves: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope_envelope: 0.1,
            slope_saturation: 0.15,
            ratio_factor: 4.0,
            bounded_ratio_factor: 3.0,
            bounded_slope: 0.05,
            log_fit_residual: 0.15,
            stability: 0.02,
            crossover_octaves: 1.0,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            self.slope_envelope,
            self.slope_saturation,
            self.ratio_factor,
            self.bounded_ratio_factor,
            self.bounded_slope,
            self.log_fit_residual,
            self.stability,
            self.crossover_octaves,
        ];
        if all.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Config(
                "tolerances must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Options of the `kss` and `local_energy` scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KssOptions {
    pub betas: Vec<f64>,
    pub weight: WeightKind,
    /// T-growth slopes are fitted on T ≥ this value.
    pub t_fit_min: f64,
    /// Dyadic radii of the local-energy supremum (kss scenario only; the
    /// local_energy scenario sweeps `sweep`).
    pub radii: Vec<f64>,
    /// Frequency scales M of the independent data choices f_M with b_M(ρ) = b(ρ/M).
    pub data_scales: Vec<f64>,
}

impl Default for KssOptions {
    fn default() -> Self {
        KssOptions {
            betas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            weight: WeightKind::JapaneseBracket,
            t_fit_min: 16.0,
            radii: Scenario::LocalEnergy.default_sweep(),
            data_scales: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub cross_section: Option<CrossSectionSpec>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    /// Dyadic sweep values (R, M, ε or T depending on the scenario).
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub kss: KssOptions,
    /// Module restriction of the selftest scenario.
    #[serde(default)]
    pub module: Option<String>,
    /// Rerun with doubled k_max and doubled resolution and flag unstable slopes.
    #[serde(default = "yes")]
    pub stability_check: bool,
}

fn default_k_max() -> usize {
    2
}

fn default_ppd() -> usize {
    64
}

fn yes() -> bool {
    true
}

/// Lowest mode with χ on [1, 2].
pub fn default_data() -> DataSpec {
    DataSpec::ModeBump {
        nu_index: 0,
        ell: 1,
        rho_center: 1.5,
        rho_width: 0.5,
        shape: BumpShape::Chi,
    }
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(scenario: Scenario, cross_section: Option<CrossSectionSpec>) -> Self {
        ExperimentConfig {
            scenario,
            cross_section,
            data: None,
            sweep: Vec::new(),
            norms: Vec::new(),
            tolerances: Tolerances::default(),
            k_max: default_k_max(),
            points_per_decade: default_ppd(),
            output: None,
            kss: KssOptions::default(),
            module: None,
            stability_check: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The configured sweep, or the scenario default.
    pub fn sweep_values(&self) -> Vec<f64> {
        if self.sweep.is_empty() {
            self.scenario.default_sweep()
        } else {
            self.sweep.clone()
        }
    }

    pub fn data_spec(&self) -> DataSpec {
        self.data.clone().unwrap_or_else(default_data)
    }

    pub fn cross_section(&self) -> Result<CrossSection> {
        self.cross_section
            .as_ref()
            .ok_or_else(|| {
                Error::Config(format!(
                    "scenario {} needs a [cross_section] table",
                    self.scenario.as_str()
                ))
            })?
            .build()
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if self.points_per_decade < 8 {
            return Err(Error::Config("points_per_decade must be at least 8".into()));
        }
        let check_sorted = |name: &str, values: &[f64]| -> Result<()> {
            if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} values must be positive and finite"
                )));
            }
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config(format!("{name} must be sorted ascending")));
            }
            Ok(())
        };
        if self.scenario == Scenario::Selftest {
            return Ok(());
        }
        let sweep = self.sweep_values();
        if sweep.len() < 3 {
            return Err(Error::Config("a sweep needs at least 3 values".into()));
        }
        check_sorted("sweep", &sweep)?;
        let cross = self.cross_section()?;
        match self.scenario {
            Scenario::StrichartzScaling | Scenario::Counterexample if self.norms.is_empty() => {
                return Err(Error::Config(format!(
                    "scenario {} needs at least one [[norms]] entry",
                    self.scenario.as_str()
                )));
            }
            Scenario::Kss => {
                check_sorted("kss.radii", &self.kss.radii)?;
                check_sorted("kss.data_scales", &self.kss.data_scales)?;
                if self.kss.betas.is_empty() || self.kss.betas.iter().any(|b| !(*b >= 0.0)) {
                    return Err(Error::Config("kss.betas must be non-empty and >= 0".into()));
                }
            }
            Scenario::LocalEnergy => check_sorted("kss.data_scales", &self.kss.data_scales)?,
            _ => {}
        }
        for norm in &self.norms {
            norm.validate(cross.n)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let (lo, hi) = self.data_spec().support();
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!(
                "data support [{lo}, {hi}] must lie in (0, inf)"
            )));
        }
        Ok(())
    }
}
