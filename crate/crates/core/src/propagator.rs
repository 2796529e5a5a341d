//! Separated-variable wave evolution: mode decomposition, the distorted
//! Fourier transform, and exact spectral time stepping.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cross_section::{validate_positivity, CrossSectionQuadrature, SpectralMode};
use crate::cutoff::{chi, chi_on, lp_bump};
use crate::error::{Error, Result};
use crate::hankel::{
    check_tail, hankel_transform, kernel_value, radial_operator, required_spacing, support_spacing,
    GridKind, HankelKernel, RadialGrid, RadialProfile, NODES_PER_PERIOD,
};

/// Default relative tolerance for the mode-truncation residual of [`decompose`].
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Smallest frequency allowed in the support of half-wave data.
pub const MIN_SPECTRAL_SUPPORT: f64 = 1e-2;

/// Sample type of a profile: real for the sine evolution, complex for half waves.
pub trait Amplitude: Copy + Send + Sync + std::fmt::Debug + 'static {
    fn abs_sq(self) -> f64;
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
}

impl Amplitude for f64 {
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        s * self
    }
}

impl Amplitude for Complex64 {
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// a_{ν,ℓ}(r)
    Physical,
    /// b_{ν,ℓ}(ρ)
    Spectral,
}

/// Radial profiles, one per cross-section mode, on one shared grid.
#[derive(Debug, Clone)]
pub struct ModeCoefficients<T = f64> {
    pub modes: Arc<Vec<SpectralMode>>,
    pub grid: Arc<RadialGrid>,
    pub profiles: Vec<Vec<T>>,
    pub side: Side,
}

impl<T: Amplitude> ModeCoefficients<T> {
    pub fn new(
        modes: Arc<Vec<SpectralMode>>,
        grid: Arc<RadialGrid>,
        profiles: Vec<Vec<T>>,
        side: Side,
    ) -> Result<Self> {
        if profiles.len() != modes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} profiles for {} modes",
                profiles.len(),
                modes.len()
            )));
        }
        if profiles.iter().any(|p| p.len() != grid.len()) {
            return Err(Error::InvalidParameter(
                "every profile must have one sample per grid node".into(),
            ));
        }
        Ok(ModeCoefficients {
            modes,
            grid,
            profiles,
            side,
        })
    }

    pub fn zeros(modes: Arc<Vec<SpectralMode>>, grid: Arc<RadialGrid>, side: Side) -> Self {
        let profiles = vec![vec![T::zero(); grid.len()]; modes.len()];
        ModeCoefficients {
            modes,
            grid,
            profiles,
            side,
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn profile(&self, index: usize) -> RadialProfile<T> {
        RadialProfile {
            grid: self.grid.clone(),
            samples: self.profiles[index].clone(),
        }
    }

    /// Σ_{ν,ℓ} |a_{ν,ℓ}(r_i)|² at every node: the squared L²(Y) norm of the
    /// synthesized function on the sphere of radius r_i.
    pub fn pointwise_norm_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for p in &self.profiles {
            for (o, s) in out.iter_mut().zip(p) {
                *o += s.abs_sq();
            }
        }
        out
    }

    /// Σ_{ν,ℓ} ‖a_{ν,ℓ}‖² in L²(r^{n-1}dr).
    pub fn norm_sq(&self) -> f64 {
        self.pointwise_norm_sq()
            .iter()
            .zip(self.grid.weights())
            .map(|(s, w)| w * s)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ModeCoefficients {
            modes: self.modes.clone(),
            grid: self.grid.clone(),
            profiles: self
                .profiles
                .iter()
                .map(|p| p.iter().map(|x| x.scale(s)).collect())
                .collect(),
            side: self.side,
        }
    }

    /// Indices of modes whose profile is not identically zero.
    pub fn active_modes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.profiles[i].iter().any(|x| x.abs_sq() != 0.0))
            .collect()
    }

    /// The same coefficients with every identically zero mode dropped.
    pub fn restrict_to_active(&self) -> Self {
        let active = self.active_modes();
        ModeCoefficients {
            modes: Arc::new(active.iter().map(|&m| self.modes[m].clone()).collect()),
            grid: self.grid.clone(),
            profiles: active.iter().map(|&m| self.profiles[m].clone()).collect(),
            side: self.side,
        }
    }

    /// Synthesizes Σ a_{ν,ℓ}(r_i) Y_{ν,ℓ}(point) at one node.
    pub fn synthesize(&self, node: usize, point: &[f64]) -> T
    where
        T: std::ops::Add<Output = T>,
    {
        self.modes
            .iter()
            .zip(&self.profiles)
            .fold(T::zero(), |acc, (m, p)| acc + p[node].scale(m.eval(point)))
    }
}

impl ModeCoefficients<f64> {
    /// α·self + β·other on identical modes, grid and side.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid != other.grid {
            return Err(Error::InvalidParameter(
                "coefficients live on different grids".into(),
            ));
        }
        if self.len() != other.len() || self.side != other.side {
            return Err(Error::InvalidParameter(
                "incompatible coefficient sets".into(),
            ));
        }
        let profiles = self
            .profiles
            .iter()
            .zip(&other.profiles)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect())
            .collect();
        Ok(ModeCoefficients {
            modes: self.modes.clone(),
            grid: self.grid.clone(),
            profiles,
            side: self.side,
        })
    }

    /// ‖self − other‖ / max(‖self‖, ‖other‖).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let diff = self
            .combine(1.0, other, -1.0)
            .map(|d| d.l2_norm())
            .unwrap_or(f64::INFINITY);
        let scale = self.l2_norm().max(other.l2_norm());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Time-indexed states u(t_k, r, θ) in separated form.
#[derive(Debug, Clone)]
pub struct WaveField<T = f64> {
    pub times: Vec<f64>,
    pub states: Vec<ModeCoefficients<T>>,
    pub n: usize,
    pub nu0: f64,
    pub provenance: String,
    /// Upper edge of the data's spectral support, when known; bounds the
    /// time step needed to resolve the field.
    pub max_frequency: Option<f64>,
}

impl<T: Amplitude> WaveField<T> {
    pub fn new(
        times: Vec<f64>,
        states: Vec<ModeCoefficients<T>>,
        nu0: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::InvalidParameter(
                "a wave field needs one state per time and at least one time".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "times must be strictly ascending".into(),
            ));
        }
        let grid = states[0].grid.clone();
        if states
            .iter()
            .any(|s| (!Arc::ptr_eq(&s.grid, &grid) && *s.grid != *grid) || s.side != Side::Physical)
        {
            return Err(Error::InvalidParameter(
                "wave field states must share one physical grid".into(),
            ));
        }
        Ok(WaveField {
            n: grid.dimension(),
            times,
            states,
            nu0,
            provenance: provenance.into(),
            max_frequency: None,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.states[0].grid
    }

    /// Σ_{ν,ℓ}|u_{ν,ℓ}(t_k, r_i)|² as a (time × node) array.
    pub fn pointwise_norm_sq(&self) -> Array2<f64> {
        let nodes = self.grid().len();
        let mut out = Array2::zeros((self.times.len(), nodes));
        for (k, state) in self.states.iter().enumerate() {
            for (i, v) in state.pointwise_norm_sq().into_iter().enumerate() {
                out[[k, i]] = v;
            }
        }
        out
    }
}

/// Output of [`decompose`].
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub coefficients: ModeCoefficients,
    /// sqrt(∫(‖f(r,·)‖² − Σ|a(r)|²) r^{n-1}dr) / ‖f‖: mass missed by the mode set.
    pub residual: f64,
}

/// Projects f(r, θ) onto the modes: a_{ν,ℓ}(r) = ∫_Y f(r,θ) Y_{ν,ℓ}(θ) dσ.
///
/// `f` is called with the radius and a cross-section point in the
/// quadrature's convention (angle for circles, unit vector for spheres).
pub fn decompose<F>(
    f: F,
    modes: Arc<Vec<SpectralMode>>,
    grid: Arc<RadialGrid>,
    quadrature: &CrossSectionQuadrature,
    tolerance: f64,
) -> Result<Decomposition>
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    validate_positivity(&modes)?;
    let basis: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| quadrature.points.iter().map(|p| m.eval(p)).collect())
        .collect();
    let per_node: Result<Vec<(Vec<f64>, f64)>> = grid
        .nodes()
        .par_iter()
        .map(|&r| {
            let values: Vec<f64> = quadrature.points.iter().map(|p| f(r, p)).collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite sample at r = {r}"
                )));
            }
            let total: f64 = values
                .iter()
                .zip(&quadrature.weights)
                .map(|(v, w)| w * v * v)
                .sum();
            let coeffs = basis
                .iter()
                .map(|y| {
                    y.iter()
                        .zip(&values)
                        .zip(&quadrature.weights)
                        .map(|((y, v), w)| w * y * v)
                        .sum()
                })
                .collect();
            Ok((coeffs, total))
        })
        .collect();
    let per_node = per_node?;
    let mut profiles = vec![vec![0.0; grid.len()]; modes.len()];
    let mut full = 0.0;
    for (i, (coeffs, total)) in per_node.iter().enumerate() {
        for (m, c) in coeffs.iter().enumerate() {
            profiles[m][i] = *c;
        }
        full += grid.weights()[i] * total;
    }
    let coefficients = ModeCoefficients::new(modes, grid, profiles, Side::Physical)?;
    let captured = coefficients.norm_sq();
    let residual = if full == 0.0 {
        0.0
    } else {
        ((full - captured).max(0.0) / full).sqrt()
    };
    if residual > tolerance {
        return Err(Error::TruncationTooCoarse {
            residual,
            tolerance,
        });
    }
    Ok(Decomposition {
        coefficients,
        residual,
    })
}

/// Mode-wise Hankel transforms b_{ν,ℓ} = H_ν a_{ν,ℓ} onto `out_grid`. The
/// transform is its own inverse, so this also maps spectral data back.
pub fn distorted_fourier(
    coeffs: &ModeCoefficients,
    out_grid: &Arc<RadialGrid>,
) -> Result<ModeCoefficients> {
    let profiles: Result<Vec<Vec<f64>>> = coeffs
        .modes
        .par_iter()
        .zip(coeffs.profiles.par_iter())
        .map(|(mode, samples)| {
            let profile = RadialProfile {
                grid: coeffs.grid.clone(),
                samples: samples.clone(),
            };
            hankel_transform(mode.nu, &profile, out_grid).map(|p| p.samples)
        })
        .collect();
    let side = match coeffs.side {
        Side::Physical => Side::Spectral,
        Side::Spectral => Side::Physical,
    };
    ModeCoefficients::new(coeffs.modes.clone(), out_grid.clone(), profiles?, side)
}

/// Sign of the half-wave phase e^{±itρ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    Plus,
    Minus,
}

impl WaveSign {
    pub fn value(self) -> f64 {
        match self {
            WaveSign::Plus => 1.0,
            WaveSign::Minus => -1.0,
        }
    }
}

/// Exact spectral evolution from a fixed spectral grid to a fixed physical
/// grid. Kernel matrices are built on first use and cached per order ν.
#[derive(Debug)]
pub struct Propagator {
    spectral: Arc<RadialGrid>,
    physical: Arc<RadialGrid>,
    kernels: Mutex<HashMap<u64, Arc<HankelKernel>>>,
}

impl Propagator {
    pub fn new(spectral: Arc<RadialGrid>, physical: Arc<RadialGrid>) -> Result<Self> {
        if spectral.dimension() != physical.dimension() {
            return Err(Error::InvalidParameter(
                "spectral and physical grids have different dimensions".into(),
            ));
        }
        Ok(Propagator {
            spectral,
            physical,
            kernels: Mutex::new(HashMap::new()),
        })
    }

    pub fn spectral_grid(&self) -> &Arc<RadialGrid> {
        &self.spectral
    }

    pub fn physical_grid(&self) -> &Arc<RadialGrid> {
        &self.physical
    }

    pub fn kernel(&self, nu: f64) -> Result<Arc<HankelKernel>> {
        let key = nu.to_bits();
        if let Some(k) = self
            .kernels
            .lock()
            .expect("kernel cache poisoned")
            .get(&key)
        {
            return Ok(k.clone());
        }
        let built = Arc::new(HankelKernel::new(
            nu,
            self.spectral.clone(),
            self.physical.clone(),
        )?);
        Ok(self
            .kernels
            .lock()
            .expect("kernel cache poisoned")
            .entry(key)
            .or_insert(built)
            .clone())
    }

    /// Rejects data that is not spectral on this grid, has a non-negligible
    /// tail, or is too coarse for the phase (r + |t|)ρ up to `t_max`.
    pub fn check_data(&self, data: &ModeCoefficients, t_max: f64) -> Result<()> {
        if data.side != Side::Spectral {
            return Err(Error::InvalidParameter(
                "evolution needs spectral data".into(),
            ));
        }
        if !Arc::ptr_eq(&data.grid, &self.spectral) && *data.grid != *self.spectral {
            return Err(Error::InvalidParameter(
                "data is not sampled on the propagator's spectral grid".into(),
            ));
        }
        validate_positivity(&data.modes)?;
        let r_max = self.physical.span().1;
        let required = required_spacing(r_max + t_max.abs());
        for &m in &data.active_modes() {
            let samples = &data.profiles[m];
            check_tail(&self.spectral, samples)?;
            let spacing = support_spacing(&self.spectral, samples);
            if spacing > required {
                return Err(Error::OscillationUnderResolved { spacing, required });
            }
        }
        Ok(())
    }

    fn check_half_wave_support(&self, data: &ModeCoefficients) -> Result<()> {
        let lowest = data
            .active_modes()
            .iter()
            .filter_map(|&m| support_min(&self.spectral, &data.profiles[m]))
            .fold(f64::INFINITY, f64::min);
        if lowest < MIN_SPECTRAL_SUPPORT {
            return Err(Error::InvalidParameter(format!(
                "spectral support reaches {lowest:.3e}, below {MIN_SPECTRAL_SUPPORT:.0e}"
            )));
        }
        Ok(())
    }

    /// Applies a spectral multiplier m(t, ρ) to every active mode at every time and
    /// transforms back; zero modes stay zero.
    fn synthesize<M>(
        &self,
        data: &ModeCoefficients,
        times: &[f64],
        multiplier: M,
    ) -> Result<Vec<ModeCoefficients>>
    where
        M: Fn(f64, f64) -> f64 + Sync,
    {
        let t_max = times.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
        self.check_data(data, t_max)?;
        let rho = self.spectral.nodes();
        let mut states: Vec<ModeCoefficients> = times
            .iter()
            .map(|_| {
                ModeCoefficients::zeros(data.modes.clone(), self.physical.clone(), Side::Physical)
            })
            .collect();
        for m in data.active_modes() {
            let kernel = self.kernel(data.modes[m].nu)?;
            let b = &data.profiles[m];
            let columns = Array2::from_shape_fn((rho.len(), times.len()), |(i, k)| {
                multiplier(times[k], rho[i]) * b[i]
            });
            let out = kernel.apply_columns(&columns);
            for (k, state) in states.iter_mut().enumerate() {
                state.profiles[m] = out.column(k).to_vec();
            }
        }
        Ok(states)
    }

    /// u(t) = Σ H_ν[ρ^{-1} sin(tρ) b_{ν,ℓ}](r) Y_{ν,ℓ}.
    pub fn evolve(&self, data: &ModeCoefficients, t: f64) -> Result<ModeCoefficients> {
        Ok(self.evolve_times(data, &[t])?.remove(0))
    }

    pub fn evolve_times(
        &self,
        data: &ModeCoefficients,
        times: &[f64],
    ) -> Result<Vec<ModeCoefficients>> {
        self.synthesize(data, times, |t, rho| (t * rho).sin() / rho)
    }

    /// ∂ₜu(t) = Σ H_ν[cos(tρ) b_{ν,ℓ}](r) Y_{ν,ℓ}.
    pub fn velocity(&self, data: &ModeCoefficients, t: f64) -> Result<ModeCoefficients> {
        Ok(self
            .synthesize(data, &[t], |t, rho| (t * rho).cos())?
            .remove(0))
    }

    /// Sine evolution sampled at `times` as a wave field.
    pub fn wave_field(
        &self,
        data: &ModeCoefficients,
        times: &[f64],
        provenance: &str,
    ) -> Result<WaveField> {
        let states = self.evolve_times(data, times)?;
        let nu0 = validate_positivity(&data.modes)?;
        let mut field = WaveField::new(times.to_vec(), states, nu0, provenance)?;
        field.max_frequency = support_max(data);
        Ok(field)
    }

    /// H_ν[ρ^{-1} e^{±itρ} b_{ν,ℓ}](r) per mode.
    pub fn half_wave(
        &self,
        data: &ModeCoefficients,
        t: f64,
        sign: WaveSign,
    ) -> Result<ModeCoefficients<Complex64>> {
        Ok(self.half_wave_times(data, &[t], sign)?.remove(0))
    }

    pub fn half_wave_times(
        &self,
        data: &ModeCoefficients,
        times: &[f64],
        sign: WaveSign,
    ) -> Result<Vec<ModeCoefficients<Complex64>>> {
        self.check_half_wave_support(data)?;
        let s = sign.value();
        let re = self.synthesize(data, times, |t, rho| (s * t * rho).cos() / rho)?;
        let im = self.synthesize(data, times, |t, rho| (s * t * rho).sin() / rho)?;
        Ok(re
            .into_iter()
            .zip(im)
            .map(|(a, b)| ModeCoefficients {
                modes: a.modes.clone(),
                grid: a.grid.clone(),
                profiles: a
                    .profiles
                    .iter()
                    .zip(&b.profiles)
                    .map(|(x, y)| {
                        x.iter()
                            .zip(y)
                            .map(|(p, q)| Complex64::new(*p, *q))
                            .collect()
                    })
                    .collect(),
                side: Side::Physical,
            })
            .collect())
    }

    pub fn half_wave_field(
        &self,
        data: &ModeCoefficients,
        times: &[f64],
        sign: WaveSign,
        provenance: &str,
    ) -> Result<WaveField<Complex64>> {
        let states = self.half_wave_times(data, times, sign)?;
        let nu0 = validate_positivity(&data.modes)?;
        let mut field = WaveField::new(times.to_vec(), states, nu0, provenance)?;
        field.max_frequency = support_max(data);
        Ok(field)
    }
}

/// Smallest node carrying more than 1e-20 of the profile's L² mass.
pub fn support_min(grid: &RadialGrid, samples: &[f64]) -> Option<f64> {
    let total: f64 = samples
        .iter()
        .zip(grid.weights())
        .map(|(s, w)| w * s * s)
        .sum();
    if total == 0.0 {
        return None;
    }
    samples
        .iter()
        .zip(grid.weights())
        .zip(grid.nodes())
        .find(|((s, w), _)| *w * *s * *s > 1e-20 * total)
        .map(|(_, r)| *r)
}

/// Largest node carrying more than 1e-20 of any active profile's L² mass.
pub fn support_max(data: &ModeCoefficients) -> Option<f64> {
    let grid = &data.grid;
    data.active_modes()
        .iter()
        .filter_map(|&m| {
            let samples = &data.profiles[m];
            let total: f64 = samples
                .iter()
                .zip(grid.weights())
                .map(|(s, w)| w * s * s)
                .sum();
            samples
                .iter()
                .zip(grid.weights())
                .zip(grid.nodes())
                .rev()
                .find(|((s, w), _)| *w * *s * *s > 1e-20 * total)
                .map(|(_, r)| *r)
        })
        .reduce(f64::max)
}

/// Spectral state at time t: (ũ, ∂ₜũ) = (ρ^{-1} sin(tρ) b, cos(tρ) b).
pub fn spectral_state(
    data: &ModeCoefficients,
    t: f64,
) -> Result<(ModeCoefficients, ModeCoefficients)> {
    if data.side != Side::Spectral {
        return Err(Error::InvalidParameter(
            "spectral state needs spectral data".into(),
        ));
    }
    let rho = data.grid.nodes();
    let map = |f: &dyn Fn(f64) -> f64| ModeCoefficients {
        modes: data.modes.clone(),
        grid: data.grid.clone(),
        profiles: data
            .profiles
            .iter()
            .map(|p| p.iter().zip(rho).map(|(b, r)| f(*r) * b).collect())
            .collect(),
        side: Side::Spectral,
    };
    Ok((map(&|r| (t * r).sin() / r), map(&|r| (t * r).cos())))
}

/// ‖∂ₜu(t)‖²_{Ḣ⁰} + ‖u(t)‖²_{Ḣ¹}, evaluated on the spectral side.
pub fn energy(data: &ModeCoefficients, t: f64) -> Result<f64> {
    let (position, velocity) = spectral_state(data, t)?;
    Ok(sobolev_norm(&velocity, 0.0)?.powi(2) + sobolev_norm(&position, 1.0)?.powi(2))
}

/// (Σ_{ν,ℓ} ∫ ρ^{2s}|b_{ν,ℓ}(ρ)|² ρ^{n-1}dρ)^{1/2}.
pub fn sobolev_norm(spec: &ModeCoefficients, s: f64) -> Result<f64> {
    if spec.side != Side::Spectral {
        return Err(Error::InvalidParameter(
            "Sobolev norms need spectral data".into(),
        ));
    }
    let rho = spec.grid.nodes();
    let w = spec.grid.weights();
    let mut total = 0.0;
    for &m in &spec.active_modes() {
        let weighted: Vec<f64> = spec.profiles[m]
            .iter()
            .zip(rho)
            .map(|(b, r)| r.powf(s) * b)
            .collect();
        check_tail(&spec.grid, &weighted)?;
        total += weighted.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Multiplies every profile by bump(ρ/M).
pub fn frequency_localize<B: Fn(f64) -> f64>(
    spec: &ModeCoefficients,
    m: f64,
    bump: B,
) -> Result<ModeCoefficients> {
    if spec.side != Side::Spectral || !(m > 0.0) {
        return Err(Error::InvalidParameter(
            "frequency localization needs spectral data and M > 0".into(),
        ));
    }
    let cut: Vec<f64> = spec.grid.nodes().iter().map(|r| bump(r / m)).collect();
    Ok(ModeCoefficients {
        modes: spec.modes.clone(),
        grid: spec.grid.clone(),
        profiles: spec
            .profiles
            .iter()
            .map(|p| p.iter().zip(&cut).map(|(b, c)| b * c).collect())
            .collect(),
        side: Side::Spectral,
    })
}

/// Dyadic scales M = 2^j whose pieces φ(ρ/M) of the canonical partition
/// cover the grid span; their bumps sum to one on it.
pub fn dyadic_scales(grid: &RadialGrid) -> Vec<f64> {
    let (lo, hi) = grid.span();
    let a = lo.log2().floor() as i32;
    let b = hi.log2().ceil() as i32;
    (a..=b).map(|j| 2f64.powi(j)).collect()
}

/// The Littlewood–Paley piece of `spec` at scale M with the canonical bump.
pub fn littlewood_paley_piece(spec: &ModeCoefficients, m: f64) -> Result<ModeCoefficients> {
    frequency_localize(spec, m, lp_bump)
}

/// ‖A_ν F − ρ²F‖ / ‖ρ²F‖ for F(r) = (rρ)^{-(n-2)/2} J_ν(rρ), over the nodes at
/// least two decades from either end of a log-uniform grid.
pub fn verify_plane_wave(mode: &SpectralMode, rho: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency must be positive, got {rho}"
        )));
    }
    if !matches!(grid.kind(), GridKind::LogUniform { .. }) {
        return Err(Error::InvalidParameter(
            "plane-wave check needs a log-uniform grid".into(),
        ));
    }
    let (r_min, r_max) = grid.span();
    let (lo, hi) = (r_min * 100.0, r_max / 100.0);
    if lo >= hi {
        return Err(Error::InvalidSpan { r_min, r_max });
    }
    let n = grid.dimension();
    let f: Result<Vec<f64>> = grid
        .nodes()
        .iter()
        .map(|&r| kernel_value(mode.nu, n, r * rho))
        .collect();
    let profile = RadialProfile::new(grid.clone(), f?)?;
    let af = radial_operator(mode.nu, &profile)?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((r, w), (a, f)) in grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(af.samples.iter().zip(&profile.samples))
    {
        if *r >= lo && *r <= hi {
            let target = rho * rho * f;
            num += w * (a - target).powi(2);
            den += w * target * target;
        }
    }
    Ok((num / den).sqrt())
}

/// Spectral shape used by `mode_bump` initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// χ rescaled to [center − width, center + width].
    Chi,
    /// Gaussian with standard deviation `width`.
    Gaussian,
    /// Canonical Littlewood–Paley bump φ(ρ/center); `width` unused.
    LittlewoodPaley,
}

impl BumpShape {
    pub fn eval(self, rho: f64, center: f64, width: f64) -> f64 {
        match self {
            BumpShape::Chi => chi_on(rho, center, width),
            BumpShape::Gaussian => (-0.5 * ((rho - center) / width).powi(2)).exp(),
            BumpShape::LittlewoodPaley => lp_bump(rho / center),
        }
    }
}

/// Initial data described on the spectral side.
#[derive(Debug, Clone, PartialEq, serde::Deserialize, serde::Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSpec {
    /// One mode (eigenspace `nu_index`, 0-based; member `ell`, 1-based) with a
    /// spectral bump; all other modes vanish.
    ModeBump {
        nu_index: usize,
        ell: usize,
        rho_center: f64,
        rho_width: f64,
        shape: BumpShape,
    },
    /// f = H_{ν₀}χ in the lowest mode, so b = χ on [1, 2].
    CounterexampleChi { nu0: f64 },
}

impl DataSpec {
    /// Interval outside which the spectral profile is negligible (below
    /// e^{-40} for Gaussians, exactly zero otherwise).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DataSpec::ModeBump {
                rho_center,
                rho_width,
                shape,
                ..
            } => match shape {
                BumpShape::Chi => (rho_center - rho_width, rho_center + rho_width),
                BumpShape::Gaussian => (rho_center - 9.0 * rho_width, rho_center + 9.0 * rho_width),
                BumpShape::LittlewoodPaley => (0.5 * rho_center, 2.0 * rho_center),
            },
            DataSpec::CounterexampleChi { .. } => (1.0, 2.0),
        }
    }

    /// The same profile composed with ρ ↦ ρ/M. χ data becomes a `mode_bump`
    /// on the lowest eigenspace with the χ shape on [M, 2M].
    pub fn scaled(&self, m: f64) -> DataSpec {
        match *self {
            DataSpec::ModeBump {
                nu_index,
                ell,
                rho_center,
                rho_width,
                shape,
            } => DataSpec::ModeBump {
                nu_index,
                ell,
                rho_center: m * rho_center,
                rho_width: m * rho_width,
                shape,
            },
            DataSpec::CounterexampleChi { .. } => DataSpec::ModeBump {
                nu_index: 0,
                ell: 1,
                rho_center: 1.5 * m,
                rho_width: 0.5 * m,
                shape: BumpShape::Chi,
            },
        }
    }
}

/// Builds the spectral coefficients described by `spec` on `grid`.
pub fn spectral_data(
    modes: Arc<Vec<SpectralMode>>,
    grid: Arc<RadialGrid>,
    spec: &DataSpec,
) -> Result<ModeCoefficients> {
    let nu0 = validate_positivity(&modes)?;
    let mut coeffs = ModeCoefficients::zeros(modes.clone(), grid.clone(), Side::Spectral);
    let (index, profile): (usize, Box<dyn Fn(f64) -> f64>) = match *spec {
        DataSpec::ModeBump {
            nu_index,
            ell,
            rho_center,
            rho_width,
            shape,
        } => {
            if !(rho_center > 0.0 && rho_width > 0.0) {
                return Err(Error::InvalidParameter(
                    "bump center and width must be positive".into(),
                ));
            }
            let mut degrees: Vec<usize> = modes.iter().map(|m| m.degree).collect();
            degrees.dedup();
            let degree = *degrees.get(nu_index).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "nu_index {nu_index} out of range ({} eigenspaces)",
                    degrees.len()
                ))
            })?;
            let index = modes
                .iter()
                .position(|m| m.degree == degree && m.ell == ell)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "no mode with ell = {ell} in eigenspace {nu_index}"
                    ))
                })?;
            (
                index,
                Box::new(move |r| shape.eval(r, rho_center, rho_width)),
            )
        }
        DataSpec::CounterexampleChi { nu0: wanted } => {
            if (wanted - nu0).abs() > 1e-9 * nu0.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "data asks for nu0 = {wanted} but the cross-section gives {nu0}"
                )));
            }
            let index = modes
                .iter()
                .position(|m| m.nu == nu0)
                .expect("positivity check found the lowest mode");
            (index, Box::new(chi))
        }
    };
    coeffs.profiles[index] = grid.nodes().iter().map(|&r| profile(r)).collect();
    Ok(coeffs)
}

/// Oscillation period in t of data supported up to frequency ρ_max, and the
/// time step giving [`NODES_PER_PERIOD`] samples per period.
pub fn time_step(rho_max: f64) -> f64 {
    2.0 * PI / (NODES_PER_PERIOD * rho_max)
}
