//! Spacetime norms of wave fields: mixed L^q_t L^q_rad(L²_sph), the
//! restriction right-hand side, local energy, weighted L² norms, and the
//! admissibility predicate for (n, q, p, ν₀).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::SlopeFit;
use crate::hankel::{check_tail, RadialGrid};
use crate::propagator::{
    support_min, time_step, Amplitude, ModeCoefficients, Propagator, Side, WaveField, WaveSign,
    MIN_SPECTRAL_SUPPORT,
};

/// Spatial weight multiplying u.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    #[default]
    None,
    /// ⟨r⟩^{-β} with ⟨r⟩ = (1 + r²)^{1/2}.
    JapaneseBracket { beta: f64 },
    /// r^{-β}.
    PurePower { beta: f64 },
}

impl Weight {
    pub fn beta(self) -> f64 {
        match self {
            Weight::None => 0.0,
            Weight::JapaneseBracket { beta } | Weight::PurePower { beta } => beta,
        }
    }

    pub fn factor(self, r: f64) -> f64 {
        match self {
            Weight::None => 1.0,
            Weight::JapaneseBracket { beta } => (1.0 + r * r).powf(-beta / 2.0),
            Weight::PurePower { beta } => r.powf(-beta),
        }
    }

    fn check(self, n: usize) -> Result<()> {
        let beta = self.beta();
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must be >= 0, got {beta}"
            )));
        }
        if let Weight::PurePower { beta } = self {
            if beta >= n as f64 / 2.0 {
                return Err(Error::WeightNotIntegrable { beta, n });
            }
        }
        Ok(())
    }
}

/// Which weight family [`weighted_norm`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    JapaneseBracket,
    PurePower,
}

impl WeightKind {
    pub fn with_beta(self, beta: f64) -> Weight {
        match self {
            WeightKind::JapaneseBracket => Weight::JapaneseBracket { beta },
            WeightKind::PurePower => Weight::PurePower { beta },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeWindow {
    /// Every sample of the field; for full-time norms, the symmetric window
    /// [-T*, T*] with a tail estimate beyond it.
    #[default]
    Symmetric,
    Interval {
        t_min: f64,
        t_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWindow {
    #[default]
    Full,
    /// Nodes with r_min ≤ r ≤ r_max.
    Interval { r_min: f64, r_max: f64 },
}

impl RadialWindow {
    fn contains(self, r: f64) -> bool {
        match self {
            RadialWindow::Full => true,
            RadialWindow::Interval { r_min, r_max } => r >= r_min && r <= r_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// Time and radial exponent; `inf` for the supremum.
    pub q: f64,
    /// Exponent of the spectral right-hand side.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub time_window: TimeWindow,
    #[serde(default)]
    pub radial_window: RadialWindow,
    #[serde(default)]
    pub weight: Weight,
}

fn default_p() -> f64 {
    2.0
}

impl NormSpec {
    pub fn new(q: f64) -> Self {
        NormSpec {
            q,
            p: 2.0,
            time_window: TimeWindow::Symmetric,
            radial_window: RadialWindow::Full,
            weight: Weight::None,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_time_window(mut self, w: TimeWindow) -> Self {
        self.time_window = w;
        self
    }

    pub fn with_radial_window(mut self, w: RadialWindow) -> Self {
        self.radial_window = w;
        self
    }

    pub fn with_weight(mut self, w: Weight) -> Self {
        self.weight = w;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.q >= 1.0) || !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm exponents must be >= 1, got q = {}, p = {}",
                self.q, self.p
            )));
        }
        if let TimeWindow::Interval { t_min, t_max } = self.time_window {
            if !(t_min < t_max) {
                return Err(Error::InvalidParameter(format!(
                    "time window [{t_min}, {t_max}] is not ordered"
                )));
            }
        }
        if let RadialWindow::Interval { r_min, r_max } = self.radial_window {
            if !(r_min >= 0.0 && r_min < r_max) {
                return Err(Error::InvalidSpan { r_min, r_max });
            }
        }
        self.weight.check(n)
    }
}

/// ∫_a^b of the piecewise-linear interpolant through (times, values).
pub fn integrate_window(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..times.len().saturating_sub(1) {
        let (t0, t1) = (times[k], times[k + 1]);
        let lo = a.max(t0);
        let hi = b.min(t1);
        if hi <= lo {
            continue;
        }
        let at = |t: f64| values[k] + (values[k + 1] - values[k]) * (t - t0) / (t1 - t0);
        total += 0.5 * (hi - lo) * (at(lo) + at(hi));
    }
    total
}

fn window_bounds<T>(field: &WaveField<T>, window: TimeWindow) -> Result<(f64, f64)> {
    let first = field.times[0];
    let last = *field.times.last().expect("wave fields are non-empty");
    match window {
        TimeWindow::Symmetric => Ok((first, last)),
        TimeWindow::Interval { t_min, t_max } => {
            let slack = 1e-12 * (1.0 + t_min.abs().max(t_max.abs()));
            if first > t_min + slack || last < t_max - slack {
                return Err(Error::InvalidParameter(format!(
                    "field samples [{first}, {last}] do not cover the window [{t_min}, {t_max}]"
                )));
            }
            Ok((t_min, t_max))
        }
    }
}

/// Fails when consecutive samples inside [a, b] are further apart than the
/// 6-per-period step of the data's largest frequency.
fn check_time_resolution<T>(field: &WaveField<T>, a: f64, b: f64) -> Result<()> {
    let Some(rho_max) = field.max_frequency else {
        return Ok(());
    };
    let required = time_step(rho_max);
    let spacing = field
        .times
        .windows(2)
        .filter(|w| w[1] > a && w[0] < b)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);
    if spacing > required * (1.0 + 1e-9) {
        return Err(Error::UnderResolvedTime { spacing, required });
    }
    Ok(())
}

/// g(t_k) = ∫ (w(r)‖u(t_k, r, ·)‖_{L²(Y)})^q r^{n-1}dr over the radial window,
/// or the supremum in r when q = ∞.
fn radial_profile<T: Amplitude>(field: &WaveField<T>, spec: &NormSpec) -> Vec<f64> {
    let grid = field.grid();
    let factors: Vec<(f64, f64)> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&r, &w)| {
            if spec.radial_window.contains(r) {
                (w, spec.weight.factor(r).powi(2))
            } else {
                (0.0, 0.0)
            }
        })
        .collect();
    let q = spec.q;
    field
        .states
        .par_iter()
        .map(|state| {
            let dens = state.pointwise_norm_sq();
            if q.is_infinite() {
                dens.iter()
                    .zip(&factors)
                    .filter(|(_, (_, m))| *m > 0.0)
                    .map(|(d, (_, m))| (m * d).sqrt())
                    .fold(0.0, f64::max)
            } else {
                dens.iter()
                    .zip(&factors)
                    .map(|(d, (w, m))| {
                        if *w == 0.0 {
                            0.0
                        } else {
                            w * (m * d).powf(q / 2.0)
                        }
                    })
                    .sum()
            }
        })
        .collect()
}

/// (∫ ∫ (w(r)‖u(t,r,·)‖_{L²(Y)})^q r^{n-1}dr dt)^{1/q}: trapezoid in t over the
/// time window, grid weights in r over the radial window, and the maximum over
/// samples when q = ∞.
pub fn mixed_norm<T: Amplitude>(field: &WaveField<T>, spec: &NormSpec) -> Result<f64> {
    spec.validate(field.n)?;
    let (a, b) = window_bounds(field, spec.time_window)?;
    check_time_resolution(field, a, b)?;
    let g = radial_profile(field, spec);
    if spec.q.is_infinite() {
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        return Ok(field
            .times
            .iter()
            .zip(&g)
            .filter(|(t, _)| **t >= a - slack && **t <= b + slack)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max));
    }
    Ok(integrate_window(&field.times, &g, a, b).powf(1.0 / spec.q))
}

/// Relative error of [`mixed_norm`] from truncating time to the sampled
/// window: g(t) is fitted as C|t|^{-α} on the last quarter of each side and the
/// fitted tail is integrated to infinity. Infinite when the fit does not decay
/// faster than |t|^{-1}, zero for q = ∞.
pub fn time_tail_estimate<T: Amplitude>(field: &WaveField<T>, spec: &NormSpec) -> Result<f64> {
    spec.validate(field.n)?;
    if spec.q.is_infinite() {
        return Ok(0.0);
    }
    let g = radial_profile(field, spec);
    let first = field.times[0];
    let last = *field.times.last().expect("wave fields are non-empty");
    let inside = integrate_window(&field.times, &g, first, last);
    if inside == 0.0 {
        return Ok(0.0);
    }
    let mut tail = 0.0;
    for (end, sign) in [(last, 1.0), (first, -1.0)] {
        if sign * end <= 0.0 {
            continue;
        }
        let edge = end.abs();
        let pts: Vec<(f64, f64)> = field
            .times
            .iter()
            .zip(&g)
            .filter(|(t, v)| sign * **t >= 0.75 * edge && **v > 0.0)
            .map(|(t, v)| (t.abs().ln(), v.ln()))
            .collect();
        if pts.len() < 3 {
            return Ok(f64::INFINITY);
        }
        let (slope, intercept) = least_squares(&pts);
        let alpha = -slope;
        if alpha <= 1.0 {
            return Ok(f64::INFINITY);
        }
        tail += intercept.exp() * edge.powf(1.0 - alpha) / (alpha - 1.0);
    }
    Ok((1.0 + tail / inside).powf(1.0 / spec.q) - 1.0)
}

/// Ordinary least squares y = slope·x + intercept.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Which time evolution a Plancherel density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evolution {
    /// u(t) = H_ν[ρ^{-1} sin(tρ) b].
    Sine,
    /// H_ν[ρ^{-1} e^{±itρ} b].
    HalfWave(WaveSign),
}

/// ∫_ℝ Σ|u_{ν,ℓ}(t, r_i)|² dt at every physical node, by the Plancherel
/// identity in t: 2π∫|K(r_iρ) ρ^{n-2} b(ρ)|²dρ for half waves and half of that
/// for the sine evolution.
pub fn time_l2_density(
    propagator: &Propagator,
    data: &ModeCoefficients,
    evolution: Evolution,
) -> Result<Vec<f64>> {
    propagator.check_data(data, 0.0)?;
    let spectral = propagator.spectral_grid();
    let physical = propagator.physical_grid();
    let active = data.active_modes();
    for &m in &active {
        if let Some(lo) = support_min(spectral, &data.profiles[m]) {
            if lo < MIN_SPECTRAL_SUPPORT {
                return Err(Error::InvalidParameter(format!(
                    "spectral support reaches {lo:.3e}, below {MIN_SPECTRAL_SUPPORT:.0e}"
                )));
            }
        }
    }
    let scale = match evolution {
        Evolution::Sine => PI,
        Evolution::HalfWave(_) => 2.0 * PI,
    };
    let n = spectral.dimension() as i32;
    let mut density = vec![0.0; physical.len()];
    for &m in &active {
        let kernel = propagator.kernel(data.modes[m].nu)?;
        let matrix = kernel.matrix();
        // M_ij = K(r_i ρ_j) w_j, so K² w_j = M_ij² / w_j.
        let spectral_factor: Vec<f64> = data.profiles[m]
            .iter()
            .zip(spectral.nodes())
            .zip(spectral.weights())
            .map(|((b, rho), w)| {
                if *w > 0.0 {
                    b * b * rho.powi(n - 3) / w
                } else {
                    0.0
                }
            })
            .collect();
        let per_node: Vec<f64> = (0..physical.len())
            .into_par_iter()
            .map(|i| {
                matrix
                    .row(i)
                    .iter()
                    .zip(&spectral_factor)
                    .map(|(k, f)| k * k * f)
                    .sum::<f64>()
            })
            .collect();
        for (d, v) in density.iter_mut().zip(per_node) {
            *d += scale * v;
        }
    }
    Ok(density)
}

/// ‖w(r) u‖_{L²(ℝ; L²_rad(L²_sph))} over the radial window, from a density of
/// [`time_l2_density`] on `grid`.
pub fn full_time_l2_norm(grid: &RadialGrid, density: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.validate(grid.dimension())?;
    if spec.q != 2.0 || spec.time_window != TimeWindow::Symmetric {
        return Err(Error::InvalidParameter(
            "the Plancherel shortcut covers q = 2 over all time only".into(),
        ));
    }
    if density.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "density does not match the grid".into(),
        ));
    }
    let total: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(density)
        .filter(|((r, _), _)| spec.radial_window.contains(**r))
        .map(|((r, w), d)| w * spec.weight.factor(*r).powi(2) * d)
        .sum();
    Ok(total.sqrt())
}

/// (Σ_{ν,ℓ}|b_{ν,ℓ}(ρ_j)|²)^{1/2} after tail-checking every active profile.
fn spectral_magnitude(data: &ModeCoefficients) -> Result<Vec<f64>> {
    if data.side != Side::Spectral {
        return Err(Error::InvalidParameter(
            "expected spectral coefficients".into(),
        ));
    }
    for &m in &data.active_modes() {
        check_tail(&data.grid, &data.profiles[m])?;
    }
    Ok(data
        .pointwise_norm_sq()
        .into_iter()
        .map(f64::sqrt)
        .collect())
}

/// ‖ρ^{-1/p} f̂‖_{L^p_{ρ^{n-1}dρ}(L²_sph)}.
pub fn rhs_restriction_norm(data: &ModeCoefficients, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let mag = spectral_magnitude(data)?;
    if p.is_infinite() {
        return Ok(mag.iter().copied().fold(0.0, f64::max));
    }
    let grid = &data.grid;
    let sum: f64 = mag
        .iter()
        .zip(grid.nodes())
        .zip(grid.weights())
        .map(|((b, rho), w)| if *b == 0.0 { 0.0 } else { w * b.powf(p) / rho })
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// ‖(Σ|b_{ν,ℓ}|²)^{1/2}‖_{L^p(dρ)} with plain Lebesgue measure in ρ.
pub fn spectral_lebesgue_norm(data: &ModeCoefficients, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let mag = spectral_magnitude(data)?;
    if p.is_infinite() {
        return Ok(mag.iter().copied().fold(0.0, f64::max));
    }
    let grid = &data.grid;
    let n = grid.dimension() as i32;
    let sum: f64 = mag
        .iter()
        .zip(grid.nodes())
        .zip(grid.weights())
        .map(|((b, rho), w)| {
            if *b == 0.0 {
                0.0
            } else {
                w * b.powf(p) * rho.powi(1 - n)
            }
        })
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// R^{-1/2}‖u‖_{L²(window; L²((0,R]×Y))} from time samples.
pub fn local_energy_functional<T: Amplitude>(field: &WaveField<T>, big_r: f64) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "R must be positive, got {big_r}"
        )));
    }
    let spec = NormSpec::new(2.0).with_radial_window(RadialWindow::Interval {
        r_min: 0.0,
        r_max: big_r,
    });
    Ok(mixed_norm(field, &spec)? / big_r.sqrt())
}

/// R^{-1/2}‖u‖_{L²(ℝ; L²((0,R]×Y))} from a [`time_l2_density`].
pub fn local_energy_from_density(grid: &RadialGrid, density: &[f64], big_r: f64) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "R must be positive, got {big_r}"
        )));
    }
    let spec = NormSpec::new(2.0).with_radial_window(RadialWindow::Interval {
        r_min: 0.0,
        r_max: big_r,
    });
    Ok(full_time_l2_norm(grid, density, &spec)? / big_r.sqrt())
}

/// ‖w_β(r) u‖_{L²([0,T]; L²(X))} with w_β = ⟨r⟩^{-β} or r^{-β}.
pub fn weighted_norm<T: Amplitude>(
    field: &WaveField<T>,
    beta: f64,
    t_end: f64,
    kind: WeightKind,
) -> Result<f64> {
    let spec = NormSpec::new(2.0)
        .with_time_window(TimeWindow::Interval {
            t_min: 0.0,
            t_max: t_end,
        })
        .with_weight(kind.with_beta(beta));
    mixed_norm(field, &spec)
}

/// The first condition an exponent tuple fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    /// n ≥ 2, q, p ≥ 1 and ν₀ > 0 do not all hold.
    OutOfDomain,
    /// q > 2n/(n-1) fails.
    LowerBound,
    /// (n+1)/q = (n-1)/p' fails.
    Scaling,
    /// q < 2n/(n-2-2ν₀) fails while ν₀ < (n-2)/2.
    AdditionalBound,
}

impl Admissibility {
    pub fn reason(self) -> &'static str {
        match self {
            Admissibility::Admissible => "admissible",
            Admissibility::OutOfDomain => "requires n >= 2, q >= 1, p >= 1, nu0 > 0",
            Admissibility::LowerBound => "q must exceed 2n/(n-1)",
            Admissibility::Scaling => "(n+1)/q must equal (n-1)/p'",
            Admissibility::AdditionalBound => "q must stay below 2n/(n-2-2 nu0) when nu0 < (n-2)/2",
        }
    }
}

/// Whether (q, p) is admissible on an n-dimensional cone with lowest order ν₀.
/// The scaling equality is checked to relative 1e-12.
pub fn admissible(n: i64, q: f64, p: f64, nu0: f64) -> (bool, Admissibility) {
    let fail = |c| (false, c);
    if n < 2 || !(q >= 1.0) || !(p >= 1.0) || !(nu0 > 0.0) {
        return fail(Admissibility::OutOfDomain);
    }
    let nf = n as f64;
    if !(q > 2.0 * nf / (nf - 1.0)) {
        return fail(Admissibility::LowerBound);
    }
    let lhs = (nf + 1.0) / q;
    let rhs = (nf - 1.0) * (1.0 - 1.0 / p);
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
        return fail(Admissibility::Scaling);
    }
    if nu0 < (nf - 2.0) / 2.0 && !(q < 2.0 * nf / (nf - 2.0 - 2.0 * nu0)) {
        return fail(Admissibility::AdditionalBound);
    }
    (true, Admissibility::Admissible)
}

/// p determined by the scaling equality (n+1)/q = (n-1)/p'.
pub fn scaling_exponent_p(n: i64, q: f64) -> f64 {
    let inv_p_prime = (n as f64 + 1.0) / ((n as f64 - 1.0) * q);
    1.0 / (1.0 - inv_p_prime)
}

/// Range of p in the dyadic summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchurCase {
    /// 1 ≤ p ≤ 2.
    SmallP,
    /// p ≥ 2.
    LargeP,
}

/// Exponents (a, b) of the summand min{(RM)^a, (RM)^{-b}}.
pub fn schur_exponents(n: i64, q: f64, nu0: f64, case: SchurCase) -> (f64, f64) {
    let nf = n as f64;
    let a = nf / q + nu0 - (nf - 2.0) / 2.0;
    let b = match case {
        SchurCase::SmallP => {
            (3.0 * nf - 4.0) / 6.0 * (1.0 - 2.0 * (3.0 * nf - 1.0) / ((3.0 * nf - 4.0) * q))
        }
        SchurCase::LargeP => (nf - 1.0) / 2.0 * (1.0 - 2.0 * nf / ((nf - 1.0) * q)),
    };
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchurRow {
    /// Terms with |log₂(RM)| ≤ `half_width` are summed.
    pub half_width: u32,
    pub partial: f64,
    /// Geometric bound on the omitted terms; infinite when a or b ≤ 0.
    pub tail: f64,
}

/// Partial sums Σ_{|j| ≤ J} min{2^{ja}, 2^{-jb}} for J = 0..=j_max.
pub fn schur_partial_sums(a: f64, b: f64, j_max: u32) -> Vec<SchurRow> {
    let term = |j: i64| {
        let x = j as f64;
        (x * a).exp2().min((-x * b).exp2())
    };
    let mut partial = term(0);
    let mut rows = Vec::with_capacity(j_max as usize + 1);
    for half_width in 0..=j_max {
        if half_width > 0 {
            let j = half_width as i64;
            partial += term(j) + term(-j);
        }
        let tail = if a > 0.0 && b > 0.0 {
            let next = half_width as f64 + 1.0;
            (-next * b).exp2() / (1.0 - (-b).exp2()) + (-next * a).exp2() / (1.0 - (-a).exp2())
        } else {
            f64::INFINITY
        };
        rows.push(SchurRow {
            half_width,
            partial,
            tail,
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub key: f64,
    pub value: f64,
    pub extra: Vec<f64>,
}

/// One sweep: a value per sweep point plus named metadata columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    /// Estimate tag, also the header of the value column.
    pub tag: String,
    /// Name of the sweep parameter.
    pub key: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub fitted: Option<SlopeFit>,
}

impl ResultTable {
    pub fn new(tag: impl Into<String>, key: impl Into<String>, columns: &[&str]) -> Self {
        ResultTable {
            tag: tag.into(),
            key: key.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fitted: None,
        }
    }

    /// Inserts a row keeping rows sorted by key.
    pub fn push(&mut self, key: f64, value: f64, extra: Vec<f64>) -> Result<()> {
        if extra.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "table {} has {} metadata columns, row has {}",
                self.tag,
                self.columns.len(),
                extra.len()
            )));
        }
        let at = self.rows.partition_point(|r| r.key <= key);
        self.rows.insert(at, TableRow { key, value, extra });
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.key, r.value)).collect()
    }

    /// Values of a metadata column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.extra[i]).collect())
    }
}
