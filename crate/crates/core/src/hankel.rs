//! Hankel transform of order ν in dimension n on radial grids:
//!
//! (H_ν f)(ρ) = ∫₀^∞ (rρ)^{-(n-2)/2} J_ν(rρ) f(r) r^{n-1} dr.
//!
//! Grids carry quadrature weights for the measure r^{n-1} dr. The reference
//! grid is log-uniform with trapezoid weights, which is spectrally accurate
//! for integrands that decay at both ends; end corrections make the weights
//! integrate the bare measure exactly as well.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel;
use crate::error::{Error, Result};
use crate::quadrature::cached_legendre;
use crate::special::ln_gamma;

/// Relative L² tail above which a truncated profile is rejected.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Minimum nodes per oscillation period of the kernel.
pub const NODES_PER_PERIOD: f64 = 6.0;
/// Largest automatic refinement factor for under-resolved profiles.
pub const MAX_REFINEMENT: usize = 16;
/// Below this argument the kernel uses the small-argument expansion.
pub const SMALL_ARGUMENT: f64 = 1e-4;
/// Tolerance of the construction self-test on the weights.
pub const MEASURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    /// Uniform in u = ln r with step `du`.
    LogUniform { du: f64 },
    /// Anything else (Gauss panels, concatenations).
    General,
}

/// Quadrature nodes and weights for ∫ · r^{n-1} dr on [r_min, r_max].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
    span: (f64, f64),
    kind: GridKind,
}

fn check_span(r_min: f64, r_max: f64) -> Result<()> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::InvalidSpan { r_min, r_max });
    }
    Ok(())
}

/// Exact ∫_a^b r^{n-1} dr.
pub fn measure_of_span(a: f64, b: f64, n: usize) -> f64 {
    let nf = n as f64;
    (b.powf(nf) - a.powf(nf)) / nf
}

impl RadialGrid {
    /// Builds a grid from explicit parts and runs the construction checks.
    pub fn from_parts(
        nodes: Vec<f64>,
        weights: Vec<f64>,
        n: usize,
        span: (f64, f64),
        kind: GridKind,
    ) -> Result<Self> {
        check_span(span.0, span.1)?;
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least two nodes with one weight each".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !(nodes[0] > 0.0) {
            return Err(Error::InvalidParameter(
                "grid nodes must be positive and strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter(
                "grid weights must be positive".into(),
            ));
        }
        let grid = RadialGrid {
            nodes,
            weights,
            n,
            span,
            kind,
        };
        let defect = grid.measure_defect();
        if defect > MEASURE_TOLERANCE {
            return Err(Error::ResolutionTooLow(format!(
                "grid weights miss the radial measure by {defect:.3e}"
            )));
        }
        Ok(grid)
    }

    /// Log-uniform grid with `intervals` steps and end-corrected trapezoid weights.
    pub fn log_uniform(r_min: f64, r_max: f64, intervals: usize, n: usize) -> Result<Self> {
        check_span(r_min, r_max)?;
        if n < 1 {
            return Err(Error::InvalidDimension(n as i64));
        }
        let intervals = intervals.max(2);
        let (u0, u1) = (r_min.ln(), r_max.ln());
        let du = (u1 - u0) / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals)
            .map(|i| {
                if i == intervals {
                    r_max
                } else if i == 0 {
                    r_min
                } else {
                    (u0 + du * i as f64).exp()
                }
            })
            .collect();
        let mut factors = vec![1.0; intervals + 1];
        factors[0] = 0.5;
        factors[intervals] = 0.5;
        let nf = n as f64;
        if let Some(c) = end_correction(nf * du, intervals + 1) {
            for (j, cj) in c.iter().enumerate() {
                factors[j] += cj;
            }
        }
        if let Some(c) = end_correction(-nf * du, intervals + 1) {
            for (j, cj) in c.iter().enumerate() {
                factors[intervals - j] += cj;
            }
        }
        let weights = nodes
            .iter()
            .zip(&factors)
            .map(|(r, a)| du * r.powi(n as i32) * a)
            .collect();
        Self::from_parts(
            nodes,
            weights,
            n,
            (r_min, r_max),
            GridKind::LogUniform { du },
        )
    }

    /// Gauss–Legendre panels uniform in ln r, `panels_per_decade` panels of
    /// `order` nodes each.
    pub fn log_gauss(
        r_min: f64,
        r_max: f64,
        panels_per_decade: usize,
        order: usize,
        n: usize,
    ) -> Result<Self> {
        check_span(r_min, r_max)?;
        let decades = (r_max / r_min).log10();
        let panels = ((decades * panels_per_decade as f64 - 1e-9).ceil() as usize).max(1);
        let rule = cached_legendre(order);
        let (u0, u1) = (r_min.ln(), r_max.ln());
        let h = (u1 - u0) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = u0 + h * (p as f64 + 0.5);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let r = (mid + 0.5 * h * x).exp();
                nodes.push(r);
                weights.push(0.5 * h * w * r.powi(n as i32));
            }
        }
        Self::from_parts(nodes, weights, n, (r_min, r_max), GridKind::General)
    }

    /// Gauss–Legendre panels uniform in r.
    pub fn linear_gauss(a: f64, b: f64, panels: usize, order: usize, n: usize) -> Result<Self> {
        check_span(a, b)?;
        let rule = cached_legendre(order);
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let r = mid + 0.5 * h * x;
                nodes.push(r);
                weights.push(0.5 * h * w * r.powi(n as i32 - 1));
            }
        }
        Self::from_parts(nodes, weights, n, (a, b), GridKind::General)
    }

    /// Joins two grids on adjacent spans.
    pub fn concat(&self, other: &RadialGrid) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidParameter(
                "grids of different dimension".into(),
            ));
        }
        if other.span.0 < self.span.1 * (1.0 - 1e-12) {
            return Err(Error::InvalidSpan {
                r_min: other.span.0,
                r_max: self.span.1,
            });
        }
        let mut nodes = self.nodes.clone();
        let mut weights = self.weights.clone();
        let mut rest_nodes = other.nodes.as_slice();
        let mut rest_weights = other.weights.as_slice();
        // Shared endpoint of two trapezoid grids: merge the two half weights.
        if let (Some(&last), Some(&first)) = (nodes.last(), rest_nodes.first()) {
            if (first - last).abs() <= 1e-14 * last {
                *weights.last_mut().unwrap() += rest_weights[0];
                rest_nodes = &rest_nodes[1..];
                rest_weights = &rest_weights[1..];
            }
        }
        nodes.extend_from_slice(rest_nodes);
        weights.extend_from_slice(rest_weights);
        Self::from_parts(
            nodes,
            weights,
            self.n,
            (self.span.0, other.span.1),
            GridKind::General,
        )
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Relative error of Σ w_i against ∫_{r_min}^{r_max} r^{n-1} dr.
    pub fn measure_defect(&self) -> f64 {
        let exact = measure_of_span(self.span.0, self.span.1, self.n);
        let sum: f64 = self.weights.iter().sum();
        ((sum - exact) / exact).abs()
    }

    /// Local node spacing (centered, one-sided at the ends).
    pub fn spacing(&self, i: usize) -> f64 {
        let last = self.nodes.len() - 1;
        match i {
            0 => self.nodes[1] - self.nodes[0],
            i if i == last => self.nodes[last] - self.nodes[last - 1],
            i => 0.5 * (self.nodes[i + 1] - self.nodes[i - 1]),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * f(*r))
            .sum()
    }
}

/// Log-uniform grid on [r_min, r_max] with the given density per decade.
pub fn make_log_grid(
    r_min: f64,
    r_max: f64,
    points_per_decade: usize,
    n: usize,
) -> Result<RadialGrid> {
    check_span(r_min, r_max)?;
    if points_per_decade < 16 {
        return Err(Error::InvalidParameter(format!(
            "points per decade must be >= 16, got {points_per_decade}"
        )));
    }
    let decades = (r_max / r_min).log10();
    let intervals = ((decades * points_per_decade as f64 - 1e-9).ceil() as usize).max(2);
    RadialGrid::log_uniform(r_min, r_max, intervals, n)
}

/// B_{2k}/(2k) for k ≥ 1 via ζ(2k).
fn bernoulli_over_index(k: usize) -> f64 {
    let zeta = match k {
        1 => PI * PI / 6.0,
        2 => PI.powi(4) / 90.0,
        _ => (1..4000).map(|j| (j as f64).powi(-2 * k as i32)).sum(),
    };
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    // B_{2k}/(2k) = (-1)^{k+1} 2ζ(2k)(2k-1)!/(2π)^{2k}
    let log_fact: f64 = (1..2 * k).map(|i| (i as f64).ln()).sum();
    sign * 2.0 * zeta * (log_fact - 2.0 * k as f64 * (2.0 * PI).ln()).exp()
}

/// Correction factors c_j (j < m) added to the trapezoid factors at one end
/// of a uniform lattice whose Jacobian grows like e^{x j} into the interior.
///
/// The corrected rule integrates e^{x s} s^q exactly for q < m by cancelling
/// the Euler–Maclaurin end terms, which for these functions form a convergent
/// series as long as |x| < 2π. The largest m ≤ 6 that keeps every corrected
/// factor positive is used.
fn end_correction(x: f64, nodes: usize) -> Option<Vec<f64>> {
    if x.abs() >= 3.0 {
        return None;
    }
    for m in (1..=6usize).rev() {
        if 2 * m > nodes {
            continue;
        }
        let a = DMatrix::from_fn(m, m, |q, j| {
            (x * j as f64).exp() * (j as f64).powi(q as i32)
        });
        let rhs = DVector::from_fn(m, |q, _| {
            let mut s = 0.0;
            for k in 1..60usize {
                let p = 2 * k as i64 - 1 - q as i64;
                if p < 0 {
                    continue;
                }
                let term = bernoulli_over_index(k) * x.powi(p as i32)
                    / (1..=p as usize).map(|i| i as f64).product::<f64>();
                s += term;
                if term.abs() < 1e-20 && k > q {
                    break;
                }
            }
            s
        });
        let Some(c) = a.lu().solve(&rhs) else {
            continue;
        };
        let positive = c.iter().enumerate().all(|(j, cj)| {
            let base = if j == 0 { 0.5 } else { 1.0 };
            base + cj > 0.0
        });
        if positive {
            return Some(c.iter().copied().collect());
        }
    }
    None
}

/// Samples aligned with a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T = f64> {
    pub grid: Arc<RadialGrid>,
    pub samples: Vec<T>,
}

impl RadialProfile<f64> {
    pub fn new(grid: Arc<RadialGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "profile samples must be finite".into(),
            ));
        }
        Ok(RadialProfile { grid, samples })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let samples = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialProfile { grid, samples }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let samples = vec![0.0; grid.len()];
        RadialProfile { grid, samples }
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .zip(self.grid.weights())
            .map(|(s, w)| w * s * s)
            .sum()
    }

    pub fn inner(&self, other: &RadialProfile) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .zip(self.grid.weights())
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        RadialProfile {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|x| s * x).collect(),
        }
    }

    pub fn to_complex(&self) -> RadialProfile<Complex64> {
        RadialProfile {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        }
    }
}

impl RadialProfile<Complex64> {
    pub fn norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .zip(self.grid.weights())
            .map(|(s, w)| w * s.norm_sqr())
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Kernel (x)^{-(n-2)/2} J_ν(x) of the n-dimensional order-ν transform.
pub fn kernel_value(nu: f64, n: usize, x: f64) -> Result<f64> {
    let power = -(n as f64 - 2.0) / 2.0;
    if x < SMALL_ARGUMENT {
        // x^{ν+power}/(2^ν Γ(ν+1)) · (1 - x²/(4(ν+1))), in log form so the
        // two powers never over- or underflow separately.
        let log = (nu + power) * x.ln() - nu * 2f64.ln() - ln_gamma(nu + 1.0);
        return Ok(log.exp() * (1.0 - x * x / (4.0 * (nu + 1.0))));
    }
    let j = bessel::j(nu, x)?;
    Ok(if power == 0.0 { j } else { j * x.powf(power) })
}

/// Dense matrix K(ρ_i r_j)·w_j of the transform from `input` to `output`.
#[derive(Debug, Clone)]
pub struct HankelKernel {
    pub nu: f64,
    pub input: Arc<RadialGrid>,
    pub output: Arc<RadialGrid>,
    matrix: Array2<f64>,
}

impl HankelKernel {
    pub fn new(nu: f64, input: Arc<RadialGrid>, output: Arc<RadialGrid>) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "order must be >= 0, got {nu}"
            )));
        }
        if input.dimension() != output.dimension() {
            return Err(Error::InvalidParameter(
                "input and output grids have different dimensions".into(),
            ));
        }
        let n = input.dimension();
        let cols = input.len();
        let rows: Result<Vec<Vec<f64>>> = output
            .nodes()
            .par_iter()
            .map(|&rho| {
                input
                    .nodes()
                    .iter()
                    .zip(input.weights())
                    .map(|(&r, &w)| kernel_value(nu, n, r * rho).map(|k| k * w))
                    .collect()
            })
            .collect();
        let flat: Vec<f64> = rows?.into_iter().flatten().collect();
        let matrix = Array2::from_shape_vec((output.len(), cols), flat)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(HankelKernel {
            nu,
            input,
            output,
            matrix,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn apply_slice(&self, samples: &[f64]) -> Vec<f64> {
        self.matrix.dot(&ArrayView1::from(samples)).to_vec()
    }

    pub fn apply(&self, profile: &RadialProfile) -> RadialProfile {
        RadialProfile {
            grid: self.output.clone(),
            samples: self.apply_slice(&profile.samples),
        }
    }

    pub fn apply_complex(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let re: Array1<f64> = samples.iter().map(|c| c.re).collect();
        let im: Array1<f64> = samples.iter().map(|c| c.im).collect();
        let a = self.matrix.dot(&re);
        let b = self.matrix.dot(&im);
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| Complex64::new(*x, *y))
            .collect()
    }

    /// Applies the kernel to every column of `columns` (input nodes × k).
    pub fn apply_columns(&self, columns: &Array2<f64>) -> Array2<f64> {
        self.matrix.dot(columns)
    }
}

/// Relative L² tail beyond the grid ends.
///
/// At each end the amplitude is modeled as A·e^{s(u-u*)} in u = ln r, where
/// A is the largest |sample| in the outermost twentieth of a decade, u* its
/// location, and s the log-slope between that maximum and the largest
/// |sample| in the twentieth of a decade before it. The modeled mass beyond the
/// end is integrated against e^{nu} du.
pub fn tail_estimate(grid: &RadialGrid, samples: &[f64]) -> f64 {
    let total: f64 = samples
        .iter()
        .zip(grid.weights())
        .map(|(s, w)| w * s * s)
        .sum();
    if total == 0.0 {
        return 0.0;
    }
    let nodes = grid.nodes();
    let nf = grid.dimension() as f64;
    let (r_min, r_max) = grid.span();
    let width = 0.05 * 10f64.ln();
    let count = nodes.len();
    let window = |upper: bool| -> usize {
        let k = nodes
            .iter()
            .filter(|r| {
                if upper {
                    r.ln() >= r_max.ln() - width
                } else {
                    r.ln() <= r_min.ln() + width
                }
            })
            .count();
        k.max(3).min((count / 4).max(1))
    };
    // (max |sample|, ln r at the max) over an index range.
    let peak = |range: std::ops::Range<usize>| -> (f64, f64) {
        range
            .map(|i| (samples[i].abs(), nodes[i].ln()))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let beyond = |outer: (f64, f64), inner: (f64, f64), edge: f64, sign: f64| -> f64 {
        if outer.0 == 0.0 {
            return 0.0;
        }
        let du = (outer.1 - inner.1).abs().max(1e-300);
        // Slope of ln A per unit of distance moving outward.
        let slope = (outer.0 / inner.0.max(f64::MIN_POSITIVE)).ln() / du;
        let rate = -(2.0 * slope + sign * nf);
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        let a_edge = outer.0 * (slope * (edge.ln() - outer.1).abs()).exp();
        a_edge * a_edge * edge.powf(nf) / rate
    };

    let k = window(true);
    let upper = beyond(
        peak(count - k..count),
        peak(count.saturating_sub(2 * k)..count - k),
        r_max,
        1.0,
    );
    let k = window(false);
    let lower = beyond(peak(0..k), peak(k..(2 * k).min(count)), r_min, -1.0);
    ((upper + lower) / total).sqrt()
}

pub fn check_tail(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    let relative = tail_estimate(grid, samples);
    if !(relative <= TAIL_LIMIT) {
        return Err(Error::TailNotNegligible {
            relative,
            limit: TAIL_LIMIT,
        });
    }
    Ok(relative)
}

/// Largest node spacing over the profile's effective support, i.e. the
/// nodes carrying more than 1e-20 of its L² mass.
pub fn support_spacing(grid: &RadialGrid, samples: &[f64]) -> f64 {
    let total: f64 = samples
        .iter()
        .zip(grid.weights())
        .map(|(s, w)| w * s * s)
        .sum();
    if total == 0.0 {
        return 0.0;
    }
    samples
        .iter()
        .zip(grid.weights())
        .enumerate()
        .filter(|(_, (s, w))| *w * *s * *s > 1e-20 * total)
        .map(|(i, _)| grid.spacing(i))
        .fold(0.0, f64::max)
}

/// Spacing required to resolve J_ν(rρ) up to frequency `rho_max`.
pub fn required_spacing(rho_max: f64) -> f64 {
    2.0 * PI / (NODES_PER_PERIOD * rho_max)
}

pub fn check_resolution(grid: &RadialGrid, samples: &[f64], rho_max: f64) -> Result<()> {
    let spacing = support_spacing(grid, samples);
    let required = required_spacing(rho_max);
    if spacing > required {
        return Err(Error::OscillationUnderResolved { spacing, required });
    }
    Ok(())
}

/// Points in the Lagrange stencil used by [`refine_log`].
const REFINE_STENCIL: usize = 8;

/// Resamples a log-uniform profile on a grid `factor` times finer, with
/// 8-point Lagrange interpolation in ln r (one-sided near the ends).
pub fn refine_log(profile: &RadialProfile, factor: usize) -> Result<RadialProfile> {
    let grid = &profile.grid;
    let GridKind::LogUniform { du } = grid.kind() else {
        return Err(Error::InvalidParameter(
            "only log-uniform grids can be refined".into(),
        ));
    };
    let count = grid.len();
    if count < REFINE_STENCIL {
        return Err(Error::ResolutionTooLow(format!(
            "{count} nodes are too few to interpolate"
        )));
    }
    let (r_min, r_max) = grid.span();
    let fine = Arc::new(RadialGrid::log_uniform(
        r_min,
        r_max,
        (count - 1) * factor,
        grid.dimension(),
    )?);
    let u0 = r_min.ln();
    let f = &profile.samples;
    let half = REFINE_STENCIL as i64 / 2;
    let samples = fine
        .nodes()
        .iter()
        .map(|r| {
            let t = (r.ln() - u0) / du;
            let first =
                (t.floor() as i64 - half + 1).clamp(0, (count - REFINE_STENCIL) as i64) as usize;
            let mut acc = 0.0;
            for j in 0..REFINE_STENCIL {
                let xj = (first + j) as f64;
                let mut l = 1.0;
                for m in 0..REFINE_STENCIL {
                    if m != j {
                        let xm = (first + m) as f64;
                        l *= (t - xm) / (xj - xm);
                    }
                }
                acc += l * f[first + j];
            }
            acc
        })
        .collect();
    Ok(RadialProfile {
        grid: fine,
        samples,
    })
}

/// H_ν of a profile, sampled on `out_grid`.
///
/// Rejects profiles whose truncated tail is not negligible. If the profile's
/// grid is too coarse for the oscillation of the kernel at the largest output
/// frequency, a log-uniform profile is refined by interpolation (up to
/// [`MAX_REFINEMENT`]); otherwise the transform fails.
pub fn hankel_transform(
    nu: f64,
    profile: &RadialProfile,
    out_grid: &Arc<RadialGrid>,
) -> Result<RadialProfile> {
    if profile.grid.dimension() != out_grid.dimension() {
        return Err(Error::InvalidParameter(
            "grids have different dimensions".into(),
        ));
    }
    if profile.samples.iter().all(|s| *s == 0.0) {
        return Ok(RadialProfile::zeros(out_grid.clone()));
    }
    check_tail(&profile.grid, &profile.samples)?;
    let rho_max = out_grid.span().1;
    let mut work = profile.clone();
    let mut factor = 1;
    while let Err(err) = check_resolution(&work.grid, &work.samples, rho_max) {
        let can_refine = matches!(profile.grid.kind(), GridKind::LogUniform { .. });
        if !can_refine || factor >= MAX_REFINEMENT {
            return Err(err);
        }
        factor *= 2;
        work = refine_log(profile, factor)?;
    }
    let kernel = HankelKernel::new(nu, work.grid.clone(), out_grid.clone())?;
    Ok(kernel.apply(&work))
}

/// |‖H_ν f‖ - ‖f‖| / ‖f‖, zero for the zero profile.
pub fn verify_plancherel(
    nu: f64,
    profile: &RadialProfile,
    out_grid: &Arc<RadialGrid>,
) -> Result<f64> {
    let norm = profile.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let transformed = hankel_transform(nu, profile, out_grid)?;
    Ok((transformed.l2_norm() - norm).abs() / norm)
}

/// A_ν f = -f'' - ((n-1)/r) f' + ((ν² - (n-2)²/4)/r²) f by centered
/// differences in u = ln r; the two end samples are set to zero.
pub fn radial_operator(nu: f64, profile: &RadialProfile) -> Result<RadialProfile> {
    let grid = &profile.grid;
    let GridKind::LogUniform { du } = grid.kind() else {
        return Err(Error::InvalidParameter(
            "finite differences need a log-uniform grid".into(),
        ));
    };
    let m = grid.dimension() as f64 - 2.0;
    let potential = nu * nu - 0.25 * m * m;
    let f = &profile.samples;
    let r = grid.nodes();
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() - 1 {
        let fu = (f[i + 1] - f[i - 1]) / (2.0 * du);
        let fuu = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (du * du);
        out[i] = -(fuu + m * fu - potential * f[i]) / (r[i] * r[i]);
    }
    Ok(RadialProfile {
        grid: grid.clone(),
        samples: out,
    })
}

/// ‖H_ν(A_ν f) - ρ² H_ν f‖ / ‖ρ² H_ν f‖ on `out_grid`.
pub fn verify_diagonalization(
    nu: f64,
    profile: &RadialProfile,
    out_grid: &Arc<RadialGrid>,
) -> Result<f64> {
    let af = radial_operator(nu, profile)?;
    let lhs = hankel_transform(nu, &af, out_grid)?;
    let hf = hankel_transform(nu, profile, out_grid)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((a, b), (rho, w)) in lhs
        .samples
        .iter()
        .zip(&hf.samples)
        .zip(out_grid.nodes().iter().zip(out_grid.weights()))
    {
        let rhs = rho * rho * b;
        num += w * (a - rhs) * (a - rhs);
        den += w * rhs * rhs;
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}
