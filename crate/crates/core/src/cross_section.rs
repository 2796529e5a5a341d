//! Spectrum of the cross-section operator Δ_h + V₀ + (n-2)²/4.
//!
//! Supported cross-sections are round spheres S^{n-1} and circles of radius
//! ρ₀, the latter with a constant or a sampled periodic potential. Points on a
//! cross-section are passed as slices: `[θ]` for circles (θ the angle, arc
//! length ρ₀θ) and a unit vector `[x₁, …, x_n]` for spheres with n ≥ 3.
//! Eigenfunctions are real and orthonormal in L²(Y, dσ) for the geometric
//! measure (circumference 2πρ₀, standard sphere area).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quadrature::{gegenbauer_rule, legendre_rule};
use crate::special::{binomial, ln_gamma, spherical_harmonic_dim};

/// Relative eigenvalue gap below which numerically computed eigenvalues are
/// treated as one eigenspace.
pub const CLUSTER_REL_GAP: f64 = 1e-8;

/// Homogeneous polynomial in n variables, stored as (exponents, coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&p, &xi)| xi.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// Real trigonometric polynomial a₀ + Σ_k (a_k cos kθ + b_k sin kθ).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigSeries {
    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.a0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kt = (k + 1) as f64 * theta;
            acc += a * kt.cos() + b * kt.sin();
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Eigenfunction {
    Constant(f64),
    Cos {
        k: usize,
        amplitude: f64,
    },
    Sin {
        k: usize,
        amplitude: f64,
    },
    /// Solid harmonic restricted to the unit sphere.
    Harmonic(Arc<Polynomial>),
    /// Trigonometric interpolant of a discrete eigenvector.
    Trig(Arc<TrigSeries>),
}

impl Eigenfunction {
    pub fn eval(&self, point: &[f64]) -> f64 {
        match self {
            Eigenfunction::Constant(c) => *c,
            Eigenfunction::Cos { k, amplitude } => amplitude * (*k as f64 * point[0]).cos(),
            Eigenfunction::Sin { k, amplitude } => amplitude * (*k as f64 * point[0]).sin(),
            Eigenfunction::Harmonic(p) => p.eval(point),
            Eigenfunction::Trig(t) => t.eval(point[0]),
        }
    }
}

/// One eigenpair (ν, ℓ) of the cross-section operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMode {
    pub nu: f64,
    /// 1-based index inside the eigenspace.
    pub ell: usize,
    /// Index of the eigenspace (degree k for spheres and circles).
    pub degree: usize,
    pub eigenfunction: Eigenfunction,
}

impl SpectralMode {
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.eigenfunction.eval(point)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CrossSectionKind {
    Sphere,
    Circle {
        rho0: f64,
    },
    /// Unit circle with V₀ sampled at θ_j = 2πj/N.
    CircleWithPotential {
        samples: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub kind: CrossSectionKind,
    pub n: usize,
    /// Constant potential (unused for sampled potentials).
    pub v0: f64,
}

/// Nodes and weights of a quadrature for dσ on the cross-section.
#[derive(Debug, Clone)]
pub struct CrossSectionQuadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl CrossSectionQuadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

fn check_dimension(n: i64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(n as usize)
}

fn shift(n: usize) -> f64 {
    let m = n as f64 - 2.0;
    0.25 * m * m
}

impl CrossSection {
    pub fn sphere(n: i64, v0: f64) -> Result<Self> {
        let n = check_dimension(n)?;
        Ok(CrossSection {
            kind: CrossSectionKind::Sphere,
            n,
            v0,
        })
    }

    pub fn circle(rho0: f64, v0: f64, n: i64) -> Result<Self> {
        let n = check_dimension(n)?;
        if !(rho0 > 0.0) || !rho0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "circle radius must be positive, got {rho0}"
            )));
        }
        Ok(CrossSection {
            kind: CrossSectionKind::Circle { rho0 },
            n,
            v0,
        })
    }

    pub fn circle_with_potential(samples: Vec<f64>, n: i64) -> Result<Self> {
        let n = check_dimension(n)?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "potential samples must be finite".into(),
            ));
        }
        Ok(CrossSection {
            kind: CrossSectionKind::CircleWithPotential { samples },
            n,
            v0: 0.0,
        })
    }

    /// Whether points are angles (circles) or unit vectors (spheres, n ≥ 3).
    pub fn uses_angle(&self) -> bool {
        !matches!(self.kind, CrossSectionKind::Sphere) || self.n == 2
    }

    /// Total measure of the cross-section.
    pub fn measure(&self) -> f64 {
        match &self.kind {
            CrossSectionKind::Sphere => crate::special::sphere_area(self.n),
            CrossSectionKind::Circle { rho0 } => 2.0 * PI * rho0,
            CrossSectionKind::CircleWithPotential { .. } => 2.0 * PI,
        }
    }

    pub fn spectrum(&self, k_max: usize) -> Result<Vec<SpectralMode>> {
        match &self.kind {
            CrossSectionKind::Sphere => sphere_spectrum(self.n as i64, self.v0, k_max),
            CrossSectionKind::Circle { rho0 } => {
                circle_spectrum(*rho0, self.v0, self.n as i64, k_max)
            }
            CrossSectionKind::CircleWithPotential { samples } => {
                circle_variable_potential_spectrum(samples, self.n as i64, k_max)
            }
        }
    }

    /// Quadrature exact (or spectrally accurate) for products of
    /// eigenfunctions of degree up to `degree`.
    pub fn quadrature(&self, degree: usize) -> CrossSectionQuadrature {
        match &self.kind {
            CrossSectionKind::Sphere if self.n >= 3 => sphere_quadrature(self.n, 2 * degree + 2),
            CrossSectionKind::Sphere => circle_quadrature(1.0, 4 * degree + 8),
            CrossSectionKind::Circle { rho0 } => circle_quadrature(*rho0, 4 * degree + 8),
            CrossSectionKind::CircleWithPotential { samples } => {
                circle_quadrature(1.0, samples.len().max(4 * degree + 8))
            }
        }
    }
}

/// Spectrum of the sphere S^{n-1} with constant potential v0, degrees 0..=k_max.
pub fn sphere_spectrum(n: i64, v0: f64, k_max: usize) -> Result<Vec<SpectralMode>> {
    let n = check_dimension(n)?;
    if n == 2 {
        return circle_spectrum(1.0, v0, 2, k_max);
    }
    let mut modes = Vec::new();
    for k in 0..=k_max {
        let kf = k as f64;
        let nu_sq = kf * (kf + n as f64 - 2.0) + v0 + shift(n);
        if !(nu_sq > 0.0) {
            return Err(Error::PositivityViolated { nu_sq });
        }
        let nu = nu_sq.sqrt();
        for (i, poly) in cached_harmonic_basis(n, k).iter().enumerate() {
            modes.push(SpectralMode {
                nu,
                ell: i + 1,
                degree: k,
                eigenfunction: Eigenfunction::Harmonic(poly.clone()),
            });
        }
    }
    Ok(modes)
}

/// Spectrum of the circle of radius rho0 with constant potential v0.
pub fn circle_spectrum(rho0: f64, v0: f64, n: i64, k_max: usize) -> Result<Vec<SpectralMode>> {
    let n = check_dimension(n)?;
    if !(rho0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "circle radius must be positive, got {rho0}"
        )));
    }
    let mut modes = Vec::new();
    let constant = 1.0 / (2.0 * PI * rho0).sqrt();
    let amplitude = 1.0 / (PI * rho0).sqrt();
    for k in 0..=k_max {
        let kf = k as f64 / rho0;
        let nu_sq = kf * kf + v0 + shift(n);
        if !(nu_sq > 0.0) {
            return Err(Error::PositivityViolated { nu_sq });
        }
        let nu = nu_sq.sqrt();
        if k == 0 {
            modes.push(SpectralMode {
                nu,
                ell: 1,
                degree: 0,
                eigenfunction: Eigenfunction::Constant(constant),
            });
        } else {
            modes.push(SpectralMode {
                nu,
                ell: 1,
                degree: k,
                eigenfunction: Eigenfunction::Cos { k, amplitude },
            });
            modes.push(SpectralMode {
                nu,
                ell: 2,
                degree: k,
                eigenfunction: Eigenfunction::Sin { k, amplitude },
            });
        }
    }
    Ok(modes)
}

/// Fourier spectral second-derivative matrix on N equispaced periodic nodes
/// (N even).
fn spectral_second_derivative(n_pts: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n_pts as f64;
    DMatrix::from_fn(n_pts, n_pts, |j, l| {
        if j == l {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let d = j as i64 - l as i64;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let s = (0.5 * d as f64 * h).sin();
            -sign / (2.0 * s * s)
        }
    })
}

/// Lowest k_max + 1 eigenspaces of -d²/dθ² + V₀(θ) + (n-2)²/4 on the unit
/// circle, with V₀ given at θ_j = 2πj/N.
///
/// Discretization is Fourier spectral collocation, so eigenvalues of smooth
/// potentials converge faster than any power of N. Eigenvalues whose relative
/// gap is below [`CLUSTER_REL_GAP`] are merged into one eigenspace.
pub fn circle_variable_potential_spectrum(
    samples: &[f64],
    n: i64,
    k_max: usize,
) -> Result<Vec<SpectralMode>> {
    let n = check_dimension(n)?;
    let n_pts = samples.len();
    if n_pts < 4 * k_max.max(1) {
        return Err(Error::ResolutionTooLow(format!(
            "{n_pts} potential samples, need at least {}",
            4 * k_max.max(1)
        )));
    }
    if n_pts % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "potential sample count must be even, got {n_pts}"
        )));
    }
    let c = shift(n);
    let mut h = -spectral_second_derivative(n_pts);
    for (j, v) in samples.iter().enumerate() {
        h[(j, j)] += v + c;
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n_pts).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = eig.eigenvalues[order[0]];
    if !(lowest > 0.0) {
        return Err(Error::PositivityViolated { nu_sq: lowest });
    }

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        let lam = eig.eigenvalues[idx];
        match clusters.last_mut() {
            Some(cl)
                if {
                    let prev = eig.eigenvalues[*cl.last().unwrap()];
                    (lam - prev).abs() <= CLUSTER_REL_GAP * prev.abs().max(lam.abs())
                } =>
            {
                cl.push(idx)
            }
            _ => {
                if clusters.len() == k_max + 1 {
                    break;
                }
                clusters.push(vec![idx]);
            }
        }
    }

    let scale = (n_pts as f64 / (2.0 * PI)).sqrt();
    let mut modes = Vec::new();
    for (degree, cl) in clusters.iter().enumerate() {
        let nu_sq = cl.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cl.len() as f64;
        for (l, &idx) in cl.iter().enumerate() {
            let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
                if *first < 0.0 {
                    v = -v;
                }
            }
            let values: Vec<f64> = v.iter().map(|x| x * scale).collect();
            modes.push(SpectralMode {
                nu: nu_sq.sqrt(),
                ell: l + 1,
                degree,
                eigenfunction: Eigenfunction::Trig(Arc::new(trig_interpolant(&values))),
            });
        }
    }
    Ok(modes)
}

/// Trigonometric interpolant of samples at θ_j = 2πj/N, N even; the Nyquist
/// term is split evenly between cosine and (vanishing) sine.
fn trig_interpolant(values: &[f64]) -> TrigSeries {
    let n = values.len();
    let half = n / 2;
    let nf = n as f64;
    let a0 = values.iter().sum::<f64>() / nf;
    let mut cos = vec![0.0; half];
    let mut sin = vec![0.0; half];
    for k in 1..=half {
        let mut a = 0.0;
        let mut b = 0.0;
        for (j, v) in values.iter().enumerate() {
            let t = 2.0 * PI * (k * j) as f64 / nf;
            a += v * t.cos();
            b += v * t.sin();
        }
        let factor = if k == half { 1.0 / nf } else { 2.0 / nf };
        cos[k - 1] = a * factor;
        sin[k - 1] = if k == half { 0.0 } else { b * factor };
    }
    TrigSeries { a0, cos, sin }
}

/// Smallest ν; fails unless it is strictly positive.
pub fn validate_positivity(modes: &[SpectralMode]) -> Result<f64> {
    let nu0 = modes.iter().map(|m| m.nu).fold(f64::INFINITY, f64::min);
    if modes.is_empty() {
        return Err(Error::DegenerateInput("empty mode list".into()));
    }
    if !(nu0 > 0.0) {
        return Err(Error::PositivityViolated { nu_sq: nu0 * nu0 });
    }
    Ok(nu0)
}

/// Largest entry of |Gram - I| for the modes under the quadrature.
pub fn orthonormality_check(modes: &[SpectralMode], quad: &CrossSectionQuadrature) -> f64 {
    let samples: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| quad.points.iter().map(|p| m.eval(p)).collect())
        .collect();
    let mut worst = 0.0_f64;
    for i in 0..modes.len() {
        for j in i..modes.len() {
            let g: f64 = samples[i]
                .iter()
                .zip(&samples[j])
                .zip(&quad.weights)
                .map(|((a, b), w)| a * b * w)
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Trapezoid rule with `points` nodes on the circle of radius rho0, in the angle.
pub fn circle_quadrature(rho0: f64, points: usize) -> CrossSectionQuadrature {
    let points = points.max(1);
    let h = 2.0 * PI / points as f64;
    CrossSectionQuadrature {
        points: (0..points).map(|j| vec![j as f64 * h]).collect(),
        weights: vec![h * rho0; points],
    }
}

/// Product rule on S^{n-1} ⊂ R^n exact for polynomials of degree ≤ `degree`.
///
/// S^m is split as x_{m+1} = t, (x₁..x_m) = sqrt(1-t²)·y with y ∈ S^{m-1} and
/// dσ_m = (1-t²)^{(m-2)/2} dt dσ_{m-1}; the t-integral uses the matching
/// Gauss–Gegenbauer rule and S¹ uses the trapezoid rule.
pub fn sphere_quadrature(n: usize, degree: usize) -> CrossSectionQuadrature {
    assert!(n >= 2);
    let mut quad = circle_quadrature(1.0, degree + 2);
    quad.points = quad
        .points
        .iter()
        .map(|p| vec![p[0].cos(), p[0].sin()])
        .collect();
    for m in 2..n {
        let a = (m as f64 - 2.0) / 2.0;
        let order = degree / 2 + 2;
        let rule = if a == 0.0 {
            legendre_rule(order)
        } else {
            gegenbauer_rule(order, a)
        };
        let mut points = Vec::with_capacity(quad.len() * order);
        let mut weights = Vec::with_capacity(quad.len() * order);
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            let s = (1.0 - t * t).sqrt();
            for (y, wy) in quad.points.iter().zip(&quad.weights) {
                let mut x: Vec<f64> = y.iter().map(|c| c * s).collect();
                x.push(*t);
                points.push(x);
                weights.push(wt * wy);
            }
        }
        quad = CrossSectionQuadrature { points, weights };
    }
    quad
}

/// ∫_{S^{n-1}} x^α dσ = 2 Π Γ((α_i+1)/2) / Γ((|α|+n)/2) when every α_i is even.
pub fn sphere_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len() as f64;
    let total: u32 = alpha.iter().sum();
    let log: f64 = alpha
        .iter()
        .map(|&a| ln_gamma((a as f64 + 1.0) / 2.0))
        .sum::<f64>()
        - ln_gamma((total as f64 + n) / 2.0);
    2.0 * log.exp()
}

/// Exponent vectors of degree-k monomials in n variables, graded lex order.
fn monomials(n: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e);
            rec(n, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k as u32, &mut Vec::new(), &mut out);
    out
}

/// Orthonormal real basis of degree-k spherical harmonics on S^{n-1}.
///
/// Degree-k monomials restricted to the sphere span H_k ⊕ |x|²P_{k-2}.
/// Working in the sphere inner product (Gram matrix of monomial moments), the
/// monomials are projected onto the orthogonal complement of |x|²P_{k-2} and
/// Gram–Schmidt orthonormalized in graded lexicographic order, keeping the
/// first d_k independent results.
pub fn harmonic_basis(n: usize, k: usize) -> Vec<Polynomial> {
    let mons = monomials(n, k);
    let m = mons.len();
    let index_of = |e: &[u32]| mons.iter().position(|x| x.as_slice() == e).unwrap();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        let s: Vec<u32> = mons[i].iter().zip(&mons[j]).map(|(a, b)| a + b).collect();
        sphere_moment(&s)
    });

    // Columns: |x|² times each degree-(k-2) monomial, in degree-k coordinates.
    let mut lower: Vec<DVector<f64>> = Vec::new();
    if k >= 2 {
        for e in monomials(n, k - 2) {
            let mut v = DVector::zeros(m);
            for i in 0..n {
                let mut f = e.clone();
                f[i] += 2;
                v[index_of(&f)] += 1.0;
            }
            lower.push(v);
        }
    }
    let mut basis = GramSchmidt {
        gram: &gram,
        vectors: Vec::new(),
        images: Vec::new(),
    };
    for v in lower {
        basis.push(v);
    }
    let n_lower = basis.vectors.len();
    let target = spherical_harmonic_dim(n, k);
    for i in 0..m {
        if basis.vectors.len() - n_lower == target {
            break;
        }
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        basis.push(e);
    }
    let basis = basis.vectors;
    debug_assert_eq!(binomial(k + n - 1, n - 1), m);
    basis[n_lower..]
        .iter()
        .map(|c| Polynomial {
            terms: mons
                .iter()
                .zip(c.iter())
                .filter(|(_, c)| c.abs() > 1e-14)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        })
        .collect()
}

/// [`harmonic_basis`] memoized per (n, k).
pub fn cached_harmonic_basis(n: usize, k: usize) -> Arc<Vec<Arc<Polynomial>>> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<Vec<Arc<Polynomial>>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("harmonic cache poisoned").get(&(n, k)) {
        return hit.clone();
    }
    let built = Arc::new(harmonic_basis(n, k).into_iter().map(Arc::new).collect());
    cache
        .lock()
        .expect("harmonic cache poisoned")
        .entry((n, k))
        .or_insert(built)
        .clone()
}

/// Orthonormal vectors in the inner product given by `gram`, with G·v kept
/// alongside each vector so projections cost O(m).
struct GramSchmidt<'a> {
    gram: &'a DMatrix<f64>,
    vectors: Vec<DVector<f64>>,
    images: Vec<DVector<f64>>,
}

impl GramSchmidt<'_> {
    /// Orthonormalizes v against the current set (two passes) and keeps it
    /// unless it is numerically dependent.
    fn push(&mut self, mut v: DVector<f64>) {
        let original = v.dot(&(self.gram * &v)).sqrt();
        for _ in 0..2 {
            for (b, gb) in self.vectors.iter().zip(&self.images) {
                let c = gb.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let gv = self.gram * &v;
        let norm = v.dot(&gv).sqrt();
        if norm <= 1e-9 * original {
            return;
        }
        self.vectors.push(v / norm);
        self.images.push(gv / norm);
    }
}
