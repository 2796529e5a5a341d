//! Smooth cutoffs built from the e^{-1/s} glue function.

/// e^{-1/s} for s > 0, zero otherwise.
fn glue(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step ψ: 1 on (-∞, 1], 0 on [2, ∞),
/// ψ(x) = h(2-x) / (h(2-x) + h(x-1)) with h(s) = e^{-1/s}.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let a = glue(2.0 - x);
    let b = glue(x - 1.0);
    a / (a + b)
}

/// Littlewood–Paley bump φ(ρ) = ψ(ρ) - ψ(2ρ), supported in [1/2, 2].
/// For every ρ > 0 the dyadic sum Σ_{j∈Z} φ(ρ/2^j) telescopes to 1.
pub fn lp_bump(rho: f64) -> f64 {
    smooth_step(rho) - smooth_step(2.0 * rho)
}

/// Fixed bump χ on [1, 2]: χ(ρ) = e·exp(-1/(1-s²)) with s = 2ρ-3, max 1 at ρ = 3/2.
pub fn chi(rho: f64) -> f64 {
    let s = 2.0 * rho - 3.0;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

/// χ rescaled to the interval [c - w, c + w].
pub fn chi_on(rho: f64, center: f64, half_width: f64) -> f64 {
    chi(1.5 + 0.5 * (rho - center) / half_width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits() {
        assert_eq!(smooth_step(0.3), 1.0);
        assert_eq!(smooth_step(2.5), 0.0);
        assert!((smooth_step(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = smooth_step(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn dyadic_partition_of_unity() {
        for &rho in &[0.013, 0.4, 1.0, 1.37, 2.0, 7.9, 55.0] {
            let total: f64 = (-12..=12).map(|j| lp_bump(rho / 2f64.powi(j))).sum();
            assert!((total - 1.0).abs() < 1e-14, "rho={rho} sum={total}");
        }
    }

    #[test]
    fn chi_support_and_peak() {
        assert_eq!(chi(1.0), 0.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(chi(0.5), 0.0);
        assert!((chi(1.5) - 1.0).abs() < 1e-15);
        assert!((chi_on(4.0, 4.0, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(chi_on(4.6, 4.0, 0.5), 0.0);
    }
}
