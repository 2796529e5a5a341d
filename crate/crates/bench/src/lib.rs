//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use conewave::cross_section::CrossSection;
use conewave::hankel::{make_log_grid, RadialGrid};
use conewave::propagator::{spectral_data, BumpShape, DataSpec, ModeCoefficients};

/// Gauss panels on [0.2, 3.8] in dimension n.
pub fn spectral_grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::linear_gauss(0.2, 3.8, 60, 8, n).expect("valid grid"))
}

/// Log grid up to r = 1 followed by Gauss panels up to `r_max`.
pub fn physical_grid(n: usize, r_max: f64) -> Arc<RadialGrid> {
    let inner = make_log_grid(1e-4, 1.0, 64, n).expect("valid grid");
    let panels = ((r_max - 1.0) / 0.65).ceil() as usize;
    let outer = RadialGrid::linear_gauss(1.0, r_max, panels, 8, n).expect("valid grid");
    Arc::new(inner.concat(&outer).expect("grids abut"))
}

/// Gaussian spectral bump around ρ = 2 in the lowest mode of the round sphere.
pub fn gaussian_data(n: usize, grid: Arc<RadialGrid>) -> ModeCoefficients {
    let modes = CrossSection::sphere(n as i64, 0.0)
        .and_then(|c| c.spectrum(2))
        .expect("sphere spectrum");
    let spec = DataSpec::ModeBump {
        nu_index: 0,
        ell: 1,
        rho_center: 2.0,
        rho_width: 0.2,
        shape: BumpShape::Gaussian,
    };
    spectral_data(Arc::new(modes), grid, &spec).expect("data on grid")
}
