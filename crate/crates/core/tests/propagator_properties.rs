use std::f64::consts::PI;
use std::sync::Arc;

use conewave::cross_section::{circle_spectrum, sphere_spectrum, CrossSection, SpectralMode};
use conewave::cutoff::chi_on;
use conewave::hankel::{make_log_grid, RadialGrid};
use conewave::propagator::{
    decompose, distorted_fourier, dyadic_scales, energy, frequency_localize,
    littlewood_paley_piece, sobolev_norm, spectral_data, verify_plane_wave, BumpShape, DataSpec,
    ModeCoefficients, Propagator, Side, WaveSign, DEFAULT_TRUNCATION_TOLERANCE,
};
use conewave::Error;
use proptest::prelude::*;

fn sphere_modes() -> Arc<Vec<SpectralMode>> {
    Arc::new(sphere_spectrum(4, 0.0, 2).unwrap())
}

/// Spectral grid on [0.02, 4] fine enough for r + |t| up to about 50.
fn spectral_grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::linear_gauss(0.02, 4.0, 80, 16, n).unwrap())
}

/// Physical grid on [1e-5, 40]: log-uniform near the tip, Gauss panels outside.
fn physical_grid(n: usize) -> Arc<RadialGrid> {
    let near = make_log_grid(1e-5, 4.0, 256, n).unwrap();
    let far = RadialGrid::linear_gauss(4.0, 40.0, 36, 16, n).unwrap();
    Arc::new(near.concat(&far).unwrap())
}

fn gaussian_data(
    modes: &Arc<Vec<SpectralMode>>,
    grid: &Arc<RadialGrid>,
    nu_index: usize,
) -> ModeCoefficients {
    spectral_data(
        modes.clone(),
        grid.clone(),
        &DataSpec::ModeBump {
            nu_index,
            ell: 1,
            rho_center: 1.5,
            rho_width: 0.2,
            shape: BumpShape::Gaussian,
        },
    )
    .unwrap()
}

/// Three active modes with different spectral bumps.
fn mixed_data(modes: &Arc<Vec<SpectralMode>>, grid: &Arc<RadialGrid>) -> ModeCoefficients {
    let mut data = ModeCoefficients::zeros(modes.clone(), grid.clone(), Side::Spectral);
    let shapes = [
        (0usize, 1.5, 0.2, 1.0),
        (3, 1.3, 0.18, -0.7),
        (7, 2.0, 0.25, 0.4),
    ];
    for (m, c, w, a) in shapes {
        data.profiles[m] = grid
            .nodes()
            .iter()
            .map(|&r| a * (-0.5 * ((r - c) / w).powi(2)).exp())
            .collect();
    }
    data
}

#[test]
fn solution_vanishes_at_time_zero() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    let u = prop.evolve(&data, 0.0).unwrap();
    assert!(u.profiles.iter().flatten().all(|x| *x == 0.0));
}

#[test]
fn time_derivative_at_zero_recovers_data_at_second_order() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    let f = distorted_fourier(&data, prop.physical_grid()).unwrap();
    let mut errors = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let plus = prop.evolve(&data, h).unwrap();
        let minus = prop.evolve(&data, -h).unwrap();
        let dt = plus.combine(0.5 / h, &minus, -0.5 / h).unwrap();
        errors.push(dt.relative_distance(&f));
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "order {order} {errors:?}");
    }
    // The velocity at t = 0 is exactly the transformed data.
    let v = prop.velocity(&data, 0.0).unwrap();
    assert!(v.relative_distance(&f) < 1e-12);
}

#[test]
fn spectral_energy_is_constant() {
    let modes = sphere_modes();
    let grid = spectral_grid(4);
    let data = mixed_data(&modes, &grid);
    let e0 = energy(&data, 0.0).unwrap();
    assert!((e0 - sobolev_norm(&data, 0.0).unwrap().powi(2)).abs() < 1e-12 * e0);
    for t in [0.3, 1.0, 7.5, 40.0, -12.0] {
        let e = energy(&data, t).unwrap();
        assert!((e - e0).abs() < 1e-10 * e0, "t={t}: {e} vs {e0}");
    }
}

#[test]
fn sine_evolution_is_odd_in_time_and_splits_into_half_waves() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    for t in [0.7, 3.0] {
        let u = prop.evolve(&data, t).unwrap();
        let back = prop.evolve(&data, -t).unwrap();
        assert!(u.combine(1.0, &back, 1.0).unwrap().l2_norm() < 1e-12 * u.l2_norm());

        let plus = prop.half_wave(&data, t, WaveSign::Plus).unwrap();
        let minus = prop.half_wave(&data, t, WaveSign::Minus).unwrap();
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for m in 0..u.len() {
            for i in 0..u.grid.len() {
                let s = (plus.profiles[m][i] - minus.profiles[m][i])
                    / num_complex::Complex64::new(0.0, 2.0);
                worst = worst.max((s.re - u.profiles[m][i]).abs()).max(s.im.abs());
                scale = scale.max(u.profiles[m][i].abs());
            }
        }
        assert!(worst < 1e-10 * scale, "t={t}: {worst:e}");
    }
}

#[test]
fn half_wave_at_time_zero_is_transform_of_data_over_rho() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    let over_rho = frequency_localize(&data, 1.0, |r| 1.0 / r).unwrap();
    let expected = distorted_fourier(&over_rho, prop.physical_grid()).unwrap();
    let hw = prop.half_wave(&data, 0.0, WaveSign::Plus).unwrap();
    for m in 0..hw.len() {
        for (z, x) in hw.profiles[m].iter().zip(&expected.profiles[m]) {
            assert!((z.re - x).abs() < 1e-12 && z.im == 0.0);
        }
    }
}

#[test]
fn half_wave_norm_is_time_invariant() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    let target = sobolev_norm(&data, -1.0).unwrap();
    let states = prop
        .half_wave_times(&data, &[0.0, 1.0, 2.5, 5.0], WaveSign::Minus)
        .unwrap();
    for s in &states {
        let norm = s.l2_norm();
        assert!((norm - target).abs() < 1e-8 * target, "{norm} vs {target}");
    }
}

#[test]
fn half_wave_rejects_data_near_zero_frequency() {
    let modes = sphere_modes();
    let spec = Arc::new(make_log_grid(1e-4, 4.0, 64, 4).unwrap());
    let prop = Propagator::new(spec.clone(), physical_grid(4)).unwrap();
    let mut data = ModeCoefficients::zeros(modes, spec.clone(), Side::Spectral);
    data.profiles[0] = spec.nodes().iter().map(|r| (-r * r).exp() * r).collect();
    assert!(prop.half_wave(&data, 1.0, WaveSign::Plus).is_err());
}

#[test]
fn long_times_demand_finer_spectral_grids() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = gaussian_data(&modes, prop.spectral_grid(), 0);
    assert!(matches!(
        prop.evolve(&data, 500.0),
        Err(Error::OscillationUnderResolved { .. })
    ));
}

#[test]
fn narrow_spectral_bump_oscillates_at_its_frequency() {
    let modes = sphere_modes();
    let spec = Arc::new(RadialGrid::linear_gauss(1.0, 2.0, 40, 16, 4).unwrap());
    let phys = Arc::new(make_log_grid(0.5, 2.0, 64, 4).unwrap());
    let prop = Propagator::new(spec.clone(), phys.clone()).unwrap();
    let star = 1.5;
    let data = spectral_data(
        modes,
        spec,
        &DataSpec::ModeBump {
            nu_index: 0,
            ell: 1,
            rho_center: star,
            rho_width: 0.05,
            shape: BumpShape::Gaussian,
        },
    )
    .unwrap();
    let dt = 0.1;
    let times: Vec<f64> = (0..2000).map(|k| k as f64 * dt).collect();
    let states = prop.evolve_times(&data, &times).unwrap();
    let node = phys.nodes().iter().position(|&r| r >= 1.0).unwrap();
    let trace: Vec<f64> = states.iter().map(|s| s.profiles[0][node]).collect();
    let span = dt * times.len() as f64;
    let bin = 2.0 * PI / span;
    let mut best = (0.0, 0.0);
    for k in 1..200 {
        let omega = bin * k as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for (j, v) in trace.iter().enumerate() {
            let t = j as f64 * dt;
            c += v * (omega * t).cos();
            s += v * (omega * t).sin();
        }
        let power = c * c + s * s;
        if power > best.1 {
            best = (omega, power);
        }
    }
    assert!(
        (best.0 - star).abs() <= bin,
        "peak at {} (bin {bin})",
        best.0
    );
}

#[test]
fn modes_evolve_independently() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let data = mixed_data(&modes, prop.spectral_grid());
    let full = prop.evolve(&data, 2.0).unwrap();
    for m in data.active_modes() {
        let mut single = ModeCoefficients::zeros(modes.clone(), data.grid.clone(), Side::Spectral);
        single.profiles[m] = data.profiles[m].clone();
        let alone = prop.evolve(&single, 2.0).unwrap();
        assert_eq!(alone.profiles[m], full.profiles[m]);
    }
}

#[test]
fn evolution_is_linear() {
    let modes = sphere_modes();
    let prop = Propagator::new(spectral_grid(4), physical_grid(4)).unwrap();
    let a = mixed_data(&modes, prop.spectral_grid());
    let b = gaussian_data(&modes, prop.spectral_grid(), 1);
    let combo = a.combine(0.6, &b, -2.0).unwrap();
    let ua = prop.evolve(&a, 1.3).unwrap();
    let ub = prop.evolve(&b, 1.3).unwrap();
    let uc = prop.evolve(&combo, 1.3).unwrap();
    let expected = ua.combine(0.6, &ub, -2.0).unwrap();
    assert!(uc.relative_distance(&expected) < 1e-12);
}

#[test]
fn distorted_fourier_is_an_involution_and_isometry() {
    let modes = sphere_modes();
    let spec = spectral_grid(4);
    let phys = physical_grid(4);
    let data = mixed_data(&modes, &spec);
    let f = distorted_fourier(&data, &phys).unwrap();
    assert_eq!(f.side, Side::Physical);
    let back = distorted_fourier(&f, &spec).unwrap();
    assert_eq!(back.side, Side::Spectral);
    assert!(
        back.relative_distance(&data) < 1e-6,
        "{}",
        back.relative_distance(&data)
    );
    let defect = (f.l2_norm() - data.l2_norm()).abs() / data.l2_norm();
    assert!(defect < 1e-6, "{defect}");

    let zero = ModeCoefficients::zeros(modes, spec, Side::Spectral);
    let z = distorted_fourier(&zero, &phys).unwrap();
    assert!(z.profiles.iter().flatten().all(|x| *x == 0.0));
}

#[test]
fn decomposing_a_single_mode_returns_its_profile() {
    let modes = sphere_modes();
    let grid = Arc::new(make_log_grid(1e-2, 10.0, 32, 4).unwrap());
    let quad = CrossSection::sphere(4, 0.0).unwrap().quadrature(2);
    let target = modes[5].clone();
    let g = |r: f64| r * r * (-r).exp();
    let d = decompose(
        |r, p| g(r) * target.eval(p),
        modes.clone(),
        grid.clone(),
        &quad,
        DEFAULT_TRUNCATION_TOLERANCE,
    )
    .unwrap();
    for (m, profile) in d.coefficients.profiles.iter().enumerate() {
        for (x, r) in profile.iter().zip(grid.nodes()) {
            let expected = if m == 5 { g(*r) } else { 0.0 };
            assert!((x - expected).abs() < 1e-12, "mode {m} at r={r}");
        }
    }
    assert!(d.residual < 1e-6);
}

#[test]
fn radial_data_on_a_circle_lives_in_the_lowest_mode() {
    let modes = Arc::new(circle_spectrum(1.3, 0.25, 2, 4).unwrap());
    let y = CrossSection::circle(1.3, 0.25, 2).unwrap();
    let quad = y.quadrature(4);
    let grid = Arc::new(make_log_grid(1e-2, 10.0, 32, 2).unwrap());
    let d = decompose(
        |r, _| (-r * r).exp(),
        modes,
        grid,
        &quad,
        DEFAULT_TRUNCATION_TOLERANCE,
    )
    .unwrap();
    let c = &d.coefficients;
    assert!(c.profiles[0].iter().any(|x| x.abs() > 0.1));
    for p in &c.profiles[1..] {
        assert!(p.iter().all(|x| x.abs() < 1e-13));
    }
}

#[test]
fn content_outside_the_mode_set_is_reported() {
    let modes = Arc::new(circle_spectrum(1.0, 0.25, 2, 2).unwrap());
    let quad = CrossSection::circle(1.0, 0.25, 2).unwrap().quadrature(8);
    let grid = Arc::new(make_log_grid(1e-2, 10.0, 32, 2).unwrap());
    let result = decompose(
        |r, p| (-r * r).exp() * (1.0 + (5.0 * p[0]).cos()),
        modes,
        grid,
        &quad,
        DEFAULT_TRUNCATION_TOLERANCE,
    );
    assert!(matches!(result, Err(Error::TruncationTooCoarse { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parseval_over_eight_modes(coeffs in proptest::collection::vec(-1.0f64..1.0, 8), widths in proptest::collection::vec(0.3f64..1.5, 8)) {
        let modes = Arc::new(sphere_spectrum(3, 0.5, 1).unwrap()[..4].to_vec());
        let modes = Arc::new(modes.iter().cloned().chain(sphere_spectrum(3, 0.5, 2).unwrap()[4..8].iter().cloned()).collect::<Vec<_>>());
        prop_assert_eq!(modes.len(), 8);
        let grid = Arc::new(make_log_grid(1e-2, 10.0, 32, 3).unwrap());
        let quad = CrossSection::sphere(3, 0.5).unwrap().quadrature(2);
        let f = |r: f64, p: &[f64]| -> f64 {
            modes
                .iter()
                .enumerate()
                .map(|(m, y)| coeffs[m] * (-(r / widths[m]).powi(2)).exp() * y.eval(p))
                .sum()
        };
        let full: f64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&r, w)| w * quad.integrate(|p| f(r, p).powi(2)))
            .sum();
        let d = decompose(f, modes.clone(), grid, &quad, DEFAULT_TRUNCATION_TOLERANCE).unwrap();
        prop_assert!((d.coefficients.norm_sq() - full).abs() < 1e-8 * full);
    }
}

#[test]
fn sobolev_norm_scaling_on_an_exact_shell() {
    let n = 3;
    let modes = Arc::new(sphere_spectrum(3, 0.0, 0).unwrap());
    // Sixteen intervals per octave, so ρ → ρ/2 maps nodes onto nodes.
    let grid = Arc::new(RadialGrid::log_uniform(2f64.powi(-6), 2f64.powi(6), 12 * 16, n).unwrap());
    let bump = |r: f64| chi_on(r, 1.5, 0.5);
    let mut a = ModeCoefficients::zeros(modes.clone(), grid.clone(), Side::Spectral);
    a.profiles[0] = grid.nodes().iter().map(|&r| bump(r)).collect();
    let mut b = ModeCoefficients::zeros(modes, grid.clone(), Side::Spectral);
    b.profiles[0] = grid.nodes().iter().map(|&r| bump(r / 2.0)).collect();
    for s in [-1.0, -0.5, 0.0, 0.5, 2.0] {
        let ratio = sobolev_norm(&b, s).unwrap() / sobolev_norm(&a, s).unwrap();
        let expected = 2f64.powf(s + n as f64 / 2.0);
        assert!(
            (ratio / expected - 1.0).abs() < 1e-12,
            "s={s}: {ratio} vs {expected}"
        );
    }
    assert_eq!(sobolev_norm(&a, 0.0).unwrap(), a.l2_norm());
    let unit = a.scaled(1.0 / a.l2_norm());
    let h_minus_one = sobolev_norm(&unit, -1.0).unwrap();
    assert!((0.5..=1.0).contains(&h_minus_one), "{h_minus_one}");
}

#[test]
fn littlewood_paley_pieces_resum_to_the_data() {
    let modes = sphere_modes();
    let grid = spectral_grid(4);
    let data = mixed_data(&modes, &grid);
    let mut total = ModeCoefficients::zeros(modes.clone(), grid.clone(), Side::Spectral);
    for m in dyadic_scales(&grid) {
        total = total
            .combine(1.0, &littlewood_paley_piece(&data, m).unwrap(), 1.0)
            .unwrap();
    }
    assert!(total.relative_distance(&data) < 1e-10);
}

#[test]
fn shell_data_is_carried_by_two_adjacent_pieces() {
    let modes = sphere_modes();
    let grid = Arc::new(RadialGrid::linear_gauss(0.25, 16.0, 200, 8, 4).unwrap());
    let m = 2.0;
    let mut data = ModeCoefficients::zeros(modes.clone(), grid.clone(), Side::Spectral);
    data.profiles[0] = grid
        .nodes()
        .iter()
        .map(|&r| chi_on(r, 1.5 * m, 0.5 * m))
        .collect();
    let sum = littlewood_paley_piece(&data, m)
        .unwrap()
        .combine(1.0, &littlewood_paley_piece(&data, 2.0 * m).unwrap(), 1.0)
        .unwrap();
    assert!(sum.relative_distance(&data) < 1e-14);
    for other in [m / 4.0, m / 2.0, 4.0 * m] {
        assert_eq!(littlewood_paley_piece(&data, other).unwrap().l2_norm(), 0.0);
    }
    for s in [-1.0, -0.5, 1.0] {
        let piece = littlewood_paley_piece(&data, m).unwrap();
        let ratio = sobolev_norm(&piece, s).unwrap() / (m.powf(s) * piece.l2_norm());
        let f = 2f64.powf(s.abs());
        assert!(ratio >= 1.0 / f && ratio <= f, "s={s}: {ratio}");
    }
}

#[test]
fn plane_wave_residual_converges_at_second_order() {
    let modes = sphere_spectrum(4, 0.0, 0).unwrap();
    let mode = &modes[0];
    assert_eq!(mode.nu, 1.0);
    let mut res = Vec::new();
    for ppd in [256usize, 512, 1024] {
        let grid = Arc::new(make_log_grid(1e-2, 1e3, ppd, 4).unwrap());
        res.push(verify_plane_wave(mode, 1.0, &grid).unwrap());
    }
    assert!(res[2] < 1e-4, "{res:?}");
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{res:?}");
    }
    let grid = Arc::new(make_log_grid(1e-2, 1e3, 64, 4).unwrap());
    assert!(verify_plane_wave(mode, 0.0, &grid).is_err());
}

#[test]
fn plane_wave_half_order_in_two_dimensions() {
    let modes = circle_spectrum(1.0, 0.25, 2, 0).unwrap();
    let mode = &modes[0];
    assert!((mode.nu - 0.5).abs() < 1e-15);
    let grid = Arc::new(make_log_grid(1e-2, 1e3, 8192, 2).unwrap());
    let res = verify_plane_wave(mode, 1.0, &grid).unwrap();
    assert!(res < 1e-6, "{res}");
}
