//! Acceptance criteria 1 through 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

// Negated comparisons make NaN count as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::sync::Arc;

use conewave::bessel::{j, localized_l2_mass, regime_envelope, schlafli_split};
use conewave::cross_section::{sphere_spectrum, SpectralMode};
use conewave::experiments::{run, ExperimentConfig, ScenarioReport, Verdict};
use conewave::hankel::{
    hankel_transform, make_log_grid, verify_diagonalization, RadialGrid, RadialProfile,
};
use conewave::norms::{admissible, Admissibility};
use conewave::propagator::{distorted_fourier, energy, ModeCoefficients, Propagator, Side};
use num_rational::Rational64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Outcome {
                pass: true,
                detail: summary,
            }
        } else {
            Outcome {
                pass: false,
                detail: failures.join("; "),
            }
        }
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("acceptance configs are valid")
}

fn fitted(report: &ScenarioReport, tag: &str) -> f64 {
    report.row(tag).map(|r| r.fitted).unwrap_or(f64::NAN)
}

// ---- 1. Hankel ---------------------------------------------------------------

fn gaussian_bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |r| (-(r - center).powi(2) / (2.0 * width * width)).exp()
}

fn relative_distance(a: &RadialProfile, b: &RadialProfile) -> f64 {
    let diff: f64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .zip(a.grid.weights())
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum();
    diff.sqrt() / b.l2_norm()
}

fn hankel_suite() -> Outcome {
    let mut worst = [0.0_f64; 3];
    for n in 2..=4 {
        let phys = Arc::new(make_log_grid(1e-2, 4.0, 256, n).unwrap());
        let spec = Arc::new(make_log_grid(1e-7, 32.0, 128, n).unwrap());
        let f = RadialProfile::from_fn(phys.clone(), gaussian_bump(2.0, 0.25));
        let g = RadialProfile::from_fn(spec.clone(), gaussian_bump(1.5, 0.2));
        for nu in [0.2, 0.5, 1.0, 2.5, 7.0] {
            let hf = hankel_transform(nu, &f, &spec).unwrap();
            let back = hankel_transform(nu, &hf, &phys).unwrap();
            let hg = hankel_transform(nu, &g, &phys).unwrap();
            let defects = [
                relative_distance(&back, &f),
                (hf.l2_norm() - f.l2_norm()).abs() / f.l2_norm(),
                (hf.inner(&g) - f.inner(&hg)).abs() / (f.l2_norm() * g.l2_norm()),
            ];
            for (w, d) in worst.iter_mut().zip(defects) {
                *w = w.max(d);
            }
        }
    }
    let spec = Arc::new(make_log_grid(1e-3, 50.0, 128, 4).unwrap());
    let residuals: Vec<f64> = [512usize, 1024, 2048]
        .iter()
        .map(|&ppd| {
            let phys = Arc::new(make_log_grid(1e-2, 4.0, ppd, 4).unwrap());
            let f = RadialProfile::from_fn(phys, gaussian_bump(1.5, 0.25));
            verify_diagonalization(1.0, &f, &spec).unwrap()
        })
        .collect();
    let order = residuals
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    let mut failures = Vec::new();
    for (name, d) in ["involution", "plancherel", "self-adjointness"]
        .iter()
        .zip(worst)
    {
        if !(d < 1e-6) {
            failures.push(format!("{name} defect {d:.2e}"));
        }
    }
    if !(residuals[2] < 1e-4) {
        failures.push(format!("diagonalization residual {:.2e}", residuals[2]));
    }
    if !(order >= 1.9) {
        failures.push(format!("diagonalization order {order:.3}"));
    }
    Outcome::new(
        failures,
        format!(
            "defects {:.1e}/{:.1e}/{:.1e}, diagonalization {:.1e} at order {order:.2}",
            worst[0], worst[1], worst[2], residuals[2]
        ),
    )
}

// ---- 2. Bessel ---------------------------------------------------------------

type ClosedForm = (f64, fn(f64) -> f64);

fn bessel_suite() -> Outcome {
    let closed: [ClosedForm; 3] = [
        (0.5, |x| (2.0 / (PI * x)).sqrt() * x.sin()),
        (1.5, |x| (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())),
        (2.5, |x| {
            (2.0 / (PI * x)).sqrt() * ((3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x)
        }),
    ];
    let mut closed_err = 0.0_f64;
    for (nu, f) in closed {
        for k in 1..=400 {
            let x = 0.1 * k as f64;
            closed_err = closed_err.max((j(nu, x).unwrap() - f(x)).abs());
        }
    }
    let mut schlafli_err = 0.0_f64;
    let mut integer_exp = 0.0_f64;
    for nu in [0.3, 1.5, 2.3, 4.0, 7.7, 12.0] {
        for r in [0.5, 3.0, 7.0, 25.0] {
            let s = schlafli_split(nu, r, None).unwrap();
            schlafli_err =
                schlafli_err.max((s.oscillatory - s.exponential - j(nu, r).unwrap()).abs());
            if nu.fract() == 0.0 {
                integer_exp = integer_exp.max(s.exponential.abs());
            }
        }
    }
    let mut violations = 0;
    for nu in [8.0, 16.0, 32.0, 64.0] {
        let r_end = 2.0 * nu + 60.0 + 6.0 * nu;
        let count = 4000;
        for i in 1..=count {
            let r = r_end * (i as f64 - 0.381_966) / count as f64;
            if j(nu, r).unwrap().abs() > regime_envelope(nu, r).unwrap().bound {
                violations += 1;
            }
        }
    }
    // R ≥ 8 dyadic and R ≥ ν; below the turning point the mass is exponentially small.
    let mut masses = Vec::new();
    for nu in [0.0, 0.5, 1.0, 2.5, 8.0, 16.0, 32.0, 64.0] {
        let mut big_r = 8.0;
        while big_r <= 1024.0 {
            if big_r >= nu {
                masses.push(localized_l2_mass(nu, big_r).unwrap());
            }
            big_r *= 2.0;
        }
    }
    let max = masses.iter().copied().fold(0.0, f64::max);
    let min = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let mut failures = Vec::new();
    if !(closed_err < 1e-10) {
        failures.push(format!("closed forms off by {closed_err:.2e}"));
    }
    if !(schlafli_err < 1e-8) {
        failures.push(format!("Schläfli identity off by {schlafli_err:.2e}"));
    }
    if integer_exp != 0.0 {
        failures.push(format!(
            "exponential part {integer_exp:.2e} at integer order"
        ));
    }
    if violations > 0 {
        failures.push(format!("{violations} envelope violations"));
    }
    if !(max / min <= 10.0) {
        failures.push(format!("localized mass max/min {:.3}", max / min));
    }
    Outcome::new(
        failures,
        format!(
            "closed forms {closed_err:.1e}, Schläfli {schlafli_err:.1e}, 0 envelope violations, mass max/min {:.2}",
            max / min
        ),
    )
}

// ---- 3. Propagator -------------------------------------------------------------

fn propagator_suite() -> Outcome {
    let n = 4;
    let modes: Arc<Vec<SpectralMode>> = Arc::new(sphere_spectrum(n as i64, 0.0, 2).unwrap());
    let spectral = Arc::new(RadialGrid::linear_gauss(0.02, 4.0, 80, 16, n).unwrap());
    let near = make_log_grid(1e-5, 4.0, 256, n).unwrap();
    let far = RadialGrid::linear_gauss(4.0, 40.0, 36, 16, n).unwrap();
    let physical = Arc::new(near.concat(&far).unwrap());
    let mut data = ModeCoefficients::zeros(modes.clone(), spectral.clone(), Side::Spectral);
    for (m, c, w, a) in [
        (0usize, 1.5, 0.2, 1.0),
        (3, 1.3, 0.18, -0.7),
        (7, 2.0, 0.25, 0.4),
    ] {
        data.profiles[m] = spectral
            .nodes()
            .iter()
            .map(|&r| a * (-0.5 * ((r - c) / w).powi(2)).exp())
            .collect();
    }
    let prop = Propagator::new(spectral, physical.clone()).unwrap();
    let u0 = prop.evolve(&data, 0.0).unwrap();
    let exact_zero = u0.profiles.iter().flatten().all(|x| *x == 0.0);

    let f = distorted_fourier(&data, &physical).unwrap();
    let errors: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let plus = prop.evolve(&data, h).unwrap();
            let minus = prop.evolve(&data, -h).unwrap();
            plus.combine(0.5 / h, &minus, -0.5 / h)
                .unwrap()
                .relative_distance(&f)
        })
        .collect();
    let order = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);

    let e0 = energy(&data, 0.0).unwrap();
    let drift = [0.3, 1.0, 7.5, 40.0, -12.0]
        .iter()
        .map(|&t| (energy(&data, t).unwrap() - e0).abs() / e0)
        .fold(0.0, f64::max);

    let mut failures = Vec::new();
    if !exact_zero {
        failures.push("u(0) is not identically zero".into());
    }
    if !(order >= 1.9) {
        failures.push(format!("velocity difference order {order:.3} ({errors:?})"));
    }
    if !(drift < 1e-10) {
        failures.push(format!("energy drift {drift:.2e}"));
    }
    Outcome::new(
        failures,
        format!("u(0) = 0, difference order {order:.2}, energy drift {drift:.1e}"),
    )
}

// ---- 4-7. Scenario sweeps --------------------------------------------------------

const PROP31_N4: &str = r#"
scenario = "prop31"
[cross_section]
type = "sphere"
n = 4
v0 = 0.0
[data]
type = "mode_bump"
nu_index = 0
ell = 1
rho_center = 1.5
rho_width = 0.5
shape = "chi"
"#;

const PROP31_N4_V0: &str = r#"
scenario = "prop31"
[cross_section]
type = "sphere"
n = 4
v0 = -0.75
"#;

const STRICHARTZ_N2_Q6: &str = r#"
scenario = "strichartz_scaling"
[cross_section]
type = "circle"
rho0 = 1.0
v0 = 0.25
[[norms]]
q = 6.0
"#;

const STRICHARTZ_N4_Q4: &str = r#"
scenario = "strichartz_scaling"
[cross_section]
type = "sphere"
n = 4
[[norms]]
q = 4.0
"#;

const COUNTEREXAMPLE_Q16: &str = r#"
scenario = "counterexample"
sweep = [0.00390625, 0.0078125, 0.015625, 0.03125, 0.0625, 0.125, 0.25, 0.5]
[cross_section]
type = "sphere"
n = 4
v0 = -0.75
[[norms]]
q = 16.0
"#;

const COUNTEREXAMPLE_Q8: &str = r#"
scenario = "counterexample"
[cross_section]
type = "sphere"
n = 4
v0 = -0.75
[[norms]]
q = 8.0
"#;

const KSS: &str = r#"
scenario = "kss"
sweep = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
[cross_section]
type = "sphere"
n = 3
[kss]
betas = [0.0, 0.25, 0.5, 0.75, 1.0]
weight = "japanese_bracket"
t_fit_min = 16.0
data_scales = [0.5, 1.0, 2.0]
"#;

const LOCAL_ENERGY: &str = r#"
scenario = "local_energy"
sweep = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
[cross_section]
type = "sphere"
n = 3
[kss]
data_scales = [0.5, 1.0, 2.0]
"#;

fn prop31(reports: &[(f64, &ScenarioReport)]) -> Outcome {
    let n = 4.0;
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for &(nu0, report) in reports {
        let small = fitted(report, "prop31_l2_small_r_slope");
        let limits = [
            ("prop31_l2_large_r_slope", 0.5),
            ("prop31_linf_l1_large_r_slope", -(n - 2.0) / 2.0 - 1.0 / 3.0),
            ("prop31_linf_large_r_slope", -(n - 1.0) / 2.0),
        ];
        if !((small - (nu0 + 1.0)).abs() <= 0.15) {
            failures.push(format!("nu0 = {nu0}: small-R slope {small:.4}"));
        }
        for (tag, envelope) in limits {
            let s = fitted(report, tag);
            if !(s <= envelope + 0.1) {
                failures.push(format!(
                    "nu0 = {nu0}: {tag} {s:.4} above {envelope:.4} + 0.1"
                ));
            }
        }
        parts.push(format!(
            "nu0 = {nu0}: small {small:.3}, large {:.3}/{:.3}/{:.3}",
            fitted(report, limits[0].0),
            fitted(report, limits[1].0),
            fitted(report, limits[2].0)
        ));
    }
    Outcome::new(failures, parts.join(", "))
}

fn strichartz(cases: &[(f64, f64, &ScenarioReport)]) -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for &(n, q, report) in cases {
        let predicted = (n - 1.0) / 2.0 - (n + 1.0) / q;
        let tag = format!("est_stri_q{q}_slope_envelope");
        let slope = fitted(report, &tag);
        if !(slope <= predicted + 0.1) {
            failures.push(format!(
                "(n, q) = ({n}, {q}): slope {slope:.4} above {predicted:.4} + 0.1"
            ));
        }
        if !(slope >= predicted - 0.15) {
            failures.push(format!(
                "(n, q) = ({n}, {q}): slope {slope:.4} below {predicted:.4} - 0.15"
            ));
        }
        let ratio = fitted(report, &format!("est_stri_q{q}_ratio"));
        if !(ratio <= report.tolerances.ratio_factor) {
            failures.push(format!("(n, q) = ({n}, {q}): normalized ratio {ratio:.3}"));
        }
        parts.push(format!(
            "(n, q) = ({n}, {q}): slope {slope:.4} vs {predicted:.4}"
        ));
    }
    Outcome::new(failures, parts.join(", "))
}

fn counterexample(strict: &ScenarioReport, boundary: &ScenarioReport) -> Outcome {
    let mut failures = Vec::new();
    let slope = fitted(strict, "counterexample_q16_slope");
    if !((slope + 0.25).abs() <= 0.1) {
        failures.push(format!("q = 16 slope {slope:.4}"));
    }
    for (report, q) in [(strict, 16), (boundary, 8)] {
        let rhs = fitted(report, &format!("counterexample_q{q}_rhs_finite"));
        if !(rhs.is_finite() && rhs > 0.0) {
            failures.push(format!("q = {q} right-hand norm {rhs}"));
        }
    }
    let residual = fitted(boundary, "counterexample_q8_log_fit");
    if !(residual < 0.15) {
        failures.push(format!("q = 8 log-fit residual {residual:.4}"));
    }
    let grows = strict
        .table("counterexample_q16")
        .map(|t| t.rows.first().map(|r| r.value) > t.rows.last().map(|r| r.value))
        .unwrap_or(false);
    if !grows {
        failures.push("q = 16 norm does not grow as epsilon decreases".into());
    }
    Outcome::new(
        failures,
        format!("q = 16 slope {slope:.4}, q = 8 log-fit residual {residual:.4}"),
    )
}

fn kss(report: &ScenarioReport, local: &ScenarioReport) -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (beta, tag) in [(0.0, "kss_beta0_slope"), (0.25, "kss_beta0p25_slope")] {
        let s = fitted(report, tag);
        if !(s <= 0.5 - beta + 0.1) {
            failures.push(format!("beta = {beta}: slope {s:.4}"));
        }
        parts.push(format!("beta {beta}: {s:.3}"));
    }
    let residual = fitted(report, "kss_beta0p5_log_fit");
    if !(residual < report.tolerances.log_fit_residual) {
        failures.push(format!("beta = 0.5: log-fit residual {residual:.4}"));
    }
    parts.push(format!("beta 0.5: residual {residual:.4}"));
    for beta in ["0p75", "1"] {
        let s = fitted(report, &format!("kss_beta{beta}_slope"));
        let ratio = fitted(report, &format!("kss_beta{beta}_ratio"));
        if !(s <= 0.05) {
            failures.push(format!("beta = {beta}: slope {s:.4}"));
        }
        if !(ratio <= report.tolerances.bounded_ratio_factor) {
            failures.push(format!("beta = {beta}: ratio {ratio:.3}"));
        }
        parts.push(format!("beta {}: {s:.3}", beta.replace('p', ".")));
    }
    for (name, r) in [("kss", report), ("local_energy", local)] {
        let sup = fitted(r, "est_locendec_sup_ratio");
        if !(sup <= 4.0) {
            failures.push(format!("{name}: local energy sup ratio {sup:.4}"));
        }
    }
    parts.push(format!(
        "local energy sup ratio {:.6}",
        fitted(local, "est_locendec_sup_ratio")
    ));
    Outcome::new(failures, parts.join(", "))
}

// ---- 8. Admissibility ------------------------------------------------------------

/// The first failing condition, evaluated in exact rational arithmetic.
fn rational_oracle(n: i64, q: Rational64, p: Rational64, nu0: Rational64) -> Admissibility {
    let one = Rational64::from_integer(1);
    let zero = Rational64::from_integer(0);
    if n < 2 || q < one || p < one || nu0 <= zero {
        return Admissibility::OutOfDomain;
    }
    let nr = Rational64::from_integer(n);
    let two = Rational64::from_integer(2);
    if q <= two * nr / (nr - one) {
        return Admissibility::LowerBound;
    }
    if (nr + one) / q != (nr - one) * (one - one / p) {
        return Admissibility::Scaling;
    }
    let critical = (nr - two) / two;
    if nu0 < critical && q >= two * nr / (nr - two - two * nu0) {
        return Admissibility::AdditionalBound;
    }
    Admissibility::Admissible
}

fn as_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn admissibility() -> Outcome {
    let strategy = (
        2i64..=7,
        (1i64..=120, 1i64..=10),
        (1i64..=40, 1i64..=10),
        (0i64..=40, 1i64..=8),
        0u8..10,
    );
    let mut runner = TestRunner::deterministic();
    let mut failures = Vec::new();
    let mut tally = std::collections::BTreeMap::new();
    for _ in 0..50 {
        let (n, (qa, qb), (pa, pb), (na, nb), pick) =
            strategy.new_tree(&mut runner).unwrap().current();
        let nr = Rational64::from_integer(n);
        let one = Rational64::from_integer(1);
        let q = Rational64::new(qa, qb);
        let nu0 = Rational64::new(na, nb);
        let inv_p_prime = (nr + one) / ((nr - one) * q);
        // Most tuples take p from the scaling equality so later conditions are reached.
        let p = if pick < 7 && inv_p_prime < one {
            one / (one - inv_p_prime)
        } else {
            Rational64::new(pa, pb)
        };
        let expected = rational_oracle(n, q, p, nu0);
        let (ok, reason) = admissible(n, as_f64(q), as_f64(p), as_f64(nu0));
        *tally.entry(format!("{expected:?}")).or_insert(0) += 1;
        if reason != expected || ok != (expected == Admissibility::Admissible) {
            failures.push(format!(
                "(n={n}, q={q}, p={p}, nu0={nu0}): {reason:?} vs {expected:?}"
            ));
        }
    }
    let counts: Vec<String> = tally.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Outcome::new(failures, format!("50/50 agree ({})", counts.join(", ")))
}

// ---- 9. Determinism and stability --------------------------------------------------

fn determinism(reports: &[(&str, &ScenarioReport)]) -> Outcome {
    let mut failures = Vec::new();
    let cfg = config(PROP31_N4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(&cfg).unwrap().emit(a.path()).unwrap();
    let second = run(&cfg).unwrap().emit(b.path()).unwrap();
    if first.len() != second.len() {
        failures.push("reruns wrote different file sets".into());
    }
    for (x, y) in first.iter().zip(&second) {
        if fs::read(x).unwrap() != fs::read(y).unwrap() {
            failures.push(format!("{} differs between runs", x.display()));
        }
    }
    let mut slopes = 0;
    let mut worst = 0.0_f64;
    for (name, report) in reports {
        for row in report.summary.iter().filter(|r| r.kind.is_slope()) {
            slopes += 1;
            let dk = row.delta_k_max.unwrap_or(f64::INFINITY);
            let dr = row.delta_resolution.unwrap_or(f64::INFINITY);
            worst = worst.max(dk).max(dr);
            if !(dk < 0.02 && dr < 0.02) {
                failures.push(format!("{name}/{}: deltas {dk:.4}, {dr:.4}", row.tag));
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "{} files byte-identical, {slopes} slopes move by at most {worst:.2e}",
            first.len()
        ),
    )
}

fn main() {
    let started = std::time::Instant::now();
    let run_config = |text: &str| run(&config(text)).expect("scenario runs");
    let p31 = run_config(PROP31_N4);
    let p31_v0 = run_config(PROP31_N4_V0);
    let s_q6 = run_config(STRICHARTZ_N2_Q6);
    let s_q4 = run_config(STRICHARTZ_N4_Q4);
    let c_q16 = run_config(COUNTEREXAMPLE_Q16);
    let c_q8 = run_config(COUNTEREXAMPLE_Q8);
    let k = run_config(KSS);
    let le = run_config(LOCAL_ENERGY);

    let outcomes = [
        hankel_suite(),
        bessel_suite(),
        propagator_suite(),
        prop31(&[(1.0, &p31), (0.5, &p31_v0)]),
        strichartz(&[(2.0, 6.0, &s_q6), (4.0, 4.0, &s_q4)]),
        counterexample(&c_q16, &c_q8),
        kss(&k, &le),
        admissibility(),
        determinism(&[
            ("prop31_n4", &p31),
            ("prop31_n4_v0", &p31_v0),
            ("strichartz_q6", &s_q6),
            ("strichartz_q4", &s_q4),
            ("counterexample_q16", &c_q16),
            ("counterexample_q8", &c_q8),
            ("kss", &k),
            ("local_energy", &le),
        ]),
    ];
    let reports = [&p31, &p31_v0, &s_q6, &s_q4, &c_q16, &c_q8, &k, &le];
    let verdicts_ok = reports.iter().all(|r| r.verdict() == Verdict::Pass);
    let mut all = true;
    for (i, o) in outcomes.iter().enumerate() {
        let word = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {word} ({})", i + 1, o.detail);
        all &= o.pass;
    }
    if !verdicts_ok {
        for r in reports.iter().filter(|r| r.verdict() != Verdict::Pass) {
            for row in r.summary.iter().filter(|row| row.verdict != Verdict::Pass) {
                println!("  scenario row {} is {}", row.tag, row.verdict.as_str());
            }
        }
    }
    println!(
        "acceptance: {} in {:.1} s",
        if all && verdicts_ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    if !(all && verdicts_ok) {
        std::process::exit(1);
    }
}
