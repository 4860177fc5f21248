use std::f64::consts::PI;

use mtss::density::{linspace, pdf_mtss_grid, trapezoid};
use mtss::stats::{ks_one_sample, mean_se};
use mtss::{
    inverse_laplace, levy_density, levy_density_integral, mittag_leffler_prabhakar, pdf_imtss,
    pdf_imtss_contour, pdf_mtss, pdf_mtss_inversion, pdf_stable, pdf_tss, renewal_asymptote,
    renewal_numeric, AsymptoticRegime, GridConvention, ImtssSampler, InversionMethod,
    MixtureParams, QuadratureConfig, RngConfig,
};
use num_complex::Complex64;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

fn headline() -> MixtureParams {
    MixtureParams::from_triples(&[(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)]).unwrap()
}

fn levy_half(x: f64, t: f64) -> f64 {
    t / (2.0 * PI.sqrt()) * x.powf(-1.5) * (-t * t / (4.0 * x)).exp()
}

fn phi(params: &MixtureParams, s: Complex64) -> Complex64 {
    mtss::laplace_exponent(params, s, None).unwrap()
}

#[test]
fn half_stable_golden_values() {
    let q = QuadratureConfig::default();
    let p = MixtureParams::single(0.5, 0.0).unwrap();
    let golden = (-0.25f64).exp() / (2.0 * PI.sqrt());
    assert!((pdf_mtss(&p, 1.0, 1.0, &q).unwrap() - golden).abs() < 1e-10);
    assert!((pdf_stable(0.5, 4.0, 1.0, 64).unwrap() - levy_half(4.0, 1.0)).abs() < 1e-12);
    // tilt exponent vanishes at x = 1, t = 1, lambda = 1
    assert!((pdf_tss(0.5, 1.0, 1.0, 1.0).unwrap() - golden).abs() < 1e-10);
}

#[test]
fn stable_series_and_contour_agree() {
    let q = QuadratureConfig::default();
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let p = MixtureParams::single(alpha, 0.0).unwrap();
        for x in linspace(0.25, 5.0, 20) {
            let a = pdf_stable(alpha, x, 1.0, 64).unwrap();
            let b = pdf_mtss(&p, x, 1.0, &q).unwrap();
            assert!(
                ((a - b) / b).abs() < 1e-5,
                "alpha {alpha}, x {x}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn stable_tail_follows_levy_density() {
    let (alpha, x) = (0.7, 1e3);
    let f = pdf_stable(alpha, x, 1.0, 64).unwrap();
    let ratio = f * gamma(1.0 - alpha) * x.powf(alpha + 1.0) / alpha;
    assert!((ratio - 1.0).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn tilting_identity_is_exact() {
    for (alpha, lambda, x, t) in [(0.4, 0.7, 0.9, 1.3), (0.8, 2.0, 2.5, 0.5)] {
        let tilt = (-lambda * x + f64::powf(lambda, alpha) * t).exp();
        let lhs = pdf_tss(alpha, lambda, x, t).unwrap();
        let rhs = tilt * pdf_stable(alpha, x, t, 64).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-15);
        assert_eq!(
            pdf_tss(alpha, 0.0, x, t).unwrap(),
            pdf_stable(alpha, x, t, 64).unwrap()
        );
    }
}

#[test]
fn densities_integrate_to_one() {
    let q = QuadratureConfig::default();
    for p in [
        headline(),
        MixtureParams::single(0.7, 1.0).unwrap(),
        MixtureParams::from_triples(&[(0.3, 0.5, 0.3), (0.5, 1.5, 0.7)]).unwrap(),
    ] {
        // fine near the mode, coarser in the tail
        let mut xs = linspace(1e-3, 4.0, 4000);
        xs.extend(linspace(4.01, 60.0, 6000));
        let g = pdf_mtss_grid(&p, 1.0, xs, &q).unwrap();
        assert!((g.mass - 1.0).abs() < 1e-4, "mass {}", g.mass);
    }
    let xs = linspace(1e-3, 40.0, 20000);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| pdf_tss(0.5, 1.0, x, 1.0).unwrap())
        .collect();
    assert!((trapezoid(&xs, &ys) - 1.0).abs() < 1e-4);
}

#[test]
fn levy_density_reductions() {
    let single = |a: f64, l: f64, x: f64| a * (-l * x).exp() / (gamma(1.0 - a) * x.powf(1.0 + a));
    let same = MixtureParams::from_triples(&[(0.6, 1.5, 0.3), (0.6, 1.5, 0.7)]).unwrap();
    let stable = MixtureParams::from_triples(&[(0.6, 0.0, 0.3), (0.6, 0.0, 0.7)]).unwrap();
    for x in linspace(0.1, 5.0, 20) {
        let a = levy_density(&same, x).unwrap();
        assert!(((a - single(0.6, 1.5, x)) / a).abs() < 1e-10);
        let b = levy_density(&stable, x).unwrap();
        assert!(((b - single(0.6, 0.0, x)) / b).abs() < 1e-10);
    }
}

#[test]
fn levy_density_integral_form_and_additivity() {
    let p = headline();
    let q = QuadratureConfig::default();
    for x in [0.05, 0.5, 2.0] {
        let closed = levy_density(&p, x).unwrap();
        let integral = levy_density_integral(&p, x, &q).unwrap();
        assert!(((closed - integral) / closed).abs() < 1e-9);
        let parts: f64 = p
            .components()
            .iter()
            .map(|c| {
                c.weight
                    * levy_density(&MixtureParams::single(c.alpha, c.lambda).unwrap(), x).unwrap()
            })
            .sum();
        assert!(((closed - parts) / closed).abs() < 1e-15);
    }
}

#[test]
fn small_time_density_approaches_levy_density() {
    let p = headline();
    let q = QuadratureConfig::default();
    let x = 0.5;
    let nu = levy_density(&p, x).unwrap();
    let ratio = pdf_mtss(&p, x, 1e-4, &q).unwrap() / 1e-4 / nu;
    assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");

    let grid = linspace(0.25, 3.0, 12);
    let sup = |t: f64| {
        grid.iter()
            .map(|&x| (pdf_mtss(&p, x, t, &q).unwrap() / t - levy_density(&p, x).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&t| sup(t)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn textbook_inverse_laplace_pairs() {
    for m in [InversionMethod::Talbot, InversionMethod::GaverStehfest] {
        let a = inverse_laplace(|s| 1.0 / (s + 1.0), 1.0, m).unwrap();
        assert!((a - (-1.0f64).exp()).abs() < 1e-6, "{m:?}");
    }
    let a = inverse_laplace(|s| 1.0 / (s + 1.0), 1.0, InversionMethod::Talbot).unwrap();
    assert!((a - (-1.0f64).exp()).abs() < 1e-8);
    let b = inverse_laplace(|s: Complex64| s.sqrt().inv(), 1.0, InversionMethod::Talbot).unwrap();
    assert!((b - 1.0 / PI.sqrt()).abs() < 1e-6);
}

#[test]
fn density_by_inversion_in_space() {
    let p = headline();
    let q = QuadratureConfig::default();
    let direct = pdf_mtss(&p, 1.0, 1.0, &q).unwrap();
    let talbot = inverse_laplace(|s| (-phi(&p, s)).exp(), 1.0, InversionMethod::Talbot).unwrap();
    assert!(((direct - talbot) / direct).abs() < 1e-3);
    let v = pdf_mtss_inversion(&p, 1.0, 1.0, InversionMethod::Talbot).unwrap();
    assert!(((direct - v) / direct).abs() < 1e-9);
}

#[test]
fn half_stable_density_matches_gaver_stehfest() {
    let p = MixtureParams::single(0.5, 0.0).unwrap();
    let q = QuadratureConfig::default();
    for x in linspace(0.2, 6.0, 50) {
        let direct = pdf_mtss(&p, x, 1.0, &q).unwrap();
        let gs = pdf_mtss_inversion(&p, x, 1.0, InversionMethod::GaverStehfest).unwrap();
        assert!(
            ((direct - gs) / direct).abs() < 1e-3,
            "x {x}: {direct} vs {gs}"
        );
    }
}

#[test]
fn two_component_density_matches_talbot_on_a_grid() {
    let p = headline();
    let q = QuadratureConfig::default();
    for x in linspace(0.4, 5.0, 50) {
        let direct = pdf_mtss(&p, x, 1.0, &q).unwrap();
        let tal = pdf_mtss_inversion(&p, x, 1.0, InversionMethod::Talbot).unwrap();
        assert!(
            ((direct - tal) / direct).abs() < 1e-6,
            "x {x}: {direct} vs {tal}"
        );
    }
}

#[test]
fn mittag_leffler_identities() {
    assert!(
        (mittag_leffler_prabhakar(1.0, 1.0, 1.0, 1.0).unwrap() - 1f64.exp()).abs()
            < 1e-10 * 1f64.exp()
    );
    for q in [0.3, 1.0, 2.5] {
        let v = mittag_leffler_prabhakar(0.7, q, 1.7, 0.0).unwrap();
        assert!((v - 1.0 / gamma(q)).abs() < 1e-15);
    }
    // t^(q-1) M^r_{p,q}(-a t^p) inverts s^(pr - q) / (s^p + a)^r
    let (p, q, r, a, t) = (1.0, 0.5, 1.0, 1.0, 0.7f64);
    let lhs = t.powf(q - 1.0) * mittag_leffler_prabhakar(p, q, r, -a * t.powf(p)).unwrap();
    let rhs = inverse_laplace(
        |s: Complex64| s.powf(p * r - q) / (s.powf(p) + a).powf(r),
        t,
        InversionMethod::Talbot,
    )
    .unwrap();
    assert!(((lhs - rhs) / lhs).abs() < 1e-5, "{lhs} vs {rhs}");
}

#[test]
fn inverse_density_normalizes() {
    for p in [headline(), MixtureParams::single(0.5, 1.0).unwrap()] {
        let q = QuadratureConfig::default();
        let xs = linspace(0.0, 12.0, 2401);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| pdf_imtss_contour(&p, x, 1.0, &q).unwrap())
            .collect();
        let mass = trapezoid(&xs, &ys);
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    }
    // Talbot route on a single tempered component
    let p = MixtureParams::single(0.5, 1.0).unwrap();
    let xs = linspace(0.005, 12.0, 2400);
    let ys: Vec<f64> = xs.iter().map(|&x| pdf_imtss(&p, x, 1.0).unwrap()).collect();
    let head = 0.005 * pdf_imtss(&p, 0.0025, 1.0).unwrap();
    assert!((trapezoid(&xs, &ys) + head - 1.0).abs() < 1e-3);
}

#[test]
fn inverse_density_forward_transform() {
    let p = headline();
    let q = QuadratureConfig::default();
    let x = 0.5;
    for s in [0.5, 1.0, 2.0] {
        let f = |t: f64| (-s * t).exp() * pdf_imtss_contour(&p, x, t, &q).unwrap();
        let breaks: Vec<f64> = (0..=40).map(|k| 2.0 * k as f64).collect();
        let cfg = QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            ..QuadratureConfig::default()
        };
        let lt = cfg.integrate(f, &breaks).unwrap().value;
        let ph = phi(&p, Complex64::new(s, 0.0)).re;
        let exact = ph / s * (-x * ph).exp();
        assert!(
            ((lt - exact) / exact).abs() < 1e-3,
            "s {s}: {lt} vs {exact}"
        );
    }
}

#[test]
fn inverse_stable_half_normal_against_first_passage() {
    let p = MixtureParams::single(0.5, 0.0).unwrap();
    // h(x, 1) = e^(-x^2/4) / sqrt(pi)
    for x in [0.1, 0.8, 2.0] {
        let h = pdf_imtss(&p, x, 1.0).unwrap();
        assert!((h - (-x * x / 4.0).exp() / PI.sqrt()).abs() < 1e-6);
    }
    let sampler = ImtssSampler::new(&p, 1.0, 256).unwrap();
    let rng = RngConfig::new(21, 8).unwrap();
    let draws = rng
        .batch(100_000, |r, _| {
            sampler
                .sample(&[1.0], GridConvention::Midpoint, r)
                .map(|v| v[0])
        })
        .unwrap();
    let d = ks_one_sample(&draws, |x| erf(x / 2.0));
    assert!(d < 0.01, "KS {d}");

    let u = renewal_numeric(&p, 1.0).unwrap();
    assert!((u - 1.0 / gamma(1.5)).abs() < 1e-8);
    let (m, se) = mean_se(&draws);
    assert!((m - u).abs() < 3.0 * se, "{m} +- {se} vs {u}");
}

#[test]
fn renewal_function_approaches_linear_growth() {
    let p = headline();
    let t = 1e3;
    let u = renewal_numeric(&p, t).unwrap();
    let a = renewal_asymptote(&p, t, AsymptoticRegime::LargeArgumentTempered).unwrap();
    assert!((u / a.value - 1.0).abs() < 0.02);
}
