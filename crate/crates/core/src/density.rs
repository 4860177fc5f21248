//! Densities of the mixture, its Lévy measure and its inverse.
//!
//! The density of `S(t)` is the Bromwich integral of `e^(-t phi(s))`,
//! deformed onto two rays leaving the rightmost branch point
//! `sigma = -min lambda_i` at angles `+-theta`:
//!
//! `g(x, t) = e^(sigma x) / pi * Im int_0^inf e^(i theta) e^(x r e^(i theta)) G(sigma + r e^(i theta)) dr`.
//!
//! With every `alpha_i <= 1/2` the rays fold onto the cut (`theta = pi`) and
//! this is the classical branch-cut integral, evaluated just above the cut.
//! Otherwise `e^(-t phi)` grows exponentially along the cut and the rays are
//! opened to `theta = pi (1 + alpha) / (4 alpha)`, where both `e^(x s)` and
//! `e^(-t phi(s))` decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{check, positive, Error, Result};
use crate::exponent::{laplace_exponent, phi_complex, BranchSide};
use crate::inversion::{inverse_laplace, inverse_laplace_checked, InversionMethod};
use crate::params::MixtureParams;
use crate::quadrature::{integrate, QuadratureConfig};

/// Default cap on stable-series terms.
pub const DEFAULT_SERIES_TERMS: usize = 200;

fn ray_angle(alpha_max: f64) -> f64 {
    if alpha_max <= 0.5 {
        PI
    } else {
        PI * (1.0 + alpha_max) / (4.0 * alpha_max)
    }
}

/// Smallest `r >= start` (to bisection accuracy) with `log_tail(r) <= goal`,
/// for a `log_tail` that is eventually decreasing.
fn truncation_radius<F: Fn(f64) -> f64>(
    log_tail: F,
    goal: f64,
    start: f64,
    cutoff: f64,
) -> Result<f64> {
    let mut hi = start;
    while log_tail(hi) > goal {
        hi *= 2.0;
        if hi > cutoff {
            return Err(Error::Truncation {
                required: hi,
                cutoff,
            });
        }
    }
    let mut lo = if hi > start { hi / 2.0 } else { 0.0 };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if log_tail(mid) > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Rays `sigma + r e^(+-i theta)` with the branch side to use on the cut.
fn ray_direction(params: &MixtureParams) -> (f64, Complex64, Option<BranchSide>) {
    let theta = ray_angle(params.max_alpha());
    if theta == PI {
        (theta, Complex64::new(-1.0, 0.0), Some(BranchSide::Above))
    } else {
        (theta, Complex64::from_polar(1.0, theta), None)
    }
}

/// Density `g(x, t)` of `S(t)` by contour integration.
pub fn pdf_mtss(params: &MixtureParams, x: f64, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    positive("x", x)?;
    positive("t", t)?;
    quad.validate()?;
    let lmin = params.min_lambda();
    let sigma = -lmin;
    let (theta, dir, side) = ray_direction(params);
    let (cos_t, sin_t) = (dir.re, dir.im);
    let comps: Vec<_> = params.active().map(|(_, c)| *c).collect();

    // tolerance on the bare integral, before the e^(sigma x) / pi factor
    let target = quad.abs_tol * PI * (lmin * x).exp();
    let log_b0 = t * params.tempering_offset();
    // log of a bound on int_R^inf |e^(x s) G(s)| dr along the ray
    let log_tail = |r: f64| {
        let decay: f64 = comps
            .iter()
            .map(|c| {
                let rho = (r * sin_t).max(r - (c.lambda - lmin)).max(0.0);
                c.weight * rho.powf(c.alpha) * (c.alpha * theta).cos()
            })
            .sum();
        log_b0 - t * decay + x * r * cos_t - (x * cos_t.abs()).ln()
    };
    let big_r = truncation_radius(log_tail, (0.1 * target).ln(), 1.0, quad.cutoff)?;

    let integrand = |r: f64| {
        let s = Complex64::new(sigma, 0.0) + dir * r;
        let phi = laplace_exponent(params, s, side).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let g_minus_one = crate::exponent::cexp_m1(-t * phi);
        (dir * (dir * (x * r)).exp() * g_minus_one).im
    };
    let mut points = vec![0.0];
    if side.is_some() {
        let mut kinks: Vec<f64> = comps
            .iter()
            .map(|c| c.lambda - lmin)
            .filter(|&d| d > 0.0 && d < big_r)
            .collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        points.extend(kinks);
    }
    points.push(big_r);
    let q = integrate(integrand, &points, target, quad.rel_tol, quad.max_nodes)?;
    // the subtracted 1 integrates to Im((e^(x R e^(i theta)) - 1) / x) over [0, R]
    let analytic = (x * big_r * cos_t).exp() * (x * big_r * sin_t).sin() / x;
    Ok((sigma * x).exp() / PI * (q.value + analytic))
}

/// Density of `S(t)` by numerical inversion of `e^(-t phi(s))` in the `x` variable.
pub fn pdf_mtss_inversion(
    params: &MixtureParams,
    x: f64,
    t: f64,
    method: InversionMethod,
) -> Result<f64> {
    positive("t", t)?;
    inverse_laplace(|s| (-t * phi_complex(params, s)).exp(), x, method)
}

/// Stable-series value with `(sum, error estimate)`; `None` when the terms overflow.
fn stable_series(alpha: f64, x: f64, t: f64, n_terms: usize) -> Option<(f64, f64)> {
    let (lt, lx) = (t.ln(), x.ln());
    let log_mag = |k: usize| {
        let kf = k as f64;
        ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) + kf * lt - (alpha * kf + 1.0) * lx
    };
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut used = n_terms;
    for k in 1..=n_terms {
        let mag = log_mag(k).exp() / PI;
        if !mag.is_finite() {
            return None;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * mag * (PI * alpha * k as f64).sin();
        sum += term;
        abs_sum += term.abs();
        if mag < prev && mag <= f64::EPSILON * sum.abs() {
            used = k;
            break;
        }
        prev = mag;
    }
    let omitted = log_mag(used + 1).exp() / PI;
    Some((sum, omitted + 4.0 * f64::EPSILON * abs_sum))
}

/// Density of the `alpha`-stable subordinator at time `t`.
///
/// Uses the convergent series in `t / x^alpha` when its truncation and
/// rounding estimate is below `rel_tol`, otherwise the contour integral.
pub fn pdf_stable(alpha: f64, x: f64, t: f64, n_terms: usize) -> Result<f64> {
    pdf_stable_with(alpha, x, t, n_terms, &QuadratureConfig::default())
}

pub fn pdf_stable_with(
    alpha: f64,
    x: f64,
    t: f64,
    n_terms: usize,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "0 < alpha < 1")?;
    positive("x", x)?;
    positive("t", t)?;
    check(n_terms >= 1, "n_terms", n_terms as f64, "n_terms >= 1")?;
    let series = stable_series(alpha, x, t, n_terms);
    if let Some((sum, err)) = series {
        if err <= quad.rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    let params = MixtureParams::single(alpha, 0.0)?;
    match pdf_mtss(&params, x, t, quad) {
        Ok(v) => Ok(v),
        Err(Error::QuadratureNonConvergence { estimate, .. }) => {
            let best = series.map(|(_, e)| e).unwrap_or(f64::INFINITY);
            Err(Error::SeriesNonConvergence {
                estimate: best.min(estimate),
            })
        }
        Err(e) => Err(e),
    }
}

/// Tempered stable density `e^(-lambda x + lambda^alpha t) f_alpha(x, t)`.
pub fn pdf_tss(alpha: f64, lambda: f64, x: f64, t: f64) -> Result<f64> {
    check(
        lambda >= 0.0 && lambda.is_finite(),
        "lambda",
        lambda,
        "lambda >= 0",
    )?;
    let stable = pdf_stable(alpha, x, t, DEFAULT_SERIES_TERMS)?;
    if lambda == 0.0 {
        return Ok(stable);
    }
    Ok((-lambda * x + lambda.powf(alpha) * t).exp() * stable)
}

/// Lévy density `sum c_i alpha_i e^(-lambda_i x) / (Gamma(1 - alpha_i) x^(1 + alpha_i))`.
pub fn levy_density(params: &MixtureParams, x: f64) -> Result<f64> {
    positive("x", x)?;
    Ok(params
        .active()
        .map(|(_, c)| {
            c.weight * c.alpha * (-c.lambda * x).exp()
                / (gamma(1.0 - c.alpha) * x.powf(1.0 + c.alpha))
        })
        .sum())
}

/// Lévy density from the per-component integral
/// `(1/pi) int_0^inf e^(-lambda x - w x) w^alpha sin(pi alpha) dw`, by quadrature.
pub fn levy_density_integral(
    params: &MixtureParams,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    positive("x", x)?;
    quad.validate()?;
    let mut total = 0.0;
    for (_, c) in params.active() {
        // with u = w x the integral is x^(-1-alpha) int_0^inf u^alpha e^(-u) du
        let mut upper: f64 = 40.0;
        while upper.powf(c.alpha) * (-upper).exp() * 2.0 > quad.abs_tol * 1e-3 {
            upper *= 1.25;
        }
        let q = integrate(
            |u: f64| u.powf(c.alpha) * (-u).exp(),
            &[0.0, 1.0, upper],
            quad.abs_tol * 1e-3,
            quad.rel_tol,
            quad.max_nodes,
        )?;
        total += c.weight * (PI * c.alpha).sin() / PI
            * (-c.lambda * x).exp()
            * x.powf(-1.0 - c.alpha)
            * q.value;
    }
    Ok(total)
}

/// Density `h(x, t)` of the inverse `E(t)` by Talbot inversion of
/// `(phi(s) / s) e^(-x phi(s))` in `t`.
///
/// Cross-checked against [`pdf_imtss_contour`]; disagreement beyond
/// `max(1e-10, 1e-6 |h|)` is reported as [`Error::InversionDisagreement`].
/// That happens at small `t` when some `alpha_i > 1/2`, where fixed Talbot
/// loses its digits.
pub fn pdf_imtss(params: &MixtureParams, x: f64, t: f64) -> Result<f64> {
    positive("x", x)?;
    let talbot = match pdf_imtss_talbot(params, x, t) {
        Ok(v) => v,
        Err(Error::NonFiniteInversion { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    let contour = pdf_imtss_contour(params, x, t, &QuadratureConfig::default())?;
    if !((talbot - contour).abs() <= 1e-10f64.max(1e-6 * contour.abs())) {
        return Err(Error::InversionDisagreement { talbot, contour });
    }
    Ok(talbot)
}

pub(crate) fn imtss_transform(
    params: &MixtureParams,
    x: f64,
) -> impl Fn(Complex64) -> Complex64 + '_ {
    move |s| {
        let phi = phi_complex(params, s);
        phi / s * (-x * phi).exp()
    }
}

/// Talbot-only `h(x, t)`.
pub(crate) fn pdf_imtss_talbot(params: &MixtureParams, x: f64, t: f64) -> Result<f64> {
    inverse_laplace(imtss_transform(params, x), t, InversionMethod::Talbot)
}

/// `h(x, t)` by integrating `e^(s t) (phi(s)/s) e^(-x phi(s))` along rays
/// at the angle of [`pdf_mtss`] capped at `3 pi / 4`.
///
/// The rays leave the real axis at the saddle of `e^(s t - x phi(s))`, so the
/// integrand is on the scale of the result and far tails keep their
/// relative accuracy.
///
/// Unlike fixed Talbot this stays accurate at small `t` when some
/// `alpha_i > 1/2`. `x = 0` gives the right limit `h(0+, t)`.
pub fn pdf_imtss_contour(
    params: &MixtureParams,
    x: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check(x >= 0.0 && x.is_finite(), "x", x, "0 <= x < inf")?;
    positive("t", t)?;
    quad.validate()?;
    let sigma = saddle_abscissa(params, x, t);
    // off the cut even when every alpha <= 1/2, so e^(-x phi) decays along the rays
    let theta = ray_angle(params.max_alpha()).min(0.75 * PI);
    let dir = Complex64::from_polar(1.0, theta);
    let cos_t = dir.re;
    let comps: Vec<_> = params.active().map(|(_, c)| *c).collect();
    let target = quad.abs_tol * PI * (-sigma * t).exp();
    let log_b0 = x * params.tempering_offset() - (t * cos_t.abs()).ln();
    // |phi(s)/s| <= sum c ((r + sigma + lambda)^alpha + lambda^alpha) / (r - |sigma|)
    let log_tail = |r: f64| {
        let b: f64 = comps
            .iter()
            .map(|c| c.weight * ((r + sigma + c.lambda).powf(c.alpha) + c.lambda.powf(c.alpha)))
            .sum();
        log_b0 + (b / (r - sigma.abs())).ln() + r * t * cos_t
    };
    let start = 2.0 * sigma.abs() + 1.0;
    let big_r = truncation_radius(log_tail, (0.1 * target).ln(), start, quad.cutoff)?;
    let integrand = |r: f64| {
        let s = Complex64::new(sigma, 0.0) + dir * r;
        let phi = phi_complex(params, s);
        (dir * (dir * (r * t)).exp() * phi / s * (-x * phi).exp()).im
    };
    let q = integrate(
        integrand,
        &[0.0, big_r],
        target,
        quad.rel_tol,
        quad.max_nodes,
    )?;
    Ok((sigma * t).exp() / PI * q.value)
}

/// Real `sigma > -min lambda_i` minimising `sigma t - x phi(sigma)`, where
/// `phi'(sigma) = t / x`, capped at `40 / t` (beyond which `e^(sigma t)`
/// only inflates the truncation radius); `-min lambda_i` when `x = 0`.
fn saddle_abscissa(params: &MixtureParams, x: f64, t: f64) -> f64 {
    let lmin = params.min_lambda();
    if x == 0.0 {
        return -lmin;
    }
    let cap = 40.0 / t;
    let slope = t / x;
    let dphi = |sigma: f64| -> f64 {
        params
            .active()
            .map(|(_, c)| c.weight * c.alpha * (sigma + c.lambda).powf(c.alpha - 1.0))
            .sum()
    };
    let mut hi = 1.0 - lmin;
    while dphi(hi) > slope {
        if hi >= cap {
            return cap;
        }
        hi = -lmin + 2.0 * (hi + lmin);
    }
    let mut lo = -lmin;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) > slope {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Renewal function `U(t) = E[E(t)]` by inversion of `1 / (s phi(s))`.
pub fn renewal_numeric(params: &MixtureParams, t: f64) -> Result<f64> {
    inverse_laplace_checked(|s| 1.0 / (s * phi_complex(params, s)), t, 1e-10, 1e-4)
}

/// Potential density `v(x)` by inversion of `1 / phi(s)`.
pub fn potential_density_numeric(params: &MixtureParams, x: f64) -> Result<f64> {
    inverse_laplace_checked(|s| 1.0 / phi_complex(params, s), x, 1e-10, 1e-4)
}

/// Abscissae with density values and their trapezoid mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub params: MixtureParams,
    pub t: Option<f64>,
    pub method: String,
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub mass: f64,
}

impl DensityGrid {
    pub fn new(
        params: MixtureParams,
        t: Option<f64>,
        method: impl Into<String>,
        abscissae: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(Error::InvalidGrid("abscissae and values differ in length"));
        }
        if abscissae.iter().any(|&x| !(x > 0.0)) || abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "abscissae must be positive and strictly increasing",
            ));
        }
        let mass = trapezoid(&abscissae, &values);
        Ok(Self {
            params,
            t,
            method: method.into(),
            abscissae,
            values,
            mass,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.abscissae.iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{v:.16e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + k as f64 * h })
        .collect()
}

/// [`pdf_mtss`] on a grid, evaluated in parallel. Negative round-off is
/// clipped to zero.
pub fn pdf_mtss_grid(
    params: &MixtureParams,
    t: f64,
    xs: Vec<f64>,
    quad: &QuadratureConfig,
) -> Result<DensityGrid> {
    let values = xs
        .par_iter()
        .map(|&x| pdf_mtss(params, x, t, quad).map(|v| v.max(0.0)))
        .collect::<Result<Vec<_>>>()?;
    DensityGrid::new(params.clone(), Some(t), "contour", xs, values)
}

/// [`levy_density`] on a grid.
pub fn levy_density_grid(params: &MixtureParams, xs: Vec<f64>) -> Result<DensityGrid> {
    let values = xs
        .iter()
        .map(|&x| levy_density(params, x))
        .collect::<Result<Vec<_>>>()?;
    DensityGrid::new(params.clone(), None, "levy", xs, values)
}

/// [`pdf_imtss`] (Talbot) on a grid of `x` at fixed `t`.
pub fn pdf_imtss_grid(params: &MixtureParams, t: f64, xs: Vec<f64>) -> Result<DensityGrid> {
    positive("t", t)?;
    let values = xs
        .par_iter()
        .map(|&x| pdf_imtss_talbot(params, x, t).map(|v| v.max(0.0)))
        .collect::<Result<Vec<_>>>()?;
    DensityGrid::new(params.clone(), Some(t), "talbot", xs, values)
}
