//! Residuals of the forward equations for `S(t)` and `E(t)`.
//!
//! For the density `g(x, t)` of `S(t)`:
//! `d/dt g + sum c_i (lambda_i + d/dx)^alpha_i g - (sum c_i lambda_i^alpha_i) g = 0`.
//!
//! For the density `h(x, t)` of `E(t)`, with the operator acting in `t`:
//! `d/dx h + sum c_i (lambda_i + d/dt)^alpha_i h - (sum c_i lambda_i^alpha_i) h
//!  = -sum c_i t^(-alpha_i) M^(1-alpha_i)_(1,1-alpha_i)(-lambda_i t) delta(x)`.
//!
//! Both densities vanish to all orders at the lower terminal of the
//! fractional operator, so the Grünwald-Letnikov sums converge at first order.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fractional::shifted_fractional_derivative;
use super::{five_point, refinement_slopes, GridFunction, Norms, VerificationReport};
use crate::density::{imtss_transform, pdf_imtss_contour, pdf_mtss};
use crate::error::{positive, Error, Result};
use crate::exponent::phi_complex;
use crate::mittag_leffler::mittag_leffler_prabhakar;
use crate::params::MixtureParams;
use crate::quadrature::QuadratureConfig;

/// Cells next to `x = 0` left out of residual norms.
pub const BOUNDARY_CELLS: usize = 3;

/// Minimum refinement slope for a passing study.
pub const MIN_SLOPE: f64 = 0.8;

/// Refinement study for the density of `S(t)` on `[0, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtssGrid {
    pub x_max: f64,
    /// Coarsest step.
    pub h0: f64,
    pub halvings: usize,
    /// Step of the central difference in `t`.
    pub dt: f64,
}

impl Default for MtssGrid {
    fn default() -> Self {
        Self {
            x_max: 3.0,
            h0: 1.0 / 512.0,
            halvings: 3,
            dt: 1e-4,
        }
    }
}

/// Refinement study for the density of `E(t)`: fixed `x` cells, refined `t` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImtssGrid {
    pub x_max: f64,
    pub nx: usize,
    /// Number of coarsest `t` steps on `[0, t]`.
    pub nt0: usize,
    pub halvings: usize,
    /// Step of the central difference in `x`.
    pub dx: f64,
}

impl Default for ImtssGrid {
    fn default() -> Self {
        Self {
            x_max: 2.0,
            nx: 32,
            nt0: 64,
            halvings: 3,
            dx: 1e-4,
        }
    }
}

fn validate_grid(h: f64, n: usize) -> Result<()> {
    positive("h", h)?;
    if n < 4 {
        return Err(Error::InvalidGrid("grid functions need at least 4 points"));
    }
    Ok(())
}

fn mtss_values(
    params: &MixtureParams,
    t: f64,
    h: f64,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                Ok(0.0)
            } else {
                pdf_mtss(params, k as f64 * h, t, quad)
            }
        })
        .collect()
}

fn mtss_residual_from(
    params: &MixtureParams,
    h: f64,
    g: &[f64],
    g_plus: &[f64],
    g_minus: &[f64],
    dt: f64,
) -> Result<GridFunction> {
    let grid = GridFunction::new(0.0, h, g.to_vec())?;
    let offset = params.tempering_offset();
    let mut res: Vec<f64> = g_plus
        .iter()
        .zip(g_minus)
        .zip(g)
        .map(|((p, m), v)| (p - m) / (2.0 * dt) - offset * v)
        .collect();
    for (_, c) in params.active() {
        let op = shifted_fractional_derivative(&grid, c.lambda, c.alpha)?;
        for (r, o) in res.iter_mut().zip(&op.values) {
            *r += c.weight * o;
        }
    }
    GridFunction::new(0.0, h, res)
}

/// Forward-equation residual of the density of `S(t)` at `x_k = k h`,
/// `k = 0..n`, with a central difference of step `dt` in time.
pub fn fpk_residual_mtss(
    params: &MixtureParams,
    t: f64,
    h: f64,
    n: usize,
    dt: f64,
    quad: &QuadratureConfig,
) -> Result<GridFunction> {
    positive("t", t)?;
    positive("dt", dt)?;
    validate_grid(h, n)?;
    if dt >= t {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            constraint: "dt < t",
        });
    }
    let g = mtss_values(params, t, h, n, quad)?;
    let gp = mtss_values(params, t + dt, h, n, quad)?;
    let gm = mtss_values(params, t - dt, h, n, quad)?;
    mtss_residual_from(params, h, &g, &gp, &gm, dt)
}

fn study(
    check_name: &str,
    params: &MixtureParams,
    grid: serde_json::Value,
    levels: Vec<(f64, Norms)>,
) -> VerificationReport {
    let max_norms: Vec<f64> = levels.iter().map(|(_, n)| n.max).collect();
    let slopes = refinement_slopes(&max_norms);
    let pass = !slopes.is_empty() && slopes.iter().all(|&s| s >= MIN_SLOPE);
    let mut grid = grid;
    grid["steps"] = json!(levels.iter().map(|(h, _)| *h).collect::<Vec<_>>());
    grid["max_norms"] = json!(max_norms);
    grid["boundary_cells"] = json!(BOUNDARY_CELLS);
    VerificationReport {
        check_name: check_name.to_string(),
        params: params.clone(),
        grid,
        norms: levels.last().expect("at least one level").1,
        refinement_slopes: slopes,
        pass,
    }
}

/// Residual of the `S(t)` forward equation on successively halved `x` grids.
///
/// The density is evaluated once on the finest grid and subsampled.
pub fn mtss_refinement(
    params: &MixtureParams,
    t: f64,
    spec: &MtssGrid,
    quad: &QuadratureConfig,
) -> Result<VerificationReport> {
    positive("t", t)?;
    positive("x_max", spec.x_max)?;
    let factor = 1usize << spec.halvings;
    let h_fine = spec.h0 / factor as f64;
    let n_coarse = (spec.x_max / spec.h0).round() as usize + 1;
    let n_fine = (n_coarse - 1) * factor + 1;
    validate_grid(spec.h0, n_coarse)?;
    let g = mtss_values(params, t, h_fine, n_fine, quad)?;
    let gp = mtss_values(params, t + spec.dt, h_fine, n_fine, quad)?;
    let gm = mtss_values(params, t - spec.dt, h_fine, n_fine, quad)?;
    let sub = |v: &[f64], step: usize| v.iter().step_by(step).copied().collect::<Vec<_>>();
    let levels = (0..=spec.halvings)
        .map(|l| {
            let step = factor >> l;
            let h = h_fine * step as f64;
            let r = mtss_residual_from(
                params,
                h,
                &sub(&g, step),
                &sub(&gp, step),
                &sub(&gm, step),
                spec.dt,
            )?;
            Ok((h, Norms::of(&r.values, h, BOUNDARY_CELLS)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(study(
        "fpk-mtss",
        params,
        json!({ "t": t, "x_max": spec.x_max, "dt": spec.dt }),
        levels,
    ))
}

/// Mass of the source at `x = 0`: `sum c_i t^(-alpha_i) M^(1-alpha_i)_(1,1-alpha_i)(-lambda_i t)`.
pub fn imtss_source_mass(params: &MixtureParams, t: f64) -> Result<f64> {
    positive("t", t)?;
    params
        .active()
        .map(|(_, c)| {
            let m = mittag_leffler_prabhakar(1.0, 1.0 - c.alpha, 1.0 - c.alpha, -c.lambda * t)?;
            Ok(c.weight * t.powf(-c.alpha) * m)
        })
        .sum()
}

/// `h(x, t_n)` for `t_n = n t / nt`, `n = 0..=nt`; `h(x, 0) = 0` for `x > 0`.
fn imtss_history(
    params: &MixtureParams,
    x: f64,
    t: f64,
    nt: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    (0..=nt)
        .map(|n| {
            if n == 0 {
                Ok(0.0)
            } else {
                pdf_imtss_contour(params, x, n as f64 * t / nt as f64, quad)
            }
        })
        .collect()
}

/// Residual at `(x, t)` from the `t`-history of `h(x, .)` and `d/dx h(x, t)`.
fn imtss_point_residual(
    params: &MixtureParams,
    history: &[f64],
    ht: f64,
    dhdx: f64,
) -> Result<f64> {
    let grid = GridFunction::new(0.0, ht, history.to_vec())?;
    let last = history.len() - 1;
    let mut r = dhdx - params.tempering_offset() * history[last];
    for (_, c) in params.active() {
        let op = shifted_fractional_derivative(&grid, c.lambda, c.alpha)?;
        r += c.weight * op.values[last];
    }
    Ok(r)
}

/// `d/dx h(x, t)`, central for `x > dx`, forward at the boundary.
fn imtss_dhdx(
    params: &MixtureParams,
    x: f64,
    t: f64,
    dx: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let h = |x| pdf_imtss_contour(params, x, t, quad);
    if x > dx {
        Ok((h(x + dx)? - h(x - dx)?) / (2.0 * dx))
    } else {
        Ok((h(x + dx)? - h(x)?) / dx)
    }
}

/// Forward-equation residual of the density of `E(t)` at `x_j = j hx`,
/// `j = 0..nx`, with `nt` Grünwald-Letnikov steps on `[0, t]`.
///
/// The delta source is spread over the first cell as `mass / hx`. Values of
/// `h` come from [`pdf_imtss_contour`].
pub fn fpk_residual_imtss(
    params: &MixtureParams,
    t: f64,
    hx: f64,
    nx: usize,
    nt: usize,
    dx: f64,
    quad: &QuadratureConfig,
) -> Result<GridFunction> {
    positive("t", t)?;
    positive("dx", dx)?;
    validate_grid(hx, nx)?;
    if nt < 4 {
        return Err(Error::InvalidGrid("need at least 4 time steps"));
    }
    let source = imtss_source_mass(params, t)?;
    let ht = t / nt as f64;
    let values = (0..nx)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 * hx;
            let hist = imtss_history(params, x, t, nt, quad)?;
            let r = imtss_point_residual(params, &hist, ht, imtss_dhdx(params, x, t, dx, quad)?)?;
            Ok(if j == 0 { r + source / hx } else { r })
        })
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(0.0, hx, values)
}

/// Residual of the `E(t)` forward equation on fixed `x` cells while the `t`
/// grid is halved; the history is computed once on the finest `t` grid.
pub fn imtss_refinement(
    params: &MixtureParams,
    t: f64,
    spec: &ImtssGrid,
    quad: &QuadratureConfig,
) -> Result<VerificationReport> {
    positive("t", t)?;
    positive("x_max", spec.x_max)?;
    validate_grid(spec.x_max / spec.nx as f64, spec.nx)?;
    if spec.nt0 < 4 {
        return Err(Error::InvalidGrid("need at least 4 time steps"));
    }
    let hx = spec.x_max / spec.nx as f64;
    let factor = 1usize << spec.halvings;
    let nt_fine = spec.nt0 * factor;
    // rows: x_j for j past the boundary layer
    let rows = (BOUNDARY_CELLS..=spec.nx)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 * hx;
            Ok((
                imtss_history(params, x, t, nt_fine, quad)?,
                imtss_dhdx(params, x, t, spec.dx, quad)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let levels = (0..=spec.halvings)
        .map(|l| {
            let step = factor >> l;
            let ht = t / (nt_fine / step) as f64;
            let res = rows
                .iter()
                .map(|(hist, d)| {
                    let sub: Vec<f64> = hist.iter().step_by(step).copied().collect();
                    imtss_point_residual(params, &sub, ht, *d)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((ht, Norms::of(&res, hx, 0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(study(
        "fpk-imtss",
        params,
        json!({ "t": t, "x_max": spec.x_max, "nx": spec.nx, "dx": spec.dx }),
        levels,
    ))
}

/// Largest relative error of `d/dt e^(-t phi(s)) = -phi(s) e^(-t phi(s))`
/// over `s`, with the derivative taken by a five-point stencil.
pub fn mtss_transform_identity(params: &MixtureParams, t: f64, s: &[f64]) -> Result<f64> {
    positive("t", t)?;
    let mut worst = 0.0f64;
    for &si in s {
        positive("s", si)?;
        let phi = phi_complex(params, Complex64::new(si, 0.0)).re;
        let f = |tt: f64| (-tt * phi).exp();
        let d = five_point(f, t, 1e-3 * t);
        let exact = -phi * f(t);
        worst = worst.max(((d - exact) / exact).abs());
    }
    Ok(worst)
}

/// Largest relative error of `d/dx (phi/s) e^(-x phi) = -phi (phi/s) e^(-x phi)`.
pub fn imtss_transform_identity(params: &MixtureParams, x: f64, s: &[f64]) -> Result<f64> {
    positive("x", x)?;
    let mut worst = 0.0f64;
    for &si in s {
        positive("s", si)?;
        let sc = Complex64::new(si, 0.0);
        let phi = phi_complex(params, sc).re;
        let f = |xx: f64| imtss_transform(params, xx)(sc).re;
        let d = five_point(f, x, 1e-3 * x);
        let exact = -phi * f(x);
        worst = worst.max(((d - exact) / exact).abs());
    }
    Ok(worst)
}
