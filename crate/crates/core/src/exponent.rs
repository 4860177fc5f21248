//! Laplace exponent `phi(s) = sum c_i ((s + lambda_i)^alpha_i - lambda_i^alpha_i)`.
//!
//! Powers use the principal branch, `arg in (-pi, pi]`. Arguments that land on
//! the cut `s + lambda_i < 0` need an explicit side; the density contour
//! integral evaluates the exponent just above the cut.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MixtureParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSide {
    /// Limit from `Im s > 0`, argument `+pi` on the cut.
    Above,
    /// Limit from `Im s < 0`, argument `-pi` on the cut.
    Below,
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub(crate) fn cexp_m1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let e = z.re.exp();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, e * s)
}

/// `c * ((s + lambda)^alpha - lambda^alpha)` for one component.
fn component_term(
    alpha: f64,
    lambda: f64,
    s: Complex64,
    side: Option<BranchSide>,
    index: usize,
) -> Result<Complex64> {
    let z = s + lambda;
    let on_cut = z.im == 0.0 && z.re < 0.0;
    let arg = if on_cut {
        match side {
            Some(BranchSide::Above) => PI,
            Some(BranchSide::Below) => -PI,
            None => {
                return Err(Error::OnBranchCut {
                    component: index,
                    re: z.re,
                })
            }
        }
    } else {
        z.im.atan2(z.re)
    };
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(Complex64::new(-lambda.powf(alpha), 0.0));
    }
    if lambda == 0.0 {
        let modulus = z.norm().powf(alpha);
        return Ok(Complex64::from_polar(modulus, alpha * arg));
    }
    // lambda^alpha * ((1 + u)^alpha - 1) with u = s / lambda
    let u = s / lambda;
    let log_mod = if u.norm() < 0.5 {
        0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p()
    } else {
        z.norm().ln() - lambda.ln()
    };
    let w = Complex64::new(alpha * log_mod, alpha * arg);
    Ok(lambda.powf(alpha) * cexp_m1(w))
}

/// Laplace exponent at complex `s`.
///
/// Returns [`Error::OnBranchCut`] when `s + lambda_i` is a negative real for
/// some active component and no `side` was supplied.
pub fn laplace_exponent(
    params: &MixtureParams,
    s: Complex64,
    side: Option<BranchSide>,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, c) in params.active() {
        acc += c.weight * component_term(c.alpha, c.lambda, s, side, i)?;
    }
    Ok(acc)
}

/// Laplace exponent on the real half-line `s >= -min(lambda_i)`.
pub fn laplace_exponent_real(params: &MixtureParams, s: f64) -> Result<f64> {
    let lo = -params.min_lambda();
    if !(s >= lo) || !s.is_finite() {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            constraint: "s >= -min(lambda_i)",
        });
    }
    Ok(phi_real(params, s))
}

/// Unchecked real exponent; callers guarantee `s >= -min(lambda_i)`.
pub(crate) fn phi_real(params: &MixtureParams, s: f64) -> f64 {
    params
        .active()
        .map(|(_, c)| {
            let term = if c.lambda == 0.0 {
                s.powf(c.alpha)
            } else {
                c.lambda.powf(c.alpha) * (c.alpha * (s / c.lambda).ln_1p()).exp_m1()
            };
            c.weight * term
        })
        .sum()
}

/// Complex exponent off the cut; panics are avoided by returning NaN on the cut.
pub(crate) fn phi_complex(params: &MixtureParams, s: Complex64) -> Complex64 {
    laplace_exponent(params, s, None).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}
