//! Brownian motion run on the mixture clock, checked in the Fourier domain.
//!
//! `Z(t) = B(S(t))` has characteristic function `e^(-t phi(xi^2))` (with
//! `B` of variance 1 per unit time and `xi^2` absorbing the factor 1/2), so
//! `(lambda - d^2/dx^2)^alpha` acts as multiplication by `(lambda + xi^2)^alpha`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{five_point, Norms, VerificationReport};
use crate::error::{positive, Result};
use crate::exponent::phi_real;
use crate::moments::cumulant;
use crate::params::MixtureParams;
use crate::rng::RngConfig;
use crate::simulate::{sample_tcbm, Clock};
use crate::stats::variance_se;

/// Tolerance on the relative derivative error.
const DERIVATIVE_TOL: f64 = 1e-8;

/// Optional variance check against simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcbmMonteCarlo {
    pub samples: usize,
    pub rng: RngConfig,
}

/// Checks `d/dt r(xi, t) = -phi(xi^2) r(xi, t)` for `r = e^(-t phi(xi^2))`
/// at each `xi`, that `r(0, t) = 1`, and optionally that the sample variance
/// of `Z(t)` matches `E S(t)` within 3 standard errors.
///
/// `norms` holds the derivative errors relative to `|phi r|` (max and mean).
pub fn tcbm_transform_check(
    params: &MixtureParams,
    t: f64,
    xi: &[f64],
    mc: Option<TcbmMonteCarlo>,
) -> Result<VerificationReport> {
    positive("t", t)?;
    let mut errors = Vec::with_capacity(xi.len());
    let mut mass_ok = true;
    for &x in xi {
        let phi = phi_real(params, x * x);
        let r = |tt: f64| (-tt * phi).exp();
        if x == 0.0 {
            mass_ok &= r(t) == 1.0;
            errors.push(0.0);
            continue;
        }
        let d = five_point(r, t, 1e-3 * t);
        let exact = -phi * r(t);
        errors.push(((d - exact) / exact).abs());
    }
    let norms = Norms {
        max: errors.iter().fold(0.0, |m: f64, e| m.max(*e)),
        l1: errors.iter().sum::<f64>() / errors.len().max(1) as f64,
    };
    let mut pass = mass_ok && norms.max < DERIVATIVE_TOL;
    let mut grid = json!({ "t": t, "xi": xi, "derivative_errors": errors });
    if let Some(mc) = mc {
        let draws = mc.rng.batch(mc.samples, |rng, _| {
            sample_tcbm(params, t, rng, Clock::Mtss)
        })?;
        let (var, se) = variance_se(&draws);
        let target = cumulant(params, 1, t)?;
        let ok = (var - target).abs() <= 3.0 * se;
        pass &= ok;
        grid["variance"] = json!({ "sample": var, "se": se, "target": target, "pass": ok });
    }
    Ok(VerificationReport {
        check_name: "tcbm-transform".to_string(),
        params: params.clone(),
        grid,
        norms,
        refinement_slopes: Vec::new(),
        pass,
    })
}
