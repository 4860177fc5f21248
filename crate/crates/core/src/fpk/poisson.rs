//! Counting processes driven by the mixture and its inverse.
//!
//! `X(t) = N(S(t))` has PGF `G(z, t) = exp(-t phi(mu (1 - z)))`; its PMF is
//! read off the PGF by Cauchy's formula on a circle of radius `rho < 1`.
//! `Y(t) = N(E(t))` is a Poisson mixture over the density of `E(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::density::pdf_imtss_contour;
use crate::error::{positive, Error, Result};
use crate::exponent::{phi_complex, phi_real};
use crate::inversion::{inverse_laplace, InversionMethod};
use crate::params::MixtureParams;
use crate::quadrature::{kronrod_nodes, QuadratureConfig};
use crate::rng::RngConfig;
use crate::simulate::{GridConvention, ImtssSampler};

/// Normalisation target for [`pmf_mtsfpp`].
pub const DEFECT_TARGET: f64 = 1e-8;

/// Largest truncation order [`pmf_mtsfpp`] grows to.
pub const MAX_ORDER: usize = 1 << 13;

/// Probabilities `p_0..p_K` with the mass beyond `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfVector {
    pub probs: Vec<f64>,
    /// `1 - sum p_k`, floored at 0.
    pub defect: f64,
    /// Total magnitude of negative values set to 0.
    pub clipped: f64,
}

impl PmfVector {
    /// Clips negatives and fixes the defect.
    pub fn from_raw(mut probs: Vec<f64>) -> Self {
        let mut clipped = 0.0;
        for p in probs.iter_mut() {
            if *p < 0.0 {
                clipped += -*p;
                *p = 0.0;
            }
        }
        let defect = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Self {
            probs,
            defect,
            clipped,
        }
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `sum p_k z^k` over the stored terms.
    pub fn pgf(&self, z: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, p| acc * z + p)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,p\n");
        for (k, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{k},{p:.16e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pmf serializes")
    }
}

/// PGF value with the side condition `mu <= lambda_i / 2` of the literature
/// recorded (it is not needed for the formula itself).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pgf {
    pub value: f64,
    pub mu_within_half_lambda: bool,
}

/// `E z^X(t) = exp(-t sum c_i [(lambda_i + mu (1 - z))^alpha_i - lambda_i^alpha_i])`.
pub fn pgf_mtsfpp(params: &MixtureParams, mu: f64, z: f64, t: f64) -> Result<Pgf> {
    positive("mu", mu)?;
    positive("t", t)?;
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            constraint: "-1 <= z <= 1",
        });
    }
    Ok(Pgf {
        value: (-t * phi_real(params, mu * (1.0 - z))).exp(),
        mu_within_half_lambda: params.active().all(|(_, c)| mu <= 0.5 * c.lambda),
    })
}

/// Raw Cauchy coefficients `p_0..p_K` of the PGF with `M = 4 (K + 1)` nodes
/// on radius `rho = eps^(1/(M + K))`, which balances aliasing (`rho^M`) against
/// rounding amplified by `rho^(-K)`.
fn cauchy_coefficients(params: &MixtureParams, mu: f64, t: f64, k_max: usize) -> Vec<f64> {
    let m = 4 * (k_max + 1);
    let rho = f64::EPSILON.powf(1.0 / (m + k_max) as f64);
    let roots: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / m as f64))
        .collect();
    let values: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let z = rho * roots[(m - j) % m];
            let s = mu * (Complex64::new(1.0, 0.0) - z);
            (-t * phi_complex(params, s)).exp()
        })
        .collect();
    (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let sum: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| (v * roots[(j * k) % m]).re)
                .sum();
            sum / (m as f64 * rho.powi(k as i32))
        })
        .collect()
}

/// PMF of `X(t)` up to order `k`, doubling the order until the mass
/// beyond it is below `1e-8`.
pub fn pmf_mtsfpp(params: &MixtureParams, mu: f64, t: f64, k: usize) -> Result<PmfVector> {
    positive("mu", mu)?;
    positive("t", t)?;
    let mut order = k.max(1);
    loop {
        let pmf = PmfVector::from_raw(cauchy_coefficients(params, mu, t, order));
        if pmf.defect < DEFECT_TARGET {
            return Ok(pmf);
        }
        if order >= MAX_ORDER {
            return Err(Error::DefectUnreachable {
                defect: pmf.defect,
                k: order,
            });
        }
        order = (2 * order).min(MAX_ORDER);
    }
}

/// How `(lambda + mu (1 - B))^alpha` was applied for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShiftExpansion {
    /// Binomial series in `mu / lambda` truncated after `l_max` with a
    /// rigorous bound on the omitted part (relative to `lambda^alpha`).
    Binomial { l_max: usize, tail_bound: f64 },
    /// Taylor coefficients of `(lambda + mu - mu z)^alpha` in `z`, exact.
    Pgf,
}

/// Residuals of the difference-differential equation for the PMF of `X(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeResidual {
    pub residual: Vec<f64>,
    pub expansions: Vec<ShiftExpansion>,
}

impl OdeResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Relative tail tolerance for the binomial expansion.
const BINOMIAL_TAIL: f64 = 1e-12;
const MAX_BINOMIAL_TERMS: usize = 200_000;

/// `(lambda + mu (1 - B))^alpha r` for `k = 0..r.len()` by the binomial
/// series `sum_l C(alpha, l) lambda^(alpha - l) mu^l (1 - B)^l r`.
///
/// For `0 <= r <= 1`, `|(1 - B)^l r(k)| <= (K + 1) C(l, K)` once `l >= 2K`, so
/// term `l` is bounded by `b_l = |C(alpha, l)| (mu/lambda)^l (K + 1) C(l, K)`
/// (relative to `lambda^alpha`). The ratio `b_(l+1)/b_l` is at most
/// `(mu/lambda) max(1, (l - alpha)/(l + 1 - K))`, nonincreasing in `l`, and
/// the tail after `L` is bounded geometrically.
fn binomial_shift(
    alpha: f64,
    lambda: f64,
    mu: f64,
    r: &[f64],
) -> Result<(Vec<f64>, ShiftExpansion)> {
    let k_top = r.len() - 1;
    let ratio = mu / lambda;
    let mut diff = r.to_vec();
    let mut out: Vec<f64> = r.to_vec();
    let mut coef = 1.0;
    let mut l = 0usize;
    loop {
        // bound on terms l + 1, l + 2, ...
        let next = l + 1;
        if next >= 2 * k_top {
            let lf = next as f64;
            let q = ratio * ((lf - alpha) / (lf + 1.0 - k_top as f64)).max(1.0);
            if q < 1.0 {
                let ln_binom = ln_gamma(lf + 1.0)
                    - ln_gamma(k_top as f64 + 1.0)
                    - ln_gamma(lf - k_top as f64 + 1.0);
                let b_next = (coef * (alpha - l as f64) / lf).abs()
                    * ratio
                    * (k_top as f64 + 1.0)
                    * ln_binom.exp();
                let bound = b_next / (1.0 - q);
                if bound < BINOMIAL_TAIL {
                    let scale = lambda.powf(alpha);
                    return Ok((
                        out.into_iter().map(|v| v * scale).collect(),
                        ShiftExpansion::Binomial {
                            l_max: l,
                            tail_bound: bound,
                        },
                    ));
                }
            }
        }
        if next > MAX_BINOMIAL_TERMS {
            return Err(Error::SeriesNonConvergence { estimate: f64::NAN });
        }
        coef *= (alpha - l as f64) / next as f64 * ratio;
        for k in (1..=k_top).rev() {
            diff[k] -= diff[k - 1];
        }
        // diff[0] is r(0) throughout
        for (o, d) in out.iter_mut().zip(&diff) {
            *o += coef * d;
        }
        l = next;
    }
}

/// Same operator via the exact coefficients `C(alpha, m) (lambda + mu)^(alpha - m) (-mu)^m`.
fn pgf_shift(alpha: f64, lambda: f64, mu: f64, r: &[f64]) -> Vec<f64> {
    let base = lambda + mu;
    let mut a = Vec::with_capacity(r.len());
    let mut coef = base.powf(alpha);
    for m in 0..r.len() {
        if m > 0 {
            coef *= (alpha - (m - 1) as f64) / m as f64 * (-mu / base);
        }
        a.push(coef);
    }
    (0..r.len())
        .map(|k| (0..=k).map(|m| a[m] * r[k - m]).sum())
        .collect()
}

/// Residual `d/dt r(k, t) + sum c_i [(lambda_i + mu (1 - B))^alpha_i - lambda_i^alpha_i] r(k, t)`
/// for `k = 0..=k_max`, with a central difference of step `dt`.
///
/// Components with `mu < lambda_i` use the binomial series; others use the
/// exact coefficient route.
pub fn pmf_ode_residual_mtsfpp(
    params: &MixtureParams,
    mu: f64,
    t: f64,
    k_max: usize,
    dt: f64,
) -> Result<OdeResidual> {
    positive("mu", mu)?;
    positive("t", t)?;
    positive("dt", dt)?;
    if dt >= t {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            constraint: "dt < t",
        });
    }
    let r = cauchy_coefficients(params, mu, t, k_max);
    let rp = cauchy_coefficients(params, mu, t + dt, k_max);
    let rm = cauchy_coefficients(params, mu, t - dt, k_max);
    let mut residual: Vec<f64> = rp
        .iter()
        .zip(&rm)
        .map(|(p, m)| (p - m) / (2.0 * dt))
        .collect();
    let mut expansions = Vec::new();
    for (_, c) in params.active() {
        let (op, how) = if mu < c.lambda {
            binomial_shift(c.alpha, c.lambda, mu, &r)?
        } else {
            (pgf_shift(c.alpha, c.lambda, mu, &r), ShiftExpansion::Pgf)
        };
        let base = c.lambda.powf(c.alpha);
        for ((res, o), v) in residual.iter_mut().zip(&op).zip(&r) {
            *res += c.weight * (o - base * v);
        }
        expansions.push(how);
    }
    Ok(OdeResidual {
        residual,
        expansions,
    })
}

/// How [`pmf_mttfpp`] averages over `E(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MttfppMethod {
    /// Composite Gauss-Kronrod over the density of `E(t)`.
    Quadrature,
    /// Talbot inversion of `phi mu^k / (s (mu + phi)^(k+1))`, term by term.
    Transform,
    /// Average of Poisson PMFs over simulated `E(t)` (midpoint grid convention).
    MonteCarlo {
        samples: usize,
        path_resolution: usize,
        rng: RngConfig,
    },
}

/// `e^(-m) m^k / k!` for `k = 0..=k_max`.
fn poisson_pmf(m: f64, k_max: usize) -> Vec<f64> {
    if m <= 0.0 {
        let mut v = vec![0.0; k_max + 1];
        v[0] = 1.0;
        return v;
    }
    let lm = m.ln();
    (0..=k_max)
        .map(|k| (-m + k as f64 * lm - ln_gamma(k as f64 + 1.0)).exp())
        .collect()
}

/// `u` beyond which `P(E(t) > u) = P(S(u) < t) <= min_s e^(s t - u phi(s))` is below `eps`.
fn inverse_tail_point(params: &MixtureParams, t: f64, eps: f64) -> f64 {
    let mut u = 1.0;
    loop {
        let bound = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&a| {
                let s = a / t;
                s * t - u * phi_real(params, s)
            })
            .fold(f64::INFINITY, f64::min);
        if bound < eps.ln() {
            return u;
        }
        u *= 1.5;
    }
}

/// Composite quadrature with `panels` equal panels on `[0, upper]`.
fn mttfpp_panels(
    params: &MixtureParams,
    mu: f64,
    t: f64,
    k_max: usize,
    upper: f64,
    panels: usize,
) -> Result<Vec<f64>> {
    let width = upper / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| kronrod_nodes(p as f64 * width, (p + 1) as f64 * width))
        .collect();
    let parts = nodes
        .par_iter()
        .map(|&(u, w)| {
            let h = pdf_imtss_contour(params, u, t, &QuadratureConfig::default())?;
            Ok(poisson_pmf(mu * u, k_max)
                .into_iter()
                .map(|p| w * h * p)
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; k_max + 1];
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
    Ok(out)
}

/// PMF of `Y(t) = N(E(t))` for `k = 0..=k_max`.
///
/// The quadrature route doubles its panel count until successive results
/// agree to `1e-10`; the Monte Carlo route is exact in expectation up to the
/// first-passage grid bias.
pub fn pmf_mttfpp(
    params: &MixtureParams,
    mu: f64,
    t: f64,
    k_max: usize,
    method: MttfppMethod,
) -> Result<PmfVector> {
    positive("mu", mu)?;
    positive("t", t)?;
    let raw = match method {
        MttfppMethod::Quadrature => {
            let upper = inverse_tail_point(params, t, 1e-13);
            let mut panels = 8;
            let mut prev = mttfpp_panels(params, mu, t, k_max, upper, panels)?;
            loop {
                panels *= 2;
                let next = mttfpp_panels(params, mu, t, k_max, upper, panels)?;
                let change = prev
                    .iter()
                    .zip(&next)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if change < 1e-10 {
                    break next;
                }
                if panels >= 1024 {
                    return Err(Error::QuadratureNonConvergence {
                        estimate: change,
                        evaluations: 21 * panels,
                    });
                }
                prev = next;
            }
        }
        MttfppMethod::Transform => (0..=k_max)
            .into_par_iter()
            .map(|k| {
                inverse_laplace(
                    |s| {
                        let phi = phi_complex(params, s);
                        phi / s * (mu / (mu + phi)).powu(k as u32) / (mu + phi)
                    },
                    t,
                    InversionMethod::Talbot,
                )
            })
            .collect::<Result<Vec<f64>>>()?,
        MttfppMethod::MonteCarlo {
            samples,
            path_resolution,
            rng,
        } => {
            let sampler = ImtssSampler::new(params, t, path_resolution)?;
            let draws = rng.batch(samples, |r, _| {
                Ok(sampler.sample(&[t], GridConvention::Midpoint, r)?[0])
            })?;
            let mut acc = vec![0.0; k_max + 1];
            for e in draws {
                for (a, p) in acc.iter_mut().zip(poisson_pmf(mu * e, k_max)) {
                    *a += p;
                }
            }
            acc.into_iter().map(|a| a / samples as f64).collect()
        }
    };
    Ok(PmfVector::from_raw(raw))
}
