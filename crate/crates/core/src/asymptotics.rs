//! Tauberian asymptotes of the potential density, the renewal function and
//! the moments of the inverse subordinator.
//!
//! Small-argument (and untempered large-argument) asymptotes are read off the
//! dominant power of `phi`: `phi(s) ~ c* s^a*` with `a* = max alpha_i` as
//! `s -> inf` and `a* = min alpha_i` as `s -> 0` when every `lambda_i = 0`.
//! The closed forms printed in the literature use `Gamma(min alpha_i)` in
//! both limits; that value is carried alongside as `literature`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{positive, Result};
use crate::params::{AsymptoticRegime, MixtureParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    /// Tauberian value computed from the dominant term of `phi`.
    pub value: f64,
    /// Literature closed form (`Gamma(min alpha)` variant).
    pub literature: f64,
    /// Exponent `a*` of the dominant power of `phi` (1 in the tempered large-argument regime).
    pub exponent: f64,
    /// Coefficient `c*` of the dominant power of `phi`.
    pub coefficient: f64,
}

/// Dominant `(exponent, coefficient)` of `phi` for a power-law regime.
fn dominant_power(params: &MixtureParams, regime: AsymptoticRegime) -> (f64, f64) {
    let pick = match regime {
        AsymptoticRegime::LargeArgumentUntempered => params
            .active()
            .map(|(_, c)| c.alpha)
            .fold(f64::INFINITY, f64::min),
        _ => params.max_alpha(),
    };
    let coeff = params
        .active()
        .filter(|(_, c)| c.alpha == pick)
        .map(|(_, c)| c.weight)
        .sum();
    (pick, coeff)
}

/// `(sum alpha_i - (n-1) min alpha, [sum_{j != i} alpha_j - (n-1) min alpha]_i)` over active components.
fn literature_exponents(params: &MixtureParams) -> (f64, f64, Vec<(f64, f64)>) {
    let active: Vec<_> = params.active().map(|(_, c)| *c).collect();
    let n = active.len() as f64;
    let min = active.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
    let total: f64 = active.iter().map(|c| c.alpha).sum();
    let lead = total - (n - 1.0) * min;
    let terms = active
        .iter()
        .map(|c| (c.weight, total - c.alpha - (n - 1.0) * min))
        .collect();
    (min, lead, terms)
}

/// Asymptote of the potential density `v(x)`, whose transform is `1 / phi(s)`.
pub fn potential_density_asymptote(
    params: &MixtureParams,
    x: f64,
    regime: AsymptoticRegime,
) -> Result<AsymptoteReport> {
    positive("x", x)?;
    regime.validate(params)?;
    if regime == AsymptoticRegime::LargeArgumentTempered {
        let v = 1.0 / params.mean_rate();
        return Ok(AsymptoteReport {
            value: v,
            literature: v,
            exponent: 1.0,
            coefficient: params.mean_rate(),
        });
    }
    let (a, c) = dominant_power(params, regime);
    let value = x.powf(a - 1.0) / (c * gamma(a));
    let (min, lead, terms) = literature_exponents(params);
    let denom: f64 = terms.iter().map(|&(w, e)| w * x.powf(e)).sum();
    let literature = x.powf(lead - 1.0) / (gamma(min) * denom);
    Ok(AsymptoteReport {
        value,
        literature,
        exponent: a,
        coefficient: c,
    })
}

/// Asymptote of `M_q(t) = E[E(t)^q]`, whose transform is `Gamma(1 + q) / (s phi(s)^q)`.
pub fn inverse_moment_asymptote(
    params: &MixtureParams,
    q: f64,
    t: f64,
    regime: AsymptoticRegime,
) -> Result<AsymptoteReport> {
    positive("q", q)?;
    positive("t", t)?;
    regime.validate(params)?;
    if regime == AsymptoticRegime::LargeArgumentTempered {
        let v = (t / params.mean_rate()).powf(q);
        return Ok(AsymptoteReport {
            value: v,
            literature: v,
            exponent: 1.0,
            coefficient: params.mean_rate(),
        });
    }
    let (a, c) = dominant_power(params, regime);
    let g1q = gamma(1.0 + q);
    let value = g1q * t.powf(q * a) / (c.powf(q) * gamma(1.0 + q * a));
    let (min, lead, terms) = literature_exponents(params);
    let denom: f64 = terms.iter().map(|&(w, e)| w * t.powf(e)).sum();
    let literature = t.powf(q * lead) * g1q / (gamma(1.0 + q * min) * denom.powf(q));
    Ok(AsymptoteReport {
        value,
        literature,
        exponent: a,
        coefficient: c,
    })
}

/// Asymptote of the renewal function `U(t) = E[E(t)] = M_1(t)`.
pub fn renewal_asymptote(
    params: &MixtureParams,
    t: f64,
    regime: AsymptoticRegime,
) -> Result<AsymptoteReport> {
    inverse_moment_asymptote(params, 1.0, t, regime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AsymptoticRegime::*;

    #[test]
    fn single_component_potential_density() {
        let (a, l) = (0.6, 1.5);
        let p = MixtureParams::single(a, l).unwrap();
        let far = potential_density_asymptote(&p, 1e6, LargeArgumentTempered).unwrap();
        assert!((far.value - l.powf(1.0 - a) / a).abs() < 1e-14);
        let x = 1e-4;
        let near = potential_density_asymptote(&p, x, SmallArgument).unwrap();
        let expected = x.powf(a - 1.0) / gamma(a);
        assert!((near.value / expected - 1.0).abs() < 1e-14);
        assert!((near.literature / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_component_renewal_and_moments() {
        let (a, l) = (0.7, 2.0);
        let p = MixtureParams::single(a, l).unwrap();
        let t = 1e4;
        let far = renewal_asymptote(&p, t, LargeArgumentTempered).unwrap();
        assert!((far.value / (t * l.powf(1.0 - a) / a) - 1.0).abs() < 1e-14);
        let t = 1e-3;
        let near = renewal_asymptote(&p, t, SmallArgument).unwrap();
        assert!((near.value / (t.powf(a) / gamma(1.0 + a)) - 1.0).abs() < 1e-14);
        let q = 2.5;
        let mq = inverse_moment_asymptote(&p, q, t, SmallArgument).unwrap();
        let expected = gamma(1.0 + q) * t.powf(q * a) / gamma(1.0 + q * a);
        assert!((mq.value / expected - 1.0).abs() < 1e-13);
        assert!((mq.literature / expected - 1.0).abs() < 1e-13);
    }

    #[test]
    fn renewal_is_first_inverse_moment_bitwise() {
        let p = MixtureParams::from_triples(&[(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)]).unwrap();
        let s = MixtureParams::from_triples(&[(0.6, 0.0, 0.5), (0.9, 0.0, 0.5)]).unwrap();
        for (params, regime, t) in [
            (&p, SmallArgument, 1e-3),
            (&p, LargeArgumentTempered, 1e3),
            (&s, LargeArgumentUntempered, 1e3),
            (&s, SmallArgument, 0.1),
        ] {
            let u = renewal_asymptote(params, t, regime).unwrap();
            let m = inverse_moment_asymptote(params, 1.0, t, regime).unwrap();
            assert_eq!(u.value.to_bits(), m.value.to_bits());
            assert_eq!(u.literature.to_bits(), m.literature.to_bits());
        }
    }

    #[test]
    fn gamma_of_max_versus_min() {
        // phi ~ 0.5 s^0.9 + ... as s -> inf: Tauberian uses Gamma(0.9), literature Gamma(0.6)
        let p = MixtureParams::from_triples(&[(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)]).unwrap();
        let x = 1e-12;
        let r = potential_density_asymptote(&p, x, SmallArgument).unwrap();
        assert_eq!(r.exponent, 0.9);
        assert_eq!(r.coefficient, 0.5);
        let ratio = r.literature / r.value;
        assert!((ratio - gamma(0.9) / gamma(0.6)).abs() < 1e-3);
        // untempered large x: both pick the smaller exponent
        let s = MixtureParams::from_triples(&[(0.6, 0.0, 0.5), (0.9, 0.0, 0.5)]).unwrap();
        let r = potential_density_asymptote(&s, 1e12, LargeArgumentUntempered).unwrap();
        assert_eq!(r.exponent, 0.6);
        assert!((r.literature / r.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn regime_mismatch_is_an_error() {
        let s = MixtureParams::single(0.5, 0.0).unwrap();
        assert!(renewal_asymptote(&s, 10.0, LargeArgumentTempered).is_err());
        let p = MixtureParams::single(0.5, 1.0).unwrap();
        assert!(potential_density_asymptote(&p, 10.0, LargeArgumentUntempered).is_err());
    }
}
