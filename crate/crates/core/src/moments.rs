//! Cumulants, raw moments and moment-type asymptotics of the mixture.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{check, positive, Error, Result};
use crate::params::MixtureParams;

fn require_tempered(params: &MixtureParams) -> Result<()> {
    match params.active().find(|(_, c)| c.lambda == 0.0) {
        Some((_, c)) => Err(Error::InvalidParameter {
            name: "lambda",
            value: c.lambda,
            constraint: "lambda_i > 0 (moments diverge without tempering)",
        }),
        None => Ok(()),
    }
}

/// `n`-th cumulant of `S(t)`:
/// `k_n = t * sum c_i * alpha_i (1 - alpha_i) (2 - alpha_i) ... (n - 1 - alpha_i) * lambda_i^(alpha_i - n)`.
pub fn cumulant(params: &MixtureParams, n: u32, t: f64) -> Result<f64> {
    check(n >= 1, "n", n as f64, "n >= 1")?;
    positive("t", t)?;
    require_tempered(params)?;
    let sum: f64 = params
        .active()
        .map(|(_, c)| {
            let falling: f64 = (1..n).map(|j| j as f64 - c.alpha).product();
            c.weight * c.alpha * falling * c.lambda.powf(c.alpha - n as f64)
        })
        .sum();
    Ok(t * sum)
}

/// Partial exponential Bell polynomials `B[n][k](x_1, ..., x_{n-k+1})` for all
/// `0 <= k <= n <= order`, by the recurrence
/// `B(n, k) = sum_{i=1}^{n-k+1} C(n-1, i-1) x_i B(n-i, k-1)`.
pub fn partial_bell_table(x: &[f64], order: usize) -> Vec<Vec<f64>> {
    assert!(x.len() >= order, "need x_1..x_order");
    let mut binom = vec![vec![0.0f64; order + 1]; order + 1];
    for n in 0..=order {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
        }
    }
    let mut b = vec![vec![0.0f64; order + 1]; order + 1];
    b[0][0] = 1.0;
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=(n - k + 1) {
                acc += binom[n - 1][i - 1] * x[i - 1] * b[n - i][k - 1];
            }
            b[n][k] = acc;
        }
    }
    b
}

/// `E[S(t)^n]` from the cumulants through complete Bell polynomials.
pub fn raw_moment(params: &MixtureParams, n: u32, t: f64) -> Result<f64> {
    check(n >= 1, "n", n as f64, "n >= 1")?;
    let kappas = (1..=n)
        .map(|j| cumulant(params, j, t))
        .collect::<Result<Vec<_>>>()?;
    let table = partial_bell_table(&kappas, n as usize);
    Ok(table[n as usize][1..].iter().sum())
}

/// Large-`t` approximation `E[S(t)^p] ~ (sum c_i alpha_i lambda_i^(alpha_i - 1))^p t^p`, `0 < p < 1`.
///
/// This is an asymptote, not the exact fractional moment.
pub fn asymptotic_fractional_moment(params: &MixtureParams, p: f64, t: f64) -> Result<f64> {
    check(p > 0.0 && p < 1.0, "p", p, "0 < p < 1")?;
    positive("t", t)?;
    require_tempered(params)?;
    Ok((params.mean_rate() * t).powf(p))
}

/// Right-tail approximation `P(S(t) > x) ~ c e^(-lambda x) x^(-alpha)` of a
/// tempered stable subordinator with
/// `c = t / (alpha pi) * Gamma(1 + alpha) * sin(pi alpha) * e^(lambda^alpha t)`.
///
/// Meaningful only for `x` large relative to the scale of `S(t)`.
pub fn tss_tail_asymptote(alpha: f64, lambda: f64, x: f64, t: f64) -> Result<f64> {
    check(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "0 < alpha < 1")?;
    check(
        lambda >= 0.0 && lambda.is_finite(),
        "lambda",
        lambda,
        "lambda >= 0",
    )?;
    positive("x", x)?;
    positive("t", t)?;
    let coeff =
        t / (alpha * PI) * gamma(1.0 + alpha) * (PI * alpha).sin() * (lambda.powf(alpha) * t).exp();
    Ok(coeff * (-lambda * x).exp() * x.powf(-alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> MixtureParams {
        MixtureParams::from_triples(&[(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)]).unwrap()
    }

    #[test]
    fn tss_mean_and_variance() {
        let p = MixtureParams::single(0.5, 1.0).unwrap();
        assert!((cumulant(&p, 1, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((cumulant(&p, 2, 2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn first_two_cumulants_match_closed_forms() {
        let p = two();
        let t = 1.7;
        let mean = t * (0.5 * 0.6 + 0.5 * 0.9 * 2f64.powf(-0.1));
        let var = t * (0.5 * 0.6 * 0.4 + 0.5 * 0.9 * 0.1 * 2f64.powf(-1.1));
        assert!((cumulant(&p, 1, t).unwrap() - mean).abs() < 1e-14);
        assert!((cumulant(&p, 2, t).unwrap() - var).abs() < 1e-14);
    }

    #[test]
    fn untempered_moments_are_rejected() {
        let p = MixtureParams::from_triples(&[(0.6, 0.0, 0.5), (0.9, 2.0, 0.5)]).unwrap();
        assert!(cumulant(&p, 1, 1.0).is_err());
        assert!(raw_moment(&p, 2, 1.0).is_err());
        assert!(asymptotic_fractional_moment(&p, 0.5, 1.0).is_err());
        // zero-weight untempered components do not matter
        let q = MixtureParams::from_triples(&[(0.6, 0.0, 0.0), (0.9, 2.0, 1.0)]).unwrap();
        assert!(cumulant(&q, 1, 1.0).is_ok());
    }

    #[test]
    fn bell_identities() {
        let p = two();
        let t = 3.0;
        let k1 = cumulant(&p, 1, t).unwrap();
        let k2 = cumulant(&p, 2, t).unwrap();
        assert_eq!(raw_moment(&p, 1, t).unwrap(), k1);
        let m2 = raw_moment(&p, 2, t).unwrap();
        assert!((m2 - (k2 + k1 * k1)).abs() <= 1e-15 * m2);
        // third raw moment: k3 + 3 k2 k1 + k1^3
        let k3 = cumulant(&p, 3, t).unwrap();
        let m3 = raw_moment(&p, 3, t).unwrap();
        assert!((m3 - (k3 + 3.0 * k2 * k1 + k1.powi(3))).abs() <= 1e-13 * m3);
    }

    #[test]
    fn bell_table_counts_set_partitions() {
        // with all x_i = 1, B(n, k) are Stirling numbers of the second kind
        let b = partial_bell_table(&[1.0; 6], 6);
        assert_eq!(b[6][1..].to_vec(), vec![1.0, 31.0, 90.0, 65.0, 15.0, 1.0]);
    }

    #[test]
    fn fractional_moment_asymptote() {
        let p = MixtureParams::single(0.5, 1.0).unwrap();
        let near_one = asymptotic_fractional_moment(&p, 1.0 - 1e-12, 10.0).unwrap();
        assert!((near_one - cumulant(&p, 1, 10.0).unwrap()).abs() < 1e-9);
        assert!((near_one - 5.0).abs() < 1e-9);
        let (a, l, pp, t) = (0.7, 2.5, 0.3, 4.0);
        let single = MixtureParams::single(a, l).unwrap();
        let expected = (a * l.powf(a - 1.0) * t).powf(pp);
        assert!((asymptotic_fractional_moment(&single, pp, t).unwrap() - expected).abs() < 1e-14);
        assert!(asymptotic_fractional_moment(&p, 1.0, 1.0).is_err());
        assert!(asymptotic_fractional_moment(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn tail_asymptote_limits() {
        let (a, t, x) = (0.6, 2.0, 50.0);
        let stable = tss_tail_asymptote(a, 0.0, x, t).unwrap();
        let expected = t * x.powf(-a) / gamma(1.0 - a);
        assert!((stable / expected - 1.0).abs() < 1e-13);
        // decreasing beyond x = alpha / lambda
        let (a, l) = (0.5, 1.0);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let x = a / l + 0.01 + 0.1 * k as f64;
            let v = tss_tail_asymptote(a, l, x, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
