//! Exact samplers for stable, tempered stable and mixture increments, paths
//! of the mixture and its inverse, and the time-changed Poisson and Brownian
//! processes.
//!
//! Stable variates use the Kanter / Chambers-Mallows-Stuck representation.
//! Tempered variates are drawn by rejection from the stable proposal with
//! acceptance probability `e^(-lambda x)`; the expected number of proposals
//! is `e^(lambda^alpha dt)`, so steps with large `lambda^alpha dt` are split
//! into sub-steps with `lambda^alpha dt <= 1` before sampling.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::renewal_numeric;
use crate::error::{check, positive, Error, Result};
use crate::params::MixtureParams;
use crate::rng::open01;

/// Default cap on rejection proposals per tempered draw.
pub const PROPOSAL_CAP: u64 = 1_000_000;
/// Largest `lambda^alpha dt` accepted by [`sample_tss_increment`].
pub const MAX_TEMPERING: f64 = 30.0;
/// Horizon cap of the inverse sampler, in multiples of `path_resolution`.
pub const HORIZON_FACTOR: u64 = 1000;

fn check_alpha(alpha: f64) -> Result<()> {
    check(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "0 < alpha < 1")
}

/// `S_alpha(1)` from two uniforms, computed in log space.
fn stable_unit<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * open01(rng);
    let v = open01(rng);
    let k = 1.0 / alpha - 1.0;
    ((alpha * u).sin().ln() + k * ((1.0 - alpha) * u).sin().ln()
        - u.sin().ln() / alpha
        - k * (-v.ln()).ln())
    .exp()
}

/// Increment of the `alpha`-stable subordinator over a step `dt`,
/// `dt^(1/alpha) S_alpha(1)`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    positive("dt", dt)?;
    Ok(stable_draw(alpha, dt, rng))
}

#[inline]
fn stable_draw<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> f64 {
    (dt.powf(1.0 / alpha) * stable_unit(alpha, rng)).max(f64::MIN_POSITIVE)
}

/// Accepted tempered draw with the number of proposals it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TssDraw {
    pub value: f64,
    pub proposals: u64,
}

/// Tempered stable increment by rejection, reporting the proposal count.
///
/// With `lambda == 0` a single stable draw is returned and no acceptance
/// uniform is consumed, so the stream matches [`sample_stable_increment`].
pub fn sample_tss_counted<R: Rng + ?Sized>(
    alpha: f64,
    lambda: f64,
    dt: f64,
    cap: u64,
    rng: &mut R,
) -> Result<TssDraw> {
    check_alpha(alpha)?;
    check(
        lambda >= 0.0 && lambda.is_finite(),
        "lambda",
        lambda,
        "lambda >= 0",
    )?;
    positive("dt", dt)?;
    let product = lambda.powf(alpha) * dt;
    if product > MAX_TEMPERING {
        return Err(Error::TemperingTooStrong { product });
    }
    if lambda == 0.0 {
        return Ok(TssDraw {
            value: stable_draw(alpha, dt, rng),
            proposals: 1,
        });
    }
    for proposals in 1..=cap {
        let x = stable_draw(alpha, dt, rng);
        if open01(rng).ln() <= -lambda * x {
            return Ok(TssDraw {
                value: x,
                proposals,
            });
        }
    }
    Err(Error::ProposalCap { cap })
}

/// Tempered stable increment over `dt` with the default proposal cap.
pub fn sample_tss_increment<R: Rng + ?Sized>(
    alpha: f64,
    lambda: f64,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    sample_tss_counted(alpha, lambda, dt, PROPOSAL_CAP, rng).map(|d| d.value)
}

/// Tempered increment over `dt`, split so every piece has `lambda^alpha dt <= 1`.
fn tss_split<R: Rng + ?Sized>(alpha: f64, lambda: f64, dt: f64, rng: &mut R) -> Result<f64> {
    let load = lambda.powf(alpha) * dt;
    let pieces = load.ceil().max(1.0);
    if pieces > 1e9 {
        return Err(Error::TemperingTooStrong { product: load });
    }
    let sub = dt / pieces;
    let mut acc = 0.0;
    for _ in 0..pieces as u64 {
        acc += sample_tss_counted(alpha, lambda, sub, PROPOSAL_CAP, rng)?.value;
    }
    Ok(acc)
}

/// Increment of the mixture over `dt`: independent components run for
/// `c_i dt`, drawn in component order.
pub fn sample_mtss_increment<R: Rng + ?Sized>(
    params: &MixtureParams,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    positive("dt", dt)?;
    let mut acc = 0.0;
    for (_, c) in params.active() {
        acc += tss_split(c.alpha, c.lambda, c.weight * dt, rng)?;
    }
    Ok(acc)
}

/// `S(t)` drawn directly.
pub fn sample_mtss_terminal<R: Rng + ?Sized>(
    params: &MixtureParams,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    sample_mtss_increment(params, t, rng)
}

/// Subordinator trajectory on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SamplePath {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{v:.16e}\n"));
        }
        out
    }
}

/// Mixture path on `{k horizon / n_steps}`, built from independent increments.
pub fn sample_mtss_path<R: Rng + ?Sized>(
    params: &MixtureParams,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SamplePath> {
    positive("horizon", horizon)?;
    check(n_steps >= 1, "n_steps", n_steps as f64, "n_steps >= 1")?;
    let dt = horizon / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    values.push(0.0);
    let mut s = 0.0;
    for k in 1..=n_steps {
        s += sample_mtss_increment(params, dt, rng)?;
        times.push(if k == n_steps { horizon } else { k as f64 * dt });
        values.push(s);
    }
    Ok(SamplePath { times, values })
}

/// How a first-passage grid index `K` is turned into a value of `E(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridConvention {
    /// `K dt`, the first grid time with `S > t`; biased upward by at most `dt`.
    LeftGrid,
    /// `(K - 1/2) dt`; removes the first-order grid bias of moments.
    Midpoint,
}

/// First-passage sampler for the inverse `E(t) = inf{u : S(u) > t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImtssSampler {
    params: MixtureParams,
    pub dt: f64,
    pub max_steps: u64,
}

impl ImtssSampler {
    /// Grid step `U(t_max) / path_resolution`, so a typical path to `t_max`
    /// takes about `path_resolution` steps.
    pub fn new(params: &MixtureParams, t_max: f64, path_resolution: usize) -> Result<Self> {
        positive("t_max", t_max)?;
        check(
            path_resolution >= 1,
            "path_resolution",
            path_resolution as f64,
            "path_resolution >= 1",
        )?;
        let scale = renewal_numeric(params, t_max)?;
        Ok(Self::with_step(
            params,
            scale / path_resolution as f64,
            path_resolution,
        ))
    }

    pub fn with_step(params: &MixtureParams, dt: f64, path_resolution: usize) -> Self {
        Self {
            params: params.clone(),
            dt,
            max_steps: HORIZON_FACTOR * path_resolution as u64,
        }
    }

    /// Grid indices `K_j` with `S((K_j - 1) dt) <= t_j < S(K_j dt)`.
    pub fn sample_indices<R: Rng + ?Sized>(
        &self,
        targets: &[f64],
        rng: &mut R,
    ) -> Result<Vec<u64>> {
        if targets.iter().any(|&t| !(t > 0.0)) || targets.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidGrid(
                "targets must be positive and nondecreasing",
            ));
        }
        let mut out = Vec::with_capacity(targets.len());
        let mut s = 0.0;
        let mut k = 0u64;
        while out.len() < targets.len() {
            if k >= self.max_steps {
                return Err(Error::HorizonCap {
                    steps: self.max_steps,
                });
            }
            k += 1;
            s += sample_mtss_increment(&self.params, self.dt, rng)?;
            while out.len() < targets.len() && s > targets[out.len()] {
                out.push(k);
            }
        }
        Ok(out)
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        targets: &[f64],
        convention: GridConvention,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let shift = match convention {
            GridConvention::LeftGrid => 0.0,
            GridConvention::Midpoint => 0.5,
        };
        Ok(self
            .sample_indices(targets, rng)?
            .into_iter()
            .map(|k| (k as f64 - shift) * self.dt)
            .collect())
    }
}

/// `E(t)` at each target on the left-grid convention (grid bias at most
/// `U(max target) / path_resolution`).
pub fn sample_imtss<R: Rng + ?Sized>(
    params: &MixtureParams,
    t_targets: &[f64],
    path_resolution: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let t_max = t_targets.iter().copied().fold(0.0, f64::max);
    ImtssSampler::new(params, t_max, path_resolution)?.sample(
        t_targets,
        GridConvention::LeftGrid,
        rng,
    )
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as u64
}

/// `X(t) = N(S(t))` for a rate-`mu` Poisson process `N`.
pub fn sample_mtsfpp<R: Rng + ?Sized>(
    params: &MixtureParams,
    mu: f64,
    t: f64,
    rng: &mut R,
) -> Result<u64> {
    positive("mu", mu)?;
    let s = sample_mtss_terminal(params, t, rng)?;
    Ok(poisson(mu * s, rng))
}

/// Event times of a counting process; the count is `k` at the `k`-th time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingPath {
    pub event_times: Vec<f64>,
}

impl CountingPath {
    pub fn count_at(&self, t: f64) -> u64 {
        self.event_times.partition_point(|&e| e <= t) as u64
    }
}

/// Path of `Y(t) = N(E(t))` on `[0, horizon]`.
///
/// `N` jumps at Poisson times `tau_j`, and `E(t) >= tau_j` exactly when
/// `S(tau_j) <= t`, so `Y` jumps at `S(tau_j)`. Drawing `S` at the arrival
/// times makes this exact, with no grid.
pub fn sample_mttfpp_path<R: Rng + ?Sized>(
    params: &MixtureParams,
    mu: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<CountingPath> {
    positive("mu", mu)?;
    positive("horizon", horizon)?;
    let mut event_times = Vec::new();
    let mut s = 0.0;
    loop {
        let gap = -open01(rng).ln() / mu;
        s += sample_mtss_increment(params, gap, rng)?;
        if s > horizon {
            return Ok(CountingPath { event_times });
        }
        event_times.push(s);
    }
}

/// `Y(t) = N(E(t))`, sampled exactly.
pub fn sample_mttfpp<R: Rng + ?Sized>(
    params: &MixtureParams,
    mu: f64,
    t: f64,
    rng: &mut R,
) -> Result<u64> {
    Ok(sample_mttfpp_path(params, mu, t, rng)?.event_times.len() as u64)
}

/// Random clock for a time-changed Brownian motion.
#[derive(Debug, Clone, Copy)]
pub enum Clock<'a> {
    Mtss,
    Imtss(&'a ImtssSampler, GridConvention),
}

/// `B(T)` for the clock `T = S(t)` or `T = E(t)`: Gaussian with variance `T`.
pub fn sample_tcbm<R: Rng + ?Sized>(
    params: &MixtureParams,
    t: f64,
    rng: &mut R,
    clock: Clock<'_>,
) -> Result<f64> {
    let time = match clock {
        Clock::Mtss => sample_mtss_terminal(params, t, rng)?,
        Clock::Imtss(sampler, convention) => sampler.sample(&[t], convention, rng)?[0],
    };
    let z: f64 = StandardNormal.sample(rng);
    Ok(time.sqrt() * z)
}
