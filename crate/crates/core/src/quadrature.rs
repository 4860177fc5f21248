//! Globally adaptive 21-point Gauss-Kronrod quadrature with user breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{check, positive, Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and budgets for improper integrals and series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Budget on integrand evaluations.
    pub max_nodes: usize,
    /// Largest admissible upper truncation point `W`.
    pub cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_nodes: 1_000_000,
            cutoff: 1e9,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        check(
            self.max_nodes >= 21,
            "max_nodes",
            self.max_nodes as f64,
            "max_nodes >= 21",
        )?;
        positive("cutoff", self.cutoff)
    }

    /// Smallest `W` with `e^(-rate W) / rate <= abs_tol`, the tail bound for an
    /// integrand dominated by `e^(-rate w)`.
    pub fn truncation_point(&self, rate: f64) -> Result<f64> {
        positive("rate", rate)?;
        let w = (-(self.abs_tol * rate).ln() / rate).max(0.0);
        if w > self.cutoff {
            return Err(Error::Truncation {
                required: w,
                cutoff: self.cutoff,
            });
        }
        Ok(w)
    }

    /// `e^(-rate w) / rate`.
    pub fn truncation_bound(rate: f64, w: f64) -> f64 {
        (-rate * w).exp() / rate
    }

    /// Integrates `f` over `[points[0], points[last]]`, splitting at every
    /// interior point.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<QuadResult> {
        integrate(f, points, self.abs_tol, self.rel_tol, self.max_nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    /// Error estimate sits at the round-off floor; bisection cannot improve it.
    at_floor: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 21-point Kronrod estimate with the QUADPACK error heuristic.
/// Nodes and weights of the 21-point Kronrod rule on `[a, b]`.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 21] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, WGK[10] * half); 21];
    for j in 0..10 {
        out[2 * j] = (center - half * XGK[j], WGK[j] * half);
        out[2 * j + 1] = (center + half * XGK[j], WGK[j] * half);
    }
    out
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let (res_k, res_abs, res_asc) = (res_k * half, res_abs * h, res_asc * h);
    let mut err = (res_k - res_g * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let at_floor = floor >= err;
    if at_floor {
        err = floor;
    }
    Segment {
        a,
        b,
        value: res_k,
        err,
        at_floor,
    }
}

/// Adaptive integration to `err <= max(abs_tol, rel_tol * |value|)`.
///
/// `points` must be nondecreasing with at least two entries; repeated points
/// are skipped. Segments whose error estimate is pure round-off are not
/// refined further, and the request applies to the error outside them; the
/// returned `abs_err` includes their round-off and may exceed the request.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadResult> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidGrid(
            "quadrature breakpoints must be nondecreasing",
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod21(&f, w[0], w[1]));
            evals += 21;
        }
    }
    let totals = |heap: &BinaryHeap<Segment>, frozen: &[Segment]| {
        heap.iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err))
    };
    let (mut value, mut err) = totals(&heap, &frozen);
    // error of frozen round-off segments, which refinement cannot reduce
    let mut floor_err = 0.0;
    loop {
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                estimate: err,
                evaluations: evals,
            });
        }
        if err - floor_err <= abs_tol.max(rel_tol * value.abs()) {
            // running sums drift; confirm against a fresh total
            let (v, e) = totals(&heap, &frozen);
            value = v;
            err = e;
            if err - floor_err <= abs_tol.max(rel_tol * value.abs()) {
                return Ok(QuadResult {
                    value,
                    abs_err: err,
                    evals,
                });
            }
        }
        let Some(worst) = heap.pop() else {
            let (v, e) = totals(&heap, &frozen);
            let unresolved: f64 = frozen.iter().filter(|s| !s.at_floor).map(|s| s.err).sum();
            if unresolved <= abs_tol.max(rel_tol * v.abs()) {
                return Ok(QuadResult {
                    value: v,
                    abs_err: e,
                    evals,
                });
            }
            return Err(Error::QuadratureNonConvergence {
                estimate: e,
                evaluations: evals,
            });
        };
        if worst.at_floor {
            floor_err += worst.err;
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let resolvable = mid > worst.a
            && mid < worst.b
            && (worst.b - worst.a) > 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs());
        if !resolvable {
            frozen.push(worst);
            continue;
        }
        if evals + 42 > max_evals {
            return Err(Error::QuadratureNonConvergence {
                estimate: err,
                evaluations: evals,
            });
        }
        value -= worst.value;
        err -= worst.err;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let seg = kronrod21(&f, a, b);
            value += seg.value;
            err += seg.err;
            heap.push(seg);
        }
        evals += 42;
    }
}
