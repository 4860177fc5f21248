use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument violated its documented domain.
    #[error("invalid `{name}` = {value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("mixture weights sum to {sum}, expected 1 (|sum - 1| <= 1e-12)")]
    WeightsNotNormalized { sum: f64 },

    #[error("mixture must contain at least one component")]
    EmptyMixture,

    #[error(
        "s + lambda = {re} lies on the branch cut of component {component}; pass a branch side"
    )]
    OnBranchCut { component: usize, re: f64 },

    #[error("regime {regime} is inconsistent with the tempering rates: {reason}")]
    RegimeMismatch {
        regime: &'static str,
        reason: &'static str,
    },

    #[error(
        "quadrature did not converge: error estimate {estimate:e} after {evaluations} evaluations"
    )]
    QuadratureNonConvergence { estimate: f64, evaluations: usize },

    #[error("truncation point {required:e} exceeds the configured cutoff {cutoff:e}")]
    Truncation { required: f64, cutoff: f64 },

    #[error("series did not reach tolerance: error estimate {estimate:e}")]
    SeriesNonConvergence { estimate: f64 },

    #[error("Laplace inversion lost precision: Gaver-Stehfest {gaver:e} vs Talbot {talbot:e}")]
    PrecisionLoss { gaver: f64, talbot: f64 },

    #[error("Laplace inversion lost precision: Talbot {talbot:e} vs contour integral {contour:e}")]
    InversionDisagreement { talbot: f64, contour: f64 },

    #[error("inversion produced a non-finite value at t = {t}")]
    NonFiniteInversion { t: f64 },

    #[error("acceptance-rejection exceeded {cap} proposals")]
    ProposalCap { cap: u64 },

    #[error("lambda^alpha * dt = {product} exceeds 30; subdivide the time step")]
    TemperingTooStrong { product: f64 },

    #[error("first passage not reached within {steps} steps")]
    HorizonCap { steps: u64 },

    #[error("pmf truncation defect {defect:e} still above target at K = {k}")]
    DefectUnreachable { defect: f64, k: usize },

    #[error("grid too coarse: estimated discretisation error {estimate:e} exceeds {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("truncated series tail {bound:e} exceeds tolerance")]
    TailBound { bound: f64 },
}

pub(crate) fn check(
    ok: bool,
    name: &'static str,
    value: f64,
    constraint: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    check(
        value > 0.0 && value.is_finite(),
        name,
        value,
        "0 < value < inf",
    )
}
