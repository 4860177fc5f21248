//! Mixtures of tempered stable subordinators.
//!
//! A mixture `S(t)` has Laplace exponent
//! `phi(s) = sum c_i ((s + lambda_i)^alpha_i - lambda_i^alpha_i)` and is the
//! sum of independent tempered stable subordinators run at rates `c_i`. The
//! crate covers exact sampling of `S`, its inverse `E(t)` and the Poisson and
//! Brownian processes time-changed by them, densities by branch-cut
//! integration and numerical Laplace inversion, cumulants and Tauberian
//! asymptotes, and residual checks of the governing fractional equations.

pub mod asymptotics;
pub mod density;
pub mod error;
pub mod exponent;
pub mod fpk;
pub mod inversion;
pub mod mittag_leffler;
pub mod moments;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use asymptotics::{
    inverse_moment_asymptote, potential_density_asymptote, renewal_asymptote, AsymptoteReport,
};
pub use density::{
    levy_density, levy_density_integral, pdf_imtss, pdf_imtss_contour, pdf_mtss,
    pdf_mtss_inversion, pdf_stable, pdf_tss, potential_density_numeric, renewal_numeric,
    DensityGrid,
};
pub use error::{Error, Result};
pub use exponent::{laplace_exponent, laplace_exponent_real, BranchSide};
pub use fpk::{GridFunction, PmfVector, VerificationReport};
pub use inversion::{inverse_laplace, inverse_laplace_checked, InversionConfig, InversionMethod};
pub use mittag_leffler::mittag_leffler_prabhakar;
pub use moments::{
    asymptotic_fractional_moment, cumulant, partial_bell_table, raw_moment, tss_tail_asymptote,
};
pub use params::{AsymptoticRegime, MixtureParams, TemperedComponent, WEIGHT_SUM_TOLERANCE};
pub use quadrature::{QuadResult, QuadratureConfig};
pub use rng::{RngConfig, SimRng};
pub use simulate::{
    sample_imtss, sample_mtsfpp, sample_mtss_path, sample_mtss_terminal, sample_mttfpp,
    sample_mttfpp_path, sample_stable_increment, sample_tcbm, sample_tss_increment, Clock,
    CountingPath, GridConvention, ImtssSampler, SamplePath,
};
