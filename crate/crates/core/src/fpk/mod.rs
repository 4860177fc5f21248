//! Residual checks of the governing equations.
//!
//! Nothing here solves a fractional PDE. Densities computed elsewhere are
//! plugged into the equations on uniform grids, fractional operators are
//! discretised by Grünwald-Letnikov sums, and the residual is tracked under
//! grid refinement. Transform-domain identities and the Poisson/Brownian
//! consequences are checked directly.

mod brownian;
mod fractional;
mod poisson;
mod residual;

pub use brownian::{tcbm_transform_check, TcbmMonteCarlo};
pub use fractional::{
    grunwald_weights, shifted_fractional_derivative, shifted_fractional_derivative_checked,
    shifted_fractional_derivative_regularized,
};
pub use poisson::{
    pgf_mtsfpp, pmf_mtsfpp, pmf_mttfpp, pmf_ode_residual_mtsfpp, MttfppMethod, OdeResidual, Pgf,
    PmfVector, ShiftExpansion, DEFECT_TARGET,
};
pub use residual::{
    fpk_residual_imtss, fpk_residual_mtss, imtss_refinement, imtss_source_mass,
    imtss_transform_identity, mtss_refinement, mtss_transform_identity, ImtssGrid, MtssGrid,
    BOUNDARY_CELLS, MIN_SLOPE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MixtureParams;

/// Values on the uniform grid `x_k = x0 + k h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidGrid("step must be positive and finite"));
        }
        if values.len() < 4 {
            return Err(Error::InvalidGrid("grid functions need at least 4 points"));
        }
        Ok(Self { x0, h, values })
    }

    /// Samples `f` at `x0 + k h`, `k = 0..n`.
    pub fn from_fn<F: Fn(f64) -> f64>(x0: f64, h: f64, n: usize, f: F) -> Result<Self> {
        let values = (0..n).map(|k| f(x0 + k as f64 * h)).collect();
        Self::new(x0, h, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// Every `factor`-th point, starting with the first.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let values = self.values.iter().step_by(factor).copied().collect();
        Self::new(self.x0, self.h * factor as f64, values)
    }
}

/// Max and L1 norms of a residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub max: f64,
    pub l1: f64,
}

impl Norms {
    /// Norms of `values[skip..]` with L1 weight `h`.
    pub fn of(values: &[f64], h: f64, skip: usize) -> Self {
        let tail = &values[skip.min(values.len())..];
        Self {
            max: tail.iter().fold(0.0, |m, v| m.max(v.abs())),
            l1: h * tail.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }
}

/// `log2(e_k / e_{k+1})` for successive halvings.
pub fn refinement_slopes(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Serializable outcome of a verification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub params: MixtureParams,
    pub grid: serde_json::Value,
    pub norms: Norms,
    pub refinement_slopes: Vec<f64>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fourth-order central difference of `f` at `x`.
pub(crate) fn five_point<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(0.0, 0.1, vec![0.0; 3]).is_err());
        assert!(GridFunction::new(0.0, 0.0, vec![0.0; 4]).is_err());
        let g = GridFunction::from_fn(0.0, 0.5, 9, |x| x).unwrap();
        assert_eq!(g.x(4), 2.0);
        let c = g.coarsen(2).unwrap();
        assert_eq!(c.values, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.h, 1.0);
    }

    #[test]
    fn norms_and_slopes() {
        let n = Norms::of(&[9.0, -1.0, 2.0, -3.0], 0.5, 1);
        assert_eq!(n.max, 3.0);
        assert_eq!(n.l1, 3.0);
        let s = refinement_slopes(&[1.0, 0.5, 0.25]);
        assert_eq!(s, vec![1.0, 1.0]);
    }

    #[test]
    fn five_point_is_fourth_order() {
        let d = five_point(|x: f64| x.exp(), 0.3, 1e-3);
        assert!((d - 0.3f64.exp()).abs() < 1e-12);
    }
}
