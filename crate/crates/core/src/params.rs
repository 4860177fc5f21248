//! Parameter model for mixtures of tempered stable subordinators.
//!
//! A mixture is an ordered list of components `(alpha_i, lambda_i, c_i)`
//! whose weights `c_i` sum to one. One component is a plain tempered stable
//! subordinator; with `lambda = 0` it is the alpha-stable subordinator.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

/// Absolute tolerance on `sum(c_i) == 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// One tempered stable component: stability index, tempering rate and
/// mixing weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent")]
pub struct TemperedComponent {
    pub alpha: f64,
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Deserialize)]
struct RawComponent {
    alpha: f64,
    lambda: f64,
    weight: f64,
}

impl TryFrom<RawComponent> for TemperedComponent {
    type Error = Error;

    fn try_from(raw: RawComponent) -> Result<Self> {
        TemperedComponent::new(raw.alpha, raw.lambda, raw.weight)
    }
}

impl TemperedComponent {
    pub fn new(alpha: f64, lambda: f64, weight: f64) -> Result<Self> {
        check(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "0 < alpha < 1")?;
        check(
            lambda >= 0.0 && lambda.is_finite(),
            "lambda",
            lambda,
            "0 <= lambda < inf",
        )?;
        check(
            weight >= 0.0 && weight.is_finite(),
            "weight",
            weight,
            "0 <= weight < inf",
        )?;
        Ok(Self {
            alpha,
            lambda,
            weight,
        })
    }

    /// `alpha * lambda^(alpha - 1)`, the mean rate of the unit-weight component.
    pub fn mean_rate(&self) -> f64 {
        self.alpha * self.lambda.powf(self.alpha - 1.0)
    }
}

/// Validated mixture `{(alpha_i, lambda_i, c_i)}` with `sum(c_i) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TemperedComponent>", into = "Vec<TemperedComponent>")]
pub struct MixtureParams {
    components: Vec<TemperedComponent>,
}

impl TryFrom<Vec<TemperedComponent>> for MixtureParams {
    type Error = Error;

    fn try_from(components: Vec<TemperedComponent>) -> Result<Self> {
        MixtureParams::new(components)
    }
}

impl From<MixtureParams> for Vec<TemperedComponent> {
    fn from(params: MixtureParams) -> Self {
        params.components
    }
}

impl MixtureParams {
    /// Weights are validated, never renormalised.
    pub fn new(components: Vec<TemperedComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMixture);
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self { components })
    }

    /// Builds a mixture from `(alpha, lambda, weight)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let components = triples
            .iter()
            .map(|&(a, l, w)| TemperedComponent::new(a, l, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// Plain tempered stable subordinator (stable when `lambda == 0`).
    pub fn single(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(vec![TemperedComponent::new(alpha, lambda, 1.0)?])
    }

    pub fn components(&self) -> &[TemperedComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components with strictly positive weight, with their original index.
    pub fn active(&self) -> impl Iterator<Item = (usize, &TemperedComponent)> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.weight > 0.0)
    }

    pub fn all_tempered(&self) -> bool {
        self.active().all(|(_, c)| c.lambda > 0.0)
    }

    pub fn all_untempered(&self) -> bool {
        self.active().all(|(_, c)| c.lambda == 0.0)
    }

    /// Smallest tempering rate among active components (rightmost branch point is `-min_lambda`).
    pub fn min_lambda(&self) -> f64 {
        self.active()
            .map(|(_, c)| c.lambda)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_alpha(&self) -> f64 {
        self.active().map(|(_, c)| c.alpha).fold(0.0, f64::max)
    }

    /// `sum(c_i * lambda_i^alpha_i)`, the constant term removed from `phi`.
    pub fn tempering_offset(&self) -> f64 {
        self.active()
            .map(|(_, c)| c.weight * c.lambda.powf(c.alpha))
            .sum()
    }

    /// `sum(c_i * alpha_i * lambda_i^(alpha_i - 1))`, the slope of `phi` at zero.
    pub fn mean_rate(&self) -> f64 {
        self.active().map(|(_, c)| c.weight * c.mean_rate()).sum()
    }
}

/// Which end of the argument axis a Tauberian asymptote describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    SmallArgument,
    LargeArgumentTempered,
    LargeArgumentUntempered,
}

impl AsymptoticRegime {
    pub fn name(self) -> &'static str {
        match self {
            AsymptoticRegime::SmallArgument => "SmallArgument",
            AsymptoticRegime::LargeArgumentTempered => "LargeArgumentTempered",
            AsymptoticRegime::LargeArgumentUntempered => "LargeArgumentUntempered",
        }
    }

    pub(crate) fn validate(self, params: &MixtureParams) -> Result<()> {
        match self {
            AsymptoticRegime::LargeArgumentTempered if !params.all_tempered() => {
                Err(Error::RegimeMismatch {
                    regime: self.name(),
                    reason: "requires every lambda_i > 0",
                })
            }
            AsymptoticRegime::LargeArgumentUntempered if !params.all_untempered() => {
                Err(Error::RegimeMismatch {
                    regime: self.name(),
                    reason: "requires every lambda_i = 0",
                })
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_components() {
        assert!(TemperedComponent::new(0.0, 1.0, 1.0).is_err());
        assert!(TemperedComponent::new(1.0, 1.0, 1.0).is_err());
        assert!(TemperedComponent::new(0.5, -1.0, 1.0).is_err());
        assert!(TemperedComponent::new(0.5, 1.0, -0.1).is_err());
        assert!(TemperedComponent::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn weights_are_validated_not_renormalised() {
        let err = MixtureParams::from_triples(&[(0.5, 1.0, 0.5), (0.7, 1.0, 0.6)]).unwrap_err();
        assert!(matches!(err, Error::WeightsNotNormalized { .. }));
        assert!(MixtureParams::from_triples(&[]).is_err());
        let ok = MixtureParams::from_triples(&[(0.5, 1.0, 0.3), (0.7, 2.0, 0.7)]).unwrap();
        assert_eq!(ok.len(), 2);
    }

    #[test]
    fn regime_checks_follow_lambda() {
        let tempered = MixtureParams::from_triples(&[(0.5, 1.0, 0.5), (0.7, 2.0, 0.5)]).unwrap();
        let stable = MixtureParams::from_triples(&[(0.5, 0.0, 0.5), (0.7, 0.0, 0.5)]).unwrap();
        let mixed = MixtureParams::from_triples(&[(0.5, 0.0, 0.5), (0.7, 2.0, 0.5)]).unwrap();
        assert!(AsymptoticRegime::LargeArgumentTempered
            .validate(&tempered)
            .is_ok());
        assert!(AsymptoticRegime::LargeArgumentTempered
            .validate(&stable)
            .is_err());
        assert!(AsymptoticRegime::LargeArgumentUntempered
            .validate(&stable)
            .is_ok());
        assert!(AsymptoticRegime::LargeArgumentUntempered
            .validate(&mixed)
            .is_err());
        assert!(AsymptoticRegime::SmallArgument.validate(&mixed).is_ok());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = MixtureParams::from_triples(&[(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: MixtureParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        let bad = r#"[{"alpha":0.6,"lambda":1.0,"weight":0.9}]"#;
        assert!(serde_json::from_str::<MixtureParams>(bad).is_err());
    }
}
