//! Bounded scalar metrics.
//!
//! A [`Metric`] carries its declared range `[lower, upper]` (either end may be
//! infinite). Evaluation never clamps: a value outside the declared range is a
//! [`Error::BoundsViolation`], because it means the range was mis-declared.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::construct::RescaleMap;
use crate::error::{Error, Result};
use crate::framework::{SystemId, SystemRecord};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum MetricKind {
    /// `weights . x + bias`.
    LinearFeature { weights: Vec<f64>, bias: f64 },
    /// Explicit id -> value table; defined only on listed systems.
    Tabulated { table: BTreeMap<SystemId, f64> },
    /// Clear exemplars at the upper bound, clear non-exemplars at the lower.
    TrivialFaithful { table: BTreeMap<SystemId, f64> },
    /// 1 when the base value reaches `eta0` (within `epsilon`), else 0.
    Binarized {
        base: Box<Metric>,
        eta0: f64,
        epsilon: f64,
    },
    /// Base metric composed with a piecewise-affine rescale map.
    Rescaled { base: Box<Metric>, map: RescaleMap },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Metric {
    #[cfg_attr(feature = "serde", serde(flatten))]
    kind: MetricKind,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize"))]
    lower: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize"))]
    upper: f64,
}

pub(crate) fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if lower.is_nan() || upper.is_nan() {
        return Err(Error::InvalidBounds {
            lower,
            upper,
            reason: "bound is NaN",
        });
    }
    if lower >= upper {
        return Err(Error::InvalidBounds {
            lower,
            upper,
            reason: "lower bound must be strictly below upper bound",
        });
    }
    Ok(())
}

impl Metric {
    pub(crate) fn from_parts(kind: MetricKind, lower: f64, upper: f64) -> Result<Self> {
        check_bounds(lower, upper)?;
        let metric = Metric { kind, lower, upper };
        if let MetricKind::Tabulated { table } | MetricKind::TrivialFaithful { table } = &metric.kind {
            for &v in table.values() {
                metric.check_value(v)?;
            }
        }
        Ok(metric)
    }

    pub fn linear(weights: Vec<f64>, bias: f64, lower: f64, upper: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMetric("linear metric needs at least one weight".into()));
        }
        if weights.iter().chain(core::iter::once(&bias)).any(|w| !w.is_finite()) {
            return Err(Error::InvalidMetric("linear weights and bias must be finite".into()));
        }
        Self::from_parts(MetricKind::LinearFeature { weights, bias }, lower, upper)
    }

    pub fn tabulated(table: BTreeMap<SystemId, f64>, lower: f64, upper: f64) -> Result<Self> {
        Self::from_parts(MetricKind::Tabulated { table }, lower, upper)
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Feature count the metric reads, if it reads features at all.
    pub fn arity(&self) -> Option<usize> {
        match &self.kind {
            MetricKind::LinearFeature { weights, .. } => Some(weights.len()),
            MetricKind::Tabulated { .. } | MetricKind::TrivialFaithful { .. } => None,
            MetricKind::Binarized { base, .. } | MetricKind::Rescaled { base, .. } => base.arity(),
        }
    }

    /// Evaluates the metric on a system, rejecting out-of-range values.
    pub fn evaluate(&self, system: &SystemRecord) -> Result<f64> {
        let raw = match &self.kind {
            MetricKind::Tabulated { table } | MetricKind::TrivialFaithful { table } => *table
                .get(&system.id)
                .ok_or_else(|| Error::UnknownSystem(system.id.clone()))?,
            MetricKind::Binarized { base, eta0, epsilon } => {
                let v = base.evaluate(system)?;
                if v >= eta0 - epsilon {
                    1.0
                } else {
                    0.0
                }
            }
            MetricKind::Rescaled { base, map } => map.apply(base.evaluate(system)?),
            MetricKind::LinearFeature { .. } => return self.evaluate_features(&system.features),
        };
        self.check_value(raw)
    }

    /// Evaluates on a bare feature vector. Fails for table-backed metrics,
    /// which need a system id.
    pub fn evaluate_features(&self, features: &[f64]) -> Result<f64> {
        if let Some(expected) = self.arity() {
            if features.len() != expected {
                return Err(Error::ArityMismatch {
                    expected,
                    found: features.len(),
                });
            }
        }
        let raw = match &self.kind {
            MetricKind::LinearFeature { weights, bias } => {
                weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + bias
            }
            MetricKind::Tabulated { .. } | MetricKind::TrivialFaithful { .. } => {
                return Err(Error::InvalidMetric(
                    "table-backed metric cannot be evaluated without a system id".into(),
                ))
            }
            MetricKind::Binarized { base, eta0, epsilon } => {
                if base.evaluate_features(features)? >= eta0 - epsilon {
                    1.0
                } else {
                    0.0
                }
            }
            MetricKind::Rescaled { base, map } => map.apply(base.evaluate_features(features)?),
        };
        self.check_value(raw)
    }

    fn check_value(&self, value: f64) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue);
        }
        if value < self.lower || value > self.upper {
            return Err(Error::BoundsViolation {
                value,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(value)
    }
}

/// `phi(x)` for one system.
pub fn evaluate_metric(metric: &Metric, system: &SystemRecord) -> Result<f64> {
    metric.evaluate(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_weighting() {
        let m = Metric::linear(vec![1.0], 0.0, 0.0, 3.0).unwrap();
        assert_eq!(m.evaluate(&SystemRecord::new("p", vec![1.8])).unwrap(), 1.8);
    }

    #[test]
    fn dot_product() {
        let m = Metric::linear(vec![2.0, 1.0], 0.0, 0.0, 100.0).unwrap();
        assert_eq!(m.evaluate_features(&[3.0, 4.0]).unwrap(), 10.0);
    }

    #[test]
    fn out_of_bounds_is_an_error_not_a_clamp() {
        let m = Metric::linear(vec![1.0], 0.0, 0.0, 3.0).unwrap();
        let err = m.evaluate_features(&[3.5]).unwrap_err();
        assert_eq!(err, Error::BoundsViolation { value: 3.5, lower: 0.0, upper: 3.0 });
        assert!(m.evaluate_features(&[-0.1]).is_err());
        assert_eq!(m.evaluate_features(&[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn arity_mismatch() {
        let m = Metric::linear(vec![1.0], 0.0, 0.0, 3.0).unwrap();
        assert_eq!(
            m.evaluate_features(&[1.0, 2.0]).unwrap_err(),
            Error::ArityMismatch { expected: 1, found: 2 }
        );
    }

    #[test]
    fn infinite_upper_bound() {
        let m = Metric::linear(vec![1.0], 0.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(m.evaluate_features(&[1e300]).unwrap(), 1e300);
        assert!(Metric::linear(vec![1.0], 0.0, f64::INFINITY, f64::INFINITY).is_err());
        assert!(Metric::linear(vec![1.0], 0.0, 1.0, 1.0).is_err());
        assert!(Metric::linear(vec![1.0], 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn table_lookup() {
        let mut t = BTreeMap::new();
        t.insert(SystemId::from("a"), 0.25);
        let m = Metric::tabulated(t.clone(), 0.0, 1.0).unwrap();
        assert_eq!(m.evaluate(&SystemRecord::new("a", vec![9.0])).unwrap(), 0.25);
        assert_eq!(
            m.evaluate(&SystemRecord::new("zz", vec![9.0])).unwrap_err(),
            Error::UnknownSystem("zz".into())
        );
        t.insert(SystemId::from("b"), 2.0);
        assert!(matches!(
            Metric::tabulated(t, 0.0, 1.0).unwrap_err(),
            Error::BoundsViolation { .. }
        ));
    }
}
