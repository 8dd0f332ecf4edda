//! Metric constructions: the trivial faithful metric, binarization, margins,
//! and the two-region rescale that folds clear non-cases into the clear
//! region.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;

use crate::error::{Error, Result};
use crate::framework::ExemplarSets;
use crate::metric::{check_bounds, Metric, MetricKind};
use crate::threshold::{Thresholds, Tolerance};

/// Table metric placing clear exemplars at `beta` and clear non-exemplars at
/// `alpha`. Borderline exemplars go to the midpoint so the result is faithful
/// for any exemplar sets. Undefined off the exemplar ids.
pub fn trivial_faithful_metric(exemplars: &ExemplarSets, alpha: f64, beta: f64) -> Result<Metric> {
    check_bounds(alpha, beta)?;
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidBounds {
            lower: alpha,
            upper: beta,
            reason: "trivial construction needs finite bounds",
        });
    }
    if exemplars.clear().is_empty() {
        return Err(Error::EmptyClearSet);
    }
    let mid = alpha + (beta - alpha) / 2.0;
    let table: BTreeMap<_, _> = exemplars
        .iter()
        .map(|(kind, r)| {
            let v = match kind {
                crate::SetKind::Clear => beta,
                crate::SetKind::ClearNon => alpha,
                crate::SetKind::Borderline => mid,
            };
            (r.id.clone(), v)
        })
        .collect();
    Metric::from_parts(MetricKind::TrivialFaithful { table }, alpha, beta)
}

/// `1` where `base >= eta0` (within `tol`), else `0`; bounds `[0, 1]`.
pub fn binarize_metric(base: &Metric, eta0: f64, tol: Tolerance) -> Result<Metric> {
    if eta0.is_nan() || eta0 < base.lower() || eta0 > base.upper() {
        return Err(Error::ThresholdOutOfBounds {
            value: eta0,
            lower: base.lower(),
            upper: base.upper(),
        });
    }
    Metric::from_parts(
        MetricKind::Binarized {
            base: Box::new(base.clone()),
            eta0,
            epsilon: tol.get(),
        },
        0.0,
        1.0,
    )
}

/// Signed distance from the exhibit threshold.
#[inline]
pub fn margin(value: f64, eta0: f64) -> f64 {
    value - eta0
}

/// Affine piece over `[source_start, source_end]`, pinned at one point:
/// `anchor_target + (t - anchor_source) * slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AffineSegment {
    pub source_start: f64,
    pub source_end: f64,
    pub anchor_source: f64,
    pub anchor_target: f64,
    pub slope: f64,
}

impl AffineSegment {
    #[inline]
    pub fn apply(&self, t: f64) -> f64 {
        self.anchor_target + (t - self.anchor_source) * self.slope
    }

    pub fn target_start(&self) -> f64 {
        self.apply(self.source_start)
    }

    pub fn target_end(&self) -> f64 {
        self.apply(self.source_end)
    }
}

/// Order-preserving map that sends `[0, gamma0] u [eta0, beta]` onto
/// `[eta0, beta]` by concatenation and `(gamma0, eta0)` onto `(0, eta0)`.
///
/// With `L = gamma0 + (beta - eta0)` and `k = (beta - eta0) / L`:
///
/// ```text
/// t in [0, gamma0]      ->  eta0 + t * k
/// t in [eta0, beta]     ->  eta0 + (gamma0 + t - eta0) * k
/// t in (gamma0, eta0)   ->  (t - gamma0) * eta0 / (eta0 - gamma0)
/// ```
///
/// Both merged pieces meet at the seam `eta0 + gamma0 * k`. The gap slope is
/// at least 1, so a value more than `eps` inside `(gamma0, eta0)` stays more
/// than `eps` inside `(0, eta0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RescaleMap {
    pub gamma0: f64,
    pub eta0: f64,
    pub alpha: f64,
    pub beta: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    low: AffineSegment,
    #[cfg_attr(feature = "serde", serde(skip))]
    high: AffineSegment,
    #[cfg_attr(feature = "serde", serde(skip))]
    gap: AffineSegment,
}

impl RescaleMap {
    /// Rebuilds the map from its landmark tuple.
    pub fn from_landmarks(gamma0: f64, eta0: f64, alpha: f64, beta: f64) -> Result<Self> {
        check_bounds(alpha, beta)?;
        if alpha != 0.0 {
            return Err(Error::NonZeroFloor(alpha));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidBounds {
                lower: alpha,
                upper: beta,
                reason: "rescaling needs a finite upper bound",
            });
        }
        if !(gamma0.is_finite() && eta0.is_finite()) || gamma0 < alpha || eta0 > beta {
            return Err(Error::LandmarkMismatch(format!(
                "need 0 <= gamma0 < eta0 <= beta, got gamma0={gamma0} eta0={eta0} beta={beta}"
            )));
        }
        if gamma0 >= eta0 {
            return Err(Error::DegenerateInterval);
        }
        let merged = gamma0 + (beta - eta0);
        let k = if merged > 0.0 { (beta - eta0) / merged } else { 0.0 };
        // the top piece is pinned at (beta, beta) so the upper bound is hit
        // exactly rather than up to rounding
        let low = AffineSegment {
            source_start: 0.0,
            source_end: gamma0,
            anchor_source: 0.0,
            anchor_target: eta0,
            slope: k,
        };
        let high = AffineSegment {
            source_start: eta0,
            source_end: beta,
            anchor_source: beta,
            anchor_target: beta,
            slope: k,
        };
        let gap = AffineSegment {
            source_start: gamma0,
            source_end: eta0,
            anchor_source: gamma0,
            anchor_target: 0.0,
            slope: eta0 / (eta0 - gamma0),
        };
        Ok(RescaleMap {
            gamma0,
            eta0,
            alpha,
            beta,
            low,
            high,
            gap,
        })
    }

    pub fn apply(&self, t: f64) -> f64 {
        if t <= self.gamma0 {
            self.low.apply(t)
        } else if t >= self.eta0 {
            self.high.apply(t)
        } else {
            self.gap.apply(t)
        }
    }

    /// Merged-region pieces then the gap piece, in source order of the
    /// merged region.
    pub fn segments(&self) -> [AffineSegment; 3] {
        [self.low, self.high, self.gap]
    }

    /// Value shared by `gamma0` and `eta0` under the map.
    pub fn seam(&self) -> f64 {
        self.low.target_end()
    }

    /// Thresholds of the rescaled property: `eta0` unchanged, `gamma0` at the
    /// floor.
    pub fn target_thresholds(&self) -> Thresholds {
        Thresholds::new(self.eta0, 0.0, 0.0, self.beta)
    }
}

/// Builds the map from a property's thresholds over a metric with range
/// `[alpha, beta]`; `alpha` must be 0.
pub fn build_rescale_map(thresholds: &Thresholds, alpha: f64, beta: f64) -> Result<RescaleMap> {
    RescaleMap::from_landmarks(thresholds.gamma0, thresholds.eta0, alpha, beta)
}

/// `map . base`, with the same range `[0, beta]` as the base.
pub fn rescale_metric(base: &Metric, map: &RescaleMap) -> Result<Metric> {
    if base.lower() != map.alpha || base.upper() != map.beta {
        return Err(Error::LandmarkMismatch(format!(
            "base range [{}, {}] vs map range [{}, {}]",
            base.lower(),
            base.upper(),
            map.alpha,
            map.beta
        )));
    }
    Metric::from_parts(
        MetricKind::Rescaled {
            base: Box::new(base.clone()),
            map: *map,
        },
        map.alpha,
        map.beta,
    )
}
