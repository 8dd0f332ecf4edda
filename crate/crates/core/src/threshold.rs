//! Threshold derivation, faithfulness checks and three-way classification.
//!
//! All comparisons use an absolute tolerance ([`Tolerance`], default `1e-9`):
//!
//! - `Exhibits` iff `value >= eta0 - eps`
//! - `NotExhibits` iff `value <= gamma0 + eps` and not `Exhibits`
//! - `Borderline` otherwise
//!
//! When `gamma0 == eta0` both of the first two conditions can hold at once;
//! `Exhibits` takes precedence ([`TIE_RULE`]).

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::framework::{PropertyFramework, SetKind, SystemId, SystemRecord};

/// Which verdict wins when a value satisfies both the exhibit and the
/// non-exhibit condition (only possible when `gamma0 == eta0`).
pub const TIE_RULE: &str = "exhibits_wins";

/// Absolute comparison tolerance for all threshold tests.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon >= 0.0 {
            Ok(Tolerance(epsilon))
        } else {
            Err(Error::InvalidMetric("tolerance must be finite and non-negative".into()))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// `eta0`/`gamma0` and the three determination intervals they induce over
/// `[alpha, beta]`: non-exhibit `[alpha, gamma0]`, borderline `(gamma0, eta0)`,
/// exhibit `[eta0, beta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Thresholds {
    pub eta0: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize"))]
    pub gamma0: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize"))]
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize"))]
    pub beta: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize_pair"))]
    pub exhibit_interval: (f64, f64),
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize_pair"))]
    pub non_exhibit_interval: (f64, f64),
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize_pair"))]
    pub borderline_interval: (f64, f64),
}

impl Thresholds {
    pub fn new(eta0: f64, gamma0: f64, alpha: f64, beta: f64) -> Self {
        Thresholds {
            eta0,
            gamma0,
            alpha,
            beta,
            exhibit_interval: (eta0, beta),
            non_exhibit_interval: (alpha, gamma0),
            borderline_interval: (gamma0, eta0),
        }
    }

    /// Width of the borderline interval, `eta0 - gamma0`. Infinite when
    /// `gamma0` sits at an infinite floor.
    pub fn width(&self) -> f64 {
        self.eta0 - self.gamma0
    }

    pub fn verdict(&self, value: f64, tol: Tolerance) -> Verdict {
        verdict_for(value, self, tol)
    }

    fn is_tie(&self, tol: Tolerance) -> bool {
        (self.eta0 - self.gamma0).abs() <= tol.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum Verdict {
    Exhibits,
    NotExhibits,
    Borderline,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Exhibits => "exhibits",
            Verdict::NotExhibits => "not_exhibits",
            Verdict::Borderline => "borderline",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three-way decision for a metric value.
pub fn verdict_for(value: f64, thresholds: &Thresholds, tol: Tolerance) -> Verdict {
    let eps = tol.get();
    if value >= thresholds.eta0 - eps {
        Verdict::Exhibits
    } else if value <= thresholds.gamma0 + eps {
        Verdict::NotExhibits
    } else {
        Verdict::Borderline
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Determination {
    pub system_id: SystemId,
    pub verdict: Verdict,
    pub metric_value: f64,
    /// `metric_value - eta0`.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum ViolationKind {
    ClearBelowEta0,
    ClearWithinNonExhibit,
    ClearNonAboveGamma0,
    ClearNonReachesEta0,
    BorderlineOutsideOpenInterval,
}

impl ViolationKind {
    pub fn describe(self) -> &'static str {
        match self {
            ViolationKind::ClearBelowEta0 => "clear case below eta0",
            ViolationKind::ClearWithinNonExhibit => "clear case not above gamma0",
            ViolationKind::ClearNonAboveGamma0 => "clear non-case above gamma0",
            ViolationKind::ClearNonReachesEta0 => "clear non-case reaches eta0",
            ViolationKind::BorderlineOutsideOpenInterval => "not strictly inside (gamma0, eta0)",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub system_id: SystemId,
    pub set: SetKind,
    pub metric_value: f64,
    pub condition: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FaithfulnessReport {
    pub is_faithful: bool,
    pub violations: Vec<Violation>,
    /// Present iff the framework is faithful.
    pub derived_thresholds: Option<Thresholds>,
}

/// Metric values of every exemplar, in set order.
pub(crate) fn exemplar_values(
    framework: &PropertyFramework,
) -> Result<Vec<(SetKind, &SystemRecord, f64)>> {
    let metric = framework.metric();
    framework
        .exemplars()
        .iter()
        .map(|(kind, r)| metric.evaluate(r).map(|v| (kind, r, v)))
        .collect()
}

fn thresholds_from_values(
    framework: &PropertyFramework,
    values: &[(SetKind, &SystemRecord, f64)],
) -> Result<Thresholds> {
    let metric = framework.metric();
    let pick = |kind| values.iter().filter(move |(k, _, _)| *k == kind).map(|(_, _, v)| *v);
    let eta0 = pick(SetKind::Clear)
        .reduce(f64::min)
        .ok_or(Error::EmptyClearSet)?;
    let gamma0 = pick(SetKind::ClearNon)
        .reduce(f64::max)
        .unwrap_or(metric.lower());
    Ok(Thresholds::new(eta0, gamma0, metric.lower(), metric.upper()))
}

/// `eta0` = min over clear cases, `gamma0` = max over clear non-cases, or the
/// metric's lower bound when there are no clear non-cases.
pub fn derive_thresholds(framework: &PropertyFramework) -> Result<Thresholds> {
    if framework.is_quarantined() {
        return Err(Error::Quarantined);
    }
    if framework.is_draft() {
        return Err(Error::EmptyClearSet);
    }
    let values = exemplar_values(framework)?;
    thresholds_from_values(framework, &values)
}

fn violations_of(
    values: &[(SetKind, &SystemRecord, f64)],
    th: &Thresholds,
    tol: Tolerance,
) -> Vec<Violation> {
    let eps = tol.get();
    let tie = th.is_tie(tol);
    let mut out = Vec::new();
    for &(set, record, value) in values {
        let condition = match set {
            SetKind::Clear if value < th.eta0 - eps => Some(ViolationKind::ClearBelowEta0),
            SetKind::Clear if !tie && value <= th.gamma0 + eps => {
                Some(ViolationKind::ClearWithinNonExhibit)
            }
            SetKind::ClearNon if value > th.gamma0 + eps => Some(ViolationKind::ClearNonAboveGamma0),
            SetKind::ClearNon if !tie && value >= th.eta0 - eps => {
                Some(ViolationKind::ClearNonReachesEta0)
            }
            SetKind::Borderline if verdict_for(value, th, tol) != Verdict::Borderline => {
                Some(ViolationKind::BorderlineOutsideOpenInterval)
            }
            _ => None,
        };
        if let Some(condition) = condition {
            out.push(Violation {
                system_id: record.id.clone(),
                set,
                metric_value: value,
                condition,
            });
        }
    }
    out
}

fn report(violations: Vec<Violation>, th: Thresholds) -> FaithfulnessReport {
    let is_faithful = violations.is_empty();
    FaithfulnessReport {
        is_faithful,
        violations,
        derived_thresholds: is_faithful.then_some(th),
    }
}

/// Derives thresholds and checks that every exemplar lands in its own
/// determination interval. A crossing of `gamma0` over `eta0` is reported as
/// violations, not as an error.
pub fn check_faithfulness(framework: &PropertyFramework, tol: Tolerance) -> Result<FaithfulnessReport> {
    if framework.is_draft() {
        return Err(Error::EmptyClearSet);
    }
    let values = exemplar_values(framework)?;
    let th = thresholds_from_values(framework, &values)?;
    Ok(report(violations_of(&values, &th, tol), th))
}

/// Faithfulness against externally supplied thresholds (e.g. the landmark
/// thresholds of a rescaled metric).
pub fn faithfulness_against(
    framework: &PropertyFramework,
    thresholds: &Thresholds,
    tol: Tolerance,
) -> Result<FaithfulnessReport> {
    let values = exemplar_values(framework)?;
    Ok(report(violations_of(&values, thresholds, tol), *thresholds))
}

/// A faithful framework paired with its thresholds, ready to classify.
#[derive(Debug, Clone)]
pub struct Classifier<'a> {
    framework: &'a PropertyFramework,
    thresholds: Thresholds,
    tol: Tolerance,
}

impl<'a> Classifier<'a> {
    /// Derives thresholds; fails with `UnfaithfulFramework` if the exemplars
    /// are not separated by the metric.
    pub fn new(framework: &'a PropertyFramework, tol: Tolerance) -> Result<Self> {
        if framework.is_quarantined() {
            return Err(Error::Quarantined);
        }
        let report = check_faithfulness(framework, tol)?;
        match report.derived_thresholds {
            Some(thresholds) => Ok(Classifier {
                framework,
                thresholds,
                tol,
            }),
            None => Err(Error::UnfaithfulFramework {
                violations: report.violations.len(),
            }),
        }
    }

    pub fn with_thresholds(
        framework: &'a PropertyFramework,
        thresholds: Thresholds,
        tol: Tolerance,
    ) -> Result<Self> {
        if framework.is_quarantined() {
            return Err(Error::Quarantined);
        }
        let report = faithfulness_against(framework, &thresholds, tol)?;
        if !report.is_faithful {
            return Err(Error::UnfaithfulFramework {
                violations: report.violations.len(),
            });
        }
        Ok(Classifier {
            framework,
            thresholds,
            tol,
        })
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn framework(&self) -> &'a PropertyFramework {
        self.framework
    }

    pub fn value(&self, system: &SystemRecord) -> Result<f64> {
        let d = self.framework.schema().dimension();
        if system.features.len() != d {
            return Err(Error::ArityMismatch {
                expected: d,
                found: system.features.len(),
            });
        }
        system.conform(d)?;
        self.framework.metric().evaluate(system)
    }

    pub fn determination(&self, system: &SystemRecord) -> Result<Determination> {
        let value = self.value(system)?;
        Ok(Determination {
            system_id: system.id.clone(),
            verdict: verdict_for(value, &self.thresholds, self.tol),
            metric_value: value,
            margin: value - self.thresholds.eta0,
        })
    }

    /// Classifies `system` and returns it re-tagged as metric-determined.
    pub fn classify(&self, system: SystemRecord) -> Result<(Determination, SystemRecord)> {
        let det = self.determination(&system)?;
        Ok((det, system.determined()))
    }
}

/// Classifies one system under `thresholds`; the framework must be faithful
/// with respect to them.
pub fn classify(
    framework: &PropertyFramework,
    thresholds: &Thresholds,
    system: SystemRecord,
    tol: Tolerance,
) -> Result<(Determination, SystemRecord)> {
    Classifier::with_thresholds(framework, *thresholds, tol)?.classify(system)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SharpnessVerdict {
    /// No a-priori borderline exemplars.
    pub weak_sharp: bool,
    /// `|eta0 - gamma0| <= eps`: no borderline interval at all.
    pub strong_sharp: bool,
}

pub fn sharpness(
    framework: &PropertyFramework,
    thresholds: &Thresholds,
    tol: Tolerance,
) -> Result<SharpnessVerdict> {
    let c = Classifier::with_thresholds(framework, *thresholds, tol)?;
    Ok(SharpnessVerdict {
        weak_sharp: c.framework.exemplars().borderline().is_empty(),
        strong_sharp: c.thresholds.is_tie(tol),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PanXReport {
    /// `gamma0` coincides with the metric's lower bound.
    pub gamma_at_floor: bool,
    /// Only the floor value itself is judged a non-case.
    pub non_exhibit_is_singleton: bool,
    /// Probes above the floor (borderline or exhibiting) while `gamma0` is at
    /// the floor. Empty when the floor condition fails.
    pub flagged_small_systems: Vec<SystemId>,
}

/// Detects the structure where having no clear non-cases pushes `gamma0` to
/// the metric's floor, so every probe with a value above the floor counts as
/// at least a borderline case.
pub fn pan_x_check(
    framework: &PropertyFramework,
    thresholds: &Thresholds,
    probes: &[SystemRecord],
    tol: Tolerance,
) -> Result<PanXReport> {
    let c = Classifier::with_thresholds(framework, *thresholds, tol)?;
    let th = c.thresholds;
    let eps = tol.get();
    let gamma_at_floor = th.gamma0 == th.alpha || (th.gamma0 - th.alpha).abs() <= eps;
    let mut flagged = Vec::new();
    for probe in probes {
        let value = c.value(probe)?;
        if gamma_at_floor && value > th.alpha + eps {
            flagged.push(probe.id.clone());
        }
    }
    Ok(PanXReport {
        gamma_at_floor,
        non_exhibit_is_singleton: gamma_at_floor,
        flagged_small_systems: flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{build_framework, ExemplarSets, ObservationSchema};
    use crate::metric::Metric;
    use alloc::borrow::ToOwned;
    use alloc::vec;
    use alloc::vec::Vec;

    fn rec(id: &str, h: f64) -> SystemRecord {
        SystemRecord::new(id, vec![h])
    }

    fn framework(clear: &[f64], clear_non: &[f64], borderline: &[f64], lo: f64, hi: f64) -> PropertyFramework {
        let mut n = 0;
        let mut mk = |vals: &[f64]| -> Vec<SystemRecord> {
            vals.iter()
                .map(|&v| {
                    n += 1;
                    rec(&alloc::format!("s{n}"), v)
                })
                .collect()
        };
        let sets = ExemplarSets::new(mk(clear), mk(clear_non), mk(borderline)).unwrap();
        build_framework(
            "A1",
            "tall",
            ObservationSchema::unitless(["height_m"]).unwrap(),
            sets,
            Metric::linear(vec![1.0], 0.0, lo, hi).unwrap(),
        )
        .unwrap()
    }

    fn tall() -> PropertyFramework {
        framework(&[1.9, 2.0], &[1.5, 1.6], &[1.8], 0.0, 3.0)
    }

    const EPS: Tolerance = Tolerance::DEFAULT;

    #[test]
    fn tall_thresholds() {
        let th = derive_thresholds(&tall()).unwrap();
        assert_eq!(th.eta0, 1.9);
        assert_eq!(th.gamma0, 1.6);
        assert_eq!(th.borderline_interval, (1.6, 1.9));
        assert_eq!(th.exhibit_interval, (1.9, 3.0));
        assert_eq!(th.non_exhibit_interval, (0.0, 1.6));
    }

    #[test]
    fn empty_clear_non_puts_gamma_at_floor() {
        let th = derive_thresholds(&framework(&[1.9, 2.0], &[], &[], 0.0, 3.0)).unwrap();
        assert_eq!((th.eta0, th.gamma0), (1.9, 0.0));
    }

    #[test]
    fn draft_cannot_derive() {
        let fw = framework(&[], &[], &[], 0.0, 3.0);
        assert_eq!(derive_thresholds(&fw).unwrap_err(), Error::EmptyClearSet);
        assert_eq!(check_faithfulness(&fw, EPS).unwrap_err(), Error::EmptyClearSet);
    }

    #[test]
    fn tall_is_faithful() {
        let r = check_faithfulness(&tall(), EPS).unwrap();
        assert!(r.is_faithful);
        assert!(r.violations.is_empty());
        assert_eq!(r.derived_thresholds.unwrap().eta0, 1.9);
    }

    #[test]
    fn borderline_above_eta_is_a_violation() {
        let fw = framework(&[1.9, 2.0], &[1.5, 1.6], &[2.5], 0.0, 3.0);
        let r = check_faithfulness(&fw, EPS).unwrap();
        assert!(!r.is_faithful);
        assert!(r.derived_thresholds.is_none());
        assert_eq!(
            r.violations,
            vec![Violation {
                system_id: "s5".into(),
                set: SetKind::Borderline,
                metric_value: 2.5,
                condition: ViolationKind::BorderlineOutsideOpenInterval,
            }]
        );
        assert_eq!(
            r.violations[0].condition.describe(),
            "not strictly inside (gamma0, eta0)"
        );
    }

    #[test]
    fn crossing_is_reported_not_raised() {
        // clear non-case at 2.1 sits above clear case 1.9
        let fw = framework(&[1.9, 2.2], &[1.5, 2.1], &[], 0.0, 3.0);
        let r = check_faithfulness(&fw, EPS).unwrap();
        assert!(!r.is_faithful);
        let kinds: Vec<_> = r.violations.iter().map(|v| (v.system_id.as_str().to_owned(), v.condition)).collect();
        assert_eq!(
            kinds,
            vec![
                ("s1".into(), ViolationKind::ClearWithinNonExhibit),
                ("s4".into(), ViolationKind::ClearNonReachesEta0),
            ]
        );
        assert!(matches!(
            Classifier::new(&fw, EPS).unwrap_err(),
            Error::UnfaithfulFramework { violations: 2 }
        ));
    }

    #[test]
    fn coincident_thresholds_are_strongly_sharp() {
        let fw = framework(&[1.0], &[1.0], &[], 0.0, 3.0);
        let r = check_faithfulness(&fw, EPS).unwrap();
        assert!(r.is_faithful);
        let th = r.derived_thresholds.unwrap();
        assert_eq!((th.gamma0, th.eta0), (1.0, 1.0));
        let s = sharpness(&fw, &th, EPS).unwrap();
        assert!(s.strong_sharp && s.weak_sharp);
        // tie resolves to Exhibits
        assert_eq!(th.verdict(1.0, EPS), Verdict::Exhibits);
        assert_eq!(th.verdict(0.99, EPS), Verdict::NotExhibits);
    }

    #[test]
    fn three_way_split_on_tall() {
        let fw = tall();
        let th = derive_thresholds(&fw).unwrap();
        let cases = [
            (1.8, Verdict::Borderline, -0.1),
            (2.0, Verdict::Exhibits, 0.1),
            (1.6, Verdict::NotExhibits, -0.3),
        ];
        for (h, verdict, margin) in cases {
            let (det, back) = classify(&fw, &th, rec("q", h), EPS).unwrap();
            assert_eq!(det.verdict, verdict, "height {h}");
            assert!((det.margin - margin).abs() < 1e-12, "margin {}", det.margin);
            assert_eq!(back.provenance, crate::framework::Provenance::DeterminedByMetric);
        }
    }

    #[test]
    fn classify_rejects_bad_arity_and_unfaithful() {
        let fw = tall();
        let th = derive_thresholds(&fw).unwrap();
        let err = classify(&fw, &th, SystemRecord::new("q", vec![1.0, 2.0]), EPS).unwrap_err();
        assert_eq!(err, Error::ArityMismatch { expected: 1, found: 2 });
        let bad = framework(&[1.9], &[1.5], &[2.5], 0.0, 3.0);
        let th = derive_thresholds(&bad).unwrap();
        assert!(matches!(
            classify(&bad, &th, rec("q", 1.0), EPS).unwrap_err(),
            Error::UnfaithfulFramework { .. }
        ));
    }

    #[test]
    fn sharpness_cases() {
        let fw = tall();
        let th = derive_thresholds(&fw).unwrap();
        assert_eq!(
            sharpness(&fw, &th, EPS).unwrap(),
            SharpnessVerdict { weak_sharp: false, strong_sharp: false }
        );
        let fw = framework(&[1.9, 2.0], &[1.5, 1.6], &[], 0.0, 3.0);
        let th = derive_thresholds(&fw).unwrap();
        assert_eq!(
            sharpness(&fw, &th, EPS).unwrap(),
            SharpnessVerdict { weak_sharp: true, strong_sharp: false }
        );
    }

    #[test]
    fn pan_x_on_unbounded_metric() {
        let fw = framework(&[10.0, 12.0], &[], &[], 0.0, f64::INFINITY);
        let th = derive_thresholds(&fw).unwrap();
        assert_eq!(th.gamma0, 0.0);
        let probes = [rec("tiny", 0.001), rec("zero", 0.0), rec("seven", 7.0)];
        let r = pan_x_check(&fw, &th, &probes, EPS).unwrap();
        assert!(r.gamma_at_floor && r.non_exhibit_is_singleton);
        assert_eq!(r.flagged_small_systems, vec![SystemId::from("tiny"), SystemId::from("seven")]);
    }

    #[test]
    fn pan_x_fails_when_non_cases_exist() {
        let fw = tall();
        let th = derive_thresholds(&fw).unwrap();
        let r = pan_x_check(&fw, &th, &[rec("a", 0.5), rec("b", 2.5)], EPS).unwrap();
        assert!(!r.gamma_at_floor);
        assert!(r.flagged_small_systems.is_empty());
    }

    #[test]
    fn pan_x_floor_value_itself_not_flagged() {
        let fw = framework(&[1.9, 2.0], &[], &[], 0.0, 3.0);
        let th = derive_thresholds(&fw).unwrap();
        let r = pan_x_check(&fw, &th, &[rec("z", 0.0)], EPS).unwrap();
        assert!(r.gamma_at_floor);
        assert!(r.flagged_small_systems.is_empty());
    }

    #[test]
    fn infinite_floor_width() {
        let fw = framework(&[1.0], &[], &[], f64::NEG_INFINITY, 3.0);
        let th = derive_thresholds(&fw).unwrap();
        assert_eq!(th.gamma0, f64::NEG_INFINITY);
        assert_eq!(th.width(), f64::INFINITY);
        let r = pan_x_check(&fw, &th, &[rec("z", -1e9)], EPS).unwrap();
        assert!(r.gamma_at_floor);
        assert_eq!(r.flagged_small_systems.len(), 1);
    }
}
