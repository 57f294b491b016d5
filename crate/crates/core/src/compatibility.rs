//! When can statistical parity and equalized odds hold together?
//!
//! With a shared operating point `(FPR*, TPR*)` the two groups' positive
//! rates differ by `(p₀ − p₁)(TPR* − FPR*)`, so parity additionally needs
//! equal base-rates or an operating point on the chance line. In the
//! FPR–TPR plane every group with base-rate `p` and target positive rate
//! `q` lives on the performance line `p·TPR + (1 − p)·FPR = q`; two such
//! lines with the same `q` and different `p` meet at `(q, q)`.

use std::fmt;

use num_traits::{One, Zero};

use crate::confusion::{posterior_from_rates, GroupLabel, PopulationStats};
use crate::error::FairnessError;
use crate::fraction::{check_unit, half, Fraction};
use crate::measures::{full_report, FairnessReport, Measure, Tolerance};

/// A point in the FPR–TPR plane.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanePoint {
    pub fpr: Fraction,
    pub tpr: Fraction,
}

impl PlanePoint {
    pub fn new(fpr: Fraction, tpr: Fraction) -> Self {
        Self { fpr, tpr }
    }

    pub fn on_chance_line(&self) -> bool {
        self.fpr == self.tpr
    }
}

/// All operating points giving positive rate `target` at base-rate
/// `base_rate`, kept in implicit form `p·TPR + (1 − p)·FPR = q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PerformanceLine {
    base_rate: Fraction,
    target: Fraction,
}

impl PerformanceLine {
    pub fn base_rate(&self) -> &Fraction {
        &self.base_rate
    }

    pub fn target(&self) -> &Fraction {
        &self.target
    }

    /// Coefficient of TPR (`p`).
    pub fn tpr_coefficient(&self) -> &Fraction {
        &self.base_rate
    }

    /// Coefficient of FPR (`1 − p`).
    pub fn fpr_coefficient(&self) -> Fraction {
        Fraction::one() - &self.base_rate
    }

    /// With base-rate 0 the line is vertical, `FPR = q`.
    pub fn is_vertical(&self) -> bool {
        self.base_rate.is_zero()
    }

    /// `1 − 1/p`.
    pub fn slope(&self) -> Result<Fraction, FairnessError> {
        if self.is_vertical() {
            return Err(FairnessError::DegenerateBaseRate);
        }
        Ok(Fraction::one() - self.base_rate.recip())
    }

    /// `q / p`.
    pub fn intercept(&self) -> Result<Fraction, FairnessError> {
        if self.is_vertical() {
            return Err(FairnessError::DegenerateBaseRate);
        }
        Ok(&self.target / &self.base_rate)
    }

    /// `p·TPR + (1 − p)·FPR − q`; zero on the line.
    pub fn residual(&self, point: &PlanePoint) -> Fraction {
        &self.base_rate * &point.tpr + self.fpr_coefficient() * &point.fpr - &self.target
    }

    pub fn contains(&self, point: &PlanePoint) -> bool {
        self.residual(point).is_zero()
    }
}

/// Builds the performance line for base-rate `base_rate` and target
/// positive rate `target`. Base-rate 0 is accepted and yields a vertical
/// line with no slope-intercept form.
pub fn performance_line(
    base_rate: Fraction,
    target: Fraction,
) -> Result<PerformanceLine, FairnessError> {
    check_unit("base-rate", &base_rate)?;
    check_unit("target posterior", &target)?;
    Ok(PerformanceLine { base_rate, target })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// Both lines share the target rate; the crossing is `(q, q)`.
    SharedPosterior,
    /// Targets differ; the point is the plain two-line intersection.
    MismatchedPosteriors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineCrossing {
    pub point: PlanePoint,
    pub kind: CrossingKind,
}

/// Intersects two performance lines.
pub fn line_intersection(
    first: &PerformanceLine,
    second: &PerformanceLine,
) -> Result<LineCrossing, FairnessError> {
    let (p0, q0) = (&first.base_rate, &first.target);
    let (p1, q1) = (&second.base_rate, &second.target);
    // Determinant of [[1-p0, p0], [1-p1, p1]].
    let det = p1 - p0;
    if det.is_zero() {
        return Err(FairnessError::ParallelLines(p0.to_string()));
    }
    let fpr = (q0 * p1 - q1 * p0) / &det;
    let tpr = ((Fraction::one() - p0) * q1 - (Fraction::one() - p1) * q0) / &det;
    let point = PlanePoint::new(fpr, tpr);
    debug_assert!(first.contains(&point) && second.contains(&point));
    let kind = if q0 == q1 {
        CrossingKind::SharedPosterior
    } else {
        CrossingKind::MismatchedPosteriors
    };
    Ok(LineCrossing { point, kind })
}

/// Positive rate of any group operated at `(x, x)` on the chance line,
/// whatever its base-rate: `x`.
pub fn chance_line_posterior(x: &Fraction) -> Result<Fraction, FairnessError> {
    check_unit("chance-line rate", x)?;
    Ok(x.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    /// Base-rates agree within tolerance, so equal odds imply parity.
    BaseRatesBalanced,
    /// Base-rates differ and the operating point is within tolerance of the
    /// chance line without sitting exactly on it.
    ChanceLineForced,
    /// Base-rates differ and the operating point is exactly on the chance
    /// line: parity holds, but the classifier is no better than random.
    JointlySatisfiedOnChanceLine,
    /// Base-rates differ and the operating point is off the chance line.
    Incompatible,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::BaseRatesBalanced => "base_rates_balanced",
            VerdictKind::ChanceLineForced => "chance_line_forced",
            VerdictKind::JointlySatisfiedOnChanceLine => "jointly_satisfied_on_chance_line",
            VerdictKind::Incompatible => "incompatible",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of checking parity for a classifier with a shared operating
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityVerdict {
    pub kind: VerdictKind,
    pub base_rates: [Fraction; 2],
    pub operating_point: PlanePoint,
    pub posteriors: [Fraction; 2],
    /// `q₀ − q₁` implied by the shared operating point.
    pub parity_gap: Fraction,
    pub on_chance_line: bool,
}

impl CompatibilityVerdict {
    pub fn explanation(&self) -> String {
        let [p0, p1] = &self.base_rates;
        let PlanePoint { fpr, tpr } = &self.operating_point;
        match self.kind {
            VerdictKind::BaseRatesBalanced if self.on_chance_line => format!(
                "base-rates {p0} and {p1} agree and the operating point ({fpr}, {tpr}) is on \
                 the chance line; parity follows from equal odds"
            ),
            VerdictKind::BaseRatesBalanced => format!(
                "base-rates {p0} and {p1} agree; equal odds imply parity (parity gap {})",
                self.parity_gap
            ),
            VerdictKind::ChanceLineForced => format!(
                "base-rates {p0} and {p1} differ; parity holds only within tolerance because \
                 TPR {tpr} is within tolerance of FPR {fpr} (parity gap {})",
                self.parity_gap
            ),
            VerdictKind::JointlySatisfiedOnChanceLine => format!(
                "base-rates {p0} and {p1} differ; parity and equal odds hold together only \
                 because the operating point ({fpr}, {tpr}) is on the chance line, i.e. a \
                 random classifier"
            ),
            VerdictKind::Incompatible => format!(
                "base-rates {p0} and {p1} differ and TPR {tpr} != FPR {fpr}; equal odds force \
                 a parity gap of ({p0} - {p1})({tpr} - {fpr}) = {}",
                self.parity_gap
            ),
        }
    }
}

/// Checks whether parity can hold for a classifier running both groups at
/// the shared operating point `(fpr, tpr)`.
pub fn compatibility_check(
    base_rate0: &Fraction,
    base_rate1: &Fraction,
    fpr: &Fraction,
    tpr: &Fraction,
    tolerance: &Tolerance,
) -> Result<CompatibilityVerdict, FairnessError> {
    let q0 = posterior_from_rates(base_rate0, tpr, fpr)?;
    let q1 = posterior_from_rates(base_rate1, tpr, fpr)?;
    let parity_gap = &q0 - &q1;
    let on_chance_line = tolerance.admits(&(tpr - fpr));
    let kind = if tolerance.admits(&(base_rate0 - base_rate1)) {
        VerdictKind::BaseRatesBalanced
    } else if tpr == fpr {
        VerdictKind::JointlySatisfiedOnChanceLine
    } else if on_chance_line {
        VerdictKind::ChanceLineForced
    } else {
        VerdictKind::Incompatible
    };
    Ok(CompatibilityVerdict {
        kind,
        base_rates: [base_rate0.clone(), base_rate1.clone()],
        operating_point: PlanePoint::new(fpr.clone(), tpr.clone()),
        posteriors: [q0, q1],
        parity_gap,
        on_chance_line,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosisOutcome {
    /// Equalized odds holds; the shared-point check applies.
    Compatibility(Box<CompatibilityVerdict>),
    /// Equalized odds does not hold; lists the failing equalities.
    OddsNotInPlace {
        failing: Vec<Measure>,
        parity_gap: Fraction,
        parity_satisfied: bool,
    },
}

impl DiagnosisOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            DiagnosisOutcome::Compatibility(v) => v.kind.name(),
            DiagnosisOutcome::OddsNotInPlace { .. } => "equalized_odds_not_in_place",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub outcome: DiagnosisOutcome,
    pub report: FairnessReport,
    /// Each group's performance line at the mean of the two positive rates.
    pub lines: [PerformanceLine; 2],
}

/// Runs the measures on observed stats and, when equalized odds holds,
/// checks whether parity is compatible with it. Approximately equal rates
/// are replaced by their midpoint.
pub fn diagnose(
    stats: &PopulationStats,
    tolerance: &Tolerance,
) -> Result<Diagnosis, FairnessError> {
    let g0 = stats.group(GroupLabel::Unprotected);
    let g1 = stats.group(GroupLabel::Protected);
    let (fpr0, fpr1) = (g0.fpr()?, g1.fpr()?);
    let (tpr0, tpr1) = (g0.tpr()?, g1.tpr()?);

    let report = full_report(stats, tolerance);
    let mean_q = (g0.posterior() + g1.posterior()) * half();
    let lines = [
        performance_line(g0.base_rate().clone(), mean_q.clone())?,
        performance_line(g1.base_rate().clone(), mean_q)?,
    ];

    let outcome = if report.equalized_odds() == Some(true) {
        let fpr = (fpr0 + fpr1) * half();
        let tpr = (tpr0 + tpr1) * half();
        DiagnosisOutcome::Compatibility(Box::new(compatibility_check(
            g0.base_rate(),
            g1.base_rate(),
            &fpr,
            &tpr,
            tolerance,
        )?))
    } else {
        let failing = [Measure::PredictiveEquality, Measure::EqualOpportunity]
            .into_iter()
            .filter(|&m| report.satisfied(m) == Some(false))
            .collect();
        DiagnosisOutcome::OddsNotInPlace {
            failing,
            parity_gap: g0.posterior() - g1.posterior(),
            parity_satisfied: report.satisfied(Measure::StatisticalParity) == Some(true),
        }
    };
    Ok(Diagnosis {
        outcome,
        report,
        lines,
    })
}
