//! Group fairness measures as signed gaps (group 0 minus group 1) with
//! tolerance-based verdicts.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::confusion::{GroupLabel, PopulationStats};
use crate::error::FairnessError;
use crate::fraction::{parse_fraction, ratio, Fraction};

const U: GroupLabel = GroupLabel::Unprotected;
const P: GroupLabel = GroupLabel::Protected;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// Equal positive-prediction rates.
    StatisticalParity,
    /// Equal false positive rates.
    PredictiveEquality,
    /// Equal true positive rates (equivalently, equal false negative rates).
    EqualOpportunity,
    /// Predictive equality and equal opportunity together.
    ErrorRateBalance,
    /// Each group's share of positive predictions equals its population share.
    Representativity,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::StatisticalParity,
        Measure::PredictiveEquality,
        Measure::EqualOpportunity,
        Measure::ErrorRateBalance,
        Measure::Representativity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::StatisticalParity => "statistical_parity",
            Measure::PredictiveEquality => "predictive_equality",
            Measure::EqualOpportunity => "equal_opportunity",
            Measure::ErrorRateBalance => "error_rate_balance",
            Measure::Representativity => "representativity",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().replace('-', "_");
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == wanted)
            .ok_or_else(|| format!("unknown measure {s:?}"))
    }
}

/// Strictly positive verdict tolerance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tolerance(Fraction);

impl Tolerance {
    pub fn new(value: Fraction) -> Result<Self, FairnessError> {
        if value.is_positive() {
            Ok(Self(value))
        } else {
            Err(FairnessError::Domain {
                name: "tolerance",
                value: value.to_string(),
            })
        }
    }

    pub fn value(&self) -> &Fraction {
        &self.0
    }

    pub fn admits(&self, gap: &Fraction) -> bool {
        gap.abs() <= self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(ratio(1, 1_000_000_000))
    }
}

impl FromStr for Tolerance {
    type Err = FairnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tolerance::new(parse_fraction(s)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureGap {
    pub measure: Measure,
    pub gap: Fraction,
    pub satisfied: bool,
}

impl MeasureGap {
    fn new(measure: Measure, gap: Fraction, tolerance: &Tolerance) -> Self {
        let satisfied = tolerance.admits(&gap);
        Self {
            measure,
            gap,
            satisfied,
        }
    }
}

/// `q₀ − q₁`.
pub fn statistical_parity_gap(stats: &PopulationStats, tolerance: &Tolerance) -> MeasureGap {
    let gap = stats.group(U).posterior() - stats.group(P).posterior();
    MeasureGap::new(Measure::StatisticalParity, gap, tolerance)
}

/// `FPR₀ − FPR₁`.
pub fn predictive_equality_gap(
    stats: &PopulationStats,
    tolerance: &Tolerance,
) -> Result<MeasureGap, FairnessError> {
    let gap = stats.group(U).fpr()? - stats.group(P).fpr()?;
    Ok(MeasureGap::new(Measure::PredictiveEquality, gap, tolerance))
}

/// `TPR₀ − TPR₁`. The matching FNR gap is its negation.
pub fn equal_opportunity_gap(
    stats: &PopulationStats,
    tolerance: &Tolerance,
) -> Result<MeasureGap, FairnessError> {
    let gap = stats.group(U).tpr()? - stats.group(P).tpr()?;
    Ok(MeasureGap::new(Measure::EqualOpportunity, gap, tolerance))
}

/// Combined FPR and FNR equality.
///
/// The reported gap is whichever of the FPR and FNR gaps has the larger
/// magnitude (FPR on ties); the verdict requires both within tolerance.
pub fn error_rate_balance_gap(
    stats: &PopulationStats,
    tolerance: &Tolerance,
) -> Result<MeasureGap, FairnessError> {
    let fpr = predictive_equality_gap(stats, tolerance)?;
    let tpr = equal_opportunity_gap(stats, tolerance)?;
    let fnr_gap = -tpr.gap;
    let gap = if fnr_gap.abs() > fpr.gap.abs() {
        fnr_gap
    } else {
        fpr.gap
    };
    Ok(MeasureGap {
        measure: Measure::ErrorRateBalance,
        gap,
        satisfied: fpr.satisfied && tpr.satisfied,
    })
}

/// `π₁ − q₁N₁ / (q₁N₁ + q₀N₀)`: the protected group's population share minus
/// its share of positive predictions. Zero exactly when statistical parity
/// holds.
pub fn representativity_check(
    stats: &PopulationStats,
    tolerance: &Tolerance,
) -> Result<MeasureGap, FairnessError> {
    let (g0, g1) = (stats.group(U), stats.group(P));
    let (Some(pi0), Some(pi1)) = (g0.demographic_rate(), g1.demographic_rate()) else {
        return Err(FairnessError::MissingDemographicRate);
    };
    let share1 = g1.posterior() * pi1;
    let all = &share1 + g0.posterior() * pi0;
    if all.is_zero() {
        return Err(FairnessError::NoPositivePredictions);
    }
    let gap = pi1 - share1 / all;
    debug_assert_eq!(gap.is_zero(), g0.posterior() == g1.posterior());
    Ok(MeasureGap::new(Measure::Representativity, gap, tolerance))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOutcome {
    pub measure: Measure,
    pub result: Result<MeasureGap, FairnessError>,
}

/// All five measures for one population.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    tolerance: Tolerance,
    stats: PopulationStats,
    outcomes: Vec<MeasureOutcome>,
}

impl FairnessReport {
    pub fn tolerance(&self) -> &Tolerance {
        &self.tolerance
    }

    pub fn stats(&self) -> &PopulationStats {
        &self.stats
    }

    pub fn outcomes(&self) -> &[MeasureOutcome] {
        &self.outcomes
    }

    pub fn outcome(&self, measure: Measure) -> &Result<MeasureGap, FairnessError> {
        &self
            .outcomes
            .iter()
            .find(|o| o.measure == measure)
            .expect("report holds every measure")
            .result
    }

    pub fn gap(&self, measure: Measure) -> Option<&Fraction> {
        self.outcome(measure).as_ref().ok().map(|g| &g.gap)
    }

    /// `None` when the measure could not be evaluated.
    pub fn satisfied(&self, measure: Measure) -> Option<bool> {
        self.outcome(measure).as_ref().ok().map(|g| g.satisfied)
    }

    /// True only if every listed measure was evaluated and satisfied.
    pub fn all_satisfied(&self, measures: &[Measure]) -> bool {
        measures.iter().all(|&m| self.satisfied(m) == Some(true))
    }

    pub fn equalized_odds(&self) -> Option<bool> {
        Some(
            self.satisfied(Measure::PredictiveEquality)?
                && self.satisfied(Measure::EqualOpportunity)?,
        )
    }

    /// `FNR₀ − FNR₁`.
    pub fn fnr_gap(&self) -> Option<Fraction> {
        self.gap(Measure::EqualOpportunity).map(|g| -g)
    }

    /// `q₁ / q₀`, informational only.
    pub fn parity_ratio(&self) -> Option<Fraction> {
        let q0 = self.stats.group(U).posterior();
        (!q0.is_zero()).then(|| self.stats.group(P).posterior() / q0)
    }
}

/// Evaluates every measure; a measure that cannot be computed is recorded
/// with its error instead of aborting the report.
pub fn full_report(stats: &PopulationStats, tolerance: &Tolerance) -> FairnessReport {
    let outcomes = Measure::ALL
        .into_iter()
        .map(|measure| {
            let result = match measure {
                Measure::StatisticalParity => Ok(statistical_parity_gap(stats, tolerance)),
                Measure::PredictiveEquality => predictive_equality_gap(stats, tolerance),
                Measure::EqualOpportunity => equal_opportunity_gap(stats, tolerance),
                Measure::ErrorRateBalance => error_rate_balance_gap(stats, tolerance),
                Measure::Representativity => representativity_check(stats, tolerance),
            };
            MeasureOutcome { measure, result }
        })
        .collect();
    FairnessReport {
        tolerance: tolerance.clone(),
        stats: stats.clone(),
        outcomes,
    }
}
