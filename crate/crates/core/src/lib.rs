//! Two-group fairness auditing for binary classifiers.
//!
//! Counts become exact rational rates ([`confusion`]), rates become signed
//! fairness gaps ([`measures`]), and [`compatibility`] explains when
//! statistical parity and equalized odds can hold together given the
//! groups' base-rates. [`roc`] places per-group operating points on ROC
//! curves under a chosen policy.

pub mod compatibility;
pub mod confusion;
pub mod error;
pub mod fraction;
pub mod measures;
pub mod roc;

pub use compatibility::{
    chance_line_posterior, compatibility_check, diagnose, line_intersection, performance_line,
    CompatibilityVerdict, CrossingKind, Diagnosis, DiagnosisOutcome, LineCrossing, PerformanceLine,
    PlanePoint, VerdictKind,
};
pub use confusion::{
    counts_from_records, posterior_from_rates, stats_from_counts, tally, GroupConfusion,
    GroupLabel, GroupRates, GroupStats, PopulationStats, Record,
};
pub use error::{FairnessError, RateKind};
pub use fraction::Fraction;
pub use measures::{full_report, FairnessReport, Measure, MeasureGap, MeasureOutcome, Tolerance};
pub use roc::{
    chance_line_points, group_curves, parity_points_on_roc, roc_from_scores, scored_base_rates,
    select_operating_points, shared_point_gaps, threshold_sweep, OperationPoint, Policy, RocCurve,
    RocVertex, ScoredRecord, SharedPointGaps, SweepRow, TradeoffPlan,
};
