use thiserror::Error;

use crate::confusion::GroupLabel;

/// Which per-group rate was requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    FalsePositive,
    TruePositive,
    FalseNegative,
}

impl std::fmt::Display for RateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateKind::FalsePositive => "FPR",
            RateKind::TruePositive => "TPR",
            RateKind::FalseNegative => "FNR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FairnessError {
    #[error("group {group} has no records")]
    EmptyGroup { group: GroupLabel },

    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: String },

    #[error("record {row}: {reason}")]
    MalformedRecord { row: usize, reason: String },

    #[error("{rate} is undefined for group {group}: it has no {}", missing_class(*rate))]
    UndefinedRate { group: GroupLabel, rate: RateKind },

    #[error("no positive predictions in either group")]
    NoPositivePredictions,

    #[error("demographic rates are unknown; representativity needs group shares")]
    MissingDemographicRate,

    #[error("base-rate 0 has no explicit slope-intercept form (line is FPR = q)")]
    DegenerateBaseRate,

    #[error("performance lines are parallel: both base-rates equal {0}")]
    ParallelLines(String),

    #[error("posterior {q} is not reachable on the ROC curve of group {group}")]
    Unreachable { q: String, group: GroupLabel },

    #[error("score at record {index} is not finite")]
    NonFiniteScore { index: usize },

    #[error("invalid ROC curve: {0}")]
    InvalidCurve(String),

    #[error("cannot parse {0:?} as a number")]
    Parse(String),
}

fn missing_class(rate: RateKind) -> &'static str {
    match rate {
        RateKind::FalsePositive => "ground-truth negatives",
        RateKind::TruePositive | RateKind::FalseNegative => "ground-truth positives",
    }
}
