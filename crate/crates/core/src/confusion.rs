//! Per-group confusion counts and the rates derived from them.

use std::fmt;

use num_traits::One;

use crate::error::{FairnessError, RateKind};
use crate::fraction::{check_unit, ratio, Fraction};

/// Value of the binary sensitive attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupLabel {
    /// `S = 0`, the privileged group.
    Unprotected,
    /// `S = 1`, the unprivileged group.
    Protected,
}

impl GroupLabel {
    pub const BOTH: [GroupLabel; 2] = [GroupLabel::Unprotected, GroupLabel::Protected];

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(GroupLabel::Unprotected),
            1 => Some(GroupLabel::Protected),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            GroupLabel::Unprotected => 0,
            GroupLabel::Protected => 1,
        }
    }

    pub fn index(self) -> usize {
        self.bit() as usize
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// True/false positive/negative counts for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct GroupConfusion {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl GroupConfusion {
    pub const fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Records with ground truth `Y = 1`.
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Records with ground truth `Y = 0`.
    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// Records predicted `Ŷ = 1`.
    pub fn predicted_positives(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn add(&mut self, truth: bool, prediction: bool) {
        match (truth, prediction) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// One labelled, predicted record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub group: GroupLabel,
    pub truth: bool,
    pub prediction: bool,
}

/// Base-rate, FPR and TPR of one group, without counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRates {
    pub base_rate: Fraction,
    pub fpr: Fraction,
    pub tpr: Fraction,
}

/// Rates derived for one group.
///
/// `fpr` is `None` exactly when the group has no ground-truth negatives and
/// `tpr` when it has no ground-truth positives. Rate-level stats built from
/// [`GroupRates`] carry no count.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    group: GroupLabel,
    count: Option<u64>,
    demographic_rate: Option<Fraction>,
    base_rate: Fraction,
    posterior: Fraction,
    fpr: Option<Fraction>,
    tpr: Option<Fraction>,
}

impl GroupStats {
    fn from_confusion(
        group: GroupLabel,
        counts: &GroupConfusion,
        population: u64,
    ) -> Result<Self, FairnessError> {
        let n = counts.total();
        if n == 0 {
            return Err(FairnessError::EmptyGroup { group });
        }
        let positives = counts.positives();
        let negatives = counts.negatives();
        Ok(Self {
            group,
            count: Some(n),
            demographic_rate: Some(ratio(n, population)),
            base_rate: ratio(positives, n),
            posterior: ratio(counts.predicted_positives(), n),
            fpr: (negatives > 0).then(|| ratio(counts.fp, negatives)),
            tpr: (positives > 0).then(|| ratio(counts.tp, positives)),
        })
    }

    fn from_rates(
        group: GroupLabel,
        rates: GroupRates,
        demographic_rate: Option<Fraction>,
    ) -> Result<Self, FairnessError> {
        let posterior = posterior_from_rates(&rates.base_rate, &rates.tpr, &rates.fpr)?;
        Ok(Self {
            group,
            count: None,
            demographic_rate,
            base_rate: rates.base_rate,
            posterior,
            fpr: Some(rates.fpr),
            tpr: Some(rates.tpr),
        })
    }

    pub fn group(&self) -> GroupLabel {
        self.group
    }

    pub fn count(&self) -> Option<u64> {
        self.count
    }

    /// Share of the whole population belonging to this group (π).
    pub fn demographic_rate(&self) -> Option<&Fraction> {
        self.demographic_rate.as_ref()
    }

    /// Fraction of the group with ground truth `Y = 1` (p).
    pub fn base_rate(&self) -> &Fraction {
        &self.base_rate
    }

    /// Fraction of the group predicted `Ŷ = 1` (q).
    pub fn posterior(&self) -> &Fraction {
        &self.posterior
    }

    pub fn fpr_opt(&self) -> Option<&Fraction> {
        self.fpr.as_ref()
    }

    pub fn tpr_opt(&self) -> Option<&Fraction> {
        self.tpr.as_ref()
    }

    pub fn fnr_opt(&self) -> Option<Fraction> {
        self.tpr.as_ref().map(|tpr| Fraction::one() - tpr)
    }

    pub fn fpr(&self) -> Result<&Fraction, FairnessError> {
        self.fpr.as_ref().ok_or(FairnessError::UndefinedRate {
            group: self.group,
            rate: RateKind::FalsePositive,
        })
    }

    pub fn tpr(&self) -> Result<&Fraction, FairnessError> {
        self.tpr.as_ref().ok_or(FairnessError::UndefinedRate {
            group: self.group,
            rate: RateKind::TruePositive,
        })
    }

    pub fn fnr(&self) -> Result<Fraction, FairnessError> {
        self.fnr_opt().ok_or(FairnessError::UndefinedRate {
            group: self.group,
            rate: RateKind::FalseNegative,
        })
    }
}

/// Derived stats for both groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationStats {
    groups: [GroupStats; 2],
    total: Option<u64>,
}

impl PopulationStats {
    /// Builds rate-level stats. `protected_share` is π₁; without it the
    /// representativity measure cannot be evaluated.
    pub fn from_rates(
        unprotected: GroupRates,
        protected: GroupRates,
        protected_share: Option<Fraction>,
    ) -> Result<Self, FairnessError> {
        if let Some(share) = &protected_share {
            check_unit("protected share", share)?;
        }
        let share0 = protected_share.as_ref().map(|s| Fraction::one() - s);
        Ok(Self {
            groups: [
                GroupStats::from_rates(GroupLabel::Unprotected, unprotected, share0)?,
                GroupStats::from_rates(GroupLabel::Protected, protected, protected_share)?,
            ],
            total: None,
        })
    }

    pub fn group(&self, label: GroupLabel) -> &GroupStats {
        &self.groups[label.index()]
    }

    pub fn groups(&self) -> &[GroupStats; 2] {
        &self.groups
    }

    pub fn total(&self) -> Option<u64> {
        self.total
    }
}

/// Derives every per-group rate from the two groups' counts.
pub fn stats_from_counts(
    unprotected: &GroupConfusion,
    protected: &GroupConfusion,
) -> Result<PopulationStats, FairnessError> {
    let total = unprotected.total() + protected.total();
    Ok(PopulationStats {
        groups: [
            GroupStats::from_confusion(GroupLabel::Unprotected, unprotected, total)?,
            GroupStats::from_confusion(GroupLabel::Protected, protected, total)?,
        ],
        total: Some(total),
    })
}

/// Positive-prediction rate implied by a base-rate and an operating point:
/// `p·TPR + (1 − p)·FPR`.
pub fn posterior_from_rates(
    base_rate: &Fraction,
    tpr: &Fraction,
    fpr: &Fraction,
) -> Result<Fraction, FairnessError> {
    check_unit("base-rate", base_rate)?;
    check_unit("TPR", tpr)?;
    check_unit("FPR", fpr)?;
    Ok(base_rate * tpr + (Fraction::one() - base_rate) * fpr)
}

/// Aggregates `(group, truth, prediction)` triples into per-group counts.
/// Every field must be 0 or 1.
pub fn counts_from_records<I>(records: I) -> Result<[GroupConfusion; 2], FairnessError>
where
    I: IntoIterator<Item = (i64, i64, i64)>,
{
    let mut counts = [GroupConfusion::default(); 2];
    for (row, (group, truth, prediction)) in records.into_iter().enumerate() {
        let bit = |name: &str, value: i64| match value {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(FairnessError::MalformedRecord {
                row,
                reason: format!("{name} must be 0 or 1, got {other}"),
            }),
        };
        let group = bit("group", group)?;
        let truth = bit("truth", truth)?;
        let prediction = bit("prediction", prediction)?;
        counts[group as usize].add(truth, prediction);
    }
    Ok(counts)
}

/// Tallies already-typed records.
pub fn tally<'a, I>(records: I) -> [GroupConfusion; 2]
where
    I: IntoIterator<Item = &'a Record>,
{
    let mut counts = [GroupConfusion::default(); 2];
    for record in records {
        counts[record.group.index()].add(record.truth, record.prediction);
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::from_int;

    fn point_a() -> (GroupConfusion, GroupConfusion) {
        (
            GroupConfusion::new(600, 1400, 1200, 2800),
            GroupConfusion::new(60, 140, 540, 1260),
        )
    }

    #[test]
    fn point_a_rates() {
        let (c0, c1) = point_a();
        let stats = stats_from_counts(&c0, &c1).unwrap();
        let g0 = stats.group(GroupLabel::Unprotected);
        let g1 = stats.group(GroupLabel::Protected);
        assert_eq!(stats.total(), Some(8000));
        assert_eq!(g0.demographic_rate(), Some(&ratio(3, 4)));
        assert_eq!(g1.demographic_rate(), Some(&ratio(1, 4)));
        assert_eq!(g0.base_rate(), &ratio(1, 3));
        assert_eq!(g1.base_rate(), &ratio(1, 10));
        for g in stats.groups() {
            assert_eq!(g.posterior(), &ratio(3, 10));
            assert_eq!(g.fpr().unwrap(), &ratio(3, 10));
            assert_eq!(g.tpr().unwrap(), &ratio(3, 10));
            assert_eq!(g.fnr().unwrap(), ratio(7, 10));
        }
    }

    #[test]
    fn point_b_rates() {
        let c0 = GroupConfusion::new(1400, 600, 1200, 2800);
        let c1 = GroupConfusion::new(140, 60, 540, 1260);
        let stats = stats_from_counts(&c0, &c1).unwrap();
        assert_eq!(
            stats.group(GroupLabel::Unprotected).posterior(),
            &ratio(2600, 6000)
        );
        assert_eq!(
            stats.group(GroupLabel::Protected).posterior(),
            &ratio(680, 2000)
        );
        for g in stats.groups() {
            assert_eq!(g.tpr().unwrap(), &ratio(7, 10));
            assert_eq!(g.fpr().unwrap(), &ratio(3, 10));
        }
    }

    #[test]
    fn perfect_symmetric_classifier() {
        let c = GroupConfusion::new(1, 0, 0, 1);
        let stats = stats_from_counts(&c, &c).unwrap();
        for g in stats.groups() {
            assert_eq!(g.base_rate(), &ratio(1, 2));
            assert_eq!(g.posterior(), &ratio(1, 2));
            assert_eq!(g.fpr().unwrap(), &ratio(0, 1));
            assert_eq!(g.tpr().unwrap(), &from_int(1));
        }
    }

    #[test]
    fn empty_group_is_named() {
        let c = GroupConfusion::new(1, 0, 0, 1);
        let err = stats_from_counts(&c, &GroupConfusion::default()).unwrap_err();
        assert_eq!(
            err,
            FairnessError::EmptyGroup {
                group: GroupLabel::Protected
            }
        );
        let err = stats_from_counts(&GroupConfusion::default(), &c).unwrap_err();
        assert_eq!(
            err,
            FairnessError::EmptyGroup {
                group: GroupLabel::Unprotected
            }
        );
    }

    #[test]
    fn undefined_rates_are_explicit() {
        let only_negatives = GroupConfusion::new(0, 0, 2, 3);
        let only_positives = GroupConfusion::new(2, 1, 0, 0);
        let stats = stats_from_counts(&only_negatives, &only_positives).unwrap();
        let g0 = stats.group(GroupLabel::Unprotected);
        let g1 = stats.group(GroupLabel::Protected);
        assert!(g0.tpr_opt().is_none());
        assert!(matches!(
            g0.tpr(),
            Err(FairnessError::UndefinedRate {
                rate: RateKind::TruePositive,
                ..
            })
        ));
        assert!(matches!(
            g0.fnr(),
            Err(FairnessError::UndefinedRate {
                rate: RateKind::FalseNegative,
                ..
            })
        ));
        assert_eq!(g0.fpr().unwrap(), &ratio(2, 5));
        assert!(matches!(
            g1.fpr(),
            Err(FairnessError::UndefinedRate {
                group: GroupLabel::Protected,
                ..
            })
        ));
        assert_eq!(g1.tpr().unwrap(), &ratio(2, 3));
    }

    #[test]
    fn posterior_examples() {
        let q = posterior_from_rates(&ratio(1, 3), &ratio(7, 10), &ratio(3, 10)).unwrap();
        assert_eq!(q, ratio(13, 30));
        let q = posterior_from_rates(&ratio(1, 10), &ratio(8, 10), &ratio(3, 10)).unwrap();
        assert_eq!(q, ratio(35, 100));
        for k in 0..=10 {
            let x = ratio(k, 10);
            assert_eq!(posterior_from_rates(&ratio(1, 10), &x, &x).unwrap(), x);
        }
    }

    #[test]
    fn posterior_rejects_out_of_range() {
        let bad = ratio(11, 10);
        assert!(posterior_from_rates(&bad, &ratio(1, 2), &ratio(1, 2)).is_err());
        assert!(posterior_from_rates(&ratio(1, 2), &bad, &ratio(1, 2)).is_err());
        assert!(posterior_from_rates(&ratio(1, 2), &ratio(1, 2), &-ratio(1, 2)).is_err());
    }

    #[test]
    fn records_into_counts() {
        let [c0, c1] = counts_from_records([(0, 1, 1)]).unwrap();
        assert_eq!(c0, GroupConfusion::new(1, 0, 0, 0));
        assert!(c1.is_empty());

        let [c0, c1] = counts_from_records([(1, 1, 0), (1, 0, 1)]).unwrap();
        assert!(c0.is_empty());
        assert_eq!(c1, GroupConfusion::new(0, 1, 1, 0));
    }

    #[test]
    fn malformed_record_reports_row() {
        let err = counts_from_records([(0, 1, 1), (0, 0, 0), (2, 1, 0)]).unwrap_err();
        assert!(matches!(err, FairnessError::MalformedRecord { row: 2, .. }));
        let err = counts_from_records([(1, -1, 0)]).unwrap_err();
        assert!(matches!(err, FairnessError::MalformedRecord { row: 0, .. }));
    }

    #[test]
    fn rate_level_stats() {
        let g0 = GroupRates {
            base_rate: ratio(1, 3),
            fpr: ratio(3, 10),
            tpr: ratio(45, 100),
        };
        let g1 = GroupRates {
            base_rate: ratio(1, 10),
            fpr: ratio(3, 10),
            tpr: ratio(8, 10),
        };
        let stats = PopulationStats::from_rates(g0, g1, Some(ratio(1, 4))).unwrap();
        assert_eq!(stats.total(), None);
        assert_eq!(
            stats.group(GroupLabel::Unprotected).posterior(),
            &ratio(7, 20)
        );
        assert_eq!(
            stats.group(GroupLabel::Protected).posterior(),
            &ratio(7, 20)
        );
        assert_eq!(
            stats.group(GroupLabel::Unprotected).demographic_rate(),
            Some(&ratio(3, 4))
        );
    }
}
