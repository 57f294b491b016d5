//! ROC curves and per-group operating-point selection.
//!
//! A curve is a monotone polyline from `(0, 0)` to `(1, 1)` in the FPR–TPR
//! plane. Because both coordinates are non-decreasing, the positive rate
//! `p·TPR + (1 − p)·FPR` is non-decreasing along it for every base-rate in
//! `(0, 1)`, so each target rate is met at exactly one point.

use num_traits::{One, Zero};

use crate::compatibility::PlanePoint;
use crate::confusion::{
    posterior_from_rates, stats_from_counts, GroupConfusion, GroupLabel, GroupRates,
    PopulationStats,
};
use crate::error::{FairnessError, RateKind};
use crate::fraction::{check_unit, is_unit, ratio, Fraction};
use crate::measures::{full_report, FairnessReport, Tolerance};

/// One classifier output with its ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredRecord {
    pub group: GroupLabel,
    pub truth: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocVertex {
    pub point: PlanePoint,
    /// Predict positive iff `score >= threshold`. `None` at the origin
    /// (reject everything) and on hand-specified curves.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    vertices: Vec<RocVertex>,
}

impl RocCurve {
    /// Validates a hand-specified curve. Consecutive duplicate points are
    /// merged.
    pub fn from_points<I>(points: I) -> Result<Self, FairnessError>
    where
        I: IntoIterator<Item = PlanePoint>,
    {
        Self::from_vertices(
            points
                .into_iter()
                .map(|point| RocVertex {
                    point,
                    threshold: None,
                })
                .collect(),
        )
    }

    fn from_vertices(raw: Vec<RocVertex>) -> Result<Self, FairnessError> {
        let mut vertices: Vec<RocVertex> = Vec::with_capacity(raw.len());
        for vertex in raw {
            let PlanePoint { fpr, tpr } = &vertex.point;
            if !is_unit(fpr) || !is_unit(tpr) {
                return Err(FairnessError::InvalidCurve(format!(
                    "vertex ({fpr}, {tpr}) is outside the unit square"
                )));
            }
            if let Some(last) = vertices.last_mut() {
                if last.point == vertex.point {
                    // Keep the loosest threshold that reaches this point.
                    last.threshold = vertex.threshold.or(last.threshold);
                    continue;
                }
                if *fpr < last.point.fpr || *tpr < last.point.tpr {
                    return Err(FairnessError::InvalidCurve(format!(
                        "vertex ({fpr}, {tpr}) moves backwards from ({}, {})",
                        last.point.fpr, last.point.tpr
                    )));
                }
            }
            vertices.push(vertex);
        }
        let origin = PlanePoint::new(Fraction::zero(), Fraction::zero());
        let corner = PlanePoint::new(Fraction::one(), Fraction::one());
        match (vertices.first(), vertices.last()) {
            (Some(first), Some(last)) if first.point == origin && last.point == corner => {
                Ok(Self { vertices })
            }
            _ => Err(FairnessError::InvalidCurve(
                "curve must start at (0, 0) and end at (1, 1)".into(),
            )),
        }
    }

    pub fn vertices(&self) -> &[RocVertex] {
        &self.vertices
    }

    pub fn points(&self) -> impl Iterator<Item = &PlanePoint> {
        self.vertices.iter().map(|v| &v.point)
    }

    /// Threshold of the vertex at `point`, if there is one.
    pub fn threshold_at(&self, point: &PlanePoint) -> Option<f64> {
        self.vertices
            .iter()
            .find(|v| &v.point == point)
            .and_then(|v| v.threshold)
    }

    /// Positive rate at every vertex for base-rate `base_rate`.
    pub fn posteriors(&self, base_rate: &Fraction) -> Vec<Fraction> {
        let neg = Fraction::one() - base_rate;
        self.points()
            .map(|p| base_rate * &p.tpr + &neg * &p.fpr)
            .collect()
    }

    /// The first point (smallest FPR) whose positive rate is `target`.
    pub fn point_for_posterior(
        &self,
        base_rate: &Fraction,
        target: &Fraction,
        group: GroupLabel,
    ) -> Result<(PlanePoint, Option<f64>), FairnessError> {
        let unreachable = || FairnessError::Unreachable {
            q: target.to_string(),
            group,
        };
        let qs = self.posteriors(base_rate);
        for (i, q) in qs.iter().enumerate() {
            let vertex = &self.vertices[i];
            if q == target {
                return Ok((vertex.point.clone(), vertex.threshold));
            }
            if let Some(next_q) = qs.get(i + 1) {
                if q < target && target < next_q {
                    let next = &self.vertices[i + 1].point;
                    let t = (target - q) / (next_q - q);
                    let fpr = &vertex.point.fpr + &t * (&next.fpr - &vertex.point.fpr);
                    let tpr = &vertex.point.tpr + &t * (&next.tpr - &vertex.point.tpr);
                    return Ok((PlanePoint::new(fpr, tpr), None));
                }
            }
        }
        Err(unreachable())
    }
}

/// Staircase ROC curve for one group's scores.
///
/// Records are visited by descending score; records sharing a score flip
/// together, which yields a diagonal step for mixed ties.
pub fn roc_from_scores(
    records: &[ScoredRecord],
    group: GroupLabel,
) -> Result<RocCurve, FairnessError> {
    let mut scored: Vec<(f64, bool)> = Vec::new();
    for (index, r) in records.iter().enumerate() {
        if !r.score.is_finite() {
            return Err(FairnessError::NonFiniteScore { index });
        }
        if r.group == group {
            scored.push((r.score, r.truth));
        }
    }
    let positives = scored.iter().filter(|(_, t)| *t).count() as u64;
    let negatives = scored.len() as u64 - positives;
    if positives == 0 {
        return Err(FairnessError::UndefinedRate {
            group,
            rate: RateKind::TruePositive,
        });
    }
    if negatives == 0 {
        return Err(FairnessError::UndefinedRate {
            group,
            rate: RateKind::FalsePositive,
        });
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut vertices = vec![RocVertex {
        point: PlanePoint::new(Fraction::zero(), Fraction::zero()),
        threshold: None,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    for tie in scored.chunk_by(|a, b| a.0 == b.0) {
        for &(_, truth) in tie {
            if truth {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        vertices.push(RocVertex {
            point: PlanePoint::new(ratio(fp, negatives), ratio(tp, positives)),
            threshold: Some(tie[0].0),
        });
    }
    let curve = RocCurve::from_vertices(vertices)?;
    debug_assert!(curve
        .points()
        .zip(curve.points().skip(1))
        .all(|(a, b)| a.fpr <= b.fpr && a.tpr <= b.tpr));
    Ok(curve)
}

/// A chosen per-group operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationPoint {
    pub group: GroupLabel,
    pub point: PlanePoint,
    pub threshold: Option<f64>,
    /// Positive rate implied by the group's base-rate.
    pub posterior: Fraction,
    /// Set for chance-line points: no better than a random classifier.
    pub random: bool,
}

impl OperationPoint {
    pub fn new(
        group: GroupLabel,
        base_rate: &Fraction,
        point: PlanePoint,
        threshold: Option<f64>,
    ) -> Result<Self, FairnessError> {
        let posterior = posterior_from_rates(base_rate, &point.tpr, &point.fpr)?;
        let random = point.on_chance_line();
        Ok(Self {
            group,
            point,
            threshold,
            posterior,
            random,
        })
    }
}

/// Both groups at `(q, q)`: every measure equalised, at the price of a
/// random classifier.
pub fn chance_line_points(target: &Fraction) -> Result<[OperationPoint; 2], FairnessError> {
    check_unit("target posterior", target)?;
    Ok(GroupLabel::BOTH.map(|group| OperationPoint {
        group,
        point: PlanePoint::new(target.clone(), target.clone()),
        threshold: None,
        posterior: target.clone(),
        random: true,
    }))
}

fn check_open_base_rate(base_rate: &Fraction) -> Result<(), FairnessError> {
    if base_rate.is_zero() || base_rate.is_one() || !is_unit(base_rate) {
        return Err(FairnessError::Domain {
            name: "base-rate",
            value: base_rate.to_string(),
        });
    }
    Ok(())
}

/// Per-group points where each curve meets its group's performance line
/// for `target`, i.e. parity enforced with group-specific thresholds.
pub fn parity_points_on_roc(
    roc0: &RocCurve,
    roc1: &RocCurve,
    base_rate0: &Fraction,
    base_rate1: &Fraction,
    target: &Fraction,
) -> Result<[OperationPoint; 2], FairnessError> {
    check_open_base_rate(base_rate0)?;
    check_open_base_rate(base_rate1)?;
    let pick = |roc: &RocCurve, p: &Fraction, group| {
        let (point, threshold) = roc.point_for_posterior(p, target, group)?;
        OperationPoint::new(group, p, point, threshold)
    };
    Ok([
        pick(roc0, base_rate0, GroupLabel::Unprotected)?,
        pick(roc1, base_rate1, GroupLabel::Protected)?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedPointGaps {
    pub posteriors: [Fraction; 2],
    pub parity_gap: Fraction,
}

/// Positive rates of both groups run at one shared operating point.
pub fn shared_point_gaps(
    point: &PlanePoint,
    base_rate0: &Fraction,
    base_rate1: &Fraction,
) -> Result<SharedPointGaps, FairnessError> {
    let q0 = posterior_from_rates(base_rate0, &point.tpr, &point.fpr)?;
    let q1 = posterior_from_rates(base_rate1, &point.tpr, &point.fpr)?;
    let parity_gap = &q0 - &q1;
    Ok(SharedPointGaps {
        posteriors: [q0, q1],
        parity_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub counts: [GroupConfusion; 2],
    pub report: FairnessReport,
}

/// Evaluates a single shared threshold for both groups at every distinct
/// score (ascending), or at the supplied thresholds in the given order.
pub fn threshold_sweep(
    records: &[ScoredRecord],
    thresholds: Option<&[f64]>,
    tolerance: &Tolerance,
) -> Result<Vec<SweepRow>, FairnessError> {
    // Sorted positive and negative scores per group.
    let mut sorted: [[Vec<f64>; 2]; 2] = Default::default();
    for (index, r) in records.iter().enumerate() {
        if !r.score.is_finite() {
            return Err(FairnessError::NonFiniteScore { index });
        }
        sorted[r.group.index()][r.truth as usize].push(r.score);
    }
    for group in GroupLabel::BOTH {
        let [neg, pos] = &mut sorted[group.index()];
        if pos.is_empty() {
            return Err(FairnessError::UndefinedRate {
                group,
                rate: RateKind::TruePositive,
            });
        }
        if neg.is_empty() {
            return Err(FairnessError::UndefinedRate {
                group,
                rate: RateKind::FalsePositive,
            });
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
    }

    let thresholds: Vec<f64> = match thresholds {
        Some(given) => given.to_vec(),
        None => {
            let mut all: Vec<f64> = records.iter().map(|r| r.score).collect();
            all.sort_by(f64::total_cmp);
            all.dedup();
            all
        }
    };

    let at_least =
        |scores: &[f64], t: f64| (scores.len() - scores.partition_point(|&s| s < t)) as u64;
    thresholds
        .into_iter()
        .map(|threshold| {
            let counts = GroupLabel::BOTH.map(|group| {
                let [neg, pos] = &sorted[group.index()];
                let tp = at_least(pos, threshold);
                let fp = at_least(neg, threshold);
                GroupConfusion::new(tp, pos.len() as u64 - tp, fp, neg.len() as u64 - fp)
            });
            let stats = stats_from_counts(&counts[0], &counts[1])?;
            Ok(SweepRow {
                threshold,
                counts,
                report: full_report(&stats, tolerance),
            })
        })
        .collect()
}

/// Which measure to enforce when choosing operating points.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Equal positive rates via per-group thresholds.
    EnforceParity { target: Fraction },
    /// One shared operating point for both groups.
    EnforceOdds { point: PlanePoint },
    /// Shared operating point taken from one group's parity point.
    EnforceOddsAnchored {
        anchor: GroupLabel,
        target: Fraction,
    },
    /// Both groups on the chance line at `(target, target)`.
    Random { target: Fraction },
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::EnforceParity { .. } => "enforce_parity",
            Policy::EnforceOdds { .. } | Policy::EnforceOddsAnchored { .. } => "enforce_odds",
            Policy::Random { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPlan {
    pub policy: Policy,
    pub points: [OperationPoint; 2],
    pub report: FairnessReport,
}

/// Applies `policy` to the groups' curves and reports every measure at the
/// resulting points, so whichever measure the policy sacrifices shows up as
/// a violation.
pub fn select_operating_points(
    roc0: &RocCurve,
    roc1: &RocCurve,
    base_rate0: &Fraction,
    base_rate1: &Fraction,
    policy: &Policy,
    protected_share: Option<Fraction>,
    tolerance: &Tolerance,
) -> Result<TradeoffPlan, FairnessError> {
    let shared = |point: PlanePoint| -> Result<[OperationPoint; 2], FairnessError> {
        // Evaluated for its domain checks.
        shared_point_gaps(&point, base_rate0, base_rate1)?;
        Ok([
            OperationPoint::new(
                GroupLabel::Unprotected,
                base_rate0,
                point.clone(),
                roc0.threshold_at(&point),
            )?,
            OperationPoint::new(
                GroupLabel::Protected,
                base_rate1,
                point.clone(),
                roc1.threshold_at(&point),
            )?,
        ])
    };
    let points = match policy {
        Policy::EnforceParity { target } => {
            parity_points_on_roc(roc0, roc1, base_rate0, base_rate1, target)?
        }
        Policy::EnforceOdds { point } => shared(point.clone())?,
        Policy::EnforceOddsAnchored { anchor, target } => {
            let parity = parity_points_on_roc(roc0, roc1, base_rate0, base_rate1, target)?;
            shared(parity[anchor.index()].point.clone())?
        }
        Policy::Random { target } => chance_line_points(target)?,
    };
    let rates = |p: &Fraction, op: &OperationPoint| GroupRates {
        base_rate: p.clone(),
        fpr: op.point.fpr.clone(),
        tpr: op.point.tpr.clone(),
    };
    let stats = PopulationStats::from_rates(
        rates(base_rate0, &points[0]),
        rates(base_rate1, &points[1]),
        protected_share,
    )?;
    Ok(TradeoffPlan {
        policy: policy.clone(),
        report: full_report(&stats, tolerance),
        points,
    })
}

/// Splits records by group and builds both staircase curves.
pub fn group_curves(records: &[ScoredRecord]) -> Result<[RocCurve; 2], FairnessError> {
    Ok([
        roc_from_scores(records, GroupLabel::Unprotected)?,
        roc_from_scores(records, GroupLabel::Protected)?,
    ])
}

/// Base-rate and population share of each group in scored data.
pub fn scored_base_rates(
    records: &[ScoredRecord],
) -> Result<([Fraction; 2], Fraction), FairnessError> {
    let mut counts = [[0u64; 2]; 2];
    for r in records {
        counts[r.group.index()][r.truth as usize] += 1;
    }
    let totals = counts.map(|[neg, pos]| neg + pos);
    for group in GroupLabel::BOTH {
        if totals[group.index()] == 0 {
            return Err(FairnessError::EmptyGroup { group });
        }
    }
    let rates = [0, 1].map(|g| ratio(counts[g][1], totals[g]));
    Ok((rates, ratio(totals[1], totals[0] + totals[1])))
}
