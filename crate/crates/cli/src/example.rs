//! The mortgage running example: 8000 applicants, 6000 in the privileged
//! group (2000 repaid) and 2000 in the unprivileged group (200 repaid),
//! scored at three operating points.

use std::fmt;
use std::str::FromStr;

use fairness_core::{
    stats_from_counts, FairnessError, GroupConfusion, GroupLabel, PopulationStats, Record,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunningPoint {
    /// Equal odds and parity, on the chance line.
    A,
    /// Equal odds, parity violated.
    B,
    /// Parity and equal TPR, FPR violated.
    C,
}

impl RunningPoint {
    pub const ALL: [RunningPoint; 3] = [RunningPoint::A, RunningPoint::B, RunningPoint::C];

    /// `[unprotected, protected]` counts.
    pub fn counts(self) -> [GroupConfusion; 2] {
        match self {
            RunningPoint::A => [
                GroupConfusion::new(600, 1400, 1200, 2800),
                GroupConfusion::new(60, 140, 540, 1260),
            ],
            RunningPoint::B => [
                GroupConfusion::new(1400, 600, 1200, 2800),
                GroupConfusion::new(140, 60, 540, 1260),
            ],
            RunningPoint::C => [
                GroupConfusion::new(1400, 600, 400, 3600),
                GroupConfusion::new(140, 60, 460, 1340),
            ],
        }
    }
}

impl fmt::Display for RunningPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for RunningPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RunningPoint::A),
            "B" => Ok(RunningPoint::B),
            "C" => Ok(RunningPoint::C),
            other => Err(format!(
                "unknown operating point {other:?} (expected A, B or C)"
            )),
        }
    }
}

/// Expands the point's counts into individual records (group 0 first; TP,
/// FN, FP, TN blocks) together with the stats they should reproduce.
pub fn generate_running_example(point: RunningPoint) -> (Vec<Record>, PopulationStats) {
    let counts = point.counts();
    let mut records = Vec::with_capacity(8000);
    for group in GroupLabel::BOTH {
        let c = &counts[group.index()];
        for (n, truth, prediction) in [
            (c.tp, true, true),
            (c.fn_, true, false),
            (c.fp, false, true),
            (c.tn, false, false),
        ] {
            records.extend((0..n).map(|_| Record {
                group,
                truth,
                prediction,
            }));
        }
    }
    let expected = stats_from_counts(&counts[0], &counts[1])
        .unwrap_or_else(|e: FairnessError| unreachable!("running example is well-formed: {e}"));
    (records, expected)
}
