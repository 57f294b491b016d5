//! Report serialization.
//!
//! JSON output follows `schema_version` 1. Every number is an object
//! holding the exact fraction string and its nearest decimal.

use std::fmt::Write as _;
use std::str::FromStr;

use fairness_core::fraction::{parse_fraction, to_f64};
use fairness_core::{
    Diagnosis, DiagnosisOutcome, FairnessError, FairnessReport, Fraction, GroupStats, LineCrossing,
    Measure, OperationPoint, PerformanceLine, PlanePoint, SweepRow, TradeoffPlan,
};
use serde::{Deserialize, Serialize};

use crate::AuditError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!(
                "unknown format {other:?} (expected text, json or svg)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Number {
    pub exact: String,
    pub decimal: f64,
}

impl Number {
    pub fn new(value: &Fraction) -> Self {
        Self {
            exact: value.to_string(),
            decimal: to_f64(value),
        }
    }

    pub fn fraction(&self) -> Result<Fraction, FairnessError> {
        parse_fraction(&self.exact)
    }
}

fn num(value: &Fraction) -> Number {
    Number::new(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub group: u8,
    pub count: Option<u64>,
    pub demographic_rate: Option<Number>,
    pub base_rate: Number,
    pub posterior: Number,
    pub fpr: Option<Number>,
    pub tpr: Option<Number>,
    pub fnr: Option<Number>,
}

impl GroupJson {
    fn new(g: &GroupStats) -> Self {
        Self {
            group: g.group().bit(),
            count: g.count(),
            demographic_rate: g.demographic_rate().map(num),
            base_rate: num(g.base_rate()),
            posterior: num(g.posterior()),
            fpr: g.fpr_opt().map(num),
            tpr: g.tpr_opt().map(num),
            fnr: g.fnr_opt().as_ref().map(num),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsJson {
    pub total: Option<u64>,
    pub groups: Vec<GroupJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub measure: String,
    pub gap: Option<Number>,
    pub satisfied: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub fpr: Number,
    pub tpr: Number,
}

impl PointJson {
    fn new(p: &PlanePoint) -> Self {
        Self {
            fpr: num(&p.fpr),
            tpr: num(&p.tpr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineJson {
    pub group: Option<u8>,
    pub base_rate: Number,
    pub target: Number,
    /// Absent for a vertical line (zero base-rate).
    pub slope: Option<Number>,
    pub intercept: Option<Number>,
}

impl LineJson {
    pub fn new(line: &PerformanceLine, group: Option<u8>) -> Self {
        Self {
            group,
            base_rate: num(line.base_rate()),
            target: num(line.target()),
            slope: line.slope().ok().as_ref().map(num),
            intercept: line.intercept().ok().as_ref().map(num),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisJson {
    pub outcome: String,
    pub explanation: String,
    /// Equalized-odds components that fail; empty when it holds.
    pub failing: Vec<String>,
    pub parity_gap: Number,
    pub operating_point: Option<PointJson>,
    pub on_chance_line: Option<bool>,
    pub lines: Vec<LineJson>,
}

impl DiagnosisJson {
    fn new(d: &Diagnosis) -> Self {
        let lines = d
            .lines
            .iter()
            .enumerate()
            .map(|(i, l)| LineJson::new(l, Some(i as u8)))
            .collect();
        match &d.outcome {
            DiagnosisOutcome::Compatibility(v) => Self {
                outcome: v.kind.name().to_string(),
                explanation: v.explanation(),
                failing: Vec::new(),
                parity_gap: num(&v.parity_gap),
                operating_point: Some(PointJson::new(&v.operating_point)),
                on_chance_line: Some(v.on_chance_line),
                lines,
            },
            DiagnosisOutcome::OddsNotInPlace {
                failing,
                parity_gap,
                parity_satisfied,
            } => Self {
                outcome: d.outcome.name().to_string(),
                explanation: format!(
                    "equalized odds fails on {}; parity is {}",
                    failing
                        .iter()
                        .map(|m| m.name())
                        .collect::<Vec<_>>()
                        .join(" and "),
                    if *parity_satisfied {
                        "satisfied"
                    } else {
                        "violated"
                    }
                ),
                failing: failing.iter().map(|m| m.name().to_string()).collect(),
                parity_gap: num(parity_gap),
                operating_point: None,
                on_chance_line: None,
                lines,
            },
        }
    }
}

/// The `audit` / `diagnose` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub command: String,
    pub tolerance: Number,
    pub stats: StatsJson,
    pub measures: Vec<MeasureJson>,
    pub requested: Vec<String>,
    pub fnr_gap: Option<Number>,
    pub parity_ratio: Option<Number>,
    pub equalized_odds: Option<bool>,
    pub all_satisfied: bool,
    pub verdict: Option<String>,
    pub diagnosis: Option<DiagnosisJson>,
}

impl ReportJson {
    pub fn new(
        command: &str,
        report: &FairnessReport,
        requested: &[Measure],
        diagnosis: Option<&Diagnosis>,
    ) -> Self {
        let measures = report
            .outcomes()
            .iter()
            .map(|o| match &o.result {
                Ok(g) => MeasureJson {
                    measure: o.measure.name().into(),
                    gap: Some(num(&g.gap)),
                    satisfied: Some(g.satisfied),
                    error: None,
                },
                Err(e) => MeasureJson {
                    measure: o.measure.name().into(),
                    gap: None,
                    satisfied: None,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            tolerance: num(report.tolerance().value()),
            stats: StatsJson {
                total: report.stats().total(),
                groups: report.stats().groups().iter().map(GroupJson::new).collect(),
            },
            measures,
            requested: requested.iter().map(|m| m.name().to_string()).collect(),
            fnr_gap: report.fnr_gap().as_ref().map(num),
            parity_ratio: report.parity_ratio().as_ref().map(num),
            equalized_odds: report.equalized_odds(),
            all_satisfied: report.all_satisfied(requested),
            verdict: diagnosis.map(|d| d.outcome.name().to_string()),
            diagnosis: diagnosis.map(DiagnosisJson::new),
        }
    }

    pub fn measure(&self, measure: Measure) -> Option<&MeasureJson> {
        self.measures.iter().find(|m| m.measure == measure.name())
    }
}

fn show(value: &Fraction) -> String {
    if value.is_integer() {
        value.to_string()
    } else {
        format!("{value} ({:.6})", to_f64(value))
    }
}

fn show_opt(value: Option<&Fraction>) -> String {
    value.map_or_else(|| "undefined".to_string(), show)
}

fn write_stats(out: &mut String, report: &FairnessReport) {
    let _ = writeln!(out, "tolerance: {}", report.tolerance().value());
    if let Some(total) = report.stats().total() {
        let _ = writeln!(out, "records: {total}");
    }
    for g in report.stats().groups() {
        let _ = writeln!(out, "group {}:", g.group());
        if let Some(n) = g.count() {
            let _ = writeln!(out, "  count            {n}");
        }
        if let Some(pi) = g.demographic_rate() {
            let _ = writeln!(out, "  demographic rate {}", show(pi));
        }
        let _ = writeln!(out, "  base-rate        {}", show(g.base_rate()));
        let _ = writeln!(out, "  positive rate    {}", show(g.posterior()));
        let _ = writeln!(out, "  FPR              {}", show_opt(g.fpr_opt()));
        let _ = writeln!(out, "  TPR              {}", show_opt(g.tpr_opt()));
        let _ = writeln!(out, "  FNR              {}", show_opt(g.fnr_opt().as_ref()));
    }
}

fn write_measures(out: &mut String, report: &FairnessReport, requested: &[Measure]) {
    let _ = writeln!(out, "measures (gap = group 0 - group 1):");
    for o in report.outcomes() {
        let mark = if requested.contains(&o.measure) {
            ""
        } else {
            " [not requested]"
        };
        match &o.result {
            Ok(g) => {
                let verdict = if g.satisfied { "satisfied" } else { "VIOLATED" };
                let _ = writeln!(
                    out,
                    "  {:<20} {:<10} gap {}{mark}",
                    o.measure.name(),
                    verdict,
                    show(&g.gap)
                );
            }
            Err(e) => {
                let _ = writeln!(
                    out,
                    "  {:<20} {:<10} {e}{mark}",
                    o.measure.name(),
                    "UNDEFINED"
                );
            }
        }
    }
    if let Some(fnr) = report.fnr_gap() {
        let _ = writeln!(out, "  FNR gap {}", show(&fnr));
    }
    if let Some(ratio) = report.parity_ratio() {
        let _ = writeln!(out, "  parity ratio q1/q0 {}", show(&ratio));
    }
    let all = report.all_satisfied(requested);
    let _ = writeln!(
        out,
        "all requested measures satisfied: {}",
        if all { "yes" } else { "no" }
    );
}

/// Serializes an audit (and optional diagnosis) report.
pub fn emit_report(
    report: &FairnessReport,
    diagnosis: Option<&Diagnosis>,
    requested: &[Measure],
    format: OutputFormat,
) -> Result<String, AuditError> {
    let command = if diagnosis.is_some() {
        "diagnose"
    } else {
        "audit"
    };
    match format {
        OutputFormat::Json => to_json(&ReportJson::new(command, report, requested, diagnosis)),
        OutputFormat::Text => {
            let mut out = String::new();
            write_stats(&mut out, report);
            write_measures(&mut out, report, requested);
            if let Some(d) = diagnosis {
                let json = DiagnosisJson::new(d);
                let _ = writeln!(out, "verdict: {}", json.outcome);
                let _ = writeln!(out, "  {}", json.explanation);
            }
            Ok(out)
        }
        OutputFormat::Svg => Err(AuditError::Usage(format!("{command} has no SVG output"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, AuditError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinesJson {
    pub schema_version: u32,
    pub command: String,
    pub lines: Vec<LineJson>,
    /// Crossings of consecutive lines.
    pub crossings: Vec<CrossingJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingJson {
    pub lines: [usize; 2],
    pub point: Option<PointJson>,
    pub kind: Option<String>,
    pub on_chance_line: Option<bool>,
    pub error: Option<String>,
}

impl CrossingJson {
    pub fn new(pair: [usize; 2], crossing: &Result<LineCrossing, FairnessError>) -> Self {
        match crossing {
            Ok(c) => Self {
                lines: pair,
                point: Some(PointJson::new(&c.point)),
                kind: Some(format!("{:?}", c.kind)),
                on_chance_line: Some(c.point.on_chance_line()),
                error: None,
            },
            Err(e) => Self {
                lines: pair,
                point: None,
                kind: None,
                on_chance_line: None,
                error: Some(e.to_string()),
            },
        }
    }
}

pub fn emit_lines(doc: &LinesJson, format: OutputFormat) -> Result<String, AuditError> {
    match format {
        OutputFormat::Json => to_json(doc),
        OutputFormat::Text => {
            let mut out = String::new();
            for (i, l) in doc.lines.iter().enumerate() {
                let _ = write!(
                    out,
                    "line {i}: p={} q*={}",
                    l.base_rate.exact, l.target.exact
                );
                match (&l.slope, &l.intercept) {
                    (Some(s), Some(c)) => {
                        let _ = writeln!(out, "  TPR = {} * FPR + {}", s.exact, c.exact);
                    }
                    _ => {
                        let _ = writeln!(out, "  vertical: FPR = {}", l.target.exact);
                    }
                }
            }
            for c in &doc.crossings {
                let [a, b] = c.lines;
                match (&c.point, &c.error) {
                    (Some(p), _) => {
                        let chance = if c.on_chance_line == Some(true) {
                            ", on the chance line"
                        } else {
                            ""
                        };
                        let _ = writeln!(
                            out,
                            "lines {a} and {b} cross at ({}, {}){chance}",
                            p.fpr.exact, p.tpr.exact
                        );
                    }
                    (None, Some(e)) => {
                        let _ = writeln!(out, "lines {a} and {b}: {e}");
                    }
                    (None, None) => {}
                }
            }
            Ok(out)
        }
        OutputFormat::Svg => Err(AuditError::Usage(
            "lines renders SVG through the plot module".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationPointJson {
    pub group: u8,
    pub fpr: Number,
    pub tpr: Number,
    pub threshold: Option<f64>,
    pub posterior: Number,
    pub random: bool,
}

impl OperationPointJson {
    pub fn new(p: &OperationPoint) -> Self {
        Self {
            group: p.group.bit(),
            fpr: num(&p.point.fpr),
            tpr: num(&p.point.tpr),
            threshold: p.threshold,
            posterior: num(&p.posterior),
            random: p.random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffJson {
    pub schema_version: u32,
    pub command: String,
    pub policy: String,
    pub points: Vec<OperationPointJson>,
    /// `p·TPR + (1 − p)·FPR − q*` at each point, when a target applies.
    pub residuals: Option<Vec<Number>>,
    pub report: ReportJson,
}

impl TradeoffJson {
    pub fn new(plan: &TradeoffPlan, target: Option<&Fraction>, requested: &[Measure]) -> Self {
        let residuals = target.map(|q| {
            plan.points
                .iter()
                .map(|p| num(&(&p.posterior - q)))
                .collect()
        });
        Self {
            schema_version: SCHEMA_VERSION,
            command: "tradeoff".into(),
            policy: plan.policy.name().into(),
            points: plan.points.iter().map(OperationPointJson::new).collect(),
            residuals,
            report: ReportJson::new("tradeoff", &plan.report, requested, None),
        }
    }
}

pub fn emit_tradeoff(
    plan: &TradeoffPlan,
    target: Option<&Fraction>,
    requested: &[Measure],
    format: OutputFormat,
) -> Result<String, AuditError> {
    match format {
        OutputFormat::Json => to_json(&TradeoffJson::new(plan, target, requested)),
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "policy: {}", plan.policy.name());
            for p in &plan.points {
                let _ = write!(
                    out,
                    "group {}: FPR {} TPR {} positive rate {}",
                    p.group,
                    show(&p.point.fpr),
                    show(&p.point.tpr),
                    show(&p.posterior)
                );
                if let Some(t) = p.threshold {
                    let _ = write!(out, " threshold {t}");
                }
                if p.random {
                    let _ = write!(out, " [chance line: random classifier]");
                }
                out.push('\n');
            }
            write_stats(&mut out, &plan.report);
            write_measures(&mut out, &plan.report, requested);
            Ok(out)
        }
        OutputFormat::Svg => Err(AuditError::Usage(
            "tradeoff SVG is produced by the binary".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRowJson {
    pub threshold: f64,
    pub measures: Vec<MeasureJson>,
    pub posteriors: [Number; 2],
}

pub fn emit_sweep(
    rows: &[SweepRow],
    requested: &[Measure],
    format: OutputFormat,
) -> Result<String, AuditError> {
    match format {
        OutputFormat::Json => {
            let rows: Vec<SweepRowJson> = rows
                .iter()
                .map(|r| {
                    let doc = ReportJson::new("sweep", &r.report, requested, None);
                    let [g0, g1] = r.report.stats().groups();
                    SweepRowJson {
                        threshold: r.threshold,
                        measures: doc.measures,
                        posteriors: [num(g0.posterior()), num(g1.posterior())],
                    }
                })
                .collect();
            to_json(&serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "command": "sweep",
                "rows": rows,
            }))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = write!(out, "{:>12}", "threshold");
            for m in Measure::ALL {
                let _ = write!(out, " {:>22}", m.name());
            }
            out.push('\n');
            for r in rows {
                let _ = write!(out, "{:>12}", r.threshold);
                for m in Measure::ALL {
                    let cell = match r.report.outcome(m) {
                        Ok(g) => format!(
                            "{:+.6}{}",
                            to_f64(&g.gap),
                            if g.satisfied { " ok" } else { " x" }
                        ),
                        Err(_) => "undefined".into(),
                    };
                    let _ = write!(out, " {cell:>22}");
                }
                out.push('\n');
            }
            Ok(out)
        }
        OutputFormat::Svg => Err(AuditError::Usage("sweep has no SVG output".into())),
    }
}
