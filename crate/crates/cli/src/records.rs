//! Delimited-text ingestion.
//!
//! Input is header-based CSV (or TSV). Columns are located by name; the
//! group column holds `0`/`1` unless a label mapping is configured.

use std::io::Read;

use fairness_core::{GroupLabel, Record, ScoredRecord};

use crate::AuditError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Comma,
    Tab,
}

impl Delimiter {
    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

/// How group column values map onto the sensitive attribute.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum GroupMapping {
    /// Values must be `0` (unprotected) or `1` (protected).
    #[default]
    Binary,
    /// `protected` maps to 1. With `unprotected` set only those two labels
    /// are accepted; without it every other label maps to 0.
    Labels {
        protected: String,
        unprotected: Option<String>,
    },
}

impl GroupMapping {
    fn resolve(&self, value: &str) -> Option<GroupLabel> {
        match self {
            GroupMapping::Binary => match value {
                "0" => Some(GroupLabel::Unprotected),
                "1" => Some(GroupLabel::Protected),
                _ => None,
            },
            GroupMapping::Labels {
                protected,
                unprotected,
            } => {
                if value == protected {
                    Some(GroupLabel::Protected)
                } else if unprotected.as_deref().is_none_or(|u| u == value) {
                    Some(GroupLabel::Unprotected)
                } else {
                    None
                }
            }
        }
    }
}

/// The column carrying the classifier's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeColumn {
    Prediction(String),
    Score(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputConfig {
    pub group_column: String,
    pub truth_column: String,
    pub outcome: OutcomeColumn,
    pub groups: GroupMapping,
    pub delimiter: Delimiter,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            group_column: "group".into(),
            truth_column: "y".into(),
            outcome: OutcomeColumn::Prediction("yhat".into()),
            groups: GroupMapping::Binary,
            delimiter: Delimiter::Comma,
        }
    }
}

struct Columns {
    group: usize,
    truth: usize,
    outcome: usize,
    outcome_name: String,
}

fn locate(headers: &csv::StringRecord, config: &InputConfig) -> Result<Columns, AuditError> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| AuditError::MissingColumn(name.to_string()))
    };
    let outcome_name = match &config.outcome {
        OutcomeColumn::Prediction(name) | OutcomeColumn::Score(name) => name.clone(),
    };
    Ok(Columns {
        group: find(&config.group_column)?,
        truth: find(&config.truth_column)?,
        outcome: find(&outcome_name)?,
        outcome_name,
    })
}

fn malformed(row: usize, column: &str, value: &str, reason: &str) -> AuditError {
    AuditError::MalformedRecord {
        row,
        column: column.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn binary(row: usize, column: &str, value: &str) -> Result<bool, AuditError> {
    match value {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(malformed(row, column, value, "expected 0 or 1")),
    }
}

/// Parses every data row; `row` in errors is 1-based over data rows.
fn read_rows<R, T, F>(input: R, config: &InputConfig, mut parse: F) -> Result<Vec<T>, AuditError>
where
    R: Read,
    F: FnMut(usize, GroupLabel, bool, &str, &str) -> Result<T, AuditError>,
{
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter.byte())
        .trim(csv::Trim::All)
        .from_reader(input);
    let columns = locate(reader.headers()?, config)?;
    let mut out = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let row_no = index + 1;
        let row = row?;
        let field = |i: usize, name: &str| {
            row.get(i)
                .ok_or_else(|| malformed(row_no, name, "", "field missing"))
        };
        let group_value = field(columns.group, &config.group_column)?;
        let group = config.groups.resolve(group_value).ok_or_else(|| {
            malformed(
                row_no,
                &config.group_column,
                group_value,
                "unmapped group label",
            )
        })?;
        let truth = binary(
            row_no,
            &config.truth_column,
            field(columns.truth, &config.truth_column)?,
        )?;
        let outcome = field(columns.outcome, &columns.outcome_name)?;
        out.push(parse(row_no, group, truth, &columns.outcome_name, outcome)?);
    }
    Ok(out)
}

/// Reads `(group, truth, prediction)` records.
pub fn read_records<R: Read>(input: R, config: &InputConfig) -> Result<Vec<Record>, AuditError> {
    if matches!(config.outcome, OutcomeColumn::Score(_)) {
        return Err(AuditError::Usage(
            "a prediction column is required here".into(),
        ));
    }
    read_rows(input, config, |row, group, truth, column, value| {
        Ok(Record {
            group,
            truth,
            prediction: binary(row, column, value)?,
        })
    })
}

/// Reads `(group, truth, score)` records.
pub fn read_scored<R: Read>(
    input: R,
    config: &InputConfig,
) -> Result<Vec<ScoredRecord>, AuditError> {
    if matches!(config.outcome, OutcomeColumn::Prediction(_)) {
        return Err(AuditError::Usage("a score column is required here".into()));
    }
    read_rows(input, config, |row, group, truth, column, value| {
        let score: f64 = value
            .parse()
            .map_err(|_| malformed(row, column, value, "not a number"))?;
        if !score.is_finite() {
            return Err(malformed(row, column, value, "score must be finite"));
        }
        Ok(ScoredRecord {
            group,
            truth,
            score,
        })
    })
}

/// Writes records as `group,y,yhat`.
pub fn write_records<W: std::io::Write>(out: W, records: &[Record]) -> Result<(), AuditError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["group", "y", "yhat"])?;
    for r in records {
        writer.write_record([
            r.group.bit().to_string(),
            u8::from(r.truth).to_string(),
            u8::from(r.prediction).to_string(),
        ])?;
    }
    writer.flush().map_err(|e| AuditError::Io(e.to_string()))?;
    Ok(())
}
