use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairness_cli::report::{
    emit_lines, emit_sweep, emit_tradeoff, CrossingJson, LineJson, LinesJson, SCHEMA_VERSION,
};
use fairness_cli::{
    emit_report, generate_running_example, read_records, read_scored, render_plane, write_records,
    AuditError, Delimiter, GroupMapping, InputConfig, OutcomeColumn, OutputFormat, PlotCurve,
    PlotLine, PlotPoint, PlotSpec, RunningPoint,
};
use fairness_core::fraction::parse_fraction;
use fairness_core::{
    counts_from_records, diagnose, full_report, group_curves, line_intersection, performance_line,
    scored_base_rates, select_operating_points, stats_from_counts, tally, threshold_sweep,
    DiagnosisOutcome, Fraction, GroupConfusion, GroupLabel, GroupRates, Measure, PerformanceLine,
    PlanePoint, Policy, PopulationStats, RocCurve, Tolerance,
};

/// Two-group fairness audits for binary classifiers.
#[derive(Parser)]
#[command(name = "fairaudit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure every fairness gap for records, counts or rates.
    Audit(PopulationArgs),
    /// Audit, then explain whether parity and equalized odds can coexist.
    Diagnose(PopulationArgs),
    /// Performance lines for given base-rates at one positive rate.
    Lines(LinesArgs),
    /// Choose per-group operating points on ROC curves.
    Tradeoff(TradeoffArgs),
    /// Emit the mortgage running example as records.
    Example(ExampleArgs),
    /// Render a plot spec (JSON) as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Largest absolute gap treated as satisfied.
    #[arg(long, default_value = "1e-9")]
    tolerance: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Measures that decide the exit code (comma separated; default all).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<Measure>,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Group label mapped to the protected group (1).
    #[arg(long)]
    protected_label: Option<String>,
    /// Group label mapped to the unprotected group (0); other labels are rejected.
    #[arg(long, requires = "protected_label")]
    unprotected_label: Option<String>,
    #[arg(long, value_enum, default_value_t = DelimiterArg::Comma)]
    delimiter: DelimiterArg,
    #[arg(long, default_value = "group")]
    group_col: String,
    #[arg(long, default_value = "y")]
    truth_col: String,
    #[arg(long, default_value = "yhat")]
    pred_col: String,
    #[arg(long, default_value = "score")]
    score_col: String,
}

#[derive(Args)]
struct PopulationArgs {
    /// Records file (`-` for stdin).
    #[arg(conflicts_with_all = ["counts", "rates"])]
    input: Option<PathBuf>,
    /// Confusion counts `tp,fn,fp,tn;tp,fn,fp,tn` (group 0 first).
    #[arg(long, conflicts_with = "rates")]
    counts: Option<String>,
    /// Rates `p,fpr,tpr;p,fpr,tpr` (group 0 first).
    #[arg(long)]
    rates: Option<String>,
    /// Protected group's population share, used with `--rates`.
    #[arg(long, requires = "rates")]
    protected_share: Option<String>,
    #[command(flatten)]
    input_args: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct LinesArgs {
    /// Base-rate of a group (repeat for each line).
    #[arg(long = "base-rate", required = true)]
    base_rates: Vec<String>,
    /// Shared positive rate q*.
    #[arg(long)]
    q: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    EnforceParity,
    EnforceOdds,
    Random,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Scored records (`group,y,score`), `-` for stdin.
    #[arg(long, conflicts_with = "roc")]
    input: Option<PathBuf>,
    /// Piecewise-linear ROC curve as `fpr,tpr` pairs, e.g. "0,0 0.1,0.7 1,1".
    #[arg(long)]
    roc: Option<String>,
    /// Separate curve for group 1 (defaults to `--roc`).
    #[arg(long, requires = "roc")]
    roc1: Option<String>,
    #[arg(long)]
    base_rate0: Option<String>,
    #[arg(long)]
    base_rate1: Option<String>,
    #[arg(long)]
    protected_share: Option<String>,
    #[arg(long, value_enum, default_value_t = PolicyArg::EnforceParity)]
    policy: PolicyArg,
    /// Target positive rate q*.
    #[arg(long)]
    q: Option<String>,
    /// Shared operating point `fpr,tpr` for enforce-odds.
    #[arg(long)]
    point: Option<String>,
    /// Take the enforce-odds point from this group's parity point at `--q`.
    #[arg(long, conflicts_with = "point")]
    anchor: Option<u8>,
    /// Evaluate one shared threshold at every distinct score instead.
    #[arg(long, requires = "input")]
    sweep: bool,
    /// Thresholds for `--sweep` (comma separated).
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    thresholds: Vec<f64>,
    #[command(flatten)]
    input_args: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ExampleArgs {
    /// Operating point A, B or C.
    point: RunningPoint,
    /// Print the expected derived stats as a JSON report instead of records.
    #[arg(long)]
    expected: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Plot spec JSON (`-` for stdin).
    spec: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Svg,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Svg => OutputFormat::Svg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DelimiterArg {
    Comma,
    Tab,
}

/// Whether the command found a violation.
enum Outcome {
    Clean,
    Violation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, AuditError> {
    match command {
        Command::Audit(args) => population(args, false),
        Command::Diagnose(args) => population(args, true),
        Command::Lines(args) => lines(args),
        Command::Tradeoff(args) => tradeoff(args),
        Command::Example(args) => example(args),
        Command::Plot(args) => plot(args),
    }
}

fn frac(name: &str, text: &str) -> Result<Fraction, AuditError> {
    parse_fraction(text).map_err(|e| AuditError::Usage(format!("--{name}: {e}")))
}

fn open_input(path: &Path) -> Result<Box<dyn Read>, AuditError> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdin().lock()))
    } else {
        File::open(path)
            .map(|f| Box::new(io::BufReader::new(f)) as Box<dyn Read>)
            .map_err(|e| AuditError::Io(format!("{}: {e}", path.display())))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), AuditError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| AuditError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

impl InputArgs {
    fn config(&self, outcome: OutcomeColumn) -> InputConfig {
        let groups = match &self.protected_label {
            Some(protected) => GroupMapping::Labels {
                protected: protected.clone(),
                unprotected: self.unprotected_label.clone(),
            },
            None => GroupMapping::Binary,
        };
        InputConfig {
            group_column: self.group_col.clone(),
            truth_column: self.truth_col.clone(),
            outcome,
            groups,
            delimiter: match self.delimiter {
                DelimiterArg::Comma => Delimiter::Comma,
                DelimiterArg::Tab => Delimiter::Tab,
            },
        }
    }
}

impl OutputArgs {
    fn tolerance(&self) -> Result<Tolerance, AuditError> {
        self.tolerance
            .parse()
            .map_err(|e| AuditError::Usage(format!("--tolerance: {e}")))
    }

    fn requested(&self) -> Vec<Measure> {
        if self.measures.is_empty() {
            Measure::ALL.to_vec()
        } else {
            self.measures.clone()
        }
    }
}

fn split_numbers<'a>(text: &'a str, what: &str, len: usize) -> Result<Vec<&'a str>, AuditError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != len {
        return Err(AuditError::Usage(format!(
            "{what}: expected {len} comma-separated values in {text:?}"
        )));
    }
    Ok(parts)
}

fn two_groups<'a>(text: &'a str, what: &str) -> Result<[&'a str; 2], AuditError> {
    match text.split(';').collect::<Vec<_>>()[..] {
        [a, b] => Ok([a, b]),
        _ => Err(AuditError::Usage(format!(
            "{what}: expected two groups separated by ';'"
        ))),
    }
}

fn parse_counts(text: &str) -> Result<[GroupConfusion; 2], AuditError> {
    let mut out = [GroupConfusion::default(); 2];
    for (slot, group) in out.iter_mut().zip(two_groups(text, "--counts")?) {
        let v = split_numbers(group, "--counts", 4)?
            .into_iter()
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| AuditError::Usage(format!("--counts: bad count {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        *slot = GroupConfusion::new(v[0], v[1], v[2], v[3]);
    }
    Ok(out)
}

fn parse_rates(text: &str) -> Result<[GroupRates; 2], AuditError> {
    let [a, b] = two_groups(text, "--rates")?;
    let one = |group: &str| -> Result<GroupRates, AuditError> {
        let v = split_numbers(group, "--rates", 3)?;
        Ok(GroupRates {
            base_rate: frac("rates", v[0])?,
            fpr: frac("rates", v[1])?,
            tpr: frac("rates", v[2])?,
        })
    };
    Ok([one(a)?, one(b)?])
}

fn parse_point(text: &str, what: &str) -> Result<PlanePoint, AuditError> {
    let v = split_numbers(text, what, 2)?;
    Ok(PlanePoint::new(frac(what, v[0])?, frac(what, v[1])?))
}

fn parse_curve(text: &str) -> Result<RocCurve, AuditError> {
    let points = text
        .split_whitespace()
        .map(|pair| parse_point(pair, "roc"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RocCurve::from_points(points)?)
}

fn population_stats(args: &PopulationArgs) -> Result<PopulationStats, AuditError> {
    if let Some(text) = &args.counts {
        let [c0, c1] = parse_counts(text)?;
        return Ok(stats_from_counts(&c0, &c1)?);
    }
    if let Some(text) = &args.rates {
        let [r0, r1] = parse_rates(text)?;
        let share = args
            .protected_share
            .as_deref()
            .map(|s| frac("protected-share", s))
            .transpose()?;
        return Ok(PopulationStats::from_rates(r0, r1, share)?);
    }
    let path = args.input.clone().unwrap_or_else(|| PathBuf::from("-"));
    let config = args
        .input_args
        .config(OutcomeColumn::Prediction(args.input_args.pred_col.clone()));
    let records = read_records(open_input(&path)?, &config)?;
    let [c0, c1] = tally(&records);
    Ok(stats_from_counts(&c0, &c1)?)
}

fn verdict_outcome(all_satisfied: bool) -> Outcome {
    if all_satisfied {
        Outcome::Clean
    } else {
        Outcome::Violation
    }
}

fn population(args: PopulationArgs, with_diagnosis: bool) -> Result<Outcome, AuditError> {
    let tolerance = args.out.tolerance()?;
    let requested = args.out.requested();
    let stats = population_stats(&args)?;
    let report = full_report(&stats, &tolerance);
    let format = OutputFormat::from(args.out.format);
    let text = if with_diagnosis {
        let diagnosis = diagnose(&stats, &tolerance)?;
        if format == OutputFormat::Svg {
            let mut spec = PlotSpec {
                title: Some(format!("verdict: {}", diagnosis.outcome.name())),
                ..PlotSpec::default()
            };
            for (i, line) in diagnosis.lines.iter().enumerate() {
                spec.lines.push(PlotLine::from_line(line, Some(i as u8)));
            }
            match &diagnosis.outcome {
                DiagnosisOutcome::Compatibility(v) => spec.points.push(PlotPoint {
                    fpr: v.operating_point.fpr.clone().into(),
                    tpr: v.operating_point.tpr.clone().into(),
                    group: None,
                    label: Some(format!("parity gap {}", v.parity_gap)),
                }),
                DiagnosisOutcome::OddsNotInPlace { .. } => {
                    for g in stats.groups() {
                        spec.points.push(PlotPoint {
                            fpr: g.fpr()?.clone().into(),
                            tpr: g.tpr()?.clone().into(),
                            group: Some(g.group().bit()),
                            label: None,
                        });
                    }
                }
            }
            render_plane(&spec)
        } else {
            emit_report(&report, Some(&diagnosis), &requested, format)?
        }
    } else {
        emit_report(&report, None, &requested, format)?
    };
    write_output(args.out.output.as_deref(), &text)?;
    Ok(verdict_outcome(report.all_satisfied(&requested)))
}

fn lines(args: LinesArgs) -> Result<Outcome, AuditError> {
    let q = frac("q", &args.q)?;
    let lines: Vec<PerformanceLine> = args
        .base_rates
        .iter()
        .map(|p| Ok(performance_line(frac("base-rate", p)?, q.clone())?))
        .collect::<Result<_, AuditError>>()?;
    let format = OutputFormat::from(args.out.format);
    let text = if format == OutputFormat::Svg {
        let mut spec = PlotSpec {
            title: Some(format!("q* = {q}")),
            ..PlotSpec::default()
        };
        for (i, line) in lines.iter().enumerate() {
            spec.lines.push(PlotLine::from_line(
                line,
                u8::try_from(i).ok().filter(|&g| g < 2),
            ));
        }
        for pair in lines.windows(2) {
            if let Ok(c) = line_intersection(&pair[0], &pair[1]) {
                if !spec
                    .points
                    .iter()
                    .any(|p| p.fpr.0 == c.point.fpr && p.tpr.0 == c.point.tpr)
                {
                    spec.points.push(PlotPoint {
                        fpr: c.point.fpr.into(),
                        tpr: c.point.tpr.into(),
                        group: None,
                        label: None,
                    });
                }
            }
        }
        render_plane(&spec)
    } else {
        let doc = LinesJson {
            schema_version: SCHEMA_VERSION,
            command: "lines".into(),
            lines: lines
                .iter()
                .enumerate()
                .map(|(i, l)| LineJson::new(l, u8::try_from(i).ok()))
                .collect(),
            crossings: (1..lines.len())
                .map(|i| {
                    CrossingJson::new([i - 1, i], &line_intersection(&lines[i - 1], &lines[i]))
                })
                .collect(),
        };
        emit_lines(&doc, format)?
    };
    write_output(args.out.output.as_deref(), &text)?;
    Ok(Outcome::Clean)
}

fn tradeoff(args: TradeoffArgs) -> Result<Outcome, AuditError> {
    let tolerance = args.out.tolerance()?;
    let requested = args.out.requested();
    let format = OutputFormat::from(args.out.format);
    let opt_frac = |name: &str, v: &Option<String>| v.as_deref().map(|s| frac(name, s)).transpose();

    let (curves, data_rates, data_share) = match (&args.input, &args.roc) {
        (Some(path), _) => {
            let config = args
                .input_args
                .config(OutcomeColumn::Score(args.input_args.score_col.clone()));
            let records = read_scored(open_input(path)?, &config)?;
            if args.sweep {
                let thresholds =
                    (!args.thresholds.is_empty()).then_some(args.thresholds.as_slice());
                let rows = threshold_sweep(&records, thresholds, &tolerance)?;
                write_output(
                    args.out.output.as_deref(),
                    &emit_sweep(&rows, &requested, format)?,
                )?;
                return Ok(Outcome::Clean);
            }
            let (rates, share) = scored_base_rates(&records)?;
            (group_curves(&records)?, Some(rates), Some(share))
        }
        (None, Some(roc)) => {
            let roc0 = parse_curve(roc)?;
            let roc1 = match &args.roc1 {
                Some(text) => parse_curve(text)?,
                None => roc0.clone(),
            };
            ([roc0, roc1], None, None)
        }
        (None, None) => return Err(AuditError::Usage("tradeoff needs --input or --roc".into())),
    };
    let base_rate =
        |name: &str, given: &Option<String>, index: usize| -> Result<Fraction, AuditError> {
            match (opt_frac(name, given)?, &data_rates) {
                (Some(p), _) => Ok(p),
                (None, Some(rates)) => Ok(rates[index].clone()),
                (None, None) => Err(AuditError::Usage(format!(
                    "--{name} is required with --roc"
                ))),
            }
        };
    let p0 = base_rate("base-rate0", &args.base_rate0, 0)?;
    let p1 = base_rate("base-rate1", &args.base_rate1, 1)?;
    let share = opt_frac("protected-share", &args.protected_share)?.or(data_share);
    let q = opt_frac("q", &args.q)?;
    let need_q = || {
        q.clone()
            .ok_or_else(|| AuditError::Usage("--q is required for this policy".into()))
    };

    let policy = match args.policy {
        PolicyArg::EnforceParity => Policy::EnforceParity { target: need_q()? },
        PolicyArg::Random => Policy::Random { target: need_q()? },
        PolicyArg::EnforceOdds => match (&args.point, args.anchor) {
            (Some(point), _) => Policy::EnforceOdds {
                point: parse_point(point, "point")?,
            },
            (None, Some(bit)) => Policy::EnforceOddsAnchored {
                anchor: GroupLabel::from_bit(bit)
                    .ok_or_else(|| AuditError::Usage("--anchor must be 0 or 1".into()))?,
                target: need_q()?,
            },
            (None, None) => {
                return Err(AuditError::Usage(
                    "enforce-odds needs --point or --anchor".into(),
                ))
            }
        },
    };
    let plan =
        select_operating_points(&curves[0], &curves[1], &p0, &p1, &policy, share, &tolerance)?;
    let target = match &policy {
        Policy::EnforceParity { target } | Policy::Random { target } => Some(target.clone()),
        _ => None,
    };

    let text = if format == OutputFormat::Svg {
        let mut spec = PlotSpec {
            title: Some(format!("policy: {}", policy.name())),
            ..PlotSpec::default()
        };
        for (i, curve) in curves.iter().enumerate() {
            spec.curves.push(PlotCurve {
                vertices: curve
                    .points()
                    .map(|p| [p.fpr.clone().into(), p.tpr.clone().into()])
                    .collect(),
                group: Some(i as u8),
                label: Some(format!("ROC S={i}")),
            });
        }
        if let Some(q) = &target {
            for (i, p) in [&p0, &p1].into_iter().enumerate() {
                spec.lines.push(PlotLine::from_line(
                    &performance_line(p.clone(), q.clone())?,
                    Some(i as u8),
                ));
            }
        }
        for op in &plan.points {
            spec.points.push(PlotPoint {
                fpr: op.point.fpr.clone().into(),
                tpr: op.point.tpr.clone().into(),
                group: Some(op.group.bit()),
                label: None,
            });
        }
        render_plane(&spec)
    } else {
        emit_tradeoff(&plan, target.as_ref(), &requested, format)?
    };
    write_output(args.out.output.as_deref(), &text)?;
    Ok(verdict_outcome(plan.report.all_satisfied(&requested)))
}

fn example(args: ExampleArgs) -> Result<Outcome, AuditError> {
    let (records, expected) = generate_running_example(args.point);
    let mut buffer = Vec::new();
    if args.expected {
        let report = full_report(&expected, &Tolerance::default());
        buffer.extend(emit_report(&report, None, &Measure::ALL, OutputFormat::Json)?.into_bytes());
    } else {
        write_records(&mut buffer, &records)?;
    }
    let text = String::from_utf8(buffer).map_err(|e| AuditError::Io(e.to_string()))?;
    write_output(args.output.as_deref(), &text)?;
    // Self-check: the emitted records reproduce the expected counts.
    let counts = counts_from_records(
        records
            .iter()
            .map(|r| (r.group.bit() as i64, r.truth as i64, r.prediction as i64)),
    )?;
    if counts != args.point.counts() {
        return Err(AuditError::Io(
            "generated records do not reproduce the expected counts".into(),
        ));
    }
    Ok(Outcome::Clean)
}

fn plot(args: PlotArgs) -> Result<Outcome, AuditError> {
    let mut text = String::new();
    open_input(&args.spec)?.read_to_string(&mut text)?;
    let spec = PlotSpec::from_json(&text)?;
    write_output(args.output.as_deref(), &render_plane(&spec))?;
    Ok(Outcome::Clean)
}
