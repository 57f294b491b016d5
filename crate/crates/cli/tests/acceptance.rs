//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report reads top to bottom.

use std::io::Write;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use fairness_cli::report::{ReportJson, TradeoffJson};
use fairness_cli::{
    generate_running_example, read_records, render_plane, write_records, InputConfig, PlotLine,
    PlotPoint, PlotSpec, RunningPoint,
};
use fairness_core::fraction::{parse_fraction, ratio, to_f64};
use fairness_core::*;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_fairaudit");

type Check = Result<String, String>;
type CheckFn = fn() -> Check;

/// Field, group index and expected value.
type Expected<'a> = Vec<(&'a str, usize, &'a str)>;

fn fairaudit(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn fairaudit");
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input).unwrap();
    }
    child.wait_with_output().expect("wait for fairaudit")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn json_report(out: &Output) -> Result<ReportJson, String> {
    serde_json::from_slice(&out.stdout).map_err(|e| {
        format!(
            "bad JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn f(text: &str) -> Fraction {
    parse_fraction(text).unwrap()
}

/// Exact value and decimal of a serialized number against an expected value.
fn check_number(
    name: &str,
    got: &fairness_cli::report::Number,
    want: &Fraction,
) -> Result<(), String> {
    ensure(&got.fraction().map_err(|e| e.to_string())? == want, || {
        format!("{name}: exact {} != {want}", got.exact)
    })?;
    ensure((got.decimal - to_f64(want)).abs() <= 1e-12, || {
        format!("{name}: decimal {} off from {}", got.decimal, to_f64(want))
    })
}

fn audit_example(point: &str) -> Result<ReportJson, String> {
    let csv = fairaudit(&["example", point], None);
    ensure(csv.status.success(), || format!("example {point} failed"))?;
    json_report(&fairaudit(
        &["audit", "--format", "json", "-"],
        Some(&csv.stdout),
    ))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let expected: [(&str, Expected); 3] = [
        (
            "A",
            vec![
                ("pi", 0, "0.75"),
                ("pi", 1, "0.25"),
                ("p", 0, "1/3"),
                ("p", 1, "0.1"),
                ("q", 0, "0.3"),
                ("q", 1, "0.3"),
                ("fpr", 0, "0.3"),
                ("fpr", 1, "0.3"),
                ("tpr", 0, "0.3"),
                ("tpr", 1, "0.3"),
            ],
        ),
        ("B", vec![("q", 0, "13/30"), ("q", 1, "0.34")]),
        (
            "C",
            vec![
                ("fpr", 0, "0.1"),
                ("fpr", 1, "23/90"),
                ("q", 0, "0.3"),
                ("q", 1, "0.3"),
            ],
        ),
    ];
    let mut checked = 0;
    for (point, fields) in &expected {
        let doc = audit_example(point)?;
        for (field, group, want) in fields {
            let g = &doc.stats.groups[*group];
            let got = match *field {
                "pi" => g.demographic_rate.as_ref(),
                "p" => Some(&g.base_rate),
                "q" => Some(&g.posterior),
                "fpr" => g.fpr.as_ref(),
                "tpr" => g.tpr.as_ref(),
                _ => unreachable!(),
            }
            .ok_or_else(|| format!("{point}: {field}{group} missing"))?;
            check_number(&format!("{point} {field}{group}"), got, &f(want))?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{checked} derived values exact, {elapsed:.2?} for three example|audit pipelines"
    ))
}

fn criterion_2() -> Check {
    let rows: [(&str, Vec<&str>, [bool; 3]); 4] = [
        (
            "A",
            vec!["--counts", "600,1400,1200,2800;60,140,540,1260"],
            [true, true, true],
        ),
        (
            "B",
            vec!["--counts", "1400,600,1200,2800;140,60,540,1260"],
            [false, true, true],
        ),
        (
            "C",
            vec!["--counts", "1400,600,400,3600;140,60,460,1340"],
            [true, false, true],
        ),
        (
            "D",
            vec![
                "--rates",
                "1/3,0.3,0.45;0.1,0.3,0.8",
                "--protected-share",
                "0.25",
            ],
            [true, true, false],
        ),
    ];
    let names = [
        Measure::StatisticalParity,
        Measure::PredictiveEquality,
        Measure::EqualOpportunity,
    ];
    for (point, args, want) in &rows {
        let mut full = vec!["diagnose", "--format", "json", "--tolerance", "1e-9"];
        full.extend(args);
        let doc = json_report(&fairaudit(&full, None))?;
        for (m, w) in names.iter().zip(want) {
            let got = doc.measure(*m).and_then(|x| x.satisfied);
            ensure(got == Some(*w), || {
                format!("{point}: {} expected {w}, got {got:?}", m.name())
            })?;
        }
        let eo = want[1] && want[2];
        ensure(doc.equalized_odds == Some(eo), || {
            format!("{point}: equalized odds {:?}", doc.equalized_odds)
        })?;
    }
    Ok("A: all three; B: equalized odds only; C: parity + equal opportunity; D: parity + predictive equality".into())
}

fn random_rate(rng: &mut ChaCha8Rng, open: bool) -> Fraction {
    let d: u64 = rng.gen_range(2..=1000);
    let n = if open {
        rng.gen_range(1..d)
    } else {
        rng.gen_range(0..=d)
    };
    ratio(n, d)
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let start = Instant::now();
    let mut draws = 0;
    while draws < 1000 {
        let (p0, p1, q) = (
            random_rate(&mut rng, true),
            random_rate(&mut rng, true),
            random_rate(&mut rng, false),
        );
        if p0 == p1 {
            continue;
        }
        draws += 1;
        let l0 = performance_line(p0.clone(), q.clone()).map_err(|e| e.to_string())?;
        let l1 = performance_line(p1.clone(), q.clone()).map_err(|e| e.to_string())?;
        let c = line_intersection(&l0, &l1).map_err(|e| e.to_string())?;
        let (dx, dy) = (
            to_f64(&(&c.point.fpr - &q)).abs(),
            to_f64(&(&c.point.tpr - &q)).abs(),
        );
        ensure(dx <= 1e-12 && dy <= 1e-12, || {
            format!(
                "p0={p0} p1={p1} q={q}: crossing ({}, {})",
                c.point.fpr, c.point.tpr
            )
        })?;
        ensure(c.point.on_chance_line(), || {
            format!("p0={p0} p1={p1} q={q}: crossing off the chance line")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{draws} draws crossed at (q*, q*) on the chance line in {elapsed:.2?}"
    ))
}

/// `(a/b)` as an `i128` ratio for the independent oracle.
fn small(value: &Fraction) -> Ratio<i128> {
    let n: i128 = value.numer().try_into().unwrap();
    let d: i128 = value.denom().try_into().unwrap();
    Ratio::new(n, d)
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = Tolerance::default();
    let (mut incompatible, mut balanced_or_chance) = (0, 0);
    for i in 0..1000 {
        let p0 = random_rate(&mut rng, false);
        let fpr = random_rate(&mut rng, false);
        // A quarter of draws sit exactly on each disjunct.
        let p1 = if i % 4 == 1 {
            p0.clone()
        } else {
            random_rate(&mut rng, false)
        };
        let tpr = if i % 4 == 2 {
            fpr.clone()
        } else {
            random_rate(&mut rng, false)
        };
        let v = compatibility_check(&p0, &p1, &fpr, &tpr, &tol).map_err(|e| e.to_string())?;
        // Oracle: each group's positive rate in i128 arithmetic, then the factored form.
        let one = Ratio::<i128>::one();
        let q0 = small(&p0) * small(&tpr) + (one - small(&p0)) * small(&fpr);
        let q1 = small(&p1) * small(&tpr) + (one - small(&p1)) * small(&fpr);
        let factored = (small(&p0) - small(&p1)) * (small(&tpr) - small(&fpr));
        ensure(q0 - q1 == factored, || {
            format!("oracle disagrees with itself at {p0} {p1} {fpr} {tpr}")
        })?;
        ensure(small(&v.parity_gap) == factored, || {
            format!(
                "p0={p0} p1={p1} fpr={fpr} tpr={tpr}: gap {} != {factored}",
                v.parity_gap
            )
        })?;
        let eps = small(tol.value());
        let disjunction =
            (small(&p0) - small(&p1)).abs() <= eps || (small(&tpr) - small(&fpr)).abs() <= eps;
        let compatible = v.kind != VerdictKind::Incompatible;
        ensure(compatible == disjunction, || {
            format!(
                "verdict {:?} at p0={p0} p1={p1} fpr={fpr} tpr={tpr}",
                v.kind
            )
        })?;
        if compatible {
            balanced_or_chance += 1;
        } else {
            incompatible += 1;
        }
    }
    Ok(format!("1000 tuples factor exactly; {balanced_or_chance} compatible and {incompatible} incompatible verdicts match the disjunction"))
}

/// Every confusion matrix with `1 <= total <= max_total`.
fn matrices(max_total: u64) -> Vec<GroupConfusion> {
    let mut out = Vec::new();
    for tp in 0..=max_total {
        for fn_ in 0..=max_total - tp {
            for fp in 0..=max_total - tp - fn_ {
                for tn in 0..=max_total - tp - fn_ - fp {
                    let c = GroupConfusion::new(tp, fn_, fp, tn);
                    if !c.is_empty() {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let all = matrices(8);
    let tol = Tolerance::default();
    let (mut pairs, mut no_positive) = (0u64, 0u64);
    for c0 in &all {
        for c1 in &all {
            let stats = stats_from_counts(c0, c1).map_err(|e| e.to_string())?;
            let parity = measures::statistical_parity_gap(&stats, &tol);
            // Integer oracle for parity: pp0 / n0 == pp1 / n1.
            let parity_zero =
                c0.predicted_positives() * c1.total() == c1.predicted_positives() * c0.total();
            ensure(parity.gap.is_zero() == parity_zero, || {
                format!("parity oracle mismatch {c0:?} {c1:?}")
            })?;
            match measures::representativity_check(&stats, &tol) {
                Ok(rep) => ensure(rep.gap.is_zero() == parity_zero, || {
                    format!("exception at {c0:?} {c1:?}")
                })?,
                Err(FairnessError::NoPositivePredictions) => {
                    // Both positive rates are zero, so parity holds trivially.
                    ensure(parity_zero, || format!("{c0:?} {c1:?}"))?;
                    no_positive += 1;
                }
                Err(e) => return Err(e.to_string()),
            }
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{pairs} pairs, 0 exceptions ({no_positive} without positive predictions, where representativity is undefined), {elapsed:.2?}"
    ))
}

fn criterion_6() -> Check {
    let mut checked = 0;
    for c in matrices(8) {
        if c.positives() == 0 || c.negatives() == 0 {
            continue;
        }
        let stats = stats_from_counts(&c, &c).map_err(|e| e.to_string())?;
        let g = stats.group(GroupLabel::Unprotected);
        let (p, tpr, fpr) = (
            g.base_rate(),
            g.tpr().map_err(|e| e.to_string())?,
            g.fpr().map_err(|e| e.to_string())?,
        );
        let lhs = p * tpr + (Fraction::one() - p) * fpr;
        ensure(lhs == *g.posterior(), || {
            format!("{c:?}: {lhs} != {}", g.posterior())
        })?;
        ensure(lhs == ratio(c.tp + c.fp, c.total()), || {
            format!("{c:?}: count oracle")
        })?;
        checked += 1;
    }
    Ok(format!(
        "identity exact on all {checked} matrices with both classes present"
    ))
}

const CASE_ROC: &str = "0,0 0.1,0.7 1,1";

fn tradeoff_json(extra: &[&str]) -> Result<TradeoffJson, String> {
    let mut args = vec![
        "tradeoff",
        "--format",
        "json",
        "--roc",
        CASE_ROC,
        "--base-rate0",
        "1/3",
        "--base-rate1",
        "0.1",
    ];
    args.extend(extra);
    let out = fairaudit(&args, None);
    serde_json::from_slice(&out.stdout).map_err(|e| {
        format!(
            "bad JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn criterion_7() -> Check {
    let doc = tradeoff_json(&["--policy", "enforce-parity", "--q", "0.3"])?;
    let want = [("0.1", "0.7", 1.0 / 3.0), ("0.25", "0.75", 0.1)];
    for (point, (fpr, tpr, p)) in doc.points.iter().zip(want) {
        check_number(&format!("group {} FPR", point.group), &point.fpr, &f(fpr))?;
        check_number(&format!("group {} TPR", point.group), &point.tpr, &f(tpr))?;
        let residual = p * point.tpr.decimal + (1.0 - p) * point.fpr.decimal - 0.3;
        ensure(residual.abs() <= 1e-10, || {
            format!("group {} residual {residual}", point.group)
        })?;
    }
    let gap = |m: Measure| doc.report.measure(m).and_then(|x| x.gap.clone());
    let fpr_gap = gap(Measure::PredictiveEquality).ok_or("FPR gap missing")?;
    let tpr_gap = gap(Measure::EqualOpportunity).ok_or("TPR gap missing")?;
    ensure(fpr_gap.decimal != 0.0 && tpr_gap.decimal != 0.0, || {
        "gaps should be nonzero".into()
    })?;
    check_number(
        "parity gap",
        &gap(Measure::StatisticalParity).ok_or("parity gap missing")?,
        &Fraction::zero(),
    )?;
    Ok(format!(
        "points (0.1, 0.7) and (0.25, 0.75); FPR gap {}, TPR gap {}, parity gap 0",
        fpr_gap.exact, tpr_gap.exact
    ))
}

fn criterion_8() -> Check {
    let random = tradeoff_json(&[
        "--policy",
        "random",
        "--q",
        "0.3",
        "--protected-share",
        "0.25",
    ])?;
    for m in &random.report.measures {
        let gap = m
            .gap
            .as_ref()
            .ok_or_else(|| format!("random: {} undefined", m.measure))?;
        ensure(gap.exact == "0", || {
            format!("random: {} gap {}", m.measure, gap.exact)
        })?;
    }
    ensure(random.points.iter().all(|p| p.random), || {
        "random points not flagged".into()
    })?;
    let odds = tradeoff_json(&["--policy", "enforce-odds", "--point", "0.3,0.7"])?;
    let parity = odds
        .report
        .measure(Measure::StatisticalParity)
        .and_then(|m| m.gap.clone())
        .ok_or("parity gap missing")?;
    check_number("enforce_odds parity gap", &parity, &ratio(7, 75))?;
    // Same figure straight from the library.
    let gaps = shared_point_gaps(&PlanePoint::new(f("0.3"), f("0.7")), &f("1/3"), &f("0.1"))
        .map_err(|e| e.to_string())?;
    ensure(gaps.parity_gap == ratio(7, 75), || {
        format!("library gap {}", gaps.parity_gap)
    })?;
    Ok(format!(
        "random(0.3): {} measures with zero gap; enforce_odds(0.3, 0.7): parity gap {}",
        random.report.measures.len(),
        parity.exact
    ))
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for point in RunningPoint::ALL {
        let (records, expected) = generate_running_example(point);
        let path = dir.path().join(format!("{point}.csv"));
        let mut file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
        write_records(&mut file, &records).map_err(|e| e.to_string())?;
        drop(file);
        let read = read_records(
            std::fs::File::open(&path).map_err(|e| e.to_string())?,
            &InputConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let counts = counts_from_records(
            read.iter()
                .map(|r| (r.group.bit() as i64, r.truth as i64, r.prediction as i64)),
        )
        .map_err(|e| e.to_string())?;
        ensure(counts == point.counts(), || {
            format!("{point}: counts {counts:?}")
        })?;
        let audited = json_report(&fairaudit(
            &["audit", "--format", "json", path.to_str().unwrap()],
            None,
        ))?;
        let want = ReportJson::new(
            "audit",
            &full_report(&expected, &Tolerance::default()),
            &Measure::ALL,
            None,
        );
        ensure(audited == want, || {
            format!("{point}: audit of the written file differs from the expected report")
        })?;
    }

    let spec = PlotSpec {
        title: Some("q* = 0.3".into()),
        lines: vec![
            PlotLine::from_line(&performance_line(f("1/3"), f("0.3")).unwrap(), Some(0)),
            PlotLine::from_line(&performance_line(f("0.1"), f("0.3")).unwrap(), Some(1)),
        ],
        points: vec![PlotPoint {
            fpr: f("0.3").into(),
            tpr: f("0.3").into(),
            group: None,
            label: None,
        }],
        ..PlotSpec::default()
    };
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).map_err(|e| e.to_string())?;
    let first = fairaudit(&["plot", spec_path.to_str().unwrap()], None);
    let second = fairaudit(&["plot", spec_path.to_str().unwrap()], None);
    ensure(first.status.success() && !first.stdout.is_empty(), || {
        "plot failed".into()
    })?;
    ensure(first.stdout == second.stdout, || {
        "SVG bytes differ between runs".into()
    })?;
    ensure(first.stdout == render_plane(&spec).into_bytes(), || {
        "CLI and library SVG differ".into()
    })?;

    let mut codes = Vec::new();
    for (point, want) in [("A", 0), ("B", 1)] {
        let csv = fairaudit(&["example", point], None);
        let code = fairaudit(&["audit", "-"], Some(&csv.stdout)).status.code();
        ensure(code == Some(want), || {
            format!("audit {point} exited {code:?}, expected {want}")
        })?;
        codes.push(format!("{point}={want}"));
    }
    let bad = fairaudit(&["audit", "-"], Some(b"group,y,yhat\n0,1,7\n"))
        .status
        .code();
    ensure(bad == Some(2), || format!("malformed input exited {bad:?}"))?;
    Ok(format!(
        "round trip exact for A-C; SVG byte-identical; exit codes {} and 2 on malformed input",
        codes.join(", ")
    ))
}

fn main() {
    let criteria: [(&str, CheckFn); 9] = [
        (
            "running-example tables reproduced by example | audit",
            criterion_1,
        ),
        (
            "verdict matrix for points A-D at tolerance 1e-9",
            criterion_2,
        ),
        (
            "equal-target performance lines cross at (q*, q*)",
            criterion_3,
        ),
        ("shared-point parity gap factorization", criterion_4),
        (
            "representativity zero iff parity zero, totals <= 8",
            criterion_5,
        ),
        ("p*TPR + (1-p)*FPR = q on enumerated matrices", criterion_6),
        ("enforce-parity on piecewise ROC", criterion_7),
        ("random and enforce-odds policies", criterion_8),
        ("round trip, SVG determinism and exit codes", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
