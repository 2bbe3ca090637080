//! Acceptance criteria, one line of output each.
//!
//! Every criterion runs even if an earlier one fails; the test fails at the
//! end if any criterion did. Lines go straight to stderr so they show up
//! without `--nocapture`.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{arb_descriptor, descriptor, load_fixture};
use mlsmoke::catalog::{
    find_test, generate_dataset, list_classification_tests, LabelStrategy, Mode, PartitionRule,
    SmokeTestId,
};
use mlsmoke::combinatorics::{count_exhaustive, expand};
use mlsmoke::datagen::{sample_gamma, FeatureColumn, FeatureKind, GammaSpec, Label, RandomStream};
use mlsmoke::descriptor::{ParamValue, ParameterKind, ParameterSpec};
use mlsmoke::runner::{run_suite, AdapterCommand, Outcome, RunConfig};
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const BIN: &str = env!("CARGO_BIN_EXE_mlsmoke");

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Result<String, String>,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn j48_expansion() -> Result<String, String> {
    let d = load_fixture("j48_unpruned.yaml");
    let n = expand(&d).len();
    ensure(n == 6, format!("expected 6 combinations, got {n}"))?;
    Ok(format!("{} -> {n} combinations", d.name))
}

fn exhaustive_count() -> Result<String, String> {
    let flag = |i: usize| ParameterSpec {
        name: format!("f{i}"),
        kind: ParameterKind::Flag,
        default: ParamValue::Flag(false),
    };
    let triple = |name: &str| ParameterSpec {
        name: name.into(),
        kind: ParameterKind::Values(vec![
            ParamValue::Float(0.05),
            ParamValue::Float(0.5),
            ParamValue::Float(0.95),
        ]),
        default: ParamValue::Float(0.25),
    };
    let mut params: Vec<_> = (0..8).map(flag).collect();
    params.push(triple("C"));
    params.push(triple("N"));
    let d = descriptor("grid", Mode::Classification, params);
    let n = count_exhaustive(&d);
    ensure(n == 2304, format!("expected 2304, got {n}"))?;
    Ok(format!("8 flags x 2 triples -> {n}"))
}

fn linearity() -> Result<String, String> {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let max_params = std::cell::Cell::new(0usize);
    runner
        .run(&arb_descriptor(), |d| {
            max_params.set(max_params.get().max(d.parameters.len()));
            if d.parameters.len() > 20 || d.parameters.iter().any(|p| p.candidate_count() > 5) {
                return Err(TestCaseError::reject("outside the generator bounds"));
            }
            let combos = expand(&d);
            let non_default: usize = d
                .parameters
                .iter()
                .map(|p| {
                    p.candidate_values()
                        .iter()
                        .filter(|v| **v != p.default)
                        .count()
                })
                .sum();
            if combos.len() != 1 + non_default {
                return Err(TestCaseError::fail(format!(
                    "{} != 1 + {non_default}",
                    combos.len()
                )));
            }
            let base = &combos[0].assignment;
            for c in &combos[1..] {
                if c.assignment.differing_keys(base).len() != 1 {
                    return Err(TestCaseError::fail(format!(
                        "combination {} is not one-hot",
                        c.index
                    )));
                }
            }
            for p in &d.parameters {
                let used: HashSet<String> = combos
                    .iter()
                    .map(|c| format!("{:?}", c.assignment.get(&p.name)))
                    .collect();
                for v in p.candidate_values() {
                    if !used.contains(&format!("{:?}", Some(&v))) {
                        return Err(TestCaseError::fail(format!("{}={v} never used", p.name)));
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("1000 cases, up to {} parameters", max_params.get()))
}

fn rectangle_balance() -> Result<String, String> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for id in [
        SmokeTestId::UNIFORM,
        SmokeTestId::LEFTSKEW,
        SmokeTestId::RIGHTSKEW,
    ] {
        let spec = find_test(Mode::Classification, id).unwrap();
        for m in [1, 2, 5] {
            for seed in 1..=5 {
                let d = generate_dataset(&spec, seed, 10_000, m).map_err(|e| e.to_string())?;
                let frac = d
                    .train_clean_labels
                    .as_ref()
                    .unwrap()
                    .fraction(Label::Class1);
                lo = lo.min(frac);
                hi = hi.max(frac);
                ensure(
                    (0.45..=0.55).contains(&frac),
                    format!("{id} m={m} seed={seed}: class_1 fraction {frac}"),
                )?;
            }
        }
    }
    Ok(format!("45 runs, class_1 fraction in [{lo:.4}, {hi:.4}]"))
}

fn gamma_moments() -> Result<String, String> {
    let spec = GammaSpec::new(0.1, 4.0).map_err(|e| e.to_string())?;
    let mut s = RandomStream::new(42).substream("RIGHTSKEW");
    let FeatureColumn::Numeric(v) =
        sample_gamma(&mut s, 100_000, spec).map_err(|e| e.to_string())?
    else {
        return Err("gamma sampler returned a categorical column".into());
    };
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    ensure((mean - 0.4).abs() <= 0.4 * 0.05, format!("mean {mean}"))?;
    ensure((var - 1.6).abs() <= 1.6 * 0.25, format!("variance {var}"))?;
    Ok(format!("mean {mean:.4}, variance {var:.4}"))
}

fn numeric(d: &mlsmoke::catalog::Dataset) -> Vec<&[f64]> {
    d.train
        .features
        .iter()
        .filter_map(|c| c.as_numeric())
        .collect()
}

fn catalog_structure() -> Result<String, String> {
    use FeatureKind::{Categorical as C, Numeric as N};
    use LabelStrategy::*;
    use SmokeTestId::*;
    type Row = (SmokeTestId, FeatureKind, LabelStrategy, Option<(f64, f64)>);
    let expected: [Row; 22] = [
        (UNIFORM, N, Rectangle, Some((0.0, 1.0))),
        (CATEGORICAL, C, Rectangle, None),
        (MINFLOAT, N, Rectangle, Some((0.0, 1e-6))),
        (VERYSMALL, N, Rectangle, Some((0.0, 1e-10))),
        (MINDOUBLE, N, Rectangle, Some((0.0, 1e-15))),
        (MAXFLOAT, N, Rectangle, Some((0.0, 3.4e38))),
        (VERYLARGE, N, Rectangle, Some((0.0, 1e100))),
        (MAXDOUBLE, N, Rectangle, Some((0.0, 1.7e308))),
        (SPLIT, N, Random, Some((0.0, 1e11))),
        (LEFTSKEW, N, Rectangle, Some((f64::NEG_INFINITY, 0.0))),
        (RIGHTSKEW, N, Rectangle, Some((0.0, f64::INFINITY))),
        (ONECLASS, N, OneClass, Some((0.0, 1.0))),
        (BIAS, N, Bias, Some((0.0, 1.0))),
        (OUTLIER, N, Rectangle, Some((0.0, 1e10))),
        (ZEROS, N, Rectangle, Some((0.0, 0.0))),
        (RANDNUM, N, Random, Some((0.0, 1.0))),
        (RANDCAT, C, Random, None),
        (DISJNUM, N, Rectangle, Some((0.0, 1.0))),
        (DISJCAT, C, Rectangle, None),
        (MANYCATS, C, Rectangle, None),
        (STARVEDMANY, C, Random, None),
        (STARVEDBINARY, C, Rectangle, None),
    ];
    let specs = list_classification_tests();
    ensure(
        specs.len() == 22,
        format!("{} classification specs", specs.len()),
    )?;
    for (spec, (id, kind, labels, range)) in specs.iter().zip(expected) {
        ensure(
            spec.id == id,
            format!("expected {id} in catalog order, found {}", spec.id),
        )?;
        ensure(
            spec.feature_kind == kind,
            format!("{id}: feature kind {}", spec.feature_kind),
        )?;
        ensure(
            spec.label_strategy == Some(labels),
            format!("{id}: label strategy"),
        )?;
        let d = generate_dataset(spec, 3, 500, 3).map_err(|e| e.to_string())?;
        if let Some((lo, hi)) = range {
            for col in numeric(&d) {
                ensure(
                    col.iter().all(|v| *v >= lo && *v <= hi),
                    format!("{id}: value outside [{lo}, {hi}]"),
                )?;
            }
        }
    }

    let zeros =
        generate_dataset(&find_test(Mode::Classification, ZEROS).unwrap(), 1, 100, 4).unwrap();
    ensure(
        numeric(&zeros).iter().all(|c| c.iter().all(|v| *v == 0.0)),
        "ZEROS has a non-zero value",
    )?;

    let outlier = generate_dataset(
        &find_test(Mode::Classification, OUTLIER).unwrap(),
        1,
        100,
        4,
    )
    .unwrap();
    let cols = numeric(&outlier);
    let extreme = (0..100)
        .filter(|i| cols.iter().all(|c| c[*i] == 1e10))
        .count();
    let small = (0..100)
        .filter(|i| cols.iter().all(|c| c[*i] < 1e-5))
        .count();
    ensure(
        extreme == 1 && small == 99,
        format!("OUTLIER: {extreme} extreme rows, {small} small rows"),
    )?;

    let disj = generate_dataset(
        &find_test(Mode::Classification, DISJNUM).unwrap(),
        1,
        100,
        3,
    )
    .unwrap();
    ensure(
        disj.meta.test_partition_rule == Some(PartitionRule::Distinct),
        "DISJNUM test partition is not distinct",
    )?;
    let train_max = numeric(&disj)
        .iter()
        .flat_map(|c| c.iter())
        .fold(f64::MIN, |a, b| a.max(*b));
    let test_min = disj
        .test
        .as_ref()
        .unwrap()
        .features
        .iter()
        .flat_map(|c| c.as_numeric().unwrap().iter())
        .fold(f64::MAX, |a, b| a.min(*b));
    ensure(
        train_max <= 1.0 && test_min >= 100.0,
        format!("DISJNUM train max {train_max}, test min {test_min}"),
    )?;

    let starved = generate_dataset(
        &find_test(Mode::Classification, STARVEDBINARY).unwrap(),
        1,
        50,
        4,
    )
    .unwrap();
    for (j, col) in starved.train.features.iter().enumerate() {
        let FeatureColumn::Categorical { values, declared } = col else {
            return Err("STARVEDBINARY column is not categorical".into());
        };
        let observed: HashSet<u32> = values.iter().copied().collect();
        ensure(
            declared == &[0, 1],
            format!("STARVEDBINARY declared {declared:?}"),
        )?;
        ensure(
            observed.len() == 1 && observed.contains(&(j as u32 % 2)),
            format!("STARVEDBINARY feature {j} observes {observed:?}"),
        )?;
    }
    Ok("22 specs in order; ZEROS, OUTLIER, DISJNUM, STARVEDBINARY spot checks".into())
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if path.is_dir() {
            out.extend(
                files(&path)
                    .into_iter()
                    .map(|(k, v)| (format!("{name}/{k}"), v)),
            );
        } else {
            out.insert(name, fs::read(&path).unwrap());
        }
    }
    out
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(BIN)
            .args(["generate-data", "--seed", "42", "--out"])
            .arg(&dir)
            .env_remove("MLSMOKE_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            status.status.success(),
            String::from_utf8_lossy(&status.stderr),
        )?;
        outputs.push(files(&dir));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure(a.keys().eq(b.keys()), "file sets differ")?;
    for (name, bytes) in a {
        ensure(bytes == &b[name], format!("{name} differs"))?;
    }
    let csv = a.keys().filter(|k| k.ends_with(".csv")).count();
    let arff = a.keys().filter(|k| k.ends_with(".arff")).count();
    let manifests = a.keys().filter(|k| k.ends_with("manifest.json")).count();
    ensure(manifests == 22, format!("{manifests} manifests"))?;
    Ok(format!(
        "{csv} csv, {arff} arff, {manifests} manifests byte-identical"
    ))
}

fn mock(rules: &[&str]) -> AdapterCommand {
    let mut args = vec!["mock-adapter".to_string()];
    for r in rules {
        args.extend(["--rule".to_string(), (*r).to_string()]);
    }
    AdapterCommand::new(BIN, args)
}

fn outcomes(report: &mlsmoke::runner::Report) -> BTreeMap<SmokeTestId, HashSet<Outcome>> {
    let mut out: BTreeMap<SmokeTestId, HashSet<Outcome>> = BTreeMap::new();
    for r in &report.records {
        out.entry(r.smoketest).or_default().insert(r.outcome);
    }
    out
}

fn fault_injection() -> Result<String, String> {
    use SmokeTestId::*;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = load_fixture("j48_unpruned.yaml");
    let config = RunConfig {
        work_dir: Some(tmp.path().to_path_buf()),
        ..RunConfig::default()
    };

    let report = run_suite(
        std::slice::from_ref(&d),
        Some(&[UNIFORM, VERYLARGE, MAXDOUBLE]),
        &mock(&["fail-above=1e200"]),
        &config,
    )
    .map_err(|e| e.to_string())?;
    let got = outcomes(&report);
    ensure(
        report.records.len() == 18,
        format!("{} records", report.records.len()),
    )?;
    ensure(
        got[&MAXDOUBLE] == HashSet::from([Outcome::FailCrash]),
        format!("MAXDOUBLE {:?}", got[&MAXDOUBLE]),
    )?;
    for id in [UNIFORM, VERYLARGE] {
        ensure(
            got[&id] == HashSet::from([Outcome::Pass]),
            format!("{id} {:?}", got[&id]),
        )?;
    }

    let timed = RunConfig {
        timeout: Duration::from_millis(500),
        ..config.clone()
    };
    let report = run_suite(
        std::slice::from_ref(&d),
        Some(&[UNIFORM, RANDCAT, ZEROS]),
        &mock(&["sleep=RANDCAT:30"]),
        &timed,
    )
    .map_err(|e| e.to_string())?;
    let got = outcomes(&report);
    ensure(
        report.records.len() == 18,
        format!("{} records after timeouts", report.records.len()),
    )?;
    ensure(
        got[&RANDCAT] == HashSet::from([Outcome::FailTimeout]),
        format!("RANDCAT {:?}", got[&RANDCAT]),
    )?;
    ensure(
        got[&ZEROS] == HashSet::from([Outcome::Pass]),
        "tests after the timeout did not pass",
    )?;

    let mut accepting = d.clone();
    accepting.accepted_errors = vec!["more than 1 sample".into()];
    let report = run_suite(
        &[accepting],
        Some(&[BIAS, UNIFORM]),
        &mock(&["error=BIAS:ValueError: requires more than 1 sample per class"]),
        &config,
    )
    .map_err(|e| e.to_string())?;
    let got = outcomes(&report);
    ensure(
        got[&BIAS] == HashSet::from([Outcome::ExpectedError]),
        format!("BIAS {:?}", got[&BIAS]),
    )?;
    ensure(
        got[&UNIFORM] == HashSet::from([Outcome::Pass]),
        format!("UNIFORM {:?}", got[&UNIFORM]),
    )?;
    Ok("threshold, timeout and accepted-error campaigns classified exactly".into())
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            name: "j48-expansion-count",
            budget: Duration::from_secs(1),
            check: j48_expansion,
        },
        Criterion {
            name: "exhaustive-count",
            budget: Duration::from_secs(1),
            check: exhaustive_count,
        },
        Criterion {
            name: "linearity-property",
            budget: Duration::from_secs(10),
            check: linearity,
        },
        Criterion {
            name: "rectangle-balance",
            budget: Duration::from_secs(30),
            check: rectangle_balance,
        },
        Criterion {
            name: "gamma-moments",
            budget: Duration::from_secs(10),
            check: gamma_moments,
        },
        Criterion {
            name: "catalog-structure",
            budget: Duration::from_secs(5),
            check: catalog_structure,
        },
        Criterion {
            name: "generate-data-determinism",
            budget: Duration::from_secs(5),
            check: determinism,
        },
        Criterion {
            name: "mock-fault-injection",
            budget: Duration::from_secs(60),
            check: fault_injection,
        },
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    let _ = writeln!(err);
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, budget {:?}", c.budget))
            }
        });
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        let _ = writeln!(
            err,
            "acceptance {tag} {:<26} {:>9.3?}  {detail}",
            c.name, elapsed
        );
        if result.is_err() {
            failed.push(c.name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
