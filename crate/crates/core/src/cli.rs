//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when a campaign recorded failures, 2 on usage
//! or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::catalog::{
    generate_dataset, list_tests, Mode, SmokeTestId, SmokeTestSpec, DEFAULT_FEATURES,
    DEFAULT_INSTANCES,
};
use crate::combinatorics::{count_exhaustive, expand, ParameterCombination};
use crate::descriptor::{parse_descriptor, AlgorithmDescriptor};
use crate::emit::{emit_test_suite, write_dataset, DatasetStore, Template};
use crate::mock::{MockAdapter, MockRule};
use crate::runner::{run_suite, AdapterCommand, Report, RunConfig, DEFAULT_TIMEOUT};
use crate::DEFAULT_SEED;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mlsmoke",
    version,
    about = "Combinatorial smoke tests for machine-learning libraries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write smoke-test datasets (CSV, ARFF and manifest) to a directory.
    GenerateData(GenerateArgs),
    /// List the hyperparameter combinations of descriptors.
    Expand(ExpandArgs),
    /// Render test-suite sources from a template.
    EmitSuite(EmitArgs),
    /// Execute a campaign against an adapter and write a report.
    Run(RunArgs),
    /// Summarize an existing report.
    Report(ReportArgs),
    /// Print the smoke-test catalog.
    ListTests(ListArgs),
    /// Serve the wire protocol with scripted behaviour.
    #[command(hide = true)]
    MockAdapter(MockArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Root seed for all generated data.
    #[arg(long, env = "MLSMOKE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of instances.
    #[arg(short = 'n', long = "instances", default_value_t = DEFAULT_INSTANCES)]
    pub n: usize,
    /// Number of features.
    #[arg(short = 'm', long = "features", default_value_t = DEFAULT_FEATURES)]
    pub m: usize,
    /// Restrict to these smoke tests (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub tests: Option<Vec<SmokeTestId>>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "classification")]
    pub mode: Mode,
    /// Output directory; each smoke test gets a subdirectory.
    #[arg(long, short = 'o', default_value = "smoke-data")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long = "descriptor", short = 'd', required = true)]
    pub descriptors: Vec<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long = "descriptor", short = 'd', required = true)]
    pub descriptors: Vec<PathBuf>,
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Dataset directory; defaults to `<out-dir>/data`.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Suffix of generated files.
    #[arg(long, default_value = ".py")]
    pub extension: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long = "descriptor", short = 'd', required = true)]
    pub descriptors: Vec<PathBuf>,
    /// Adapter command line, split like a shell would.
    #[arg(
        long,
        conflicts_with = "mock_adapter",
        required_unless_present = "mock_adapter"
    )]
    pub adapter: Option<String>,
    /// Use the built-in mock adapter with these rules.
    #[arg(long = "mock-adapter", value_name = "RULE")]
    pub mock_adapter: Vec<MockRule>,
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
    /// Per-test timeout in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
    pub timeout: f64,
    /// Timeout for one smoke test, as `ID=SECONDS`.
    #[arg(long = "timeout-override", value_parser = parse_override)]
    pub timeout_overrides: Vec<(SmokeTestId, f64)>,
    #[arg(long, env = "MLSMOKE_PARALLELISM", default_value_t = 1)]
    pub parallelism: usize,
    /// Advisory memory cap passed to the adapter.
    #[arg(long)]
    pub memory_limit_mb: Option<u64>,
    /// Keep datasets here instead of a temporary directory.
    #[arg(long)]
    pub work_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SummaryFormat {
    Markdown,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
    #[arg(long, value_enum, default_value_t = SummaryFormat::Markdown)]
    pub format: SummaryFormat,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Args)]
pub struct MockArgs {
    #[arg(long = "rule")]
    pub rules: Vec<MockRule>,
}

fn parse_override(s: &str) -> Result<(SmokeTestId, f64), String> {
    let (id, secs) = s
        .split_once('=')
        .ok_or_else(|| format!("expected ID=SECONDS, got `{s}`"))?;
    let id: SmokeTestId = id
        .parse()
        .map_err(|e: crate::catalog::CatalogError| e.to_string())?;
    let secs: f64 = secs
        .parse()
        .map_err(|_| format!("invalid seconds in `{s}`"))?;
    if !(secs.is_finite() && secs > 0.0) {
        return Err(format!("timeout must be positive in `{s}`"));
    }
    Ok((id, secs))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::GenerateData(a) => generate_data(&a),
        Command::Expand(a) => cmd_expand(&a),
        Command::EmitSuite(a) => emit_suite(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Report(a) => cmd_report(&a),
        Command::ListTests(a) => list(&a),
        Command::MockAdapter(a) => {
            let stdin = io::stdin();
            let code = MockAdapter::new(a.rules).serve(stdin.lock(), io::stdout().lock())?;
            Ok(code)
        }
    }
}

fn load_descriptors(paths: &[PathBuf]) -> Result<Vec<AlgorithmDescriptor>> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_descriptor(&text).with_context(|| format!("in {}", p.display()))
        })
        .collect()
}

fn select(mode: Mode, tests: Option<&[SmokeTestId]>) -> Result<Vec<SmokeTestSpec>> {
    let all = list_tests(mode);
    let Some(ids) = tests else { return Ok(all) };
    for id in ids {
        if !all.iter().any(|s| s.id == *id) {
            bail!("{id} is not a {mode} smoke test");
        }
    }
    Ok(all.into_iter().filter(|s| ids.contains(&s.id)).collect())
}

fn generate_data(a: &GenerateArgs) -> Result<i32> {
    let specs = select(a.mode, a.data.tests.as_deref())?;
    for spec in &specs {
        let dataset = generate_dataset(spec, a.data.seed, a.data.n, a.data.m)?;
        let dir = a.out.join(spec.id.as_str());
        write_dataset(&dataset, &dir)?;
    }
    println!("wrote {} dataset(s) to {}", specs.len(), a.out.display());
    Ok(EXIT_OK)
}

/// Machine-readable output of `expand --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandOutput {
    pub descriptors: Vec<ExpandedDescriptor>,
    pub total_linear: usize,
    pub total_exhaustive: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedDescriptor {
    pub name: String,
    pub linear: usize,
    pub exhaustive: u128,
    pub combinations: Vec<ParameterCombination>,
}

pub fn expand_descriptors(descriptors: &[AlgorithmDescriptor]) -> ExpandOutput {
    let list: Vec<ExpandedDescriptor> = descriptors
        .iter()
        .map(|d| {
            let combinations = expand(d);
            ExpandedDescriptor {
                name: d.name.clone(),
                linear: combinations.len(),
                exhaustive: count_exhaustive(d),
                combinations,
            }
        })
        .collect();
    ExpandOutput {
        total_linear: list.iter().map(|d| d.linear).sum(),
        total_exhaustive: list
            .iter()
            .fold(0u128, |acc, d| acc.saturating_add(d.exhaustive)),
        descriptors: list,
    }
}

fn cmd_expand(a: &ExpandArgs) -> Result<i32> {
    let out = expand_descriptors(&load_descriptors(&a.descriptors)?);
    let mut stdout = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut stdout, &out)?;
        writeln!(stdout)?;
        return Ok(EXIT_OK);
    }
    for d in &out.descriptors {
        writeln!(stdout, "{}", d.name)?;
        for c in &d.combinations {
            let params: Vec<String> = c
                .assignment
                .0
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            writeln!(
                stdout,
                "  {:>3}  {:<10} {}",
                c.index,
                c.varied.as_deref().unwrap_or("defaults"),
                params.join(" ")
            )?;
        }
        writeln!(stdout, "  combinations: {}", d.linear)?;
        writeln!(stdout, "  exhaustive: {}", d.exhaustive)?;
    }
    writeln!(stdout, "total combinations: {}", out.total_linear)?;
    writeln!(stdout, "total exhaustive: {}", out.total_exhaustive)?;
    Ok(EXIT_OK)
}

fn emit_suite(a: &EmitArgs) -> Result<i32> {
    let descriptors = load_descriptors(&a.descriptors)?;
    let source = fs::read_to_string(&a.template)
        .with_context(|| format!("reading {}", a.template.display()))?;
    let template =
        Template::parse(&source).with_context(|| format!("in {}", a.template.display()))?;
    let data_dir = a.data_dir.clone().unwrap_or_else(|| a.out_dir.join("data"));
    let store = DatasetStore::new(data_dir, a.data.seed, a.data.n, a.data.m);
    for d in &descriptors {
        let tests: Vec<SmokeTestSpec> = list_tests(d.mode)
            .into_iter()
            .filter(|s| a.data.tests.as_ref().is_none_or(|ids| ids.contains(&s.id)))
            .collect();
        let suite = emit_test_suite(d, &tests, &template, &store, &a.out_dir, &a.extension)?;
        println!("{}: {} test(s)", suite.path.display(), suite.stanzas);
    }
    Ok(EXIT_OK)
}

/// Re-invokes this executable as its own adapter.
fn mock_command(rules: &[MockRule]) -> Result<AdapterCommand> {
    let exe = std::env::current_exe().context("locating the mlsmoke executable")?;
    let mut args = vec!["mock-adapter".to_string()];
    for r in rules {
        args.push("--rule".into());
        args.push(rule_to_arg(r));
    }
    Ok(AdapterCommand::new(exe.display().to_string(), args))
}

fn cmd_run(a: &RunArgs) -> Result<i32> {
    let descriptors = load_descriptors(&a.descriptors)?;
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        bail!("--timeout must be a positive number of seconds");
    }
    let adapter = match &a.adapter {
        Some(line) => AdapterCommand::parse(line).map_err(|e| anyhow!("--adapter: {e}"))?,
        None => mock_command(&a.mock_adapter)?,
    };
    let config = RunConfig {
        seed: a.data.seed,
        n: a.data.n,
        m: a.data.m,
        timeout: Duration::from_secs_f64(a.timeout),
        timeout_overrides: a
            .timeout_overrides
            .iter()
            .map(|(id, s)| (*id, Duration::from_secs_f64(*s)))
            .collect(),
        parallelism: a.parallelism.max(1),
        memory_limit_mb: a.memory_limit_mb,
        work_dir: a.work_dir.clone(),
    };
    let report = run_suite(&descriptors, a.data.tests.as_deref(), &adapter, &config)?;
    report.save(&a.report)?;
    print!("{}", report.summary.to_markdown());
    println!(
        "\n{} record(s), {} failure(s); report written to {}",
        report.records.len(),
        report.summary.failures(),
        a.report.display()
    );
    Ok(if report.has_failures() {
        EXIT_FAILURES
    } else {
        EXIT_OK
    })
}

fn rule_to_arg(rule: &MockRule) -> String {
    let target = |t: &Option<SmokeTestId>| t.map_or("*".to_string(), |id| id.to_string());
    match rule {
        MockRule::AlwaysPass => "always-pass".into(),
        MockRule::FailAbove(x) => format!("fail-above={x:e}"),
        MockRule::Sleep { test, secs } => format!("sleep={}:{secs}", target(test)),
        MockRule::Error {
            test,
            error_type,
            message,
        } => format!("error={}:{error_type}: {message}", target(test)),
        MockRule::Exit(t) => format!("exit={}", target(t)),
        MockRule::Garbage(t) => format!("garbage={}", target(t)),
    }
}

fn cmd_report(a: &ReportArgs) -> Result<i32> {
    let report = Report::load(&a.report)?;
    let text = match a.format {
        SummaryFormat::Markdown => report.summary.to_markdown(),
        SummaryFormat::Csv => report.summary.to_csv(),
    };
    match &a.output {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn list(a: &ListArgs) -> Result<i32> {
    let modes = match a.mode {
        Some(m) => vec![m],
        None => vec![Mode::Classification, Mode::Clustering],
    };
    let mut stdout = io::stdout().lock();
    for mode in modes {
        for s in list_tests(mode) {
            writeln!(
                stdout,
                "{:<14} {:<14} {:<11} {}",
                s.id, mode, s.feature_kind, s.description
            )?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_args_round_trip() {
        for raw in [
            "always-pass",
            "fail-above=1e200",
            "sleep=RANDCAT:2",
            "sleep=0.5",
            "error=BIAS:ValueError: one class",
            "exit=*",
            "garbage=UNIFORM",
        ] {
            let rule: MockRule = raw.parse().unwrap();
            assert_eq!(
                rule_to_arg(&rule).parse::<MockRule>().unwrap(),
                rule,
                "{raw}"
            );
        }
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override("manycats=600").unwrap(),
            (SmokeTestId::MANYCATS, 600.0)
        );
        assert!(parse_override("MANYCATS").is_err());
        assert!(parse_override("MANYCATS=0").is_err());
        assert!(parse_override("NOPE=1").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["mlsmoke", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            run(["mlsmoke", "run", "--descriptor", "x.yaml"]),
            EXIT_USAGE
        );
        assert_eq!(run(["mlsmoke", "--help"]), EXIT_OK);
    }
}
