//! Campaign execution against out-of-process adapters.
//!
//! Every (descriptor, applicable smoke test, combination) triple becomes one
//! `run_test` request. A pool of workers each owns one adapter process; a
//! worker replaces its adapter after a timeout, a malformed response, or the
//! process going away.

mod adapter;
mod protocol;
mod report;

pub use adapter::{AdapterCommand, AdapterProcess, Exchange};
pub use protocol::{
    parse_request, parse_response, AdapterRequest, AdapterResponse, Capabilities, DataRef,
    ProtocolError, RequestBody, Status, Target, PROTOCOL_VERSION,
};
pub use report::{summarize, ConfigEcho, DurationRow, Outcome, Report, Summary, TestRecord};

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use regex::RegexSet;
use thiserror::Error;

use crate::catalog::{list_tests, SmokeTestId, SmokeTestSpec};
use crate::combinatorics::{campaign_size, expand, is_applicable, ParameterCombination};
use crate::descriptor::AlgorithmDescriptor;
use crate::emit::{DatasetStore, EmitError, EmittedDataset};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
/// Allowance on top of the per-test timeout for killing a hung adapter.
pub const SUPERVISION_GRACE: Duration = Duration::from_secs(2);
const CAPABILITIES_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("adapter `{command}` did not start: {reason}")]
    AdapterStart { command: String, reason: String },
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Report(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Terminal event of one test execution.
#[derive(Debug, Clone, PartialEq)]
pub enum TestEvent {
    Response(AdapterResponse),
    /// A line arrived but was not a valid response.
    Malformed(String),
    Timeout,
    /// The adapter closed its output or could not be written to.
    ProcessExited(String),
}

pub fn classify_response(event: &TestEvent, accepted_errors: &RegexSet) -> Outcome {
    match event {
        TestEvent::Response(r) => match r.status {
            Status::Ok => Outcome::Pass,
            Status::Error if accepted_errors.is_match(&r.error_text()) => Outcome::ExpectedError,
            Status::Error => Outcome::FailCrash,
        },
        TestEvent::Timeout => Outcome::FailTimeout,
        TestEvent::Malformed(_) | TestEvent::ProcessExited(_) => Outcome::FailAdapter,
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub timeout: Duration,
    pub timeout_overrides: BTreeMap<SmokeTestId, Duration>,
    pub parallelism: usize,
    pub memory_limit_mb: Option<u64>,
    /// Where datasets are written; a temporary directory when `None`.
    pub work_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: crate::DEFAULT_SEED,
            n: crate::catalog::DEFAULT_INSTANCES,
            m: crate::catalog::DEFAULT_FEATURES,
            timeout: DEFAULT_TIMEOUT,
            timeout_overrides: BTreeMap::new(),
            parallelism: 1,
            memory_limit_mb: None,
            work_dir: None,
        }
    }
}

impl RunConfig {
    pub fn timeout_for(&self, id: SmokeTestId) -> Duration {
        self.timeout_overrides
            .get(&id)
            .copied()
            .unwrap_or(self.timeout)
    }
}

/// One planned execution.
#[derive(Debug, Clone)]
pub struct PlannedTest {
    pub order: usize,
    pub descriptor: usize,
    pub spec: SmokeTestSpec,
    pub combination: ParameterCombination,
}

/// Catalog entries selected for a campaign, for both modes.
pub fn selected_catalog(selection: Option<&[SmokeTestId]>) -> Vec<SmokeTestSpec> {
    [
        crate::catalog::Mode::Classification,
        crate::catalog::Mode::Clustering,
    ]
    .into_iter()
    .flat_map(list_tests)
    .filter(|s| selection.is_none_or(|ids| ids.contains(&s.id)))
    .collect()
}

/// Enumerates the campaign in report order: descriptor, catalog order, combination.
pub fn plan(descriptors: &[AlgorithmDescriptor], catalog: &[SmokeTestSpec]) -> Vec<PlannedTest> {
    let mut out = Vec::new();
    for (di, d) in descriptors.iter().enumerate() {
        let combos = expand(d);
        for spec in catalog.iter().filter(|s| is_applicable(d, s)) {
            for combo in &combos {
                out.push(PlannedTest {
                    order: out.len(),
                    descriptor: di,
                    spec: spec.clone(),
                    combination: combo.clone(),
                });
            }
        }
    }
    out
}

struct Job {
    planned: PlannedTest,
    data: EmittedDataset,
}

fn data_ref(data: &EmittedDataset, test: bool) -> DataRef {
    let (csv, arff) = if test {
        (data.test_csv(), data.test_arff())
    } else {
        (data.train_csv(), data.train_arff())
    };
    DataRef {
        csv: csv.display().to_string(),
        arff: arff.display().to_string(),
        manifest: data.manifest_path.display().to_string(),
    }
}

fn request_for(job: &Job, d: &AlgorithmDescriptor, memory_limit_mb: Option<u64>) -> AdapterRequest {
    let spec = &job.planned.spec;
    AdapterRequest {
        v: PROTOCOL_VERSION,
        body: RequestBody::RunTest {
            mode: spec.mode,
            smoketest: spec.id,
            target: Target {
                package: d.package.clone(),
                class: d.class.clone(),
            },
            params: job.planned.combination.assignment.clone(),
            train: data_ref(&job.data, false),
            test: (spec.mode == crate::catalog::Mode::Classification)
                .then(|| data_ref(&job.data, true)),
            memory_limit_mb,
        },
    }
}

fn query_capabilities(cmd: &AdapterCommand) -> Result<Capabilities, RunnerError> {
    let start_err = |reason: String| RunnerError::AdapterStart {
        command: cmd.display(),
        reason,
    };
    let mut proc = AdapterProcess::spawn(cmd).map_err(|e| start_err(e.to_string()))?;
    let line = AdapterRequest::capabilities().to_line();
    let result = match proc.exchange(&line, CAPABILITIES_TIMEOUT) {
        Exchange::Line(l) => parse_response(&l)
            .and_then(|r| Capabilities::from_response(&r))
            .map_err(|e| start_err(e.to_string())),
        Exchange::Timeout => Err(start_err("no answer to the capabilities request".into())),
        Exchange::Closed => Err(start_err(format!(
            "exited before answering the capabilities request{}",
            tail_suffix(&proc.stderr_tail())
        ))),
        Exchange::SendFailed(e) => Err(start_err(e.to_string())),
    };
    proc.kill();
    result
}

fn tail_suffix(tail: &str) -> String {
    if tail.is_empty() {
        String::new()
    } else {
        format!(" (stderr: {tail})")
    }
}

struct Worker<'a> {
    cmd: &'a AdapterCommand,
    descriptors: &'a [AlgorithmDescriptor],
    accepted: &'a [RegexSet],
    caps: &'a Capabilities,
    config: &'a RunConfig,
    adapter: Option<AdapterProcess>,
}

impl Worker<'_> {
    fn execute(&mut self, job: &Job) -> TestRecord {
        let d = &self.descriptors[job.planned.descriptor];
        let spec = &job.planned.spec;
        let mut record = TestRecord {
            descriptor: d.name.clone(),
            mode: spec.mode,
            smoketest: spec.id,
            combination_index: job.planned.combination.index,
            varied: job.planned.combination.varied.clone(),
            outcome: Outcome::Skipped,
            duration_s: 0.0,
            message: String::new(),
        };
        if !self.caps.supports(spec.mode, spec.feature_kind) {
            record.message = format!(
                "adapter does not support {} {} data",
                spec.mode, spec.feature_kind
            );
            return record;
        }
        if self.adapter.is_none() {
            match AdapterProcess::spawn(self.cmd) {
                Ok(p) => self.adapter = Some(p),
                Err(e) => {
                    record.outcome = Outcome::FailAdapter;
                    record.message = format!("could not restart adapter: {e}");
                    return record;
                }
            }
        }
        let Some(proc) = self.adapter.as_mut() else {
            unreachable!("adapter spawned above");
        };
        let line = request_for(job, d, self.config.memory_limit_mb).to_line();
        let timeout = self.config.timeout_for(spec.id);
        let started = Instant::now();
        let exchange = proc.exchange(&line, timeout);
        record.duration_s = started.elapsed().as_secs_f64();

        let event = match exchange {
            Exchange::Line(l) => match parse_response(&l) {
                Ok(r) => TestEvent::Response(r),
                Err(e) => TestEvent::Malformed(format!("{e}; line: {}", truncate(&l, 200))),
            },
            Exchange::Timeout => TestEvent::Timeout,
            Exchange::Closed => {
                // give the reader a moment to see the exit status
                thread::sleep(Duration::from_millis(20));
                let status = proc
                    .exit_status()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "closed its output".into());
                TestEvent::ProcessExited(format!(
                    "adapter {status}{}",
                    tail_suffix(&proc.stderr_tail())
                ))
            }
            Exchange::SendFailed(e) => TestEvent::ProcessExited(format!(
                "could not send request: {e}{}",
                tail_suffix(&proc.stderr_tail())
            )),
        };
        record.outcome = classify_response(&event, &self.accepted[job.planned.descriptor]);
        record.message = match &event {
            TestEvent::Response(r) if r.status == Status::Ok => String::new(),
            TestEvent::Response(r) => match &r.details {
                Some(details) => format!("{}\n{details}", r.error_text()),
                None => r.error_text(),
            },
            TestEvent::Malformed(m) | TestEvent::ProcessExited(m) => m.clone(),
            TestEvent::Timeout => format!("no response within {:.3}s", timeout.as_secs_f64()),
        };
        if !matches!(event, TestEvent::Response(_)) {
            if let Some(mut p) = self.adapter.take() {
                p.kill();
            }
        }
        record
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

/// Runs the campaign and returns the report with records in plan order.
///
/// Fails only when datasets cannot be written or the adapter does not answer
/// its initial capabilities request; individual test failures are recorded.
pub fn run_suite(
    descriptors: &[AlgorithmDescriptor],
    selection: Option<&[SmokeTestId]>,
    adapter: &AdapterCommand,
    config: &RunConfig,
) -> Result<Report, RunnerError> {
    if config.n == 0 || config.m == 0 {
        return Err(RunnerError::Config("n and m must be at least 1".into()));
    }
    let catalog = selected_catalog(selection);
    let planned = plan(descriptors, &catalog);

    let temp;
    let root = match &config.work_dir {
        Some(dir) => dir.clone(),
        None => {
            temp = tempfile::tempdir().map_err(|e| RunnerError::Io {
                path: std::env::temp_dir(),
                source: e,
            })?;
            temp.path().to_path_buf()
        }
    };
    let store = DatasetStore::new(root, config.seed, config.n, config.m);
    let mut emitted: BTreeMap<(crate::catalog::Mode, SmokeTestId), EmittedDataset> =
        BTreeMap::new();
    let mut jobs = VecDeque::with_capacity(planned.len());
    for p in planned {
        let key = (p.spec.mode, p.spec.id);
        let data = match emitted.entry(key) {
            std::collections::btree_map::Entry::Occupied(e) => e.get().clone(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(store.ensure(&p.spec)?).clone()
            }
        };
        jobs.push_back(Job { data, planned: p });
    }

    let caps = query_capabilities(adapter)?;
    let accepted: Vec<RegexSet> = descriptors
        .iter()
        .map(AlgorithmDescriptor::accepted_error_set)
        .collect();
    let workers = config.parallelism.max(1).min(jobs.len().max(1));
    let queue = Mutex::new(jobs);
    let results: Mutex<Vec<(usize, TestRecord)>> = Mutex::new(Vec::new());

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut worker = Worker {
                    cmd: adapter,
                    descriptors,
                    accepted: &accepted,
                    caps: &caps,
                    config,
                    adapter: None,
                };
                loop {
                    let job = match queue.lock() {
                        Ok(mut q) => q.pop_front(),
                        Err(_) => None,
                    };
                    let Some(job) = job else { break };
                    let record = worker.execute(&job);
                    if let Ok(mut r) = results.lock() {
                        r.push((job.planned.order, record));
                    }
                }
            });
        }
    });

    let mut results = results.into_inner().unwrap_or_default();
    results.sort_by_key(|(order, _)| *order);
    let records: Vec<TestRecord> = results.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&records);
    Ok(Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config: ConfigEcho {
            adapter: adapter.display(),
            n: config.n,
            m: config.m,
            timeout_s: config.timeout.as_secs_f64(),
            timeout_overrides: config
                .timeout_overrides
                .iter()
                .map(|(k, v)| (*k, v.as_secs_f64()))
                .collect(),
            parallelism: workers,
            memory_limit_mb: config.memory_limit_mb,
            descriptors: descriptors.iter().map(|d| d.name.clone()).collect(),
            tests: selection.map(<[SmokeTestId]>::to_vec),
        },
        campaign_size: campaign_size(descriptors, &catalog),
        records,
        summary,
    })
}
