use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::catalog::{Mode, SmokeTestId};
use crate::datagen::empirical_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Pass,
    ExpectedError,
    FailCrash,
    FailTimeout,
    FailAdapter,
    Skipped,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::Pass,
        Outcome::ExpectedError,
        Outcome::FailCrash,
        Outcome::FailTimeout,
        Outcome::FailAdapter,
        Outcome::Skipped,
    ];

    pub fn is_failure(self) -> bool {
        matches!(
            self,
            Outcome::FailCrash | Outcome::FailTimeout | Outcome::FailAdapter
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::ExpectedError => "EXPECTED_ERROR",
            Outcome::FailCrash => "FAIL_CRASH",
            Outcome::FailTimeout => "FAIL_TIMEOUT",
            Outcome::FailAdapter => "FAIL_ADAPTER",
            Outcome::Skipped => "SKIPPED",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub descriptor: String,
    pub mode: Mode,
    pub smoketest: SmokeTestId,
    pub combination_index: usize,
    pub varied: Option<String>,
    pub outcome: Outcome,
    pub duration_s: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationRow {
    pub smoketest: SmokeTestId,
    pub runs: usize,
    pub p50: f64,
    pub p90: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Every outcome is present, zero counts included.
    pub counts: BTreeMap<Outcome, usize>,
    /// Sorted by smoke test name.
    pub durations: Vec<DurationRow>,
}

impl Summary {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn failures(&self) -> usize {
        Outcome::ALL
            .iter()
            .filter(|o| o.is_failure())
            .map(|o| self.count(*o))
            .sum()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("## Outcomes\n\n| Outcome | Count |\n|---|---:|\n");
        for o in Outcome::ALL {
            out.push_str(&format!("| {o} | {} |\n", self.count(o)));
        }
        out.push_str(&format!("| total | {} |\n", self.total()));
        out.push_str("\n## Durations (seconds)\n\n| Smoke test | Runs | p50 | p90 | max |\n|---|---:|---:|---:|---:|\n");
        for row in &self.durations {
            out.push_str(&format!(
                "| {} | {} | {:.3} | {:.3} | {:.3} |\n",
                row.smoketest, row.runs, row.p50, row.p90, row.max
            ));
        }
        out
    }

    /// One CSV table: outcome rows carry a count, duration rows carry
    /// the run count and quantiles.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,name,count,p50,p90,max\n");
        for o in Outcome::ALL {
            out.push_str(&format!("outcome,{o},{},,,\n", self.count(o)));
        }
        for row in &self.durations {
            out.push_str(&format!(
                "duration,{},{},{},{},{}\n",
                row.smoketest, row.runs, row.p50, row.p90, row.max
            ));
        }
        out
    }
}

pub fn summarize(records: &[TestRecord]) -> Summary {
    let mut counts: BTreeMap<Outcome, usize> = Outcome::ALL.iter().map(|o| (*o, 0)).collect();
    let mut by_test: BTreeMap<&'static str, (SmokeTestId, Vec<f64>)> = BTreeMap::new();
    for r in records {
        *counts.entry(r.outcome).or_default() += 1;
        if r.outcome != Outcome::Skipped {
            by_test
                .entry(r.smoketest.as_str())
                .or_insert_with(|| (r.smoketest, Vec::new()))
                .1
                .push(r.duration_s);
        }
    }
    let durations = by_test
        .into_values()
        .map(|(smoketest, d)| DurationRow {
            smoketest,
            runs: d.len(),
            p50: empirical_quantile(&d, 0.5).unwrap_or(0.0),
            p90: empirical_quantile(&d, 0.9).unwrap_or(0.0),
            max: d.iter().copied().fold(0.0, f64::max),
        })
        .collect();
    Summary { counts, durations }
}

/// Settings echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub adapter: String,
    pub n: usize,
    pub m: usize,
    pub timeout_s: f64,
    pub timeout_overrides: BTreeMap<SmokeTestId, f64>,
    pub parallelism: usize,
    pub memory_limit_mb: Option<u64>,
    pub descriptors: Vec<String>,
    pub tests: Option<Vec<SmokeTestId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub campaign_size: usize,
    pub records: Vec<TestRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn has_failures(&self) -> bool {
        self.records.iter().any(|r| r.outcome.is_failure())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, RunnerError> {
        serde_json::from_str(text).map_err(|e| RunnerError::Report(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = fs::read_to_string(path).map_err(|e| RunnerError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), RunnerError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| RunnerError::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        fs::write(path, self.to_json()).map_err(|e| RunnerError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}
