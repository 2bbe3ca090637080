//! Scriptable in-process adapter used to exercise the runner.
//!
//! Behaviour is configured by rules:
//!
//! | rule | effect |
//! |---|---|
//! | `always-pass` | answer `ok` (the default) |
//! | `fail-above=X` | `ValueError` when any training feature exceeds `X` |
//! | `sleep=SECS` or `sleep=ID:SECS` | delay before answering |
//! | `error=ID:TYPE: MESSAGE` | error response for smoke test `ID` |
//! | `exit=ID` | exit with status 3 without answering |
//! | `garbage=ID` | answer with a line that is not JSON |
//!
//! `ID` may be `*` to match every smoke test.

use std::fs;
use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use crate::catalog::{Mode, SmokeTestId};
use crate::datagen::FeatureKind;
use crate::emit::parse_csv;
use crate::runner::{parse_request, AdapterResponse, RequestBody};

#[derive(Debug, Clone, PartialEq)]
pub enum MockRule {
    AlwaysPass,
    FailAbove(f64),
    Sleep {
        test: Option<SmokeTestId>,
        secs: f64,
    },
    Error {
        test: Option<SmokeTestId>,
        error_type: String,
        message: String,
    },
    Exit(Option<SmokeTestId>),
    Garbage(Option<SmokeTestId>),
}

fn parse_target(s: &str) -> Result<Option<SmokeTestId>, String> {
    if s == "*" {
        Ok(None)
    } else {
        s.parse::<SmokeTestId>()
            .map(Some)
            .map_err(|e| e.to_string())
    }
}

fn parse_secs(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("invalid duration `{s}`")),
    }
}

impl FromStr for MockRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (key, arg) = match s.split_once('=') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let need = || arg.ok_or_else(|| format!("rule `{key}` needs a value"));
        match key {
            "always-pass" => Ok(MockRule::AlwaysPass),
            "fail-above" | "fail-above-threshold" => need()?
                .trim()
                .parse()
                .map(MockRule::FailAbove)
                .map_err(|_| format!("invalid threshold in `{s}`")),
            "sleep" => {
                let arg = need()?;
                match arg.split_once(':') {
                    Some((id, secs)) => Ok(MockRule::Sleep {
                        test: parse_target(id)?,
                        secs: parse_secs(secs)?,
                    }),
                    None => Ok(MockRule::Sleep {
                        test: None,
                        secs: parse_secs(arg)?,
                    }),
                }
            }
            "error" => {
                let (id, text) = need()?
                    .split_once(':')
                    .ok_or_else(|| format!("expected error=ID:MESSAGE, got `{s}`"))?;
                let (error_type, message) = match text.split_once(": ") {
                    Some((t, m)) if !t.contains(' ') => (t.to_string(), m.to_string()),
                    _ => ("MockError".to_string(), text.to_string()),
                };
                Ok(MockRule::Error {
                    test: parse_target(id)?,
                    error_type,
                    message,
                })
            }
            "exit" => Ok(MockRule::Exit(parse_target(need()?)?)),
            "garbage" => Ok(MockRule::Garbage(parse_target(need()?)?)),
            _ => Err(format!("unknown mock rule `{s}`")),
        }
    }
}

fn matches(target: Option<SmokeTestId>, id: SmokeTestId) -> bool {
    target.is_none_or(|t| t == id)
}

/// What the mock does with one request.
#[derive(Debug, Clone, PartialEq)]
pub enum MockAction {
    Respond(AdapterResponse),
    Garbage,
    Exit,
}

#[derive(Debug, Clone, Default)]
pub struct MockAdapter {
    rules: Vec<MockRule>,
}

impl MockAdapter {
    pub fn new(rules: Vec<MockRule>) -> Self {
        Self { rules }
    }

    pub fn handle_line(&self, line: &str) -> MockAction {
        let req = match parse_request(line) {
            Ok(r) => r,
            Err(e) => {
                return MockAction::Respond(AdapterResponse::error("protocol", e.to_string()))
            }
        };
        let (smoketest, train_csv) = match req.body {
            RequestBody::Capabilities => {
                return MockAction::Respond(AdapterResponse::capabilities(
                    vec![FeatureKind::Numeric, FeatureKind::Categorical],
                    vec![Mode::Classification, Mode::Clustering],
                ))
            }
            RequestBody::RunTest {
                smoketest, train, ..
            } => (smoketest, train.csv),
        };
        for rule in &self.rules {
            if let MockRule::Sleep { test, secs } = rule {
                if matches(*test, smoketest) {
                    thread::sleep(Duration::from_secs_f64(*secs));
                }
            }
        }
        for rule in &self.rules {
            match rule {
                MockRule::Exit(t) if matches(*t, smoketest) => return MockAction::Exit,
                MockRule::Garbage(t) if matches(*t, smoketest) => return MockAction::Garbage,
                MockRule::Error {
                    test,
                    error_type,
                    message,
                } if matches(*test, smoketest) => {
                    return MockAction::Respond(AdapterResponse::error(error_type, message))
                }
                MockRule::FailAbove(limit) => {
                    let values = fs::read(&train_csv)
                        .map_err(|e| e.to_string())
                        .and_then(|b| parse_csv(&b).map_err(|e| e.to_string()))
                        .and_then(|t| t.feature_values().map_err(|e| e.to_string()));
                    match values {
                        Err(e) => {
                            return MockAction::Respond(AdapterResponse::error(
                                "OSError",
                                format!("{train_csv}: {e}"),
                            ))
                        }
                        Ok(v) => {
                            if let Some(x) = v.iter().find(|x| **x > *limit) {
                                return MockAction::Respond(AdapterResponse::error(
                                    "ValueError",
                                    format!("Input contains a value too large: {x}"),
                                ));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        MockAction::Respond(AdapterResponse::ok())
    }

    /// Serves requests until stdin closes. Returns the process exit code.
    pub fn serve(&self, input: impl BufRead, mut output: impl Write) -> io::Result<i32> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match self.handle_line(&line) {
                MockAction::Respond(r) => output.write_all(r.to_line().as_bytes())?,
                MockAction::Garbage => output.write_all(b"this is not a response\n")?,
                MockAction::Exit => return Ok(3),
            }
            output.flush()?;
        }
        Ok(0)
    }
}
