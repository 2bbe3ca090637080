//! Supervision of one adapter child process.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

const STDERR_TAIL_BYTES: usize = 4096;

/// Program and arguments used to launch an adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl AdapterCommand {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }

    /// Splits a shell-style command line.
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut words = shell_words::split(line).map_err(|e| e.to_string())?;
        if words.is_empty() {
            return Err("empty adapter command".into());
        }
        let program = words.remove(0);
        Ok(Self {
            program,
            args: words,
        })
    }

    pub fn display(&self) -> String {
        let mut all = vec![self.program.clone()];
        all.extend(self.args.iter().cloned());
        shell_words::join(all)
    }
}

/// Terminal event of one request/response exchange.
#[derive(Debug)]
pub enum Exchange {
    Line(String),
    Timeout,
    /// Stdout closed before a response arrived.
    Closed,
    SendFailed(io::Error),
}

pub struct AdapterProcess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<io::Result<String>>,
    stderr_tail: Arc<Mutex<Vec<u8>>>,
}

impl AdapterProcess {
    pub fn spawn(cmd: &AdapterCommand) -> io::Result<Self> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| io::Error::other("adapter stdout unavailable"))?;
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let stderr_tail = Arc::new(Mutex::new(Vec::new()));
        if let Some(mut stderr) = child.stderr.take() {
            let tail = Arc::clone(&stderr_tail);
            thread::spawn(move || {
                let mut buf = [0u8; 1024];
                while let Ok(n) = stderr.read(&mut buf) {
                    if n == 0 {
                        break;
                    }
                    if let Ok(mut t) = tail.lock() {
                        t.extend_from_slice(&buf[..n]);
                        let excess = t.len().saturating_sub(STDERR_TAIL_BYTES);
                        t.drain(..excess);
                    }
                }
            });
        }
        Ok(Self {
            child,
            stdin,
            lines,
            stderr_tail,
        })
    }

    /// Sends one line and waits up to `timeout` for one line back.
    pub fn exchange(&mut self, line: &str, timeout: Duration) -> Exchange {
        let Some(stdin) = self.stdin.as_mut() else {
            return Exchange::SendFailed(io::Error::other("adapter stdin closed"));
        };
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()) {
            return Exchange::SendFailed(e);
        }
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Exchange::Line(line),
            Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => Exchange::Closed,
            Err(RecvTimeoutError::Timeout) => Exchange::Timeout,
        }
    }

    /// Last few KiB the adapter wrote to stderr.
    pub fn stderr_tail(&self) -> String {
        self.stderr_tail
            .lock()
            .map(|t| String::from_utf8_lossy(&t).trim().to_string())
            .unwrap_or_default()
    }

    pub fn exit_status(&mut self) -> Option<std::process::ExitStatus> {
        self.child.try_wait().ok().flatten()
    }

    pub fn kill(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for AdapterProcess {
    fn drop(&mut self) {
        self.kill();
    }
}
