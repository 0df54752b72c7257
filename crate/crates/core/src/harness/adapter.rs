//! One external application process speaking the line protocol:
//! an input line in, `ACCEPT <readings> <time-ms> [output]` or
//! `REJECT <time-ms> [unanalyzed]` out.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::ItemError;
use crate::model::parse_canonical_int;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Accept { readings: i64, time_ms: i64, output: String },
    Reject { time_ms: i64, unanalyzed: bool },
}

fn count(text: &str) -> Option<i64> {
    parse_canonical_int(text).filter(|n| *n >= 0)
}

pub fn parse_response(line: &str) -> Option<Response> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut parts = line.splitn(4, ' ');
    match parts.next()? {
        "ACCEPT" => {
            let readings = count(parts.next()?)?;
            let time_ms = count(parts.next()?)?;
            let output = parts.next().unwrap_or("").to_string();
            Some(Response::Accept { readings, time_ms, output })
        }
        "REJECT" => {
            let time_ms = count(parts.next()?)?;
            let unanalyzed = match parts.next() {
                None => false,
                Some("unanalyzed") => true,
                Some(_) => return None,
            };
            if parts.next().is_some() {
                return None;
            }
            Some(Response::Reject { time_ms, unanalyzed })
        }
        _ => None,
    }
}

pub struct AdapterProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
}

impl AdapterProcess {
    pub fn spawn(argv: &[String]) -> io::Result<AdapterProcess> {
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(AdapterProcess { child, stdin, lines })
    }

    /// Sends one input line and waits up to `timeout` for the reply.
    pub fn ask(&mut self, input: &str, timeout: Duration) -> Result<Response, ItemError> {
        let sent = writeln!(self.stdin, "{input}").and_then(|_| self.stdin.flush());
        if sent.is_err() {
            return Err(ItemError::Crash);
        }
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => parse_response(&line).ok_or(ItemError::Protocol),
            Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => Err(ItemError::Crash),
            Err(RecvTimeoutError::Timeout) => Err(ItemError::Timeout),
        }
    }
}

impl Drop for AdapterProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
