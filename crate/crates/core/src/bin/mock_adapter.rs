//! Reference adapter for harness tests: accepts a line iff its length
//! (tokens excluding a final punctuation token) is at most N.
//!
//! ```text
//! tsdb-mock-adapter N [--unanalyzed] [--sleep-on TOKEN MS] [--crash-on TOKEN] [--garbage-on TOKEN]
//! ```

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use tsdb_core::model::item_length;

#[derive(Default)]
struct Options {
    limit: i64,
    unanalyzed: bool,
    sleep_on: Option<(String, u64)>,
    crash_on: Option<String>,
    garbage_on: Option<String>,
}

fn parse_args() -> Result<Options, String> {
    let mut args = std::env::args().skip(1);
    let mut opts = Options {
        limit: args
            .next()
            .ok_or("missing N")?
            .parse()
            .map_err(|_| "N must be an integer")?,
        ..Default::default()
    };
    while let Some(a) = args.next() {
        let mut value = || args.next().ok_or(format!("{a} needs a value"));
        match a.as_str() {
            "--unanalyzed" => opts.unanalyzed = true,
            "--sleep-on" => {
                let token = value()?;
                let ms = value()?.parse().map_err(|_| "bad milliseconds")?;
                opts.sleep_on = Some((token, ms));
            }
            "--crash-on" => opts.crash_on = Some(value()?),
            "--garbage-on" => opts.garbage_on = Some(value()?),
            _ => return Err(format!("unknown argument {a}")),
        }
    }
    Ok(opts)
}

fn main() -> ExitCode {
    let opts = match parse_args() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("tsdb-mock-adapter: {e}");
            return ExitCode::from(2);
        }
    };
    let has = |line: &str, token: &Option<String>| token.as_ref().is_some_and(|t| line.split(' ').any(|w| w == t));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if has(&line, &opts.crash_on) {
            return ExitCode::from(3);
        }
        if let Some((token, ms)) = &opts.sleep_on {
            if line.split(' ').any(|w| w == token) {
                thread::sleep(Duration::from_millis(*ms));
            }
        }
        let reply = if has(&line, &opts.garbage_on) {
            "GARBAGE".to_string()
        } else if item_length(&line) <= opts.limit {
            "ACCEPT 1 0".to_string()
        } else if opts.unanalyzed {
            "REJECT 0 unanalyzed".to_string()
        } else {
            "REJECT 0".to_string()
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}
