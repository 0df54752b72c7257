//! Retrieve, process and compare: items selected by query are run through
//! an external application and the outcomes stored as a run.

mod adapter;
mod report;

use std::collections::HashMap;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::model::{ResultRecord, Run};
use crate::query::{parse_query, select_item_ids, QueryError};
use crate::storage::{Database, StorageError, MISSING_INT};

pub use adapter::{parse_response, AdapterProcess, Response};
pub use report::{compute_report, diff_runs, render_diff, render_report, PhenomenonFigures, RunDiff, RunReport, Tally};

/// Parameter holding the exact output expected from the application.
pub const EXPECTED_OUTPUT: &str = "expected-output";
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("the selection query matches no items")]
    EmptySelection,
    #[error("invalid adapter specification: {0}")]
    InvalidAdapter(String),
    #[error("cannot launch {command:?}: {source}")]
    Launch { command: String, source: io::Error },
    #[error("no run with id {0}")]
    UnknownRun(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterSpec {
    pub command: String,
    pub timeout_ms: u64,
    pub parallelism: usize,
}

impl AdapterSpec {
    pub fn new(command: &str) -> AdapterSpec {
        AdapterSpec {
            command: command.to_string(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            parallelism: 1,
        }
    }

    pub fn with_timeout(mut self, ms: u64) -> Self {
        self.timeout_ms = ms;
        self
    }

    pub fn with_parallelism(mut self, k: usize) -> Self {
        self.parallelism = k;
        self
    }

    fn argv(&self) -> Result<Vec<String>, HarnessError> {
        if self.timeout_ms == 0 {
            return Err(HarnessError::InvalidAdapter("timeout must be positive".into()));
        }
        if self.parallelism == 0 {
            return Err(HarnessError::InvalidAdapter("parallelism must be at least 1".into()));
        }
        match shlex::split(&self.command) {
            Some(argv) if !argv.is_empty() => Ok(argv),
            _ => Err(HarnessError::InvalidAdapter(format!("cannot split command {:?}", self.command))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemError {
    Timeout,
    Crash,
    Protocol,
}

impl ItemError {
    pub fn as_str(&self) -> &'static str {
        match self {
            ItemError::Timeout => "timeout",
            ItemError::Crash => "crash",
            ItemError::Protocol => "protocol",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemOutcome {
    pub item_id: i64,
    pub accepted: bool,
    pub readings: i64,
    pub time_ms: i64,
    pub output: String,
    pub unanalyzed: bool,
    pub error: Option<ItemError>,
}

impl ItemOutcome {
    fn from_reply(item_id: i64, reply: Result<Response, ItemError>) -> ItemOutcome {
        let mut o = ItemOutcome {
            item_id,
            accepted: false,
            readings: 0,
            time_ms: MISSING_INT,
            output: String::new(),
            unanalyzed: false,
            error: None,
        };
        match reply {
            Ok(Response::Accept { readings, time_ms, output }) => {
                o.accepted = true;
                o.readings = readings;
                o.time_ms = time_ms;
                o.output = output;
            }
            Ok(Response::Reject { time_ms, unanalyzed }) => {
                o.time_ms = time_ms;
                o.unanalyzed = unanalyzed;
            }
            Err(e) => o.error = Some(e),
        }
        o
    }
}

/// Descriptive fields of the stored run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunMeta {
    pub date: String,
    pub comment: String,
}

/// Feeds `inputs` to fresh adapter processes, `spec.parallelism` at a time,
/// and returns the outcomes in input order.
pub fn process_items(spec: &AdapterSpec, inputs: &[(i64, String)]) -> Result<Vec<ItemOutcome>, HarnessError> {
    let argv = spec.argv()?;
    let launch = || {
        AdapterProcess::spawn(&argv).map_err(|source| HarnessError::Launch {
            command: spec.command.clone(),
            source,
        })
    };
    let workers = spec.parallelism.min(inputs.len()).max(1);
    let mut processes = Vec::with_capacity(workers);
    for _ in 0..workers {
        processes.push(Some(launch()?));
    }
    let timeout = Duration::from_millis(spec.timeout_ms);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ItemOutcome>>> = Mutex::new(vec![None; inputs.len()]);
    thread::scope(|scope| {
        for mut process in processes {
            let (next, slots, argv) = (&next, &slots, &argv);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((id, input)) = inputs.get(i) else { break };
                if process.is_none() {
                    process = AdapterProcess::spawn(argv).ok();
                }
                let reply = match process.as_mut() {
                    Some(p) => p.ask(input, timeout),
                    None => Err(ItemError::Crash),
                };
                if reply.is_err() {
                    // the stream is out of step or dead; start over
                    process = None;
                }
                slots.lock().expect("no worker panics while holding the lock")[i] =
                    Some(ItemOutcome::from_reply(*id, reply));
            });
        }
    });
    Ok(slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|o| o.expect("every input processed"))
        .collect())
}

fn expected_outputs(db: &Database) -> HashMap<i64, String> {
    let mut out = HashMap::new();
    for link in db.links() {
        if let Some((_, v)) = link.parameters.iter().find(|(k, _)| k == EXPECTED_OUTPUT) {
            out.insert(link.item_id, v.clone());
        }
    }
    out
}

/// Runs the items selected by `selection` through the adapter and stores a
/// run with one result per item, in item-id order.
pub fn run_cycle(
    db: &mut Database,
    selection: &str,
    spec: &AdapterSpec,
    meta: &RunMeta,
) -> Result<(i64, RunReport), HarnessError> {
    let query = parse_query(selection, db.schema())?;
    let ids = select_item_ids(db, &query)?;
    if ids.is_empty() {
        return Err(HarnessError::EmptySelection);
    }
    let inputs: Vec<(i64, String)> = ids
        .iter()
        .map(|&id| (id, db.item(id).map(|i| i.input).unwrap_or_default()))
        .collect();
    let outcomes = process_items(spec, &inputs)?;

    let expected = expected_outputs(db);
    let mut work = db.clone();
    let run_id = work.insert_run(&Run {
        run_id: MISSING_INT,
        application: spec.command.clone(),
        date: meta.date.clone(),
        environment: format!("parallel={} timeout={}ms", spec.parallelism, spec.timeout_ms),
        comment: meta.comment.clone(),
    })?;
    for o in &outcomes {
        let mut flags = Vec::new();
        if let Some(e) = o.error {
            flags.push(e.as_str());
        }
        if o.unanalyzed {
            flags.push("unanalyzed");
        }
        if o.accepted && expected.get(&o.item_id).is_some_and(|e| *e != o.output) {
            flags.push("mismatch");
        }
        work.insert_result(&ResultRecord {
            run_id,
            item_id: o.item_id,
            accepted: i64::from(o.accepted),
            readings: o.readings,
            time_ms: o.time_ms,
            output: o.output.clone(),
            flags: flags.join(", "),
        })?;
    }
    *db = work;
    let report = compute_report(db, run_id)?;
    Ok((run_id, report))
}
