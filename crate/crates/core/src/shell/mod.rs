//! The interactive command shell: queries plus backslash meta-commands,
//! guided record entry, completion and a persistent history.

mod complete;
mod insert;

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::query::run_query;
use crate::storage::{
    check_consistency, encode_fields, load_database, merge_database, store_database, Database, Record, StorageError,
    Value,
};

pub use complete::complete;

pub const PROMPT: &str = "tsdb> ";
pub const HISTORY_FILE: &str = ".tsdb_history";
pub const META_COMMANDS: &[&str] = &[
    "\\check",
    "\\describe",
    "\\export",
    "\\history",
    "\\import",
    "\\insert",
    "\\language",
    "\\quit",
    "\\relations",
];

/// Where the shell reads lines and writes text.
pub trait Console {
    /// `None` at end of input.
    fn read_line(&mut self, prompt: &str) -> Option<String>;
    fn print(&mut self, text: &str);
    fn add_history(&mut self, _line: &str) {}
}

/// Scripted input with captured output.
#[derive(Debug, Default)]
pub struct ScriptedConsole {
    pub input: VecDeque<String>,
    pub output: String,
}

impl ScriptedConsole {
    pub fn new<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedConsole {
            input: lines.into_iter().map(Into::into).collect(),
            output: String::new(),
        }
    }
}

impl Console for ScriptedConsole {
    fn read_line(&mut self, _prompt: &str) -> Option<String> {
        self.input.pop_front()
    }

    fn print(&mut self, text: &str) {
        self.output.push_str(text);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShellCommand {
    Query(String),
    Relations,
    Describe(String),
    Language(String),
    Import(PathBuf),
    Export(Option<PathBuf>),
    Check,
    GuidedInsert(String),
    History,
    Quit,
}

pub fn parse_command(line: &str) -> Result<ShellCommand, String> {
    let line = line.trim();
    if !line.starts_with('\\') {
        return Ok(ShellCommand::Query(line.to_string()));
    }
    let mut words = line.split_whitespace();
    let name = words.next().unwrap_or_default();
    let args: Vec<&str> = words.collect();
    let one = |what: &str| match args.as_slice() {
        [a] => Ok(a.to_string()),
        _ => Err(format!("usage: {name} {what}")),
    };
    let none = |cmd: ShellCommand| {
        if args.is_empty() {
            Ok(cmd)
        } else {
            Err(format!("{name} takes no arguments"))
        }
    };
    match name {
        "\\relations" => none(ShellCommand::Relations),
        "\\check" => none(ShellCommand::Check),
        "\\history" => none(ShellCommand::History),
        "\\quit" | "\\q" => none(ShellCommand::Quit),
        "\\describe" => one("RELATION").map(ShellCommand::Describe),
        "\\insert" => one("RELATION").map(ShellCommand::GuidedInsert),
        "\\language" => one("CODE").map(ShellCommand::Language),
        "\\import" => one("DIR").map(|d| ShellCommand::Import(d.into())),
        "\\export" => match args.as_slice() {
            [] => Ok(ShellCommand::Export(None)),
            [d] => Ok(ShellCommand::Export(Some(d.into()))),
            _ => Err("usage: \\export [DIR]".to_string()),
        },
        other => Err(format!("unknown command {other}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Delimited,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "delimited" => Ok(OutputFormat::Delimited),
            _ => Err(format!("unknown format {s:?} (table or delimited)")),
        }
    }
}

pub struct Shell {
    db: Database,
    home: PathBuf,
    history: Vec<String>,
    last_inserted: HashMap<String, Record>,
}

impl Shell {
    pub fn open(home: &Path, language: &str) -> Result<Shell, StorageError> {
        let db = load_database(home, language)?;
        let history = fs::read_to_string(home.join(HISTORY_FILE))
            .map(|t| t.lines().map(str::to_string).collect())
            .unwrap_or_default();
        Ok(Shell {
            db,
            home: home.to_path_buf(),
            history,
            last_inserted: HashMap::new(),
        })
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn history(&self) -> &[String] {
        &self.history
    }

    pub fn history_path(&self) -> PathBuf {
        self.home.join(HISTORY_FILE)
    }

    /// Remembers a line and appends it to the history file.
    pub fn record_history(&mut self, line: &str) {
        self.history.push(line.to_string());
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(self.history_path()) {
            let _ = writeln!(f, "{line}");
        }
    }

    /// Runs one input line; returns true when the shell should exit.
    pub fn execute(&mut self, line: &str, console: &mut dyn Console) -> bool {
        let command = match parse_command(line) {
            Ok(c) => c,
            Err(e) => {
                console.print(&format!("error: {e}\n"));
                return false;
            }
        };
        match self.dispatch(command, console) {
            Ok(quit) => quit,
            Err(e) => {
                console.print(&format!("error: {e}\n"));
                false
            }
        }
    }

    fn dispatch(&mut self, command: ShellCommand, console: &mut dyn Console) -> Result<bool, String> {
        match command {
            ShellCommand::Query(text) => {
                let table = run_query(&self.db, &text).map_err(|e| e.to_string())?;
                console.print(&table.render_table());
            }
            ShellCommand::Relations => {
                let mut out = String::new();
                for r in self.db.schema().relations() {
                    let _ = writeln!(out, "{}", r.name);
                }
                console.print(&out);
            }
            ShellCommand::Describe(name) => console.print(&self.describe(&name)?),
            ShellCommand::Language(code) => {
                self.db = load_database(&self.home, &code).map_err(|e| e.to_string())?;
                self.last_inserted.clear();
                console.print(&format!("language {code}\n"));
            }
            ShellCommand::Import(dir) => {
                let other = load_database(&dir, self.db.language()).map_err(|e| e.to_string())?;
                let n = merge_database(&mut self.db, &other).map_err(|e| e.to_string())?;
                console.print(&format!("imported {n} records (not yet saved; \\export to persist)\n"));
            }
            ShellCommand::Export(dir) => {
                let target = dir.unwrap_or_else(|| self.home.clone());
                store_database(&self.db, &target).map_err(|e| e.to_string())?;
                console.print(&format!("exported to {}\n", target.display()));
            }
            ShellCommand::Check => {
                let violations = check_consistency(&self.db);
                let mut out = String::new();
                for v in &violations {
                    let _ = writeln!(out, "{v}");
                }
                let _ = writeln!(out, "{} violation{}", violations.len(), if violations.len() == 1 { "" } else { "s" });
                console.print(&out);
            }
            ShellCommand::GuidedInsert(relation) => self.guided_insert(&relation, console)?,
            ShellCommand::History => {
                let mut out = String::new();
                for (i, line) in self.history.iter().enumerate() {
                    let _ = writeln!(out, "{:5}  {line}", i + 1);
                }
                console.print(&out);
            }
            ShellCommand::Quit => return Ok(true),
        }
        Ok(false)
    }

    fn describe(&self, name: &str) -> Result<String, String> {
        let schema = self.db.schema();
        let idx = schema.relation_index(name).ok_or_else(|| format!("unknown relation {name:?}"))?;
        let decl = &schema.relations()[idx];
        let n = self.db.len(name);
        let mut out = format!("{name} ({n} record{})\n", if n == 1 { "" } else { "s" });
        for a in &decl.attributes {
            let _ = write!(out, "  {} :{}", a.name, a.ty);
            if a.key {
                out.push_str(" :key");
            }
            if let Some(home) = schema.home_of(&a.name).filter(|h| *h != idx) {
                let _ = write!(out, "  (from {})", schema.relations()[home].name);
            }
            out.push('\n');
        }
        let joins: Vec<String> = schema
            .neighbours(idx)
            .into_iter()
            .map(|(r, attr)| format!("{} ({attr})", schema.relations()[r].name))
            .collect();
        let _ = writeln!(out, "joins: {}", joins.join(", "));
        Ok(out)
    }

    /// Prompts for a record, shows the consistency problems it would add,
    /// and on confirmation inserts it and saves the database.
    pub fn guided_insert(&mut self, relation: &str, console: &mut dyn Console) -> Result<(), String> {
        if self.db.schema().relation(relation).is_none() {
            return Err(format!("unknown relation {relation:?}"));
        }
        let previous = self
            .last_inserted
            .get(relation)
            .cloned()
            .or_else(|| self.db.records(relation).ok().and_then(|r| r.last().cloned()));
        let record = match insert::prompt_record(&self.db, relation, previous.as_ref(), console) {
            insert::Dialogue::Ready(r) => r,
            insert::Dialogue::Aborted => {
                console.print("aborted; nothing inserted\n");
                return Ok(());
            }
        };
        let before: Vec<String> = check_consistency(&self.db).iter().map(ToString::to_string).collect();
        let mut work = self.db.clone();
        let id = work.insert_record(relation, record.clone()).map_err(|e| e.to_string())?;
        let introduced: Vec<String> = check_consistency(&work)
            .iter()
            .map(ToString::to_string)
            .filter(|v| !before.contains(v))
            .collect();
        let cells: Vec<String> = record.iter().map(Value::render).collect();
        let mut summary = format!("{}\n", encode_fields(cells.iter().map(String::as_str)));
        for v in &introduced {
            let _ = writeln!(summary, "warning: {v}");
        }
        console.print(&summary);
        let question = if introduced.is_empty() {
            "insert? [y/N] ".to_string()
        } else {
            format!("insert despite {} new problem(s)? [y/N] ", introduced.len())
        };
        let confirmed = console
            .read_line(&question)
            .is_some_and(|a| matches!(a.trim(), "y" | "Y" | "yes"));
        if !confirmed {
            console.print("aborted; nothing inserted\n");
            return Ok(());
        }
        store_database(&work, &self.home).map_err(|e| e.to_string())?;
        self.db = work;
        self.last_inserted.insert(relation.to_string(), record);
        match id {
            Some(id) => console.print(&format!("inserted {relation} {id}\n")),
            None => console.print(&format!("inserted into {relation}\n")),
        }
        Ok(())
    }
}

/// Reads and executes lines until `\quit` or end of input.
pub fn repl(shell: &mut Shell, console: &mut dyn Console) -> i32 {
    while let Some(line) = console.read_line(PROMPT) {
        if line.trim().is_empty() {
            continue;
        }
        shell.record_history(&line);
        console.add_history(&line);
        if shell.execute(&line, console) {
            break;
        }
    }
    0
}

/// Output of a one-shot query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnceOutput {
    pub stdout: String,
    pub stderr: String,
    /// 0 success, 1 query error, 2 database error.
    pub status: i32,
}

pub fn run_once(home: &Path, language: &str, text: &str, format: OutputFormat) -> OnceOutput {
    let fail = |status: i32, message: String| OnceOutput {
        stdout: String::new(),
        stderr: format!("{message}\n"),
        status,
    };
    let db = match load_database(home, language) {
        Ok(db) => db,
        Err(e) => return fail(2, e.to_string()),
    };
    match run_query(&db, text) {
        Ok(table) => OnceOutput {
            stdout: match format {
                OutputFormat::Table => table.render_table(),
                OutputFormat::Delimited => table.render_delimited(),
            },
            stderr: String::new(),
            status: 0,
        },
        Err(e) => fail(1, e.to_string()),
    }
}
