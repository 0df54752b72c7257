mod editor;
mod signal;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use tsdb_core::genvar::{expand_grammar, generated_database, make_test_set, parse_directives, ProductionGrammar};
use tsdb_core::harness::{diff_runs, render_diff, render_report, run_cycle, AdapterSpec, RunMeta, DEFAULT_TIMEOUT_MS};
use tsdb_core::server::{remote_query, serve, DEFAULT_PORT};
use tsdb_core::shell::{repl, run_once, OutputFormat, Shell};
use tsdb_core::storage::{check_consistency, load_database, merge_database, store_database, Database};

#[derive(Parser)]
#[command(name = "tsdb", version, about = "Test suite database for natural language processing systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Db {
    /// Database home directory
    #[arg(long, env = "TSDB_HOME")]
    home: PathBuf,
    /// Language database to open (en, fr or de)
    #[arg(long, short, default_value = "en", env = "TSDB_LANGUAGE")]
    language: String,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive shell
    Shell(Db),
    /// Evaluate one query
    Query {
        #[command(flatten)]
        db: Db,
        #[arg(short = 'e', long = "execute")]
        query: String,
        #[arg(long, default_value = "table")]
        format: OutputFormat,
    },
    /// Report consistency violations
    Check(Db),
    /// Merge a database directory into the home database
    Import {
        #[command(flatten)]
        db: Db,
        dir: PathBuf,
    },
    /// Write the home database to another directory
    Export {
        #[command(flatten)]
        db: Db,
        dir: PathBuf,
    },
    /// Serve read-only queries over the network
    Serve {
        #[command(flatten)]
        db: Db,
        #[arg(long, env = "TSDB_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Query a running server
    Remote {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "TSDB_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(short = 'e', long = "execute")]
        query: String,
        #[arg(long, default_value = "table")]
        format: OutputFormat,
    },
    /// Run selected items through an application and store the outcomes
    Run {
        #[command(flatten)]
        db: Db,
        #[arg(long)]
        select: String,
        /// Command line of the application adapter
        #[arg(long)]
        adapter: String,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_MS)]
        timeout: u64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long, default_value = "")]
        comment: String,
    },
    /// Compare two stored runs
    Diff {
        #[command(flatten)]
        db: Db,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        runs: Vec<i64>,
    },
    /// Derive ill-formed variants of an item and group them in a test set
    Generate {
        #[command(flatten)]
        db: Db,
        /// Well-formed item the variants are derived from
        #[arg(long, alias = "item")]
        base: i64,
        /// File with one variation directive per line
        #[arg(long)]
        directives: PathBuf,
    },
    /// Expand a production grammar into a new database directory
    Expand {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        /// Database home to create or overwrite
        #[arg(long)]
        out: PathBuf,
        #[arg(long, short, default_value = "en")]
        language: String,
    },
}

/// Failure with its exit status.
struct Failure(u8, String);

fn db_err(e: impl ToString) -> Failure {
    Failure(2, e.to_string())
}

fn usage_err(e: impl ToString) -> Failure {
    Failure(1, e.to_string())
}

fn load(db: &Db) -> Result<Database, Failure> {
    load_database(&db.home, &db.language).map_err(db_err)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Shell(db) => {
            let mut shell = Shell::open(&db.home, &db.language).map_err(db_err)?;
            let mut console = editor::EditorConsole::new(shell.database().schema().clone(), shell.history())
                .map_err(|e| Failure(2, format!("cannot open terminal: {e}")))?;
            Ok(repl(&mut shell, &mut console) as u8)
        }
        Command::Query { db, query, format } => {
            let out = run_once(&db.home, &db.language, &query, format);
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            Ok(out.status as u8)
        }
        Command::Check(db) => {
            let violations = check_consistency(&load(&db)?);
            for v in &violations {
                println!("{v}");
            }
            Ok(u8::from(!violations.is_empty()))
        }
        Command::Import { db, dir } => {
            let mut target = load(&db)?;
            let other = load_database(&dir, &db.language).map_err(db_err)?;
            let n = merge_database(&mut target, &other).map_err(db_err)?;
            store_database(&target, &db.home).map_err(db_err)?;
            println!("imported {n} records");
            Ok(0)
        }
        Command::Export { db, dir } => {
            store_database(&load(&db)?, &dir).map_err(db_err)?;
            Ok(0)
        }
        Command::Serve { db, port, host } => {
            let database = load(&db)?;
            signal::install();
            let handle = serve(database, (host.as_str(), port)).map_err(|e| Failure(2, format!("cannot bind {host}:{port}: {e}")))?;
            eprintln!("serving {} on {}", db.language, handle.local_addr());
            while !signal::interrupted() {
                thread::sleep(Duration::from_millis(100));
            }
            handle.shutdown();
            Ok(0)
        }
        Command::Remote { host, port, query, format } => {
            let table = remote_query((host.as_str(), port), &query).map_err(usage_err)?;
            match format {
                OutputFormat::Table => print!("{}", table.render_table()),
                OutputFormat::Delimited => print!("{}", table.render_delimited()),
            }
            Ok(0)
        }
        Command::Run { db, select, adapter, timeout, parallel, comment } => {
            let mut database = load(&db)?;
            let spec = AdapterSpec::new(&adapter).with_timeout(timeout).with_parallelism(parallel);
            let meta = RunMeta {
                date: chrono::Local::now().format("%Y-%m-%d %H:%M").to_string(),
                comment,
            };
            let (_, report) = run_cycle(&mut database, &select, &spec, &meta).map_err(usage_err)?;
            store_database(&database, &db.home).map_err(db_err)?;
            print!("{}", render_report(&report));
            Ok(0)
        }
        Command::Diff { db, runs } => {
            let diff = diff_runs(&load(&db)?, runs[0], runs[1]).map_err(usage_err)?;
            print!("{}", render_diff(&diff));
            Ok(0)
        }
        Command::Generate { db, base, directives } => {
            let mut database = load(&db)?;
            let directives = parse_directives(&read(&directives)?).map_err(usage_err)?;
            let created = make_test_set(&mut database, base, &directives).map_err(usage_err)?;
            store_database(&database, &db.home).map_err(db_err)?;
            let ids: Vec<String> = created.derived_ids.iter().map(i64::to_string).collect();
            println!("set {}: {} {}", created.set_id, base, ids.join(" "));
            Ok(0)
        }
        Command::Expand { grammar, limit, out, language } => {
            let grammar = ProductionGrammar::parse(&read(&grammar)?).map_err(usage_err)?;
            let items = expand_grammar(&grammar, limit).map_err(usage_err)?;
            let database = generated_database(&items, &language).map_err(usage_err)?;
            store_database(&database, &out).map_err(db_err)?;
            println!("{} items written to {}", items.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(status) => {
            let _ = std::io::stdout().flush();
            ExitCode::from(status)
        }
        Err(Failure(status, message)) => {
            eprintln!("tsdb: {message}");
            ExitCode::from(status)
        }
    }
}
