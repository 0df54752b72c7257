//! The SQL-style query language: `select` attributes, an optional `where`
//! condition, and implicit joins resolved through attribute prefixes.

mod ast;
mod eval;
mod instantiate;
mod parser;
mod plan;

use thiserror::Error;

use crate::storage::Database;

pub use ast::{Comparator, Comparison, Expr, Literal, Query};
pub use eval::{evaluate_query, sort_rows, ResultTable};
pub use instantiate::{instantiate_testsuite, select_item_ids};
pub use parser::{parse_query, parse_query_unchecked};
pub use plan::{plan_query, JoinPlan, JoinStep};

/// Keywords offered by completion.
pub const KEYWORDS: &[&str] = &["select", "where"];

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("invalid regular expression {pattern:?}: {message}")]
    InvalidRegex { pattern: String, message: String },
}

/// Parses, plans and evaluates `text` against `db`.
pub fn run_query(db: &Database, text: &str) -> Result<ResultTable, QueryError> {
    let query = parse_query(text, db.schema())?;
    evaluate_query(&plan_query(&query, db.schema()), db)
}
