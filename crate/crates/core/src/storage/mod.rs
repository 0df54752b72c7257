//! The relational kernel: schema registry, flat-file persistence with one
//! file per relation, record insertion and deletion, and whole-database
//! consistency checking.

mod codec;
mod consistency;
mod database;
mod schema;

use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::Span;

pub use codec::{decode_line, encode_fields, escape_field, DELIMITER};
pub use consistency::check_consistency;
pub use database::{load_database, merge_database, store_database, Database, Record, Row, LANGUAGES};
pub use schema::{AttrType, AttributeDecl, JoinEdge, RelationDecl, Schema, DEFAULT_SCHEMA};

/// Name of the schema file inside a database home.
pub const SCHEMA_FILE: &str = "relations";
/// Name of the abstract phenomenon name list inside a language directory.
pub const TAXONOMY_FILE: &str = "taxonomy";

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("database home {0} does not exist")]
    HomeMissing(PathBuf),
    #[error("schema file {0} is missing")]
    MissingSchema(PathBuf),
    #[error("schema line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("unknown language {0:?} (expected en, fr or de)")]
    UnknownLanguage(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("{relation}, line {line}: {message}")]
    Malformed {
        relation: String,
        line: usize,
        message: String,
    },
    #[error("{relation}, line {line}: duplicate key {key}")]
    DuplicateKeyAtLine {
        relation: String,
        line: usize,
        key: String,
    },
    #[error("{relation}: duplicate key {key}")]
    DuplicateKey { relation: String, key: String },
    #[error("{relation}: {message}")]
    TypeMismatch { relation: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Pos(Span),
    Str(String),
}

/// Stored value for a missing integer.
pub const MISSING_INT: i64 = -1;

impl Value {
    pub fn ty(&self) -> AttrType {
        match self {
            Value::Int(_) => AttrType::Integer,
            Value::Pos(_) => AttrType::Position,
            Value::Str(_) => AttrType::String,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_span(&self) -> Option<Span> {
        match self {
            Value::Pos(s) => Some(*s),
            _ => None,
        }
    }

    /// The textual form used on disk and in delimited output.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Pos(s) => s.to_string(),
            Value::Str(s) => s.clone(),
        }
    }

    pub fn parse(text: &str, ty: AttrType) -> Option<Value> {
        match ty {
            AttrType::Integer => crate::model::parse_canonical_int(text).map(Value::Int),
            AttrType::Position => Span::parse(text).map(Value::Pos),
            AttrType::String => Some(Value::Str(text.to_string())),
        }
    }

    pub fn missing(ty: AttrType) -> Value {
        match ty {
            AttrType::Integer => Value::Int(MISSING_INT),
            AttrType::Position => Value::Pos(Span::new(MISSING_INT, MISSING_INT)),
            AttrType::String => Value::Str(String::new()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integers compare numerically, strings bytewise, positions by start then
/// end; values of different types order integer < position < string.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Pos(a), Value::Pos(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Int(_) => 0,
        Value::Pos(_) => 1,
        Value::Str(_) => 2,
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<Span> for Value {
    fn from(v: Span) -> Self {
        Value::Pos(v)
    }
}
