//! Systematic derivation of test data: ill-formed variants of well-formed
//! items, test sets grouping them, and items expanded from a production
//! grammar.

mod directive;
mod grammar;
mod testset;
mod variation;

use thiserror::Error;

use crate::model::Span;
use crate::storage::{Database, StorageError};

pub use directive::{parse_directive, parse_directives, render_directive};
pub use grammar::{
    expand_grammar, Agreement, DomainRef, FunctionAnnotation, GeneratedItem, ItemDefaults, LexEntry,
    ProductionGrammar, Rule, Symbol, SymbolRef, DEFAULT_DEPTH,
};
pub use testset::{make_test_set, CreatedSet};
pub use variation::{apply_variation, Provenance, SpanLabel, Variant, VariationDirective, VariationKind};

#[derive(Debug, Error)]
pub enum GenvarError {
    #[error("span {span} out of bounds for {tokens} tokens")]
    OutOfBounds { span: Span, tokens: i64 },
    #[error("permuted spans {0} and {1} overlap")]
    Overlap(Span, Span),
    #[error("item {0} is not well-formed")]
    SourceNotWellFormed(i64),
    #[error("no tokens given")]
    EmptyTokens,
    #[error("variation leaves no non-punctuation token")]
    EmptyResult,
    #[error("no item with id {0}")]
    UnknownItem(i64),
    #[error("empty directive list")]
    NoDirectives,
    #[error("directive line {line}: {message}")]
    Directive { line: usize, message: String },
    #[error("grammar line {line}: {message}")]
    Grammar { line: usize, message: String },
    #[error("derivation deeper than {0} (cyclic or too deep grammar)")]
    DepthExceeded(usize),
    #[error("result would be inconsistent: {}", .0.join("; "))]
    Inconsistent(Vec<String>),
    #[error(transparent)]
    Storage(#[from] StorageError),
}

/// A database in `language` holding the generated items and their analyses.
pub fn generated_database(items: &[GeneratedItem], language: &str) -> Result<Database, GenvarError> {
    let mut db = Database::empty(language)?;
    for g in items {
        db.insert_item(&g.item)?;
        for s in &g.spans {
            db.insert_span(s)?;
        }
    }
    Ok(db)
}
