//! Domain types of the annotation schema: test items, analysis spans,
//! phenomena, test sets and the user & application profile records.

use std::fmt;

/// Wellformedness codes.
pub const ILL_FORMED: i64 = 0;
pub const WELL_FORMED: i64 = 1;
pub const MARGINAL: i64 = 2;

/// A half-open token range `start:end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: i64,
    pub end: i64,
}

impl Span {
    pub const fn new(start: i64, end: i64) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two ranges share at least one token.
    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Parses the `start:end` rendering.
    pub fn parse(text: &str) -> Option<Span> {
        let (a, b) = text.split_once(':')?;
        Some(Span::new(parse_canonical_int(a)?, parse_canonical_int(b)?))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

/// Parses an integer only if it is in canonical decimal form, so that
/// rendering the value reproduces the input byte-for-byte.
pub fn parse_canonical_int(text: &str) -> Option<i64> {
    let value: i64 = text.parse().ok()?;
    (value.to_string() == text).then_some(value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestItem {
    pub item_id: i64,
    pub author: String,
    pub date: String,
    pub register: String,
    pub format: String,
    pub origin: String,
    pub difficulty: i64,
    pub wellformedness: i64,
    pub category: String,
    pub input: String,
    pub length: i64,
    pub comment: String,
}

impl TestItem {
    pub fn tokens(&self) -> Vec<&str> {
        tokens(&self.input)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisSpan {
    pub item_id: i64,
    pub position: Span,
    pub instance: String,
    pub category: String,
    pub function: String,
    pub domain: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phenomenon {
    pub phenomenon_id: i64,
    pub name: String,
    pub supertypes: Vec<String>,
    pub presupposition: Vec<String>,
    pub restrictions: String,
    pub interaction: String,
    pub purpose: String,
    pub author: String,
    pub date: String,
    pub comment: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemPhenomenonLink {
    pub link_id: i64,
    pub item_id: i64,
    pub phenomenon_id: i64,
    pub parameters: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSet {
    pub set_id: i64,
    pub item_ids: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub run_id: i64,
    pub application: String,
    pub date: String,
    pub environment: String,
    pub comment: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRecord {
    pub run_id: i64,
    pub item_id: i64,
    pub accepted: i64,
    pub readings: i64,
    pub time_ms: i64,
    pub output: String,
    pub flags: String,
}

/// Splits a list-valued annotation such as `C_Agreement, NP_Agreement`.
pub fn split_name_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn join_name_list(names: &[String]) -> String {
    names.join(", ")
}

pub fn tokens(input: &str) -> Vec<&str> {
    if input.is_empty() {
        Vec::new()
    } else {
        input.split(' ').collect()
    }
}

pub fn is_punctuation_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '…' | '«' | '»' | '¡' | '¿' | '“' | '”' | '„' | '‘' | '’' | '–' | '—'
        )
}

pub fn is_punctuation_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punctuation_char)
}

/// Token count excluding a sentence-final punctuation token.
pub fn item_length(input: &str) -> i64 {
    let toks = tokens(input);
    let n = toks.len() as i64;
    match toks.last() {
        Some(last) if is_punctuation_token(last) => n - 1,
        _ => n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    InvalidId,
    Wellformedness,
    Length,
    EmptyInput,
    TokenSpacing,
    Difficulty,
    EmptyDate,
    SpanBounds,
    DomainBounds,
    InstanceMismatch,
    DanglingReference,
    DuplicateKey,
    DuplicateName,
    UnresolvedName,
    SupertypeCycle,
    PresuppositionCycle,
    SetSize,
    SetWithoutPositive,
    ResultOutcome,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::InvalidId => "invalid-id",
            ViolationKind::Wellformedness => "wellformedness",
            ViolationKind::Length => "length",
            ViolationKind::EmptyInput => "empty-input",
            ViolationKind::TokenSpacing => "token-spacing",
            ViolationKind::Difficulty => "difficulty",
            ViolationKind::EmptyDate => "empty-date",
            ViolationKind::SpanBounds => "span-bounds",
            ViolationKind::DomainBounds => "domain-bounds",
            ViolationKind::InstanceMismatch => "instance-mismatch",
            ViolationKind::DanglingReference => "dangling-reference",
            ViolationKind::DuplicateKey => "duplicate-key",
            ViolationKind::DuplicateName => "duplicate-name",
            ViolationKind::UnresolvedName => "unresolved-name",
            ViolationKind::SupertypeCycle => "supertype-cycle",
            ViolationKind::PresuppositionCycle => "presupposition-cycle",
            ViolationKind::SetSize => "set-size",
            ViolationKind::SetWithoutPositive => "set-without-positive",
            ViolationKind::ResultOutcome => "result-outcome",
        }
    }
}

/// One broken rule, located by relation, record key and field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub relation: String,
    pub key: String,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(
        kind: ViolationKind,
        relation: &str,
        key: impl Into<String>,
        field: &str,
        message: impl Into<String>,
    ) -> Self {
        Violation {
            kind,
            relation: relation.to_string(),
            key: key.into(),
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {} {}: {}",
            self.relation,
            self.kind.as_str(),
            self.key,
            self.field,
            self.message
        )
    }
}

pub fn validate_item(item: &TestItem) -> Vec<Violation> {
    let mut out = Vec::new();
    let key = item.item_id.to_string();
    let mut push = |kind, field: &str, msg: String| {
        out.push(Violation::new(kind, "item", key.clone(), field, msg));
    };
    if item.item_id < 1 {
        push(
            ViolationKind::InvalidId,
            "i-id",
            format!("item id {} is not positive", item.item_id),
        );
    }
    if !(ILL_FORMED..=MARGINAL).contains(&item.wellformedness) {
        push(
            ViolationKind::Wellformedness,
            "i-wf",
            format!("code {} not in {{0, 1, 2}}", item.wellformedness),
        );
    }
    if item.difficulty < 1 {
        push(
            ViolationKind::Difficulty,
            "i-difficulty",
            format!("difficulty {} is below 1", item.difficulty),
        );
    }
    if item.date.is_empty() {
        push(ViolationKind::EmptyDate, "i-date", "date is empty".into());
    }
    if item.input.is_empty() {
        push(ViolationKind::EmptyInput, "i-input", "input is empty".into());
        return out;
    }
    if item.input.split(' ').any(str::is_empty) || item.input.contains(['\n', '\t', '\r']) {
        push(
            ViolationKind::TokenSpacing,
            "i-input",
            "tokens must be separated by exactly one space".into(),
        );
    }
    let expected = item_length(&item.input);
    if item.length != expected {
        push(
            ViolationKind::Length,
            "i-length",
            format!("length {} but input has {} tokens", item.length, expected),
        );
    } else if expected < 1 {
        push(
            ViolationKind::Length,
            "i-length",
            "input has no non-punctuation token".into(),
        );
    }
    out
}

pub fn validate_span(span: &AnalysisSpan, item: &TestItem) -> Vec<Violation> {
    let mut out = Vec::new();
    let key = format!("{}/{}", span.item_id, span.position);
    let toks = item.tokens();
    let n = toks.len() as i64;
    let in_bounds = |s: &Span| 0 <= s.start && s.start < s.end && s.end <= n;
    if span.item_id != item.item_id {
        out.push(Violation::new(
            ViolationKind::DanglingReference,
            "analysis",
            key.clone(),
            "i-id",
            format!("span belongs to {} not {}", span.item_id, item.item_id),
        ));
    }
    if !in_bounds(&span.position) {
        let msg = if span.position.end > n {
            format!("end {} exceeds token count {}", span.position.end, n)
        } else {
            format!("position {} is not a non-empty range", span.position)
        };
        out.push(Violation::new(
            ViolationKind::SpanBounds,
            "analysis",
            key.clone(),
            "a-position",
            msg,
        ));
    } else {
        let slice = toks[span.position.start as usize..span.position.end as usize].join(" ");
        if slice != span.instance {
            out.push(Violation::new(
                ViolationKind::InstanceMismatch,
                "analysis",
                key.clone(),
                "a-instance",
                format!("instance {:?} but input slice is {:?}", span.instance, slice),
            ));
        }
    }
    if !in_bounds(&span.domain) {
        out.push(Violation::new(
            ViolationKind::DomainBounds,
            "analysis",
            key,
            "a-domain",
            format!("domain {} outside 0:{}", span.domain, n),
        ));
    }
    out
}
