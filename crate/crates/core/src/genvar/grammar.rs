//! Production grammars that expand into annotated test items.
//!
//! ```text
//! start S
//! depth 8
//! set author issco
//! rule S -> NP V "."
//!   agree NP.agr V.agr
//!   function NP subj V
//!   function V func *
//! malrule S -> NP V "."
//! lex NP "L' ingénieur" NP_sg agr=3sg
//! lex V "vient" V_3-sg agr=3sg
//! ```
//!
//! Symbols with `lex` entries are lexical slots; symbols with rules are
//! phrasal.  A repeated right-hand-side symbol is referenced as `NP#2`.
//! Indented lines annotate the preceding rule.  Derivations that violate an
//! agreement constraint are discarded for ordinary rules and kept as
//! ill-formed items for malrules.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::GenvarError;
use crate::model::{is_punctuation_token, item_length, AnalysisSpan, Span, TestItem, ILL_FORMED, WELL_FORMED};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    Name(String),
    Terminal(String),
}

/// `NP` or `NP#2`: the k-th occurrence of a name on a right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolRef {
    pub name: String,
    pub occurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainRef {
    Child(SymbolRef),
    /// The mother's yield without punctuation.
    Mother,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agreement {
    pub left: (SymbolRef, String),
    pub right: (SymbolRef, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionAnnotation {
    pub target: SymbolRef,
    pub function: String,
    pub domain: DomainRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
    pub malrule: bool,
    pub agreements: Vec<Agreement>,
    pub functions: Vec<FunctionAnnotation>,
    pub head: Option<SymbolRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub slot: String,
    pub tokens: String,
    pub category: String,
    pub features: BTreeMap<String, String>,
}

/// Field values copied onto every generated item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemDefaults {
    pub author: String,
    pub date: String,
    pub register: String,
    pub format: String,
    pub origin: String,
    pub difficulty: i64,
    pub category: String,
}

impl Default for ItemDefaults {
    fn default() -> Self {
        ItemDefaults {
            author: "genvar".into(),
            date: "unknown".into(),
            register: "neutral".into(),
            format: "none".into(),
            origin: "generated".into(),
            difficulty: 1,
            category: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductionGrammar {
    pub start: String,
    pub depth: usize,
    pub defaults: ItemDefaults,
    pub rules: Vec<Rule>,
    pub lexicon: Vec<LexEntry>,
}

/// An item with its analysis; `item.item_id` numbers items from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedItem {
    pub item: TestItem,
    pub spans: Vec<AnalysisSpan>,
}

pub const DEFAULT_DEPTH: usize = 8;

fn bad(line: usize, message: impl Into<String>) -> GenvarError {
    GenvarError::Grammar {
        line,
        message: message.into(),
    }
}

/// Splits a line into words, keeping double-quoted strings (with `\"` and
/// `\\` escapes) as single quoted words.
fn words(line: &str, no: usize) -> Result<Vec<(String, bool)>, GenvarError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e) => s.push(e),
                        None => return Err(bad(no, "unterminated string")),
                    },
                    Some(c) => s.push(c),
                    None => return Err(bad(no, "unterminated string")),
                }
            }
            out.push((s, true));
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '"' {
                    break;
                }
                s.push(c);
                chars.next();
            }
            out.push((s, false));
        }
    }
    Ok(out)
}

fn symbol_ref(text: &str, no: usize) -> Result<SymbolRef, GenvarError> {
    let (name, occurrence) = match text.split_once('#') {
        Some((n, k)) => (n, k.parse::<usize>().ok().filter(|k| *k >= 1).ok_or_else(|| bad(no, format!("bad occurrence in {text:?}")))?),
        None => (text, 1),
    };
    if name.is_empty() {
        return Err(bad(no, "empty symbol reference"));
    }
    Ok(SymbolRef {
        name: name.to_string(),
        occurrence,
    })
}

fn feature_ref(text: &str, no: usize) -> Result<(SymbolRef, String), GenvarError> {
    let (sym, feat) = text
        .rsplit_once('.')
        .filter(|(_, f)| !f.is_empty())
        .ok_or_else(|| bad(no, format!("expected SYMBOL.feature, got {text:?}")))?;
    Ok((symbol_ref(sym, no)?, feat.to_string()))
}

impl Rule {
    fn resolve(&self, r: &SymbolRef) -> Option<usize> {
        self.rhs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Symbol::Name(n) if *n == r.name))
            .nth(r.occurrence - 1)
            .map(|(i, _)| i)
    }
}

impl ProductionGrammar {
    pub fn parse(text: &str) -> Result<Self, GenvarError> {
        let mut start = None;
        let mut depth = DEFAULT_DEPTH;
        let mut defaults = ItemDefaults::default();
        let mut rules: Vec<Rule> = Vec::new();
        let mut lexicon = Vec::new();
        let mut annotating = false;

        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indented = raw.starts_with(char::is_whitespace);
            let ws = words(trimmed, no)?;
            let plain = |k: usize| -> Result<&str, GenvarError> {
                match ws.get(k) {
                    Some((w, false)) => Ok(w.as_str()),
                    _ => Err(bad(no, "missing or quoted word")),
                }
            };
            let head = plain(0)?;
            if indented {
                if !annotating {
                    return Err(bad(no, "annotation outside a rule"));
                }
                let rule = rules.last_mut().expect("annotating implies a rule");
                match head {
                    "agree" if ws.len() == 3 => rule.agreements.push(Agreement {
                        left: feature_ref(plain(1)?, no)?,
                        right: feature_ref(plain(2)?, no)?,
                    }),
                    "function" if ws.len() == 4 => {
                        let domain = match plain(3)? {
                            "*" => DomainRef::Mother,
                            other => DomainRef::Child(symbol_ref(other, no)?),
                        };
                        rule.functions.push(FunctionAnnotation {
                            target: symbol_ref(plain(1)?, no)?,
                            function: plain(2)?.to_string(),
                            domain,
                        });
                    }
                    "head" if ws.len() == 2 => rule.head = Some(symbol_ref(plain(1)?, no)?),
                    _ => return Err(bad(no, format!("bad annotation {trimmed:?}"))),
                }
                let rule = rules.last().expect("just annotated");
                let mut refs: Vec<&SymbolRef> = Vec::new();
                for a in &rule.agreements {
                    refs.push(&a.left.0);
                    refs.push(&a.right.0);
                }
                for f in &rule.functions {
                    refs.push(&f.target);
                    if let DomainRef::Child(r) = &f.domain {
                        refs.push(r);
                    }
                }
                refs.extend(rule.head.as_ref());
                if let Some(r) = refs.into_iter().find(|r| rule.resolve(r).is_none()) {
                    return Err(bad(no, format!("{}#{} is not on the right-hand side", r.name, r.occurrence)));
                }
                continue;
            }
            annotating = false;
            match head {
                "start" if ws.len() == 2 => start = Some(plain(1)?.to_string()),
                "depth" if ws.len() == 2 => {
                    depth = plain(1)?.parse().ok().filter(|d| *d >= 1).ok_or_else(|| bad(no, "bad depth"))?;
                }
                "set" if ws.len() >= 3 => {
                    let value = ws[2..].iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join(" ");
                    match plain(1)? {
                        "author" => defaults.author = value,
                        "date" => defaults.date = value,
                        "register" => defaults.register = value,
                        "format" => defaults.format = value,
                        "origin" => defaults.origin = value,
                        "category" => defaults.category = value,
                        "difficulty" => {
                            defaults.difficulty = value.parse().map_err(|_| bad(no, "bad difficulty"))?;
                        }
                        other => return Err(bad(no, format!("unknown field {other:?}"))),
                    }
                }
                "rule" | "malrule" => {
                    if ws.len() < 4 || ws[2] != ("->".to_string(), false) {
                        return Err(bad(no, "expected `rule LHS -> SYMBOL...`"));
                    }
                    let rhs = ws[3..]
                        .iter()
                        .map(|(w, quoted)| if *quoted { Symbol::Terminal(w.clone()) } else { Symbol::Name(w.clone()) })
                        .collect::<Vec<_>>();
                    if rhs.iter().any(|s| matches!(s, Symbol::Terminal(t) if t.split_whitespace().next().is_none())) {
                        return Err(bad(no, "empty terminal"));
                    }
                    rules.push(Rule {
                        lhs: plain(1)?.to_string(),
                        rhs,
                        malrule: head == "malrule",
                        agreements: Vec::new(),
                        functions: Vec::new(),
                        head: None,
                    });
                    annotating = true;
                }
                "lex" if ws.len() >= 4 => {
                    let (tokens, quoted) = &ws[2];
                    if !quoted || tokens.split_whitespace().next().is_none() {
                        return Err(bad(no, "lexical tokens must be a non-empty quoted string"));
                    }
                    let mut features = BTreeMap::new();
                    for k in 4..ws.len() {
                        let (f, v) = plain(k)?.split_once('=').ok_or_else(|| bad(no, "expected feature=value"))?;
                        features.insert(f.to_string(), v.to_string());
                    }
                    lexicon.push(LexEntry {
                        slot: plain(1)?.to_string(),
                        tokens: tokens.split_whitespace().collect::<Vec<_>>().join(" "),
                        category: plain(3)?.to_string(),
                        features,
                    });
                }
                _ => return Err(bad(no, format!("unrecognised line {trimmed:?}"))),
            }
        }

        let start = start.ok_or_else(|| bad(0, "no start symbol"))?;
        let phrasal: HashSet<&str> = rules.iter().map(|r| r.lhs.as_str()).collect();
        let slots: HashSet<&str> = lexicon.iter().map(|e| e.slot.as_str()).collect();
        if let Some(both) = phrasal.intersection(&slots).next() {
            return Err(bad(0, format!("{both} has both rules and lexical entries")));
        }
        for rule in &rules {
            for s in &rule.rhs {
                if let Symbol::Name(n) = s {
                    if !phrasal.contains(n.as_str()) && !slots.contains(n.as_str()) {
                        return Err(bad(0, format!("undefined symbol {n}")));
                    }
                }
            }
        }
        if !phrasal.contains(start.as_str()) && !slots.contains(start.as_str()) {
            return Err(bad(0, format!("undefined start symbol {start}")));
        }
        Ok(ProductionGrammar {
            start,
            depth,
            defaults,
            rules,
            lexicon,
        })
    }

    /// Rejects grammars in which a phrasal symbol reachable from the start
    /// symbol can derive itself.
    fn check_acyclic(&self) -> Result<(), GenvarError> {
        let mut edges: HashMap<&str, Vec<&str>> = HashMap::new();
        for r in &self.rules {
            let e = edges.entry(r.lhs.as_str()).or_default();
            for s in &r.rhs {
                if let Symbol::Name(n) = s {
                    e.push(n);
                }
            }
        }
        // 0 unvisited, 1 on stack, 2 done
        fn visit<'a>(n: &'a str, edges: &HashMap<&'a str, Vec<&'a str>>, state: &mut HashMap<&'a str, u8>) -> bool {
            match state.get(n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n, 1);
            for m in edges.get(n).into_iter().flatten() {
                if !visit(m, edges, state) {
                    return false;
                }
            }
            state.insert(n, 2);
            true
        }
        if visit(&self.start, &edges, &mut HashMap::new()) {
            Ok(())
        } else {
            Err(GenvarError::DepthExceeded(self.depth))
        }
    }
}

#[derive(Debug, Clone)]
struct SpanDraft {
    position: Span,
    category: String,
    function: String,
    domain: Option<Span>,
}

#[derive(Debug, Clone)]
struct Derivation {
    tokens: Vec<String>,
    spans: Vec<SpanDraft>,
    /// Index of the span covering the whole yield, if one exists.
    root: Option<usize>,
    features: BTreeMap<String, String>,
    malformed: bool,
    height: usize,
}

impl Derivation {
    fn len(&self) -> i64 {
        self.tokens.len() as i64
    }
}

struct Expander<'g> {
    grammar: &'g ProductionGrammar,
    memo: HashMap<String, Vec<Derivation>>,
}

impl Expander<'_> {
    fn expand(&mut self, name: &str, depth: usize) -> Result<Vec<Derivation>, GenvarError> {
        if depth > self.grammar.depth {
            return Err(GenvarError::DepthExceeded(self.grammar.depth));
        }
        if let Some(d) = self.memo.get(name) {
            return Ok(d.clone());
        }
        let grammar = self.grammar;
        let mut out = Vec::new();
        for entry in grammar.lexicon.iter().filter(|e| e.slot == name) {
            let tokens: Vec<String> = entry.tokens.split(' ').map(str::to_string).collect();
            let position = Span::new(0, tokens.len() as i64);
            out.push(Derivation {
                tokens,
                spans: vec![SpanDraft {
                    position,
                    category: entry.category.clone(),
                    function: String::new(),
                    domain: None,
                }],
                root: Some(0),
                features: entry.features.clone(),
                malformed: false,
                height: 1,
            });
        }
        for rule in grammar.rules.iter().filter(|r| r.lhs == name) {
            let mut alternatives = Vec::new();
            for s in &rule.rhs {
                alternatives.push(match s {
                    Symbol::Terminal(t) => vec![Derivation {
                        tokens: t.split_whitespace().map(str::to_string).collect(),
                        spans: Vec::new(),
                        root: None,
                        features: BTreeMap::new(),
                        malformed: false,
                        height: 0,
                    }],
                    Symbol::Name(n) => self.expand(n, depth + 1)?,
                });
            }
            if alternatives.iter().any(Vec::is_empty) {
                continue;
            }
            // odometer over the alternatives, rightmost varies fastest
            let mut index = vec![0usize; alternatives.len()];
            'combinations: loop {
                let children: Vec<&Derivation> = index.iter().zip(&alternatives).map(|(&i, a)| &a[i]).collect();
                if let Some(d) = combine(rule, &children) {
                    out.push(d);
                }
                let mut k = index.len();
                loop {
                    if k == 0 {
                        break 'combinations;
                    }
                    k -= 1;
                    index[k] += 1;
                    if index[k] < alternatives[k].len() {
                        continue 'combinations;
                    }
                    index[k] = 0;
                }
            }
        }
        self.memo.insert(name.to_string(), out.clone());
        Ok(out)
    }
}

fn combine(rule: &Rule, children: &[&Derivation]) -> Option<Derivation> {
    let child = |r: &SymbolRef| children[rule.resolve(r).expect("references checked at parse time")];
    let violated = rule.agreements.iter().any(|a| {
        let l = child(&a.left.0).features.get(&a.left.1);
        let r = child(&a.right.0).features.get(&a.right.1);
        matches!((l, r), (Some(l), Some(r)) if l != r)
    });
    if violated && !rule.malrule {
        return None;
    }

    let mut offsets = Vec::with_capacity(children.len());
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut roots = Vec::with_capacity(children.len());
    for c in children {
        let offset = tokens.len() as i64;
        offsets.push(offset);
        let base = spans.len();
        tokens.extend(c.tokens.iter().cloned());
        for s in &c.spans {
            spans.push(SpanDraft {
                position: Span::new(s.position.start + offset, s.position.end + offset),
                domain: s.domain.map(|d| Span::new(d.start + offset, d.end + offset)),
                ..s.clone()
            });
        }
        roots.push(c.root.map(|r| base + r));
    }
    let extent = |i: usize| Span::new(offsets[i], offsets[i] + children[i].len());
    let content_end = tokens.iter().rposition(|t| !is_punctuation_token(t)).map_or(0, |p| p as i64 + 1);
    let content_start = tokens.iter().position(|t| !is_punctuation_token(t)).unwrap_or(0) as i64;

    for f in &rule.functions {
        let i = rule.resolve(&f.target).expect("references checked at parse time");
        let domain = match &f.domain {
            DomainRef::Mother => Span::new(content_start, content_end.max(content_start)),
            DomainRef::Child(r) => extent(rule.resolve(r).expect("references checked at parse time")),
        };
        let idx = match roots[i] {
            Some(idx) => idx,
            None => {
                let category = match &rule.rhs[i] {
                    Symbol::Name(n) => n.clone(),
                    Symbol::Terminal(t) => t.clone(),
                };
                spans.push(SpanDraft {
                    position: extent(i),
                    category,
                    function: String::new(),
                    domain: None,
                });
                roots[i] = Some(spans.len() - 1);
                spans.len() - 1
            }
        };
        spans[idx].function = f.function.clone();
        spans[idx].domain = Some(domain);
    }
    let features = rule
        .head
        .as_ref()
        .map(|h| child(h).features.clone())
        .unwrap_or_default();
    Some(Derivation {
        root: spans.iter().position(|s| s.position == Span::new(0, tokens.len() as i64)),
        tokens,
        spans,
        features,
        malformed: rule.malrule || children.iter().any(|c| c.malformed),
        height: 1 + children.iter().map(|c| c.height).max().unwrap_or(0),
    })
}

/// Expands `grammar` into at most `limit` distinct items: well-formed
/// derivations first, then strings only malrules derive, each group
/// ordered by derivation height.
pub fn expand_grammar(grammar: &ProductionGrammar, limit: usize) -> Result<Vec<GeneratedItem>, GenvarError> {
    grammar.check_acyclic()?;
    let mut expander = Expander {
        grammar,
        memo: HashMap::new(),
    };
    let mut all = expander.expand(&grammar.start, 1)?;
    all.sort_by_key(|d| (d.malformed, d.height));

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in all {
        if out.len() >= limit {
            break;
        }
        let input = d.tokens.join(" ");
        if item_length(&input) < 1 || !seen.insert(input.clone()) {
            continue;
        }
        let item_id = out.len() as i64 + 1;
        let length = item_length(&input);
        let mut spans: Vec<AnalysisSpan> = d
            .spans
            .iter()
            .map(|s| AnalysisSpan {
                item_id,
                position: s.position,
                instance: d.tokens[s.position.start as usize..s.position.end as usize].join(" "),
                category: s.category.clone(),
                function: s.function.clone(),
                domain: s.domain.unwrap_or(s.position),
            })
            .collect();
        spans.sort_by_key(|s| (s.position, s.domain));
        let defaults = &grammar.defaults;
        out.push(GeneratedItem {
            item: TestItem {
                item_id,
                author: defaults.author.clone(),
                date: defaults.date.clone(),
                register: defaults.register.clone(),
                format: defaults.format.clone(),
                origin: defaults.origin.clone(),
                difficulty: defaults.difficulty,
                wellformedness: if d.malformed { ILL_FORMED } else { WELL_FORMED },
                category: if defaults.category.is_empty() { grammar.start.clone() } else { defaults.category.clone() },
                input,
                length,
                comment: String::new(),
            },
            spans,
        });
    }
    Ok(out)
}
