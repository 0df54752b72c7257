//! The four variation operations that derive an ill-formed item from a
//! well-formed one, with position and domain arithmetic for the analysis.

use std::fmt;

use super::GenvarError;
use crate::model::{item_length, tokens, AnalysisSpan, Span, TestItem, ILL_FORMED, WELL_FORMED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationKind {
    Replacement,
    Addition,
    Deletion,
    Permutation,
}

impl VariationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariationKind::Replacement => "replacement",
            VariationKind::Addition => "addition",
            VariationKind::Deletion => "deletion",
            VariationKind::Permutation => "permutation",
        }
    }
}

impl fmt::Display for VariationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Annotation attached to tokens introduced by a replacement or addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanLabel {
    pub category: Option<String>,
    pub function: Option<String>,
    pub domain: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VariationDirective {
    Replacement {
        target: Span,
        tokens: String,
        label: SpanLabel,
    },
    Addition {
        index: i64,
        tokens: String,
        label: SpanLabel,
    },
    Deletion {
        target: Span,
    },
    Permutation {
        first: Span,
        second: Span,
    },
}

impl VariationDirective {
    pub fn kind(&self) -> VariationKind {
        match self {
            VariationDirective::Replacement { .. } => VariationKind::Replacement,
            VariationDirective::Addition { .. } => VariationKind::Addition,
            VariationDirective::Deletion { .. } => VariationKind::Deletion,
            VariationDirective::Permutation { .. } => VariationKind::Permutation,
        }
    }

    pub fn replace(target: Span, tokens: &str) -> Self {
        VariationDirective::Replacement {
            target,
            tokens: tokens.to_string(),
            label: SpanLabel::default(),
        }
    }

    pub fn add(index: i64, tokens: &str) -> Self {
        VariationDirective::Addition {
            index,
            tokens: tokens.to_string(),
            label: SpanLabel::default(),
        }
    }

    pub fn delete(target: Span) -> Self {
        VariationDirective::Deletion { target }
    }

    pub fn permute(first: Span, second: Span) -> Self {
        VariationDirective::Permutation { first, second }
    }
}

/// Traceability record for a derived item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub derived_id: i64,
    pub source_id: i64,
    pub directive: VariationDirective,
}

impl Provenance {
    /// The fixed comment prefix stored on derived items.
    pub fn comment(&self) -> String {
        format!("derived:{}:{}", self.source_id, self.directive.kind())
    }

    /// Source id and operation name read back from an item comment.
    pub fn parse_comment(comment: &str) -> Option<(i64, VariationKind)> {
        let rest = comment.strip_prefix("derived:")?;
        let (id, kind) = rest.split_once(':')?;
        let kind = kind.split_whitespace().next()?;
        let kind = [
            VariationKind::Replacement,
            VariationKind::Addition,
            VariationKind::Deletion,
            VariationKind::Permutation,
        ]
        .into_iter()
        .find(|k| k.as_str() == kind)?;
        Some((id.parse().ok()?, kind))
    }
}

/// Result of applying one directive.  `item.item_id` is 0 until the
/// storage allocator assigns an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub item: TestItem,
    pub spans: Vec<AnalysisSpan>,
    pub provenance: Provenance,
}

impl Variant {
    pub fn assign_id(&mut self, id: i64) {
        self.item.item_id = id;
        self.provenance.derived_id = id;
        for s in &mut self.spans {
            s.item_id = id;
        }
    }
}

/// How an edit rewrites the token index space.
enum Edit {
    /// Tokens `[start, end)` become `inserted` new tokens.
    Splice { region: Span, inserted: i64 },
    /// Two disjoint ranges trade places (`first` precedes `second`).
    Swap { first: Span, second: Span },
}

enum Mapped {
    Keep(Span),
    Drop,
}

impl Edit {
    /// Positions survive only when untouched by the edit (or exactly the
    /// replaced/swapped range); domains may also enclose the edit.
    fn map(&self, span: Span, is_domain: bool) -> Mapped {
        match *self {
            Edit::Splice { region, inserted } => {
                let delta = inserted - region.len();
                let shift_start = |x: i64| if x >= region.end { x + delta } else { x };
                // an end index at an insertion point stays in front of it
                let shift_end = |x: i64| if x >= region.end && x > region.start { x + delta } else { x };
                let disjoint = if region.is_empty() {
                    span.end <= region.start || span.start >= region.start
                } else {
                    !span.overlaps(&region)
                };
                if disjoint {
                    return Mapped::Keep(Span::new(shift_start(span.start), shift_end(span.end)));
                }
                if span == region && inserted > 0 {
                    return Mapped::Keep(Span::new(region.start, region.start + inserted));
                }
                if is_domain && span.contains(&region) && span != region {
                    let mapped = Span::new(span.start, span.end + delta);
                    return if mapped.is_empty() { Mapped::Drop } else { Mapped::Keep(mapped) };
                }
                Mapped::Drop
            }
            Edit::Swap { first, second } => {
                let middle = second.start - first.end;
                let whole = Span::new(first.start, second.end);
                if !span.overlaps(&whole) || span.contains(&whole) {
                    return Mapped::Keep(span);
                }
                let moved = |by: i64| Mapped::Keep(Span::new(span.start + by, span.end + by));
                if first.contains(&span) {
                    moved(second.len() + middle)
                } else if second.contains(&span) {
                    moved(first.start - second.start)
                } else if Span::new(first.end, second.start).contains(&span) {
                    moved(second.len() - first.len())
                } else {
                    Mapped::Drop
                }
            }
        }
    }
}

fn check_bounds(span: Span, n: i64) -> Result<(), GenvarError> {
    if span.start < 0 || span.start >= span.end || span.end > n {
        return Err(GenvarError::OutOfBounds {
            span,
            tokens: n,
        });
    }
    Ok(())
}

fn new_tokens(text: &str) -> Result<Vec<String>, GenvarError> {
    let toks: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if toks.is_empty() {
        return Err(GenvarError::EmptyTokens);
    }
    Ok(toks)
}

/// Derives an ill-formed item from `item` and its analysis.
pub fn apply_variation(
    item: &TestItem,
    spans: &[AnalysisSpan],
    directive: &VariationDirective,
) -> Result<Variant, GenvarError> {
    if item.wellformedness != WELL_FORMED {
        return Err(GenvarError::SourceNotWellFormed(item.item_id));
    }
    let source: Vec<String> = tokens(&item.input).into_iter().map(str::to_string).collect();
    let n = source.len() as i64;
    let mut fresh: Option<(Span, &SpanLabel)> = None;

    let (out_tokens, edit) = match directive {
        VariationDirective::Replacement { target, tokens, label } => {
            check_bounds(*target, n)?;
            let added = new_tokens(tokens)?;
            let k = added.len() as i64;
            let mut out = source[..target.start as usize].to_vec();
            out.extend(added);
            out.extend_from_slice(&source[target.end as usize..]);
            let replaced = Span::new(target.start, target.start + k);
            let exact = spans.iter().any(|s| s.position == *target);
            if !exact {
                fresh = Some((replaced, label));
            }
            (out, Edit::Splice { region: *target, inserted: k })
        }
        VariationDirective::Addition { index, tokens, label } => {
            if *index < 0 || *index > n {
                return Err(GenvarError::OutOfBounds {
                    span: Span::new(*index, *index),
                    tokens: n,
                });
            }
            let added = new_tokens(tokens)?;
            let k = added.len() as i64;
            let mut out = source[..*index as usize].to_vec();
            out.extend(added);
            out.extend_from_slice(&source[*index as usize..]);
            fresh = Some((Span::new(*index, index + k), label));
            (out, Edit::Splice { region: Span::new(*index, *index), inserted: k })
        }
        VariationDirective::Deletion { target } => {
            check_bounds(*target, n)?;
            let mut out = source[..target.start as usize].to_vec();
            out.extend_from_slice(&source[target.end as usize..]);
            (out, Edit::Splice { region: *target, inserted: 0 })
        }
        VariationDirective::Permutation { first, second } => {
            check_bounds(*first, n)?;
            check_bounds(*second, n)?;
            if first.overlaps(second) {
                return Err(GenvarError::Overlap(*first, *second));
            }
            let (a, b) = if first.start < second.start { (*first, *second) } else { (*second, *first) };
            let part = |s: i64, e: i64| source[s as usize..e as usize].to_vec();
            let mut out = part(0, a.start);
            out.extend(part(b.start, b.end));
            out.extend(part(a.end, b.start));
            out.extend(part(a.start, a.end));
            out.extend(part(b.end, n));
            (out, Edit::Swap { first: a, second: b })
        }
    };

    let input = out_tokens.join(" ");
    if item_length(&input) < 1 {
        return Err(GenvarError::EmptyResult);
    }
    let slice = |s: Span| out_tokens[s.start as usize..s.end as usize].join(" ");
    let mut new_spans = Vec::new();
    for s in spans {
        let (Mapped::Keep(position), Mapped::Keep(domain)) = (edit.map(s.position, false), edit.map(s.domain, true)) else {
            continue;
        };
        let mut mapped = AnalysisSpan {
            item_id: 0,
            position,
            instance: slice(position),
            category: s.category.clone(),
            function: s.function.clone(),
            domain,
        };
        if let VariationDirective::Replacement { target, label, .. } = directive {
            if s.position == *target {
                if let Some(c) = &label.category {
                    mapped.category = c.clone();
                }
                if let Some(f) = &label.function {
                    mapped.function = f.clone();
                }
                if let Some(d) = label.domain {
                    mapped.domain = d;
                }
            }
        }
        new_spans.push(mapped);
    }
    let length = item_length(&input);
    if let Some((position, label)) = fresh {
        if let Some(category) = &label.category {
            let whole = Span::new(0, length.max(1));
            new_spans.push(AnalysisSpan {
                item_id: 0,
                position,
                instance: slice(position),
                category: category.clone(),
                function: label.function.clone().unwrap_or_default(),
                domain: label.domain.unwrap_or(whole),
            });
        }
    }
    new_spans.sort_by_key(|s| (s.position, s.domain));

    let provenance = Provenance {
        derived_id: 0,
        source_id: item.item_id,
        directive: directive.clone(),
    };
    let item = TestItem {
        item_id: 0,
        wellformedness: ILL_FORMED,
        input,
        length,
        comment: provenance.comment(),
        ..item.clone()
    };
    Ok(Variant {
        item,
        spans: new_spans,
        provenance,
    })
}
