//! Directive files: one directive per line, fields `@`-separated with the
//! storage escapes.
//!
//! ```text
//! replacement@<start:end>@<tokens>[@<category>[@<function>[@<domain>]]]
//! addition@<index>@<tokens>[@<category>[@<function>[@<domain>]]]
//! deletion@<start:end>
//! permutation@<start:end>@<start:end>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.  Empty optional
//! fields mean "not given".

use super::variation::{SpanLabel, VariationDirective};
use super::GenvarError;
use crate::model::{parse_canonical_int, Span};
use crate::storage::{decode_line, encode_fields};

fn bad(line: usize, message: impl Into<String>) -> GenvarError {
    GenvarError::Directive {
        line,
        message: message.into(),
    }
}

fn label(line: usize, fields: &[String]) -> Result<SpanLabel, GenvarError> {
    let opt = |i: usize| fields.get(i).filter(|s| !s.is_empty()).cloned();
    let domain = match opt(2) {
        Some(d) => Some(Span::parse(&d).ok_or_else(|| bad(line, format!("bad domain {d:?}")))?),
        None => None,
    };
    if fields.len() > 3 {
        return Err(bad(line, "too many fields"));
    }
    Ok(SpanLabel {
        category: opt(0),
        function: opt(1),
        domain,
    })
}

pub fn parse_directive(text: &str, line: usize) -> Result<VariationDirective, GenvarError> {
    let fields = decode_line(text).map_err(|m| bad(line, m))?;
    let span = |i: usize| -> Result<Span, GenvarError> {
        let f = fields.get(i).ok_or_else(|| bad(line, "missing span"))?;
        Span::parse(f).ok_or_else(|| bad(line, format!("bad span {f:?}")))
    };
    let text_at = |i: usize| -> Result<String, GenvarError> {
        fields
            .get(i)
            .filter(|s| !s.trim().is_empty())
            .cloned()
            .ok_or_else(|| bad(line, "missing tokens"))
    };
    match fields[0].as_str() {
        "replacement" => Ok(VariationDirective::Replacement {
            target: span(1)?,
            tokens: text_at(2)?,
            label: label(line, &fields[3.min(fields.len())..])?,
        }),
        "addition" => {
            let f = fields.get(1).ok_or_else(|| bad(line, "missing index"))?;
            let index = parse_canonical_int(f).ok_or_else(|| bad(line, format!("bad index {f:?}")))?;
            Ok(VariationDirective::Addition {
                index,
                tokens: text_at(2)?,
                label: label(line, &fields[3.min(fields.len())..])?,
            })
        }
        "deletion" if fields.len() == 2 => Ok(VariationDirective::Deletion { target: span(1)? }),
        "permutation" if fields.len() == 3 => Ok(VariationDirective::Permutation {
            first: span(1)?,
            second: span(2)?,
        }),
        "deletion" | "permutation" => Err(bad(line, "wrong number of fields")),
        other => Err(bad(line, format!("unknown operation {other:?}"))),
    }
}

pub fn parse_directives(text: &str) -> Result<Vec<VariationDirective>, GenvarError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_directive(l, i + 1))
        .collect()
}

pub fn render_directive(d: &VariationDirective) -> String {
    let labelled = |kind: &str, at: String, tokens: &str, label: &SpanLabel| {
        let mut fields = vec![kind.to_string(), at, tokens.to_string()];
        let extra = [
            label.category.clone().unwrap_or_default(),
            label.function.clone().unwrap_or_default(),
            label.domain.map(|d| d.to_string()).unwrap_or_default(),
        ];
        let used = extra.iter().rposition(|s| !s.is_empty()).map_or(0, |i| i + 1);
        fields.extend(extra.into_iter().take(used));
        encode_fields(fields.iter().map(String::as_str))
    };
    match d {
        VariationDirective::Replacement { target, tokens, label } => {
            labelled("replacement", target.to_string(), tokens, label)
        }
        VariationDirective::Addition { index, tokens, label } => {
            labelled("addition", index.to_string(), tokens, label)
        }
        VariationDirective::Deletion { target } => format!("deletion@{target}"),
        VariationDirective::Permutation { first, second } => format!("permutation@{first}@{second}"),
    }
}
