use crate::query::KEYWORDS;
use crate::storage::{Schema, LANGUAGES};

use super::META_COMMANDS;

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !"()!&|=<>~\"".contains(c)
}

/// Completion candidates for the word ending at byte offset `pos`: the
/// offset where that word starts and the sorted matching vocabulary.
pub fn complete(schema: &Schema, line: &str, pos: usize) -> (usize, Vec<String>) {
    let pos = pos.min(line.len());
    let before = &line[..pos];
    let start = before
        .char_indices()
        .rev()
        .find(|(_, c)| !is_word_char(*c))
        .map_or(0, |(i, c)| i + c.len_utf8());
    let word = &before[start..];
    let first_word = before.split_whitespace().next().unwrap_or("");
    let leading = before[..start].trim().is_empty();

    let vocabulary: Vec<String> = if leading && word.starts_with('\\') {
        META_COMMANDS.iter().map(|c| c.to_string()).collect()
    } else if !leading && matches!(first_word, "\\describe" | "\\insert") {
        schema.relations().iter().map(|r| r.name.clone()).collect()
    } else if !leading && first_word == "\\language" {
        LANGUAGES.iter().map(|l| l.to_string()).collect()
    } else if first_word.starts_with('\\') {
        Vec::new()
    } else {
        let mut v: Vec<String> = KEYWORDS.iter().map(|k| k.to_string()).collect();
        v.extend(schema.attribute_names().into_iter().map(str::to_string));
        v
    };
    let lower = word.to_lowercase();
    let mut hits: Vec<String> = vocabulary
        .into_iter()
        .filter(|c| c.starts_with(word) || (KEYWORDS.contains(&c.as_str()) && c.starts_with(&lower)))
        .collect();
    hits.sort();
    hits.dedup();
    (start, hits)
}
