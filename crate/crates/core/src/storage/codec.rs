//! Record line encoding: fields joined by `@`, with `\@`, `\\` and `\n`
//! escapes.

pub const DELIMITER: char = '@';

pub fn escape_field(field: &str, out: &mut String) {
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '@' => out.push_str("\\@"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
}

pub fn encode_fields<'a>(fields: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(DELIMITER);
        }
        escape_field(f, &mut out);
    }
    out
}

/// Splits one line (without its terminator) into unescaped fields.
pub fn decode_line(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('\\') => cur.push('\\'),
                Some('@') => cur.push('@'),
                Some('n') => cur.push('\n'),
                Some(other) => return Err(format!("invalid escape \\{other}")),
                None => return Err("dangling backslash at end of line".into()),
            },
            DELIMITER => fields.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    fields.push(cur);
    Ok(fields)
}
