//! Field-by-field record entry with defaults from the previous record.

use super::Console;
use crate::model::item_length;
use crate::storage::{AttrType, Database, Record, Value, MISSING_INT};

pub enum Dialogue {
    Ready(Record),
    Aborted,
}

/// Prompts for every attribute of `relation`.  `previous` supplies the
/// defaults; a single integer key defaults to the next free id.  End of
/// input or a lone `\abort` abandons the dialogue.
pub fn prompt_record(db: &Database, relation: &str, previous: Option<&Record>, console: &mut dyn Console) -> Dialogue {
    let decl = db
        .schema()
        .relation(relation)
        .expect("caller checked the relation exists")
        .clone();
    let single_key = decl.single_integer_key();
    let mut record: Record = Vec::with_capacity(decl.arity());
    for (i, attr) in decl.attributes.iter().enumerate() {
        let default = if Some(i) == single_key {
            Some(Value::Int(db.next_id(relation, &attr.name)))
        } else if attr.name == "i-length" {
            decl.index_of("i-input")
                .filter(|&j| j < i)
                .and_then(|j| record[j].as_str())
                .map(|input| Value::Int(item_length(input)))
        } else {
            previous.map(|p| p[i].clone())
        };
        let prompt = match &default {
            Some(v) => format!("{} [{}]: ", attr.name, v.render()),
            None => format!("{} ({}): ", attr.name, attr.ty),
        };
        let value = loop {
            let Some(line) = console.read_line(&prompt) else {
                return Dialogue::Aborted;
            };
            if line.trim() == "\\abort" {
                return Dialogue::Aborted;
            }
            if line.is_empty() {
                if let Some(d) = &default {
                    break d.clone();
                }
                if attr.ty == AttrType::String {
                    break Value::Str(String::new());
                }
                if attr.ty == AttrType::Integer && !attr.key {
                    break Value::Int(MISSING_INT);
                }
            }
            match Value::parse(&line, attr.ty) {
                Some(v) => break v,
                None => console.print(&format!("{}: expected {}, got {:?}\n", attr.name, attr.ty, line)),
            }
        };
        record.push(value);
    }
    Dialogue::Ready(record)
}
