//! Seeded generators for databases and queries, and a brute-force
//! evaluator used as the reference for the query engine.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use tsdb_core::model::Span;
use tsdb_core::query::{Comparator, Comparison, Expr, Literal, Query};
use tsdb_core::storage::{AttrType, Database, Record, Schema, Value};

/// Strings exercising the record encoding: delimiters, escapes, newlines,
/// unicode, whitespace, the empty string.
pub const NASTY: &[&str] = &[
    "",
    "@",
    "a@b",
    "\\",
    "\\@",
    "\\n",
    "line\nbreak",
    "\n",
    "ingénieur",
    "Vortrag über",
    " ",
    "tab\there",
    "-1",
    ".",
    "..",
    "x\\\\y@@",
    "\u{1F600}",
];

/// A small vocabulary so that equality conditions hit.
pub const WORDS: &[&str] = &["a", "b", "ab", "subj", "func", "NP", "PRON_x", "V", "C_Agreement", "", "1", "10", "9"];

pub const PATTERNS: &[&str] = &["^a", "b$", "a|b", ".", "^$", "[0-9]", "^PRON", ":", "^1", "x?y*"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap_or("")
}

fn value<R: Rng>(rng: &mut R, ty: AttrType, id_pool: i64, strings: &[&str]) -> Value {
    match ty {
        AttrType::Integer => {
            if rng.gen_bool(0.05) {
                Value::Int(-1)
            } else {
                Value::Int(rng.gen_range(0..=id_pool))
            }
        }
        AttrType::String => Value::Str(pick(rng, strings).to_string()),
        AttrType::Position => {
            if rng.gen_bool(0.05) {
                Value::Pos(Span::new(-1, -1))
            } else {
                let a = rng.gen_range(0..5);
                Value::Pos(Span::new(a, a + rng.gen_range(0..4)))
            }
        }
    }
}

/// A database over `schema` with at most `max_rows` records per relation;
/// records need not be consistent.  `nasty` draws strings from [`NASTY`]
/// instead of [`WORDS`].
pub fn random_database<R: Rng>(rng: &mut R, schema: &Schema, max_rows: usize, nasty: bool) -> Database {
    let language = *["en", "fr", "de"].choose(rng).unwrap();
    let mut db = Database::new(schema.clone(), language).unwrap();
    let pool = rng.gen_range(3..=40);
    let strings = if nasty { NASTY } else { WORDS };
    for decl in schema.relations() {
        let rows = rng.gen_range(0..=max_rows);
        for _ in 0..rows {
            let record: Record = decl.attributes.iter().map(|a| value(rng, a.ty, pool, strings)).collect();
            // duplicate keys are simply skipped
            let _ = db.insert_record(&decl.name, record);
        }
    }
    if nasty {
        let n = rng.gen_range(0..4);
        for _ in 0..n {
            db.add_taxonomy_name(&format!("T_{}", rng.gen_range(0..100)));
        }
    }
    db
}

fn literal<R: Rng>(rng: &mut R, ty: AttrType, op: Comparator) -> Literal {
    if matches!(op, Comparator::Match | Comparator::NotMatch) {
        return Literal::Str(pick(rng, PATTERNS).to_string());
    }
    match ty {
        AttrType::Integer if rng.gen_bool(0.85) => Literal::Int(rng.gen_range(-1..=40)),
        AttrType::Position if rng.gen_bool(0.7) => {
            let a = rng.gen_range(0..5);
            Literal::Str(format!("{a}:{}", a + rng.gen_range(0..4)))
        }
        _ => Literal::Str(pick(rng, WORDS).to_string()),
    }
}

fn expr<R: Rng>(rng: &mut R, schema: &Schema, attrs: &[&str], depth: u32) -> Expr {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..6) };
    match roll {
        0..=2 => {
            let attr = *attrs.choose(rng).unwrap();
            let op = *Comparator::ALL.choose(rng).unwrap();
            let ty = schema.attribute_type(attr).unwrap();
            Expr::Cmp(Comparison {
                attribute: attr.to_string(),
                op,
                literal: literal(rng, ty, op),
            })
        }
        3 => Expr::Not(Box::new(expr(rng, schema, attrs, depth - 1))),
        4 => Expr::And((0..rng.gen_range(2..=3)).map(|_| expr(rng, schema, attrs, depth - 1)).collect()),
        _ => Expr::Or((0..rng.gen_range(2..=3)).map(|_| expr(rng, schema, attrs, depth - 1)).collect()),
    }
}

/// A query over attributes drawn from at most three relations.
pub fn random_query<R: Rng>(rng: &mut R, schema: &Schema) -> Query {
    let mut relations: Vec<_> = schema.relations().iter().collect();
    relations.shuffle(rng);
    relations.truncate(rng.gen_range(1..=3));
    let attrs: Vec<&str> = relations
        .iter()
        .flat_map(|r| r.attributes.iter().map(|a| a.name.as_str()))
        .collect();
    let projection = (0..rng.gen_range(1..=3))
        .map(|_| attrs.choose(rng).unwrap().to_string())
        .collect();
    let condition = if rng.gen_bool(0.85) {
        let depth = rng.gen_range(0..=3);
        Some(expr(rng, schema, &attrs, depth))
    } else {
        None
    };
    Query { projection, condition }
}

fn compare(value: &Value, cmp: &Comparison) -> bool {
    let rendered = match value {
        Value::Int(i) => i.to_string(),
        Value::Pos(s) => format!("{}:{}", s.start, s.end),
        Value::Str(s) => s.clone(),
    };
    let ord = match (value, &cmp.literal) {
        (Value::Int(a), Literal::Int(b)) => a.cmp(b),
        (_, Literal::Int(b)) => rendered.as_bytes().cmp(b.to_string().as_bytes()),
        (_, Literal::Str(b)) => rendered.as_bytes().cmp(b.as_bytes()),
    };
    match cmp.op {
        Comparator::Eq => ord == Ordering::Equal,
        Comparator::Ne => ord != Ordering::Equal,
        Comparator::Lt => ord == Ordering::Less,
        Comparator::Le => ord != Ordering::Greater,
        Comparator::Gt => ord == Ordering::Greater,
        Comparator::Ge => ord != Ordering::Less,
        Comparator::Match | Comparator::NotMatch => {
            let Literal::Str(p) = &cmp.literal else { unreachable!() };
            Regex::new(p).unwrap().is_match(&rendered) == (cmp.op == Comparator::Match)
        }
    }
}

fn holds(e: &Expr, get: &dyn Fn(&str) -> Value) -> bool {
    match e {
        Expr::And(xs) => xs.iter().all(|x| holds(x, get)),
        Expr::Or(xs) => xs.iter().any(|x| holds(x, get)),
        Expr::Not(x) => !holds(x, get),
        Expr::Cmp(c) => compare(&get(&c.attribute), c),
    }
}

fn first_declaring(schema: &Schema, attr: &str) -> usize {
    schema
        .relations()
        .iter()
        .position(|r| r.attributes.iter().any(|a| a.name == attr))
        .unwrap()
}

/// Reference answer: nested loops over every relation of the smallest
/// subtree of the join tree containing the attributes' home relations,
/// keeping combinations that agree on every join edge among them.
pub fn oracle(db: &Database, q: &Query) -> BTreeSet<Vec<Value>> {
    let schema = db.schema();
    let names: Vec<&str> = schema.relations().iter().map(|r| r.name.as_str()).collect();
    let mut attrs: Vec<String> = q.projection.clone();
    if let Some(c) = &q.condition {
        attrs.extend(c.attributes().into_iter().map(str::to_string));
    }
    let required: BTreeSet<usize> = attrs.iter().map(|a| first_declaring(schema, a)).collect();

    // prune leaves until every leaf is required
    let mut kept: BTreeSet<usize> = (0..names.len()).collect();
    let edges: Vec<(usize, usize, &str)> = schema
        .join_edges()
        .iter()
        .map(|e| {
            let l = names.iter().position(|n| *n == e.left).unwrap();
            let r = names.iter().position(|n| *n == e.right).unwrap();
            (l, r, e.attribute.as_str())
        })
        .collect();
    loop {
        let leaf = kept.iter().copied().find(|&r| {
            !required.contains(&r)
                && edges
                    .iter()
                    .filter(|(a, b, _)| (*a == r && kept.contains(b)) || (*b == r && kept.contains(a)))
                    .count()
                    <= 1
        });
        match leaf {
            Some(r) => {
                kept.remove(&r);
            }
            None => break,
        }
    }

    // order so that each relation touches an earlier one
    let mut order = vec![*kept.iter().next().unwrap()];
    while order.len() < kept.len() {
        let next = kept
            .iter()
            .copied()
            .find(|r| {
                !order.contains(r)
                    && edges.iter().any(|(a, b, _)| (*a == *r && order.contains(b)) || (*b == *r && order.contains(a)))
            })
            .unwrap();
        order.push(next);
    }

    let col = |rel: usize, attr: &str| schema.relations()[rel].attributes.iter().position(|a| a.name == attr).unwrap();
    let mut out = BTreeSet::new();
    let mut bound: Vec<&Record> = Vec::new();
    fn walk<'a>(
        db: &'a Database,
        order: &[usize],
        edges: &[(usize, usize, &str)],
        col: &dyn Fn(usize, &str) -> usize,
        bound: &mut Vec<&'a Record>,
        emit: &mut dyn FnMut(&[&'a Record]),
    ) {
        let depth = bound.len();
        if depth == order.len() {
            emit(bound);
            return;
        }
        let rel = order[depth];
        for record in db.records_at(rel) {
            let agrees = edges.iter().all(|&(a, b, attr)| {
                let other = if a == rel { b } else if b == rel { a } else { return true };
                match order[..depth].iter().position(|r| *r == other) {
                    Some(i) => bound[i][col(other, attr)] == record[col(rel, attr)],
                    None => true,
                }
            });
            if agrees {
                bound.push(record);
                walk(db, order, edges, col, bound, emit);
                bound.pop();
            }
        }
    }
    let mut emit = |tuple: &[&Record]| {
        let get = |attr: &str| -> Value {
            let home = first_declaring(schema, attr);
            let i = order.iter().position(|r| *r == home).unwrap();
            tuple[i][col(home, attr)].clone()
        };
        if q.condition.as_ref().is_none_or(|c| holds(c, &get)) {
            out.insert(q.projection.iter().map(|a| get(a)).collect());
        }
    };
    walk(db, &order, &edges, &col, &mut bound, &mut emit);
    out
}

/// Rows strictly ascending by the leftmost integer column, then by the
/// whole row.
pub fn properly_sorted(rows: &[Vec<Value>]) -> bool {
    let lead = rows.first().and_then(|r| r.iter().position(|v| matches!(v, Value::Int(_))));
    rows.windows(2).all(|w| {
        let by_lead = lead.map_or(Ordering::Equal, |i| w[0][i].cmp(&w[1][i]));
        by_lead.then_with(|| w[0].cmp(&w[1])) == Ordering::Less
    })
}
