use std::cmp::Ordering;
use std::collections::HashMap;

use regex::Regex;

use super::ast::{Comparator, Comparison, Expr, Literal};
use super::plan::JoinPlan;
use super::QueryError;
use crate::storage::{encode_fields, Database, Record, Value};

/// Projected, duplicate-free, sorted query answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(header: Vec<String>, mut rows: Vec<Vec<Value>>) -> ResultTable {
        sort_rows(&mut rows);
        ResultTable { header, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One line per row in the storage record encoding.
    pub fn delimited_lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(Value::render).collect();
                encode_fields(cells.iter().map(String::as_str))
            })
            .collect()
    }

    pub fn render_delimited(&self) -> String {
        let mut out = String::new();
        for line in self.delimited_lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Left-aligned columns under a header, followed by a row count.
    pub fn render_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.render().replace('\n', "\\n")).collect())
            .collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |fields: &[String]| {
            let mut s = String::new();
            for (i, (f, w)) in fields.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                s.push_str(f);
                s.extend(std::iter::repeat_n(' ', w - f.chars().count()));
            }
            s.trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        for row in &cells {
            out.push_str(&line(row));
        }
        let n = self.rows.len();
        out.push_str(&format!("({n} row{})\n", if n == 1 { "" } else { "s" }));
        out
    }
}

/// Ascending by the leftmost integer column, then by all columns; duplicates
/// removed.
pub fn sort_rows(rows: &mut Vec<Vec<Value>>) {
    let first_int = rows
        .first()
        .and_then(|r| r.iter().position(|v| matches!(v, Value::Int(_))));
    rows.sort_by(|a, b| {
        let lead = match first_int {
            Some(i) => a[i].cmp(&b[i]),
            None => Ordering::Equal,
        };
        lead.then_with(|| a.cmp(b))
    });
    rows.dedup();
}

pub(crate) struct Matcher {
    regexes: HashMap<String, Regex>,
}

impl Matcher {
    pub(crate) fn for_condition(condition: Option<&Expr>) -> Result<Matcher, QueryError> {
        let mut regexes = HashMap::new();
        for pattern in condition.map(Expr::patterns).unwrap_or_default() {
            if regexes.contains_key(&pattern) {
                continue;
            }
            let re = Regex::new(&pattern).map_err(|e| QueryError::InvalidRegex {
                pattern: pattern.clone(),
                message: e.to_string(),
            })?;
            regexes.insert(pattern, re);
        }
        Ok(Matcher { regexes })
    }

    fn compare(&self, value: &Value, cmp: &Comparison) -> bool {
        let ord = || match (value, &cmp.literal) {
            (Value::Int(a), Literal::Int(b)) => a.cmp(b),
            (v, lit) => v.render().as_str().cmp(lit.text().as_str()),
        };
        match cmp.op {
            Comparator::Eq => ord() == Ordering::Equal,
            Comparator::Ne => ord() != Ordering::Equal,
            Comparator::Lt => ord() == Ordering::Less,
            Comparator::Le => ord() != Ordering::Greater,
            Comparator::Gt => ord() == Ordering::Greater,
            Comparator::Ge => ord() != Ordering::Less,
            Comparator::Match | Comparator::NotMatch => {
                let re = &self.regexes[&cmp.literal.text()];
                re.is_match(&value.render()) == (cmp.op == Comparator::Match)
            }
        }
    }

    pub(crate) fn eval<'a>(&self, expr: &Expr, lookup: &impl Fn(&str) -> &'a Value) -> bool {
        match expr {
            Expr::And(xs) => xs.iter().all(|x| self.eval(x, lookup)),
            Expr::Or(xs) => xs.iter().any(|x| self.eval(x, lookup)),
            Expr::Not(x) => !self.eval(x, lookup),
            Expr::Cmp(c) => self.compare(lookup(&c.attribute), c),
        }
    }
}

/// Nested-loop join along the plan's tree edges with a hash lookup built on
/// the smaller side, then filter, project, deduplicate and sort.
pub fn evaluate_query(plan: &JoinPlan, db: &Database) -> Result<ResultTable, QueryError> {
    let matcher = Matcher::for_condition(plan.condition.as_ref())?;
    let schema = db.schema();
    let slot: HashMap<usize, usize> = plan
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| (s.relation, i))
        .collect();
    let column = |attr: &str| -> Result<(usize, usize), QueryError> {
        let home = schema
            .home_of(attr)
            .ok_or_else(|| QueryError::UnknownAttribute(attr.to_string()))?;
        let col = schema.relations()[home].index_of(attr).expect("home declares attribute");
        Ok((slot[&home], col))
    };

    let Some(first) = plan.steps.first() else {
        return Ok(ResultTable::new(plan.projection.clone(), Vec::new()));
    };
    let mut tuples: Vec<Vec<&Record>> = db.records_at(first.relation).iter().map(|r| vec![r]).collect();
    for step in &plan.steps[1..] {
        let (parent, attr) = step.parent.as_ref().expect("non-initial steps have a parent");
        let parent_slot = slot[parent];
        let parent_col = schema.relations()[*parent].index_of(attr).expect("edge attribute");
        let child_col = schema.relations()[step.relation].index_of(attr).expect("edge attribute");
        let records = db.records_at(step.relation);
        let mut joined = Vec::new();
        if records.len() <= tuples.len() {
            let mut index: HashMap<&Value, Vec<&Record>> = HashMap::new();
            for r in records {
                index.entry(&r[child_col]).or_default().push(r);
            }
            for t in &tuples {
                if let Some(matches) = index.get(&t[parent_slot][parent_col]) {
                    for r in matches {
                        let mut next = t.clone();
                        next.push(r);
                        joined.push(next);
                    }
                }
            }
        } else {
            let mut index: HashMap<&Value, Vec<&Vec<&Record>>> = HashMap::new();
            for t in &tuples {
                index.entry(&t[parent_slot][parent_col]).or_default().push(t);
            }
            for r in records {
                if let Some(matches) = index.get(&r[child_col]) {
                    for t in matches {
                        let mut next = (*t).clone();
                        next.push(r);
                        joined.push(next);
                    }
                }
            }
        }
        tuples = joined;
    }

    let mut columns: HashMap<&str, (usize, usize)> = HashMap::new();
    for attr in plan
        .projection
        .iter()
        .map(String::as_str)
        .chain(plan.condition.iter().flat_map(Expr::attributes))
    {
        columns.insert(attr, column(attr)?);
    }
    let mut rows = Vec::new();
    for t in &tuples {
        let lookup = |attr: &str| {
            let (s, c) = columns[attr];
            &t[s][c]
        };
        if plan.condition.as_ref().is_none_or(|c| matcher.eval(c, &lookup)) {
            rows.push(plan.projection.iter().map(|a| lookup(a).clone()).collect());
        }
    }
    Ok(ResultTable::new(plan.projection.clone(), rows))
}
