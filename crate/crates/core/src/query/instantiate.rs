use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::Query;
use super::eval::evaluate_query;
use super::plan::plan_query;
use super::QueryError;
use crate::model::{split_name_list, WELL_FORMED};
use crate::storage::{Database, Row, Value};

/// Ids of the items whose `i-id` survives the query condition.
pub fn select_item_ids(db: &Database, query: &Query) -> Result<BTreeSet<i64>, QueryError> {
    let ids_only = Query {
        projection: vec!["i-id".to_string()],
        condition: query.condition.clone(),
    };
    let table = evaluate_query(&plan_query(&ids_only, db.schema()), db)?;
    Ok(table.rows.iter().filter_map(|r| r[0].as_int()).collect())
}

/// A concrete test suite: the selected items with all their dependent
/// annotations, the phenomena they reach, and test sets cut down to the
/// surviving members.
pub fn instantiate_testsuite(db: &Database, query: &Query) -> Result<Database, QueryError> {
    if query.condition.is_none() {
        return Ok(db.clone());
    }
    let ids = select_item_ids(db, query)?;
    let mut out = Database::new(db.schema().clone(), db.language()).expect("language already valid");
    out.set_taxonomy(db.taxonomy().to_vec());

    let keep_item = |r: &Row<'_>| ids.contains(&r.int("i-id"));
    copy(db, &mut out, "item", keep_item);
    copy(db, &mut out, "analysis", keep_item);
    copy(db, &mut out, "item-phenomenon", keep_item);

    let links: HashSet<i64> = out.rows("item-phenomenon").map(|r| r.int("ip-id")).collect();
    copy(db, &mut out, "parameter", |r| links.contains(&r.int("ip-id")));

    // phenomena reachable from links, closed under named supertypes and
    // presuppositions
    let by_name: HashMap<String, (i64, Vec<String>)> = db
        .rows("phenomenon")
        .map(|r| {
            let mut refs = split_name_list(&r.string("p-supertypes"));
            refs.extend(split_name_list(&r.string("p-presupposition")));
            (r.string("p-name"), (r.int("p-id"), refs))
        })
        .collect();
    let id_to_name: HashMap<i64, &String> = by_name.iter().map(|(n, (id, _))| (*id, n)).collect();
    let mut reached: HashSet<i64> = out.rows("item-phenomenon").map(|r| r.int("p-id")).collect();
    let mut stack: Vec<i64> = reached.iter().copied().collect();
    while let Some(id) = stack.pop() {
        let Some(name) = id_to_name.get(&id) else { continue };
        for referenced in &by_name[*name].1 {
            if let Some((rid, _)) = by_name.get(referenced) {
                if reached.insert(*rid) {
                    stack.push(*rid);
                }
            }
        }
    }
    copy(db, &mut out, "phenomenon", |r| reached.contains(&r.int("p-id")));

    let wellformed: HashSet<i64> = out
        .rows("item")
        .filter(|r| r.int("i-wf") == WELL_FORMED)
        .map(|r| r.int("i-id"))
        .collect();
    let kept_sets: HashSet<i64> = db
        .sets()
        .into_iter()
        .filter_map(|s| {
            let members: Vec<i64> = s.item_ids.into_iter().filter(|i| ids.contains(i)).collect();
            (members.len() >= 2 && members.iter().any(|i| wellformed.contains(i))).then_some(s.set_id)
        })
        .collect();
    copy(db, &mut out, "set", |r| kept_sets.contains(&r.int("s-id")) && keep_item(r));

    copy(db, &mut out, "run", |_| true);
    copy(db, &mut out, "result", keep_item);
    Ok(out)
}

fn copy(from: &Database, to: &mut Database, relation: &str, keep: impl Fn(&Row<'_>) -> bool) {
    let records: Vec<Vec<Value>> = from
        .rows(relation)
        .filter(|r| keep(r))
        .map(|r| r.record().clone())
        .collect();
    for record in records {
        to.insert_record(relation, record)
            .expect("records of a loaded database fit its own schema");
    }
}
