use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{Database, Value};
use crate::model::{validate_item, validate_span, Violation, ViolationKind, WELL_FORMED};

/// Every per-record and cross-record rule violation in `db`.
pub fn check_consistency(db: &Database) -> Vec<Violation> {
    let mut out = Vec::new();
    let items: HashMap<i64, _> = db.items().into_iter().map(|i| (i.item_id, i)).collect();

    for item in db.items() {
        out.extend(validate_item(&item));
    }
    for span in db.spans() {
        if let Some(item) = items.get(&span.item_id) {
            out.extend(validate_span(&span, item));
        }
    }

    check_keys(db, &mut out);
    check_references(db, &mut out);
    check_phenomena(db, &mut out);
    check_links(db, &mut out);
    check_sets(db, &items, &mut out);
    check_results(db, &mut out);
    out
}

fn check_keys(db: &Database, out: &mut Vec<Violation>) {
    for (idx, decl) in db.schema().relations().iter().enumerate() {
        let cols = decl.key_indices();
        if cols.is_empty() {
            continue;
        }
        let mut seen = HashSet::new();
        for record in db.records_at(idx) {
            let key: Vec<&Value> = cols.iter().map(|&i| &record[i]).collect();
            if !seen.insert(key.clone()) {
                let rendered: Vec<String> = key.iter().map(|v| v.render()).collect();
                out.push(Violation::new(
                    ViolationKind::DuplicateKey,
                    &decl.name,
                    rendered.join("/"),
                    &decl.attributes[cols[0]].name,
                    "key is not unique",
                ));
            }
        }
    }
}

/// Along every join edge, values in the non-home relation must exist in the
/// attribute's home relation.
fn check_references(db: &Database, out: &mut Vec<Violation>) {
    let schema = db.schema();
    for edge in schema.join_edges() {
        let Some(home) = schema.home_of(&edge.attribute) else {
            continue;
        };
        let home_name = &schema.relations()[home].name;
        let referring = if home_name == &edge.left { &edge.right } else { &edge.left };
        let Some(ref_idx) = schema.relation_index(referring) else {
            continue;
        };
        let home_col = schema.relations()[home].index_of(&edge.attribute).unwrap();
        let ref_col = schema.relations()[ref_idx].index_of(&edge.attribute).unwrap();
        let present: HashSet<&Value> = db.records_at(home).iter().map(|r| &r[home_col]).collect();
        for record in db.records_at(ref_idx) {
            let v = &record[ref_col];
            if !present.contains(v) {
                out.push(Violation::new(
                    ViolationKind::DanglingReference,
                    referring,
                    v.render(),
                    &edge.attribute,
                    format!("{} {} does not exist in {}", edge.attribute, v, home_name),
                ));
            }
        }
    }
}

fn check_phenomena(db: &Database, out: &mut Vec<Violation>) {
    let mut phenomena = db.phenomena();
    // later ids are the duplicates, whatever the record order
    phenomena.sort_by_key(|p| p.phenomenon_id);
    let mut names = HashSet::new();
    for p in &phenomena {
        if p.phenomenon_id < 1 {
            out.push(Violation::new(
                ViolationKind::InvalidId,
                "phenomenon",
                p.phenomenon_id.to_string(),
                "p-id",
                "phenomenon id is not positive",
            ));
        }
        if !names.insert(p.name.as_str()) {
            out.push(Violation::new(
                ViolationKind::DuplicateName,
                "phenomenon",
                p.phenomenon_id.to_string(),
                "p-name",
                format!("name {} is used twice", p.name),
            ));
        }
        if p.date.is_empty() {
            out.push(Violation::new(
                ViolationKind::EmptyDate,
                "phenomenon",
                p.phenomenon_id.to_string(),
                "p-date",
                "date is empty",
            ));
        }
    }
    let known: HashSet<&str> = names
        .iter()
        .copied()
        .chain(db.taxonomy().iter().map(String::as_str))
        .collect();
    for p in &phenomena {
        for (field, list) in [("p-supertypes", &p.supertypes), ("p-presupposition", &p.presupposition)] {
            for name in list {
                if !known.contains(name.as_str()) {
                    out.push(Violation::new(
                        ViolationKind::UnresolvedName,
                        "phenomenon",
                        p.phenomenon_id.to_string(),
                        field,
                        format!("{name} is neither a phenomenon nor a taxonomy name"),
                    ));
                }
            }
        }
    }
    for (kind, field, edges) in [
        (
            ViolationKind::SupertypeCycle,
            "p-supertypes",
            phenomena.iter().map(|p| (p.name.as_str(), &p.supertypes)).collect::<Vec<_>>(),
        ),
        (
            ViolationKind::PresuppositionCycle,
            "p-presupposition",
            phenomena.iter().map(|p| (p.name.as_str(), &p.presupposition)).collect(),
        ),
    ] {
        let graph: BTreeMap<&str, Vec<&str>> = edges
            .into_iter()
            .map(|(n, l)| (n, l.iter().map(String::as_str).collect()))
            .collect();
        for name in cyclic_nodes(&graph) {
            let id = phenomena
                .iter()
                .find(|p| p.name == name)
                .map_or(String::new(), |p| p.phenomenon_id.to_string());
            out.push(Violation::new(
                kind,
                "phenomenon",
                id,
                field,
                format!("{name} lies on a cycle"),
            ));
        }
    }
}

/// Nodes that lie on a cycle of the directed graph.
fn cyclic_nodes<'a>(graph: &BTreeMap<&'a str, Vec<&'a str>>) -> BTreeSet<&'a str> {
    let mut on_cycle = BTreeSet::new();
    for &start in graph.keys() {
        // start is on a cycle iff it is reachable from one of its successors
        let mut stack: Vec<&str> = graph[start].clone();
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == start {
                on_cycle.insert(start);
                break;
            }
            if seen.insert(n) {
                if let Some(next) = graph.get(n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
    }
    on_cycle
}

fn check_links(db: &Database, out: &mut Vec<Violation>) {
    let mut links = db.links();
    links.sort_by_key(|l| l.link_id);
    let mut pairs = HashSet::new();
    for link in links {
        if !pairs.insert((link.item_id, link.phenomenon_id)) {
            out.push(Violation::new(
                ViolationKind::DuplicateKey,
                "item-phenomenon",
                link.link_id.to_string(),
                "i-id",
                format!("item {} linked to phenomenon {} twice", link.item_id, link.phenomenon_id),
            ));
        }
    }
}

fn check_sets(db: &Database, items: &HashMap<i64, crate::model::TestItem>, out: &mut Vec<Violation>) {
    for set in db.sets() {
        let key = set.set_id.to_string();
        if set.item_ids.len() < 2 {
            out.push(Violation::new(
                ViolationKind::SetSize,
                "set",
                key.clone(),
                "s-id",
                format!("set has {} member(s), needs at least 2", set.item_ids.len()),
            ));
        }
        let resolved: Vec<_> = set.item_ids.iter().filter_map(|i| items.get(i)).collect();
        if resolved.len() == set.item_ids.len()
            && !resolved.iter().any(|i| i.wellformedness == WELL_FORMED)
        {
            out.push(Violation::new(
                ViolationKind::SetWithoutPositive,
                "set",
                key,
                "i-id",
                "no well-formed member",
            ));
        }
    }
}

fn check_results(db: &Database, out: &mut Vec<Violation>) {
    for r in db.results() {
        let key = format!("{}/{}", r.run_id, r.item_id);
        let mut bad = |field: &str, msg: &str| {
            out.push(Violation::new(ViolationKind::ResultOutcome, "result", key.clone(), field, msg));
        };
        if !(0..=1).contains(&r.accepted) {
            bad("o-accepted", "accepted must be 0 or 1");
        }
        if r.readings < 0 {
            bad("o-readings", "readings must not be negative");
        }
        if r.time_ms < -1 {
            bad("o-time", "time must be -1 or non-negative");
        }
        if r.accepted == 0 && r.readings != 0 {
            bad("o-readings", "rejected item with readings");
        }
    }
    for run in db.runs() {
        if run.run_id < 1 {
            out.push(Violation::new(
                ViolationKind::InvalidId,
                "run",
                run.run_id.to_string(),
                "r-id",
                "run id is not positive",
            ));
        }
    }
}
