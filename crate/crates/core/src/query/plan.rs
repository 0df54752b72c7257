use std::collections::BTreeSet;

use super::ast::{Expr, Query};
use crate::storage::Schema;

/// One relation in join order, attached to an earlier one by a shared key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinStep {
    pub relation: usize,
    /// Earlier relation in the plan and the attribute both carry.
    pub parent: Option<(usize, String)>,
}

/// Relations a query touches, closed under join-tree paths, in a fixed
/// breadth-first join order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinPlan {
    pub steps: Vec<JoinStep>,
    pub relation_names: Vec<String>,
    pub projection: Vec<String>,
    pub condition: Option<Expr>,
}

impl JoinPlan {
    /// Names of the joined relations.
    pub fn relation_set(&self) -> BTreeSet<&str> {
        self.relation_names.iter().map(String::as_str).collect()
    }

    pub fn contains(&self, relation: usize) -> bool {
        self.steps.iter().any(|s| s.relation == relation)
    }
}

/// The schema must declare every attribute of `query` (see `parse_query`).
pub fn plan_query(query: &Query, schema: &Schema) -> JoinPlan {
    let mentioned: BTreeSet<usize> = query
        .attributes()
        .into_iter()
        .filter_map(|a| schema.home_of(a))
        .collect();
    let mut members: BTreeSet<usize> = BTreeSet::new();
    if let Some(&first) = mentioned.iter().next() {
        for &other in &mentioned {
            members.extend(schema.path(first, other));
        }
    }

    // The member closest to the tree root heads the join order.
    let depth_order = schema.bfs_order(0);
    let top = depth_order.iter().copied().find(|r| members.contains(r));
    let mut steps = Vec::new();
    if let Some(top) = top {
        steps.push(JoinStep {
            relation: top,
            parent: None,
        });
        let mut i = 0;
        while i < steps.len() {
            let current = steps[i].relation;
            for (n, attr) in schema.neighbours(current) {
                if members.contains(&n) && !steps.iter().any(|s| s.relation == n) {
                    steps.push(JoinStep {
                        relation: n,
                        parent: Some((current, attr.to_string())),
                    });
                }
            }
            i += 1;
        }
    }
    JoinPlan {
        relation_names: members
            .iter()
            .map(|&r| schema.relations()[r].name.clone())
            .collect(),
        steps,
        projection: query.projection.clone(),
        condition: query.condition.clone(),
    }
}
