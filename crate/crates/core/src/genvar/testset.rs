use std::collections::BTreeSet;

use super::variation::{apply_variation, VariationDirective};
use super::GenvarError;
use crate::model::{ItemPhenomenonLink, TestSet, WELL_FORMED};
use crate::storage::{check_consistency, Database, MISSING_INT};

/// Outcome of [`make_test_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreatedSet {
    pub set_id: i64,
    pub derived_ids: Vec<i64>,
}

/// Derives one ill-formed item per directive from `base`, copies the base's
/// phenomenon links, and groups base and derived items into a new test set.
/// Nothing is inserted unless every step succeeds.
pub fn make_test_set(
    db: &mut Database,
    base: i64,
    directives: &[VariationDirective],
) -> Result<CreatedSet, GenvarError> {
    let item = db.item(base).ok_or(GenvarError::UnknownItem(base))?;
    if item.wellformedness != WELL_FORMED {
        return Err(GenvarError::SourceNotWellFormed(base));
    }
    if directives.is_empty() {
        return Err(GenvarError::NoDirectives);
    }
    let spans = db.spans_of(base);
    let links: Vec<ItemPhenomenonLink> = db.links().into_iter().filter(|l| l.item_id == base).collect();
    let variants = directives
        .iter()
        .map(|d| apply_variation(&item, &spans, d))
        .collect::<Result<Vec<_>, _>>()?;

    let before: BTreeSet<String> = check_consistency(db).iter().map(ToString::to_string).collect();
    let mut work = db.clone();
    let mut derived_ids = Vec::new();
    for mut v in variants {
        let mut new_item = v.item.clone();
        new_item.item_id = MISSING_INT;
        let id = work.insert_item(&new_item)?;
        v.assign_id(id);
        for s in &v.spans {
            work.insert_span(s)?;
        }
        for link in &links {
            work.insert_link(&ItemPhenomenonLink {
                link_id: MISSING_INT,
                item_id: id,
                ..link.clone()
            })?;
        }
        derived_ids.push(id);
    }
    let mut members = vec![base];
    members.extend(&derived_ids);
    let set_id = work.insert_set(&TestSet {
        set_id: MISSING_INT,
        item_ids: members,
    })?;

    let introduced: Vec<String> = check_consistency(&work)
        .iter()
        .map(ToString::to_string)
        .filter(|v| !before.contains(v))
        .collect();
    if !introduced.is_empty() {
        return Err(GenvarError::Inconsistent(introduced));
    }
    *db = work;
    Ok(CreatedSet { set_id, derived_ids })
}
