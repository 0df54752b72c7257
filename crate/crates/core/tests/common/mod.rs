#![allow(dead_code)]

pub mod gen;
pub mod variation;

use std::path::{Path, PathBuf};

use tsdb_core::genvar::{make_test_set, VariationDirective};
use tsdb_core::model::Span;
use tsdb_core::storage::{load_database, Database};

pub const ITEM: i64 = 24020101;

pub fn sample_home() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample")
}

pub fn sample_db() -> Database {
    load_database(&sample_home(), "fr").unwrap()
}

/// The sample plus the derived ill-formed "viens" item.
pub fn two_item_db() -> Database {
    let mut db = sample_db();
    make_test_set(&mut db, ITEM, &[VariationDirective::replace(Span::new(2, 3), "viens")]).unwrap();
    db
}

pub fn mock_adapter(args: &str) -> String {
    format!("{} {args}", env!("CARGO_BIN_EXE_tsdb-mock-adapter"))
}

pub fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// A writable copy of the sample home.
pub fn sample_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&sample_home(), dir.path());
    dir
}

/// Path-sorted (relative path, contents) pairs of every file under `root`.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

/// The sample plus a "C_Agreement" phenomenon and four pronoun items, two
/// of which (24010101, 24010102) are well-formed with a pronominal subject
/// and linked to it.
pub fn pronoun_db() -> Database {
    use tsdb_core::model::{AnalysisSpan, ItemPhenomenonLink, Phenomenon, TestItem};
    let mut db = sample_db();
    let base = db.item(ITEM).unwrap();
    db.insert_phenomenon(&Phenomenon {
        phenomenon_id: 2401,
        name: "C_Agreement".into(),
        supertypes: vec![],
        presupposition: vec![],
        restrictions: "neutral".into(),
        interaction: "none".into(),
        purpose: "test".into(),
        author: "issco".into(),
        date: "jan-95".into(),
        comment: String::new(),
    })
    .unwrap();
    let items: [(i64, &str, i64, &str, Option<i64>); 4] = [
        (24010101, "Il vient .", 1, "PRON_3-sg", Some(2401)),
        (24010102, "Elle vient .", 1, "PRON_3-sg-fem", Some(2401)),
        (24010103, "Il viens .", 0, "PRON_3-sg", Some(2401)),
        (24010104, "Il dort .", 1, "PRON_3-sg", Some(2402)),
    ];
    for (id, input, wf, cat, phen) in items {
        db.insert_item(&TestItem {
            item_id: id,
            wellformedness: wf,
            input: input.into(),
            length: 2,
            ..base.clone()
        })
        .unwrap();
        let subject = input.split(' ').next().unwrap();
        db.insert_span(&AnalysisSpan {
            item_id: id,
            position: Span::new(0, 1),
            instance: subject.into(),
            category: cat.into(),
            function: "subj".into(),
            domain: Span::new(1, 2),
        })
        .unwrap();
        let verb = input.split(' ').nth(1).unwrap();
        db.insert_span(&AnalysisSpan {
            item_id: id,
            position: Span::new(1, 2),
            instance: verb.into(),
            category: "V".into(),
            function: "func".into(),
            domain: Span::new(0, 2),
        })
        .unwrap();
        if let Some(p) = phen {
            db.insert_link(&ItemPhenomenonLink {
                link_id: -1,
                item_id: id,
                phenomenon_id: p,
                parameters: vec![],
            })
            .unwrap();
        }
    }
    db
}
