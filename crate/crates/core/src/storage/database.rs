use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::codec::{decode_line, escape_field, DELIMITER};
use super::schema::{RelationDecl, Schema};
use super::{StorageError, Value, MISSING_INT, SCHEMA_FILE, TAXONOMY_FILE};
use crate::model::{
    join_name_list, split_name_list, AnalysisSpan, ItemPhenomenonLink, Phenomenon, ResultRecord,
    Run, Span, TestItem, TestSet,
};

pub const LANGUAGES: &[&str] = &["en", "fr", "de"];

pub type Record = Vec<Value>;

#[derive(Debug, Clone, Default)]
struct Table {
    records: Vec<Record>,
    keys: HashSet<Vec<Value>>,
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

/// An in-memory test suite database for one language.
///
/// Cloning yields an independent snapshot; readers share snapshots while a
/// single owner mutates.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    language: String,
    schema: Schema,
    tables: Vec<Table>,
    taxonomy: Vec<String>,
}

/// Read access to one record by attribute name.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    decl: &'a RelationDecl,
    record: &'a Record,
}

impl<'a> Row<'a> {
    pub fn get(&self, attr: &str) -> Option<&'a Value> {
        self.decl.index_of(attr).map(|i| &self.record[i])
    }

    pub fn int(&self, attr: &str) -> i64 {
        self.get(attr).and_then(Value::as_int).unwrap_or(MISSING_INT)
    }

    pub fn string(&self, attr: &str) -> String {
        self.get(attr)
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string()
    }

    pub fn span(&self, attr: &str) -> Span {
        self.get(attr)
            .and_then(Value::as_span)
            .unwrap_or(Span::new(MISSING_INT, MISSING_INT))
    }

    pub fn record(&self) -> &'a Record {
        self.record
    }
}

fn key_string(key: &[Value]) -> String {
    key.iter().map(Value::render).collect::<Vec<_>>().join("/")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StorageError + '_ {
    move |source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Database {
    pub fn new(schema: Schema, language: &str) -> Result<Database, StorageError> {
        if !LANGUAGES.contains(&language) {
            return Err(StorageError::UnknownLanguage(language.to_string()));
        }
        let tables = vec![Table::default(); schema.relations().len()];
        Ok(Database {
            language: language.to_string(),
            schema,
            tables,
            taxonomy: Vec::new(),
        })
    }

    /// An empty database over the bundled schema.
    pub fn empty(language: &str) -> Result<Database, StorageError> {
        Database::new(Schema::default_schema(), language)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Abstract phenomenon names that supertypes and presuppositions may
    /// refer to without a phenomenon record.
    pub fn taxonomy(&self) -> &[String] {
        &self.taxonomy
    }

    pub fn add_taxonomy_name(&mut self, name: &str) {
        if !self.taxonomy.iter().any(|n| n == name) {
            self.taxonomy.push(name.to_string());
        }
    }

    pub fn set_taxonomy(&mut self, names: Vec<String>) {
        self.taxonomy = names;
    }

    fn relation_idx(&self, relation: &str) -> Result<usize, StorageError> {
        self.schema
            .relation_index(relation)
            .ok_or_else(|| StorageError::UnknownRelation(relation.to_string()))
    }

    pub fn records(&self, relation: &str) -> Result<&[Record], StorageError> {
        Ok(&self.tables[self.relation_idx(relation)?].records)
    }

    pub fn records_at(&self, relation: usize) -> &[Record] {
        &self.tables[relation].records
    }

    pub fn len(&self, relation: &str) -> usize {
        self.records(relation).map_or(0, <[Record]>::len)
    }

    pub fn rows<'a>(&'a self, relation: &str) -> impl Iterator<Item = Row<'a>> + 'a {
        let idx = self.schema.relation_index(relation);
        let decl = idx.map(|i| &self.schema.relations()[i]);
        let records: &[Record] = idx.map_or(&[], |i| &self.tables[i].records);
        records.iter().map(move |record| Row {
            decl: decl.expect("relation exists when it has records"),
            record,
        })
    }

    fn check_types(&self, decl: &RelationDecl, record: &Record) -> Result<(), StorageError> {
        if record.len() != decl.arity() {
            return Err(StorageError::TypeMismatch {
                relation: decl.name.clone(),
                message: format!("expected {} fields, got {}", decl.arity(), record.len()),
            });
        }
        for (v, a) in record.iter().zip(&decl.attributes) {
            if v.ty() != a.ty {
                return Err(StorageError::TypeMismatch {
                    relation: decl.name.clone(),
                    message: format!("{} expects {}, got {:?}", a.name, a.ty, v),
                });
            }
        }
        Ok(())
    }

    /// Appends a record.  A relation keyed by a single integer allocates
    /// `1 + max` when the key is given as the missing value (`-1`); the
    /// allocated or supplied key is returned for such relations.
    pub fn insert_record(
        &mut self,
        relation: &str,
        mut record: Record,
    ) -> Result<Option<i64>, StorageError> {
        let idx = self.relation_idx(relation)?;
        let decl = &self.schema.relations()[idx];
        self.check_types(decl, &record)?;
        let single = decl.single_integer_key();
        let mut assigned = None;
        if let Some(k) = single {
            let id = match record[k] {
                Value::Int(MISSING_INT) => self.max_id(idx, k) + 1,
                Value::Int(id) => id,
                _ => unreachable!("type checked"),
            };
            record[k] = Value::Int(id);
            assigned = Some(id);
        }
        let key_cols = decl.key_indices();
        let table = &mut self.tables[idx];
        if !key_cols.is_empty() {
            let key: Vec<Value> = key_cols.iter().map(|&i| record[i].clone()).collect();
            if table.keys.contains(&key) {
                return Err(StorageError::DuplicateKey {
                    relation: relation.to_string(),
                    key: key_string(&key),
                });
            }
            table.keys.insert(key);
        }
        table.records.push(record);
        Ok(assigned)
    }

    fn max_id(&self, relation: usize, col: usize) -> i64 {
        self.tables[relation]
            .records
            .iter()
            .filter_map(|r| r[col].as_int())
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Next id the allocator would hand out for a relation's integer column.
    pub fn next_id(&self, relation: &str, attr: &str) -> i64 {
        let Ok(idx) = self.relation_idx(relation) else {
            return 1;
        };
        match self.schema.relations()[idx].index_of(attr) {
            Some(col) => self.max_id(idx, col) + 1,
            None => 1,
        }
    }

    /// Removes every record matching `pred`; no cascading.
    pub fn delete_records<F>(&mut self, relation: &str, mut pred: F) -> Result<usize, StorageError>
    where
        F: FnMut(Row<'_>) -> bool,
    {
        let idx = self.relation_idx(relation)?;
        let decl = &self.schema.relations()[idx];
        let table = &mut self.tables[idx];
        let before = table.records.len();
        table.records.retain(|record| !pred(Row { decl, record }));
        let removed = before - table.records.len();
        if removed > 0 {
            let key_cols = decl.key_indices();
            table.keys = table
                .records
                .iter()
                .map(|r| key_cols.iter().map(|&i| r[i].clone()).collect())
                .collect();
        }
        Ok(removed)
    }

    /// Builds a record for `relation` from named values; unnamed attributes
    /// receive their missing value.
    pub fn make_record(
        &self,
        relation: &str,
        values: &[(&str, Value)],
    ) -> Result<Record, StorageError> {
        let decl = &self.schema.relations()[self.relation_idx(relation)?];
        let mut record: Record = decl.attributes.iter().map(|a| Value::missing(a.ty)).collect();
        for (name, v) in values {
            let i = decl.index_of(name).ok_or_else(|| StorageError::TypeMismatch {
                relation: relation.to_string(),
                message: format!("no attribute {name}"),
            })?;
            record[i] = v.clone();
        }
        Ok(record)
    }

    pub fn items(&self) -> Vec<TestItem> {
        self.rows("item").map(item_from_row).collect()
    }

    pub fn item(&self, id: i64) -> Option<TestItem> {
        self.rows("item").find(|r| r.int("i-id") == id).map(item_from_row)
    }

    pub fn spans(&self) -> Vec<AnalysisSpan> {
        self.rows("analysis").map(span_from_row).collect()
    }

    pub fn spans_of(&self, item_id: i64) -> Vec<AnalysisSpan> {
        self.rows("analysis")
            .filter(|r| r.int("i-id") == item_id)
            .map(span_from_row)
            .collect()
    }

    pub fn phenomena(&self) -> Vec<Phenomenon> {
        self.rows("phenomenon").map(phenomenon_from_row).collect()
    }

    pub fn links(&self) -> Vec<ItemPhenomenonLink> {
        let mut params: BTreeMap<i64, Vec<(String, String)>> = BTreeMap::new();
        for r in self.rows("parameter") {
            params
                .entry(r.int("ip-id"))
                .or_default()
                .push((r.string("par-name"), r.string("par-value")));
        }
        self.rows("item-phenomenon")
            .map(|r| {
                let link_id = r.int("ip-id");
                ItemPhenomenonLink {
                    link_id,
                    item_id: r.int("i-id"),
                    phenomenon_id: r.int("p-id"),
                    parameters: params.get(&link_id).cloned().unwrap_or_default(),
                }
            })
            .collect()
    }

    /// Test sets in order of first appearance; members keep file order.
    pub fn sets(&self) -> Vec<TestSet> {
        let mut out: Vec<TestSet> = Vec::new();
        for r in self.rows("set") {
            let set_id = r.int("s-id");
            let item = r.int("i-id");
            match out.iter_mut().find(|s| s.set_id == set_id) {
                Some(s) => s.item_ids.push(item),
                None => out.push(TestSet {
                    set_id,
                    item_ids: vec![item],
                }),
            }
        }
        out
    }

    pub fn runs(&self) -> Vec<Run> {
        self.rows("run")
            .map(|r| Run {
                run_id: r.int("r-id"),
                application: r.string("r-application"),
                date: r.string("r-date"),
                environment: r.string("r-environment"),
                comment: r.string("r-comment"),
            })
            .collect()
    }

    pub fn results(&self) -> Vec<ResultRecord> {
        self.rows("result").map(result_from_row).collect()
    }

    pub fn results_of(&self, run_id: i64) -> Vec<ResultRecord> {
        self.rows("result")
            .filter(|r| r.int("r-id") == run_id)
            .map(result_from_row)
            .collect()
    }

    /// Inserts an item; an `item_id` of `-1` requests allocation.
    pub fn insert_item(&mut self, item: &TestItem) -> Result<i64, StorageError> {
        let record = self.make_record(
            "item",
            &[
                ("i-id", item.item_id.into()),
                ("i-author", item.author.as_str().into()),
                ("i-date", item.date.as_str().into()),
                ("i-register", item.register.as_str().into()),
                ("i-format", item.format.as_str().into()),
                ("i-origin", item.origin.as_str().into()),
                ("i-difficulty", item.difficulty.into()),
                ("i-wf", item.wellformedness.into()),
                ("i-category", item.category.as_str().into()),
                ("i-input", item.input.as_str().into()),
                ("i-length", item.length.into()),
                ("i-comment", item.comment.as_str().into()),
            ],
        )?;
        Ok(self.insert_record("item", record)?.expect("item is keyed"))
    }

    pub fn insert_span(&mut self, span: &AnalysisSpan) -> Result<(), StorageError> {
        let record = self.make_record(
            "analysis",
            &[
                ("i-id", span.item_id.into()),
                ("a-position", span.position.into()),
                ("a-instance", span.instance.as_str().into()),
                ("a-category", span.category.as_str().into()),
                ("a-function", span.function.as_str().into()),
                ("a-domain", span.domain.into()),
            ],
        )?;
        self.insert_record("analysis", record).map(|_| ())
    }

    pub fn insert_phenomenon(&mut self, p: &Phenomenon) -> Result<i64, StorageError> {
        let record = self.make_record(
            "phenomenon",
            &[
                ("p-id", p.phenomenon_id.into()),
                ("p-name", p.name.as_str().into()),
                ("p-supertypes", join_name_list(&p.supertypes).into()),
                ("p-presupposition", join_name_list(&p.presupposition).into()),
                ("p-restrictions", p.restrictions.as_str().into()),
                ("p-interaction", p.interaction.as_str().into()),
                ("p-purpose", p.purpose.as_str().into()),
                ("p-author", p.author.as_str().into()),
                ("p-date", p.date.as_str().into()),
                ("p-comment", p.comment.as_str().into()),
            ],
        )?;
        Ok(self.insert_record("phenomenon", record)?.expect("phenomenon is keyed"))
    }

    /// Inserts a link and its parameters; a `link_id` of `-1` requests
    /// allocation.  Returns the link id.
    pub fn insert_link(&mut self, link: &ItemPhenomenonLink) -> Result<i64, StorageError> {
        let record = self.make_record(
            "item-phenomenon",
            &[
                ("ip-id", link.link_id.into()),
                ("i-id", link.item_id.into()),
                ("p-id", link.phenomenon_id.into()),
            ],
        )?;
        let id = self
            .insert_record("item-phenomenon", record)?
            .expect("item-phenomenon is keyed");
        for (name, value) in &link.parameters {
            let record = self.make_record(
                "parameter",
                &[
                    ("ip-id", id.into()),
                    ("par-name", name.as_str().into()),
                    ("par-value", value.as_str().into()),
                ],
            )?;
            self.insert_record("parameter", record)?;
        }
        Ok(id)
    }

    /// Inserts a test set; a `set_id` of `-1` requests allocation.
    pub fn insert_set(&mut self, set: &TestSet) -> Result<i64, StorageError> {
        let id = if set.set_id == MISSING_INT {
            self.next_id("set", "s-id")
        } else {
            set.set_id
        };
        for &item in &set.item_ids {
            let record = self.make_record("set", &[("s-id", id.into()), ("i-id", item.into())])?;
            self.insert_record("set", record)?;
        }
        Ok(id)
    }

    pub fn insert_run(&mut self, run: &Run) -> Result<i64, StorageError> {
        let record = self.make_record(
            "run",
            &[
                ("r-id", run.run_id.into()),
                ("r-application", run.application.as_str().into()),
                ("r-date", run.date.as_str().into()),
                ("r-environment", run.environment.as_str().into()),
                ("r-comment", run.comment.as_str().into()),
            ],
        )?;
        Ok(self.insert_record("run", record)?.expect("run is keyed"))
    }

    pub fn insert_result(&mut self, r: &ResultRecord) -> Result<(), StorageError> {
        let record = self.make_record(
            "result",
            &[
                ("r-id", r.run_id.into()),
                ("i-id", r.item_id.into()),
                ("o-accepted", r.accepted.into()),
                ("o-readings", r.readings.into()),
                ("o-time", r.time_ms.into()),
                ("o-output", r.output.as_str().into()),
                ("o-flags", r.flags.as_str().into()),
            ],
        )?;
        self.insert_record("result", record).map(|_| ())
    }

    /// Encodes one relation in its on-disk form.
    pub fn relation_text(&self, relation: usize) -> String {
        let mut out = String::new();
        for record in &self.tables[relation].records {
            for (i, v) in record.iter().enumerate() {
                if i > 0 {
                    out.push(DELIMITER);
                }
                escape_field(&v.render(), &mut out);
            }
            out.push('\n');
        }
        out
    }

    fn parse_relation(&mut self, relation: usize, text: &str) -> Result<(), StorageError> {
        let decl = self.schema.relations()[relation].clone();
        let body = text.strip_suffix('\n').unwrap_or(text);
        if text.is_empty() {
            return Ok(());
        }
        for (i, line) in body.split('\n').enumerate() {
            let lineno = i + 1;
            let malformed = |message: String| StorageError::Malformed {
                relation: decl.name.clone(),
                line: lineno,
                message,
            };
            let fields = decode_line(line).map_err(malformed)?;
            if fields.len() != decl.arity() {
                return Err(malformed(format!(
                    "expected {} fields, found {}",
                    decl.arity(),
                    fields.len()
                )));
            }
            let mut record = Vec::with_capacity(fields.len());
            for (f, a) in fields.iter().zip(&decl.attributes) {
                let v = Value::parse(f, a.ty).ok_or_else(|| {
                    malformed(format!("{} expects {}, found {:?}", a.name, a.ty, f))
                })?;
                record.push(v);
            }
            let key_cols = decl.key_indices();
            if !key_cols.is_empty() {
                let key: Vec<Value> = key_cols.iter().map(|&i| record[i].clone()).collect();
                let table = &mut self.tables[relation];
                if !table.keys.insert(key.clone()) {
                    return Err(StorageError::DuplicateKeyAtLine {
                        relation: decl.name.clone(),
                        line: lineno,
                        key: key_string(&key),
                    });
                }
            }
            self.tables[relation].records.push(record);
        }
        Ok(())
    }
}

fn item_from_row(r: Row<'_>) -> TestItem {
    TestItem {
        item_id: r.int("i-id"),
        author: r.string("i-author"),
        date: r.string("i-date"),
        register: r.string("i-register"),
        format: r.string("i-format"),
        origin: r.string("i-origin"),
        difficulty: r.int("i-difficulty"),
        wellformedness: r.int("i-wf"),
        category: r.string("i-category"),
        input: r.string("i-input"),
        length: r.int("i-length"),
        comment: r.string("i-comment"),
    }
}

fn span_from_row(r: Row<'_>) -> AnalysisSpan {
    AnalysisSpan {
        item_id: r.int("i-id"),
        position: r.span("a-position"),
        instance: r.string("a-instance"),
        category: r.string("a-category"),
        function: r.string("a-function"),
        domain: r.span("a-domain"),
    }
}

fn phenomenon_from_row(r: Row<'_>) -> Phenomenon {
    Phenomenon {
        phenomenon_id: r.int("p-id"),
        name: r.string("p-name"),
        supertypes: split_name_list(&r.string("p-supertypes")),
        presupposition: split_name_list(&r.string("p-presupposition")),
        restrictions: r.string("p-restrictions"),
        interaction: r.string("p-interaction"),
        purpose: r.string("p-purpose"),
        author: r.string("p-author"),
        date: r.string("p-date"),
        comment: r.string("p-comment"),
    }
}

fn result_from_row(r: Row<'_>) -> ResultRecord {
    ResultRecord {
        run_id: r.int("r-id"),
        item_id: r.int("i-id"),
        accepted: r.int("o-accepted"),
        readings: r.int("o-readings"),
        time_ms: r.int("o-time"),
        output: r.string("o-output"),
        flags: r.string("o-flags"),
    }
}

/// Loads `home/relations` and the relation files under `home/<language>/`.
/// A missing relation file is an empty relation.
pub fn load_database(home: &Path, language: &str) -> Result<Database, StorageError> {
    if !home.is_dir() {
        return Err(StorageError::HomeMissing(home.to_path_buf()));
    }
    let schema_path = home.join(SCHEMA_FILE);
    if !schema_path.is_file() {
        return Err(StorageError::MissingSchema(schema_path));
    }
    let schema_text = fs::read_to_string(&schema_path).map_err(io_err(&schema_path))?;
    let schema = Schema::parse(&schema_text)?;
    let mut db = Database::new(schema, language)?;
    let dir = home.join(language);
    for idx in 0..db.schema.relations().len() {
        let path = dir.join(&db.schema.relations()[idx].name);
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        db.parse_relation(idx, &text)?;
    }
    let tax_path = dir.join(TAXONOMY_FILE);
    if tax_path.exists() {
        let text = fs::read_to_string(&tax_path).map_err(io_err(&tax_path))?;
        db.taxonomy = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
    }
    Ok(db)
}

/// Replaces `path` by writing a sibling temporary file and renaming it.
fn write_replace(path: &Path, contents: &str) -> Result<(), StorageError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Writes the schema and every relation file; reloading reproduces `db`.
/// Each file is replaced whole, so readers never see a half-written file.
pub fn store_database(db: &Database, home: &Path) -> Result<(), StorageError> {
    let dir = home.join(&db.language);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let schema_path = home.join(SCHEMA_FILE);
    if fs::read_to_string(&schema_path).ok().as_deref() != Some(db.schema.source()) {
        write_replace(&schema_path, db.schema.source())?;
    }
    for (idx, decl) in db.schema.relations().iter().enumerate() {
        write_replace(&dir.join(&decl.name), &db.relation_text(idx))?;
    }
    let mut text = String::new();
    for name in &db.taxonomy {
        text.push_str(name);
        text.push('\n');
    }
    write_replace(&dir.join(TAXONOMY_FILE), &text)
}

/// Adds every record and taxonomy name of `other` to `target`.  Both must
/// declare the same relations; on any key conflict `target` is unchanged.
/// Returns the number of records added.
pub fn merge_database(target: &mut Database, other: &Database) -> Result<usize, StorageError> {
    if target.schema.relations() != other.schema.relations() {
        return Err(StorageError::Schema {
            line: 0,
            message: "imported relations differ from the current schema".to_string(),
        });
    }
    let mut work = target.clone();
    let mut added = 0;
    for decl in other.schema.relations() {
        for record in other.records(&decl.name)? {
            work.insert_record(&decl.name, record.clone())?;
            added += 1;
        }
    }
    for name in other.taxonomy() {
        work.add_taxonomy_name(name);
    }
    *target = work;
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::DEFAULT_SCHEMA;

    fn sample_home() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample")
    }

    #[test]
    fn schema_only_home_gives_empty_relations() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(SCHEMA_FILE), DEFAULT_SCHEMA).unwrap();
        let db = load_database(dir.path(), "en").unwrap();
        assert_eq!(db.schema().relations().len(), 8);
        for rel in db.schema().relations() {
            assert_eq!(db.len(&rel.name), 0);
        }
    }

    #[test]
    fn sample_fixture_counts() {
        let db = load_database(&sample_home(), "fr").unwrap();
        assert_eq!(db.len("item"), 1);
        assert_eq!(db.len("analysis"), 2);
        assert_eq!(db.len("phenomenon"), 1);
        assert_eq!(db.len("item-phenomenon"), 1);
        let item = db.item(24020101).unwrap();
        assert_eq!(item.input, "L' ingénieur vient .");
        assert_eq!(db.phenomena()[0].presupposition, ["C_Agreement", "NP_Agreement"]);
    }

    #[test]
    fn arity_error_names_line_and_relation() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(SCHEMA_FILE), DEFAULT_SCHEMA).unwrap();
        fs::create_dir(dir.path().join("en")).unwrap();
        let good = "1@a@d@r@f@o@1@1@S@x y .@2@";
        fs::write(dir.path().join("en/item"), format!("{good}\n2@a@d@r@f@o@1@1@S@x y .@2@@extra\n")).unwrap();
        let err = load_database(dir.path(), "en").unwrap_err();
        match err {
            StorageError::Malformed { relation, line, .. } => {
                assert_eq!(relation, "item");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn type_mismatch_and_duplicate_key_at_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(SCHEMA_FILE), DEFAULT_SCHEMA).unwrap();
        fs::create_dir(dir.path().join("en")).unwrap();
        fs::write(dir.path().join("en/run"), "x@a@b@c@d\n").unwrap();
        assert!(matches!(
            load_database(dir.path(), "en"),
            Err(StorageError::Malformed { line: 1, .. })
        ));
        fs::write(dir.path().join("en/run"), "1@a@b@c@d\n1@a@b@c@d\n").unwrap();
        assert!(matches!(
            load_database(dir.path(), "en"),
            Err(StorageError::DuplicateKeyAtLine { line: 2, .. })
        ));
    }

    #[test]
    fn missing_schema_and_home() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_database(dir.path(), "en"), Err(StorageError::MissingSchema(_))));
        assert!(matches!(
            load_database(&dir.path().join("nope"), "en"),
            Err(StorageError::HomeMissing(_))
        ));
    }

    #[test]
    fn store_then_load_reproduces_fixture_bytes() {
        let db = load_database(&sample_home(), "fr").unwrap();
        let dir = tempfile::tempdir().unwrap();
        store_database(&db, dir.path()).unwrap();
        let again = load_database(dir.path(), "fr").unwrap();
        assert_eq!(db, again);
        for name in ["item", "analysis", "phenomenon", "item-phenomenon"] {
            let a = fs::read(sample_home().join("fr").join(name)).unwrap();
            let b = fs::read(dir.path().join("fr").join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn empty_round_trip() {
        let db = Database::empty("de").unwrap();
        let dir = tempfile::tempdir().unwrap();
        store_database(&db, dir.path()).unwrap();
        assert_eq!(fs::read(dir.path().join("de/item")).unwrap(), b"");
        assert_eq!(load_database(dir.path(), "de").unwrap(), db);
    }

    #[test]
    fn allocation_is_max_plus_one() {
        let mut db = load_database(&sample_home(), "fr").unwrap();
        let mut item = db.item(24020101).unwrap();
        item.item_id = MISSING_INT;
        assert_eq!(db.insert_item(&item).unwrap(), 24020102);

        let mut empty = Database::empty("fr").unwrap();
        assert_eq!(empty.insert_item(&item).unwrap(), 1);
        assert_eq!(empty.insert_item(&item).unwrap(), 2);
    }

    #[test]
    fn duplicate_key_on_insert() {
        let mut db = load_database(&sample_home(), "fr").unwrap();
        let item = db.item(24020101).unwrap();
        assert!(matches!(db.insert_item(&item), Err(StorageError::DuplicateKey { .. })));
        assert_eq!(db.len("item"), 1);
    }

    #[test]
    fn insert_type_mismatch_and_unknown_relation() {
        let mut db = Database::empty("en").unwrap();
        assert!(matches!(
            db.insert_record("run", vec![Value::Str("x".into()); 5]),
            Err(StorageError::TypeMismatch { .. })
        ));
        assert!(matches!(
            db.insert_record("nope", vec![]),
            Err(StorageError::UnknownRelation(_))
        ));
    }

    #[test]
    fn delete_counts() {
        let mut db = load_database(&sample_home(), "fr").unwrap();
        assert_eq!(db.delete_records("item", |r| r.int("i-wf") == 0).unwrap(), 0);
        assert_eq!(db.delete_records("analysis", |_| true).unwrap(), 2);
        assert_eq!(db.len("analysis"), 0);
        assert!(db.delete_records("nope", |_| true).is_err());
    }

    #[test]
    fn delete_frees_key_for_reinsert() {
        let mut db = load_database(&sample_home(), "fr").unwrap();
        let item = db.item(24020101).unwrap();
        db.delete_records("item", |r| r.int("i-id") == 24020101).unwrap();
        assert_eq!(db.insert_item(&item).unwrap(), 24020101);
    }

    #[test]
    fn unknown_language() {
        assert!(matches!(Database::empty("xx"), Err(StorageError::UnknownLanguage(_))));
    }
}
