//! The declarative relation schema read from the `relations` file.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use super::StorageError;

/// The schema shipped with the sample database; used when creating a new home.
pub const DEFAULT_SCHEMA: &str = include_str!("../../fixtures/sample/relations");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrType {
    Integer,
    String,
    Position,
}

impl AttrType {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttrType::Integer => "integer",
            AttrType::String => "string",
            AttrType::Position => "position",
        }
    }

    fn parse(text: &str) -> Option<AttrType> {
        match text {
            "integer" => Some(AttrType::Integer),
            "string" => Some(AttrType::String),
            "position" => Some(AttrType::Position),
            _ => None,
        }
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDecl {
    pub name: String,
    pub ty: AttrType,
    pub key: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: String,
    pub attributes: Vec<AttributeDecl>,
}

impl RelationDecl {
    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == attr)
    }

    pub fn key_indices(&self) -> Vec<usize> {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.key)
            .map(|(i, _)| i)
            .collect()
    }

    /// The key column when the relation is keyed by exactly one integer.
    pub fn single_integer_key(&self) -> Option<usize> {
        match self.key_indices().as_slice() {
            [i] if self.attributes[*i].ty == AttrType::Integer => Some(*i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinEdge {
    pub left: String,
    pub right: String,
    pub attribute: String,
}

/// Relations, their attributes, and the join tree connecting them.
///
/// An attribute may appear in several relations only as a join key; its
/// home relation is the first relation (in file order) that declares it.
#[derive(Debug, Clone)]
pub struct Schema {
    relations: Vec<RelationDecl>,
    join_edges: Vec<JoinEdge>,
    homes: HashMap<String, usize>,
    source: String,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.relations == other.relations && self.join_edges == other.join_edges
    }
}

/// Relations and attributes the typed accessors rely on.
const REQUIRED: &[(&str, &[(&str, AttrType)])] = &[
    (
        "item",
        &[
            ("i-id", AttrType::Integer),
            ("i-author", AttrType::String),
            ("i-date", AttrType::String),
            ("i-register", AttrType::String),
            ("i-format", AttrType::String),
            ("i-origin", AttrType::String),
            ("i-difficulty", AttrType::Integer),
            ("i-wf", AttrType::Integer),
            ("i-category", AttrType::String),
            ("i-input", AttrType::String),
            ("i-length", AttrType::Integer),
            ("i-comment", AttrType::String),
        ],
    ),
    (
        "analysis",
        &[
            ("i-id", AttrType::Integer),
            ("a-position", AttrType::Position),
            ("a-instance", AttrType::String),
            ("a-category", AttrType::String),
            ("a-function", AttrType::String),
            ("a-domain", AttrType::Position),
        ],
    ),
    (
        "phenomenon",
        &[
            ("p-id", AttrType::Integer),
            ("p-name", AttrType::String),
            ("p-supertypes", AttrType::String),
            ("p-presupposition", AttrType::String),
            ("p-restrictions", AttrType::String),
            ("p-interaction", AttrType::String),
            ("p-purpose", AttrType::String),
            ("p-author", AttrType::String),
            ("p-date", AttrType::String),
            ("p-comment", AttrType::String),
        ],
    ),
    (
        "item-phenomenon",
        &[
            ("ip-id", AttrType::Integer),
            ("i-id", AttrType::Integer),
            ("p-id", AttrType::Integer),
        ],
    ),
    (
        "parameter",
        &[
            ("ip-id", AttrType::Integer),
            ("par-name", AttrType::String),
            ("par-value", AttrType::String),
        ],
    ),
    ("set", &[("s-id", AttrType::Integer), ("i-id", AttrType::Integer)]),
    (
        "run",
        &[
            ("r-id", AttrType::Integer),
            ("r-application", AttrType::String),
            ("r-date", AttrType::String),
            ("r-environment", AttrType::String),
            ("r-comment", AttrType::String),
        ],
    ),
    (
        "result",
        &[
            ("r-id", AttrType::Integer),
            ("i-id", AttrType::Integer),
            ("o-accepted", AttrType::Integer),
            ("o-readings", AttrType::Integer),
            ("o-time", AttrType::Integer),
            ("o-output", AttrType::String),
            ("o-flags", AttrType::String),
        ],
    ),
];

fn attr_prefix(name: &str) -> &str {
    name.split_once('-').map_or(name, |(p, _)| p)
}

fn schema_err(line: usize, message: impl Into<String>) -> StorageError {
    StorageError::Schema {
        line,
        message: message.into(),
    }
}

impl Schema {
    pub fn default_schema() -> Schema {
        Schema::parse(DEFAULT_SCHEMA).expect("bundled schema is valid")
    }

    pub fn parse(text: &str) -> Result<Schema, StorageError> {
        let mut relations: Vec<RelationDecl> = Vec::new();
        let mut join_edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indented = raw.starts_with([' ', '\t']);
            if indented {
                let rel = relations
                    .last_mut()
                    .ok_or_else(|| schema_err(lineno, "attribute outside of a relation"))?;
                let mut parts = trimmed.split_whitespace();
                let name = parts.next().unwrap_or_default();
                let ty = parts
                    .next()
                    .and_then(|t| t.strip_prefix(':'))
                    .and_then(AttrType::parse)
                    .ok_or_else(|| schema_err(lineno, format!("attribute {name}: expected :<type>")))?;
                let key = match parts.next() {
                    None => false,
                    Some(":key") => true,
                    Some(other) => return Err(schema_err(lineno, format!("unexpected {other:?}"))),
                };
                if parts.next().is_some() {
                    return Err(schema_err(lineno, "trailing tokens"));
                }
                if !valid_name(name) || !name.contains('-') {
                    return Err(schema_err(lineno, format!("bad attribute name {name:?}")));
                }
                if rel.index_of(name).is_some() {
                    return Err(schema_err(lineno, format!("duplicate attribute {name}")));
                }
                rel.attributes.push(AttributeDecl {
                    name: name.to_string(),
                    ty,
                    key,
                });
            } else if let Some(rest) = trimmed.strip_prefix("join ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [left, right, attribute] = parts.as_slice() else {
                    return Err(schema_err(lineno, "join needs <relation> <relation> <attribute>"));
                };
                join_edges.push((lineno, JoinEdge {
                    left: left.to_string(),
                    right: right.to_string(),
                    attribute: attribute.to_string(),
                }));
            } else {
                if !valid_name(trimmed) {
                    return Err(schema_err(lineno, format!("bad relation name {trimmed:?}")));
                }
                if relations.iter().any(|r| r.name == trimmed) {
                    return Err(schema_err(lineno, format!("duplicate relation {trimmed}")));
                }
                relations.push(RelationDecl {
                    name: trimmed.to_string(),
                    attributes: Vec::new(),
                });
            }
        }

        let mut homes: HashMap<String, usize> = HashMap::new();
        let mut types: HashMap<&str, AttrType> = HashMap::new();
        for (ri, rel) in relations.iter().enumerate() {
            if rel.attributes.is_empty() {
                return Err(schema_err(0, format!("relation {} has no attributes", rel.name)));
            }
            for a in &rel.attributes {
                if let Some(t) = types.insert(&a.name, a.ty) {
                    if t != a.ty {
                        return Err(schema_err(0, format!("attribute {} declared with two types", a.name)));
                    }
                }
                homes.entry(a.name.clone()).or_insert(ri);
            }
        }

        // Each relation owns the attributes homed in it, all under one prefix.
        let mut prefixes: HashMap<String, &str> = HashMap::new();
        for (ri, rel) in relations.iter().enumerate() {
            let owned: HashSet<&str> = rel
                .attributes
                .iter()
                .filter(|a| homes[&a.name] == ri)
                .map(|a| attr_prefix(&a.name))
                .collect();
            if owned.len() != 1 {
                return Err(schema_err(
                    0,
                    format!("relation {} must own attributes under exactly one prefix", rel.name),
                ));
            }
            let prefix = owned.into_iter().next().unwrap();
            if let Some(other) = prefixes.insert(prefix.to_string(), &rel.name) {
                return Err(schema_err(
                    0,
                    format!("prefix {prefix}- used by both {other} and {}", rel.name),
                ));
            }
        }

        let find = |name: &str| relations.iter().position(|r| r.name == name);
        let mut edges = Vec::new();
        for (lineno, e) in join_edges {
            let (Some(l), Some(r)) = (find(&e.left), find(&e.right)) else {
                return Err(schema_err(lineno, "join names an unknown relation"));
            };
            if l == r {
                return Err(schema_err(lineno, "join connects a relation to itself"));
            }
            if relations[l].index_of(&e.attribute).is_none() || relations[r].index_of(&e.attribute).is_none() {
                return Err(schema_err(
                    lineno,
                    format!("join attribute {} missing from an endpoint", e.attribute),
                ));
            }
            edges.push(e);
        }
        let schema = Schema {
            relations,
            join_edges: edges,
            homes,
            source: text.to_string(),
        };
        schema.check_tree()?;
        schema.check_required()?;
        Ok(schema)
    }

    fn check_tree(&self) -> Result<(), StorageError> {
        let n = self.relations.len();
        if n == 0 {
            return Err(schema_err(0, "no relations declared"));
        }
        if self.join_edges.len() != n - 1 {
            return Err(schema_err(
                0,
                format!("join graph over {n} relations needs {} edges, found {}", n - 1, self.join_edges.len()),
            ));
        }
        let reach = self.bfs_order(0);
        if reach.len() != n {
            return Err(schema_err(0, "join graph is not connected"));
        }
        Ok(())
    }

    fn check_required(&self) -> Result<(), StorageError> {
        for (rel, attrs) in REQUIRED {
            let decl = self
                .relation(rel)
                .ok_or_else(|| schema_err(0, format!("required relation {rel} missing")))?;
            for (attr, ty) in attrs.iter() {
                match decl.index_of(attr) {
                    Some(i) if decl.attributes[i].ty == *ty => {}
                    _ => {
                        return Err(schema_err(
                            0,
                            format!("relation {rel} needs attribute {attr} :{ty}"),
                        ))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn join_edges(&self) -> &[JoinEdge] {
        &self.join_edges
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Index of the relation an attribute belongs to.
    pub fn home_of(&self, attr: &str) -> Option<usize> {
        self.homes.get(attr).copied()
    }

    pub fn attribute_type(&self, attr: &str) -> Option<AttrType> {
        let rel = &self.relations[self.home_of(attr)?];
        rel.attributes.iter().find(|a| a.name == attr).map(|a| a.ty)
    }

    /// All attribute names, each once, in declaration order.
    pub fn attribute_names(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.relations
            .iter()
            .flat_map(|r| r.attributes.iter())
            .filter(|a| seen.insert(a.name.as_str()))
            .map(|a| a.name.as_str())
            .collect()
    }

    /// Neighbours of a relation in the join tree with the connecting attribute,
    /// in edge declaration order.
    pub fn neighbours(&self, rel: usize) -> Vec<(usize, &str)> {
        let name = &self.relations[rel].name;
        self.join_edges
            .iter()
            .filter_map(|e| {
                if &e.left == name {
                    Some((self.relation_index(&e.right)?, e.attribute.as_str()))
                } else if &e.right == name {
                    Some((self.relation_index(&e.left)?, e.attribute.as_str()))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Breadth-first order of the join tree from `root`.
    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.relations.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(r) = queue.pop_front() {
            order.push(r);
            for (n, _) in self.neighbours(r) {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        order
    }

    /// Parent pointers of the join tree rooted at the first relation, with
    /// the attribute shared with the parent.
    pub fn tree_parents(&self) -> BTreeMap<usize, (usize, String)> {
        let mut parents = BTreeMap::new();
        let mut seen = vec![false; self.relations.len()];
        seen[0] = true;
        for r in self.bfs_order(0) {
            for (n, attr) in self.neighbours(r) {
                if !seen[n] {
                    seen[n] = true;
                    parents.insert(n, (r, attr.to_string()));
                }
            }
        }
        parents
    }

    /// Unique path between two relations in the join tree (inclusive).
    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.relations.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(r) = queue.pop_front() {
            if r == to {
                break;
            }
            for (n, _) in self.neighbours(r) {
                if prev[n] == usize::MAX {
                    prev[n] = r;
                    queue.push_back(n);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// The attribute shared by two adjacent relations.
    pub fn edge_attribute(&self, a: usize, b: usize) -> Option<&str> {
        self.neighbours(a)
            .into_iter()
            .find(|(n, _)| *n == b)
            .map(|(_, attr)| attr)
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}
