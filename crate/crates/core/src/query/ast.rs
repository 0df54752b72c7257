use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Match,
    NotMatch,
}

impl Comparator {
    pub const ALL: [Comparator; 8] = [
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
        Comparator::Match,
        Comparator::NotMatch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Match => "~",
            Comparator::NotMatch => "!~",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Str(String),
}

impl Literal {
    pub fn text(&self) -> String {
        match self {
            Literal::Int(i) => i.to_string(),
            Literal::Str(s) => s.clone(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub attribute: String,
    pub op: Comparator,
    pub literal: Literal,
}

/// Boolean condition tree.  Chains of `&` and `|` are kept n-ary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Cmp(Comparison),
}

impl Expr {
    pub fn cmp(attribute: &str, op: Comparator, literal: Literal) -> Expr {
        Expr::Cmp(Comparison {
            attribute: attribute.to_string(),
            op,
            literal,
        })
    }

    /// Attribute names in order of first occurrence.
    pub fn attributes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_attributes(&mut out);
        out
    }

    fn collect_attributes<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.collect_attributes(out)),
            Expr::Not(x) => x.collect_attributes(out),
            Expr::Cmp(c) => {
                if !out.contains(&c.attribute.as_str()) {
                    out.push(&c.attribute);
                }
            }
        }
    }

    /// Every literal used with a regex comparator.
    pub fn patterns(&self) -> Vec<String> {
        match self {
            Expr::And(xs) | Expr::Or(xs) => xs.iter().flat_map(Expr::patterns).collect(),
            Expr::Not(x) => x.patterns(),
            Expr::Cmp(c) if matches!(c.op, Comparator::Match | Comparator::NotMatch) => {
                vec![c.literal.text()]
            }
            Expr::Cmp(_) => Vec::new(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Cmp(c) => write!(f, "{} {} {}", c.attribute, c.op.as_str(), c.literal),
            Expr::Not(x) => match **x {
                Expr::Cmp(_) | Expr::Not(_) => write!(f, "!{x}"),
                _ => write!(f, "!({x})"),
            },
            Expr::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    match x {
                        Expr::And(_) | Expr::Or(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            Expr::Or(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    match x {
                        Expr::Or(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// A parsed `select ... [where ...]` query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub projection: Vec<String>,
    pub condition: Option<Expr>,
}

impl Query {
    /// Projection and condition attributes, each once.
    pub fn attributes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in self
            .projection
            .iter()
            .map(String::as_str)
            .chain(self.condition.iter().flat_map(Expr::attributes))
        {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

/// Canonical query text; parsing it yields the same AST.
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "select {}", self.projection.join(" "))?;
        if let Some(c) = &self.condition {
            write!(f, " where {c}")?;
        }
        Ok(())
    }
}
