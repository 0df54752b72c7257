//! Lexer and recursive-descent parser.
//!
//! ```text
//! query       := "select" attr+ ["where" disjunction]
//! disjunction := conjunction ("|" conjunction)*
//! conjunction := term ("&" term)*
//! term        := "!" term | "(" disjunction ")" | attr op literal
//! op          := "=" | "!=" | "<" | "<=" | ">" | ">=" | "~" | "!~"
//! literal     := integer | '"' chars '"'
//! ```

use super::ast::{Comparator, Comparison, Expr, Literal, Query};
use super::QueryError;
use crate::storage::Schema;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Select,
    Where,
    Ident(String),
    Int(i64),
    Str(String),
    Op(Comparator),
    And,
    Or,
    Not,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Select => "'select'".into(),
            Tok::Where => "'where'".into(),
            Tok::Ident(s) => format!("attribute {s}"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Op(op) => format!("'{}'", op.as_str()),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Not => "'!'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of query".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = match c {
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '=' => (Tok::Op(Comparator::Eq), 1),
            '~' => (Tok::Op(Comparator::Match), 1),
            '!' => match next {
                Some('=') => (Tok::Op(Comparator::Ne), 2),
                Some('~') => (Tok::Op(Comparator::NotMatch), 2),
                _ => (Tok::Not, 1),
            },
            '<' if next == Some('=') => (Tok::Op(Comparator::Le), 2),
            '<' => (Tok::Op(Comparator::Lt), 1),
            '>' if next == Some('=') => (Tok::Op(Comparator::Ge), 2),
            '>' => (Tok::Op(Comparator::Gt), 1),
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j).map(|&(_, c)| c) {
                        None => return Err(syntax(off, "unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(j + 1).map(|&(_, c)| c) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some(other) => {
                                    // unknown escapes pass through for regex patterns
                                    s.push('\\');
                                    s.push(other);
                                }
                                None => return Err(syntax(off, "unterminated string literal")),
                            }
                            j += 2;
                        }
                        Some(c) => {
                            s.push(c);
                            j += 1;
                        }
                    }
                }
                (Tok::Str(s), j + 1 - i)
            }
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) => {
                let mut j = i + 1;
                while chars.get(j).is_some_and(|&(_, c)| c.is_ascii_digit()) {
                    j += 1;
                }
                let end = chars.get(j).map_or(text.len(), |&(o, _)| o);
                let value = text[off..end]
                    .parse()
                    .map_err(|_| syntax(off, "integer literal out of range"))?;
                (Tok::Int(value), j - i)
            }
            c if c.is_alphabetic() => {
                let mut j = i + 1;
                while chars
                    .get(j)
                    .is_some_and(|&(_, c)| c.is_alphanumeric() || c == '-' || c == '_')
                {
                    j += 1;
                }
                let end = chars.get(j).map_or(text.len(), |&(o, _)| o);
                let word = &text[off..end];
                let tok = if word.eq_ignore_ascii_case("select") {
                    Tok::Select
                } else if word.eq_ignore_ascii_case("where") {
                    Tok::Where
                } else if word
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
                {
                    Tok::Ident(word.to_string())
                } else {
                    return Err(syntax(off, format!("invalid attribute name {word:?} (lowercase only)")));
                };
                (tok, j - i)
            }
            other => return Err(syntax(off, format!("unexpected character {other:?}"))),
        };
        out.push((tok, off));
        i += len;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expected(&self, what: &str) -> QueryError {
        syntax(
            self.offset(),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        if self.peek() != &Tok::Select {
            return Err(self.expected("'select'"));
        }
        self.bump();
        let mut projection = Vec::new();
        while let Tok::Ident(name) = self.peek() {
            projection.push(name.clone());
            self.bump();
        }
        if projection.is_empty() {
            return Err(self.expected("attribute"));
        }
        let condition = if self.peek() == &Tok::Where {
            self.bump();
            Some(self.disjunction()?)
        } else {
            None
        };
        if self.peek() != &Tok::End {
            return Err(self.expected(if condition.is_some() { "'&', '|' or end of query" } else { "attribute, 'where' or end of query" }));
        }
        Ok(Query {
            projection,
            condition,
        })
    }

    fn disjunction(&mut self) -> Result<Expr, QueryError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == &Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Expr, QueryError> {
        let mut parts = vec![self.term()?];
        while self.peek() == &Tok::And {
            self.bump();
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::And(parts)
        })
    }

    fn term(&mut self) -> Result<Expr, QueryError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Expr::Not(Box::new(self.term()?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.disjunction()?;
                if self.peek() != &Tok::RParen {
                    return Err(self.expected("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(attribute) => {
                self.bump();
                let Tok::Op(op) = self.peek().clone() else {
                    return Err(self.expected("comparison operator"));
                };
                self.bump();
                let literal = match self.peek().clone() {
                    Tok::Int(i) => Literal::Int(i),
                    Tok::Str(s) => Literal::Str(s),
                    _ => return Err(self.expected("literal")),
                };
                self.bump();
                Ok(Expr::Cmp(Comparison {
                    attribute,
                    op,
                    literal,
                }))
            }
            _ => Err(self.expected("condition")),
        }
    }
}

/// Parses without checking attribute names against a schema.
pub fn parse_query_unchecked(text: &str) -> Result<Query, QueryError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.query()
}

/// Parses and validates every attribute against `schema`.
pub fn parse_query(text: &str, schema: &Schema) -> Result<Query, QueryError> {
    let query = parse_query_unchecked(text)?;
    if let Some(unknown) = query.attributes().into_iter().find(|a| schema.home_of(a).is_none()) {
        return Err(QueryError::UnknownAttribute(unknown.to_string()));
    }
    Ok(query)
}
