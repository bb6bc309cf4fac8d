//! Duoidal expressions in reduced form.
//!
//! An [`Expression`] is a term over basic types built from the shared unit `N`,
//! sequencing `>` and tensoring `*`. Expressions are always kept reduced: a
//! sequence never has a unit or a sequence as a child, and a tensor never has a
//! unit or a tensor as a child. The smart constructors [`seq_e`] and [`par_e`]
//! apply associativity and unitality so that reduction is automatic.
//!
//! ```
//! use physduo::expr::{Expression, par_e, seq_e};
//!
//! let e: Expression = "(A > B) * C".parse().unwrap();
//! assert_eq!(e.to_string(), "(A > B) * C");
//! assert_eq!(par_e(&Expression::Unit, &e), e);
//! assert_eq!(seq_e(&e, &Expression::atom("D")).to_string(), "((A > B) * C) > D");
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lex::{tokenize, Cursor, Tok};

/// Reserved spelling of the unit expression.
pub const UNIT_NAME: &str = "N";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expression {
    /// The shared unit `N`.
    Unit,
    /// A basic type.
    Atom(String),
    /// `E1 > ... > En`, n >= 2, no child is `Unit` or `Seq`.
    Seq(Vec<Expression>),
    /// `E1 * ... * En`, n >= 2, no child is `Unit` or `Par`.
    Par(Vec<Expression>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {found:?} at offset {pos}")]
    BadChar { pos: usize, found: char },
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    Unexpected {
        pos: usize,
        found: String,
        expected: &'static str,
    },
    #[error("unexpected end of input at offset {pos}, expected {expected}")]
    UnexpectedEnd { pos: usize, expected: &'static str },
}

impl ParseError {
    /// Byte offset the error refers to, when there is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::BadChar { pos, .. }
            | ParseError::Unexpected { pos, .. }
            | ParseError::UnexpectedEnd { pos, .. } => Some(*pos),
        }
    }
}

/// Returns true if `name` is a valid basic type name (`[A-Za-z][A-Za-z0-9_]*`, not `N`).
pub fn is_type_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    name != UNIT_NAME && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Reduced sequencing of two expressions.
pub fn seq_e(e1: &Expression, e2: &Expression) -> Expression {
    Expression::seq_all([e1.clone(), e2.clone()])
}

/// Reduced tensoring of two expressions.
pub fn par_e(e1: &Expression, e2: &Expression) -> Expression {
    Expression::par_all([e1.clone(), e2.clone()])
}

impl Expression {
    pub fn atom(name: impl Into<String>) -> Self {
        Expression::Atom(name.into())
    }

    /// Reduced sequencing of any number of expressions, left to right.
    pub fn seq_all(items: impl IntoIterator<Item = Expression>) -> Self {
        let mut children = Vec::new();
        for e in items {
            match e {
                Expression::Unit => {}
                Expression::Seq(cs) => children.extend(cs),
                other => children.push(other),
            }
        }
        match children.len() {
            0 => Expression::Unit,
            1 => children.pop().unwrap(),
            _ => Expression::Seq(children),
        }
    }

    /// Reduced tensoring of any number of expressions, left to right.
    pub fn par_all(items: impl IntoIterator<Item = Expression>) -> Self {
        let mut children = Vec::new();
        for e in items {
            match e {
                Expression::Unit => {}
                Expression::Par(cs) => children.extend(cs),
                other => children.push(other),
            }
        }
        match children.len() {
            0 => Expression::Unit,
            1 => children.pop().unwrap(),
            _ => Expression::Par(children),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Expression::Unit)
    }

    /// Checks the reduced-form invariants recursively.
    pub fn is_reduced(&self) -> bool {
        match self {
            Expression::Unit => true,
            Expression::Atom(name) => is_type_name(name),
            Expression::Seq(cs) => {
                cs.len() >= 2
                    && cs
                        .iter()
                        .all(|c| !matches!(c, Expression::Unit | Expression::Seq(_)) && c.is_reduced())
            }
            Expression::Par(cs) => {
                cs.len() >= 2
                    && cs
                        .iter()
                        .all(|c| !matches!(c, Expression::Unit | Expression::Par(_)) && c.is_reduced())
            }
        }
    }

    /// Left-to-right sequence of basic types.
    pub fn list_type(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_types(&mut out);
        out
    }

    fn collect_types(&self, out: &mut Vec<String>) {
        match self {
            Expression::Unit => {}
            Expression::Atom(a) => out.push(a.clone()),
            Expression::Seq(cs) | Expression::Par(cs) => {
                for c in cs {
                    c.collect_types(out);
                }
            }
        }
    }

    /// Number of atoms (the length of [`Expression::list_type`]).
    pub fn size(&self) -> usize {
        match self {
            Expression::Unit => 0,
            Expression::Atom(_) => 1,
            Expression::Seq(cs) | Expression::Par(cs) => cs.iter().map(Expression::size).sum(),
        }
    }

    /// Relabels every atom; the tree shape is unchanged.
    pub fn map_types(&self, f: &mut impl FnMut(&str) -> String) -> Expression {
        match self {
            Expression::Unit => Expression::Unit,
            Expression::Atom(a) => Expression::Atom(f(a)),
            Expression::Seq(cs) => Expression::Seq(cs.iter().map(|c| c.map_types(f)).collect()),
            Expression::Par(cs) => Expression::Par(cs.iter().map(|c| c.map_types(f)).collect()),
        }
    }

    /// Equality up to permutation of tensor children.
    pub fn sym_equal(&self, other: &Expression) -> bool {
        self.sym_witness(other).is_some()
    }

    /// Leaf-level witness of [`Expression::sym_equal`]: `w[i]` is the position in
    /// `other.list_type()` matched with position `i` of `self.list_type()`.
    ///
    /// Tensor children are matched greedily, each to the leftmost unused
    /// equivalent child, which fixes one witness among the possible ones.
    pub fn sym_witness(&self, other: &Expression) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.size());
        if witness_into(self, other, 0, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    /// Representative of the `sym_equal` class: tensor children sorted by
    /// size and then by printed form.
    pub fn canonical(&self) -> Expression {
        match self {
            Expression::Unit | Expression::Atom(_) => self.clone(),
            Expression::Seq(cs) => Expression::Seq(cs.iter().map(Expression::canonical).collect()),
            Expression::Par(cs) => {
                let mut keyed: Vec<(String, Expression)> = cs
                    .iter()
                    .map(|c| {
                        let c = c.canonical();
                        (c.to_string(), c)
                    })
                    .collect();
                keyed.sort_by(|a, b| a.0.cmp(&b.0));
                Expression::Par(keyed.into_iter().map(|k| k.1).collect())
            }
        }
    }

    fn needs_parens(&self) -> bool {
        matches!(self, Expression::Seq(_) | Expression::Par(_))
    }
}

fn witness_into(a: &Expression, b: &Expression, offset: usize, out: &mut Vec<usize>) -> bool {
    match (a, b) {
        (Expression::Unit, Expression::Unit) => true,
        (Expression::Atom(x), Expression::Atom(y)) if x == y => {
            out.push(offset);
            true
        }
        (Expression::Seq(xs), Expression::Seq(ys)) if xs.len() == ys.len() => {
            let mut off = offset;
            for (x, y) in xs.iter().zip(ys) {
                if !witness_into(x, y, off, out) {
                    return false;
                }
                off += y.size();
            }
            true
        }
        (Expression::Par(xs), Expression::Par(ys)) if xs.len() == ys.len() => {
            let mut offsets = Vec::with_capacity(ys.len());
            let mut off = offset;
            for y in ys {
                offsets.push(off);
                off += y.size();
            }
            let mut used = vec![false; ys.len()];
            for x in xs {
                let mut matched = false;
                for (j, y) in ys.iter().enumerate() {
                    if used[j] {
                        continue;
                    }
                    let mark = out.len();
                    if witness_into(x, y, offsets[j], out) {
                        used[j] = true;
                        matched = true;
                        break;
                    }
                    out.truncate(mark);
                }
                if !matched {
                    return false;
                }
            }
            true
        }
        _ => false,
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (cs, op) = match self {
            Expression::Unit => return f.write_str(UNIT_NAME),
            Expression::Atom(a) => return f.write_str(a),
            Expression::Seq(cs) => (cs, " > "),
            Expression::Par(cs) => (cs, " * "),
        };
        for (i, c) in cs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            if c.needs_parens() {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses `E ::= N | IDENT | E > E | E * E | (E)`; `*` binds tighter than `>`.
pub fn parse(text: &str) -> Result<Expression, ParseError> {
    let toks = tokenize(text).map_err(|e| ParseError::BadChar {
        pos: e.pos,
        found: e.found,
    })?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut cur = Cursor::new(&toks, text.len());
    let e = parse_tokens(&mut cur)?;
    if let Some(t) = cur.peek() {
        return Err(ParseError::Unexpected {
            pos: cur.pos(),
            found: t.to_string(),
            expected: "end of expression",
        });
    }
    Ok(e)
}

pub(crate) fn parse_tokens(cur: &mut Cursor<'_>) -> Result<Expression, ParseError> {
    let mut items = vec![parse_par(cur)?];
    while cur.eat(&Tok::Gt) {
        items.push(parse_par(cur)?);
    }
    Ok(Expression::seq_all(items))
}

fn parse_par(cur: &mut Cursor<'_>) -> Result<Expression, ParseError> {
    let mut items = vec![parse_primary(cur)?];
    while cur.eat(&Tok::Star) {
        items.push(parse_primary(cur)?);
    }
    Ok(Expression::par_all(items))
}

fn parse_primary(cur: &mut Cursor<'_>) -> Result<Expression, ParseError> {
    const EXPECTED: &str = "`N`, a type name or `(`";
    let pos = cur.pos();
    match cur.bump() {
        Some(Tok::Ident(name)) if name == UNIT_NAME => Ok(Expression::Unit),
        Some(Tok::Ident(name)) => Ok(Expression::Atom(name.clone())),
        Some(Tok::LParen) => {
            let e = parse_tokens(cur)?;
            let close = cur.pos();
            match cur.bump() {
                Some(Tok::RParen) => Ok(e),
                Some(t) => Err(ParseError::Unexpected {
                    pos: close,
                    found: t.to_string(),
                    expected: "`)`",
                }),
                None => Err(ParseError::UnexpectedEnd {
                    pos: close,
                    expected: "`)`",
                }),
            }
        }
        Some(t) => Err(ParseError::Unexpected {
            pos,
            found: t.to_string(),
            expected: EXPECTED,
        }),
        None => Err(ParseError::UnexpectedEnd {
            pos,
            expected: EXPECTED,
        }),
    }
}
