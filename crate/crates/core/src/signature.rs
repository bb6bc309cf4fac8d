//! Signatures (basic types plus typed generators) and their homomorphisms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{self, Expression};
use crate::lex::{tokenize, Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("generator `{generator}` uses undeclared type `{name}`")]
    UnknownType { name: String, generator: String },
    #[error("generator `{0}` is declared twice")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("`{0}` is not a valid name")]
    InvalidName(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("homomorphism does not type-check at generator `{0}`")]
    TypeMismatch(String),
    #[error("homomorphism leaves `{0}` unmapped")]
    Unmapped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub source: Expression,
    pub target: Expression,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.name, self.source, self.target)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    types: BTreeSet<String>,
    generators: BTreeMap<String, Generator>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, name: impl Into<String>) -> Result<(), SignatureError> {
        let name = name.into();
        if !expr::is_type_name(&name) {
            return Err(SignatureError::InvalidName(name));
        }
        self.types.insert(name);
        Ok(())
    }

    /// Adds a generator after checking that its boundary types are declared.
    pub fn add_generator(
        &mut self,
        name: impl Into<String>,
        source: Expression,
        target: Expression,
    ) -> Result<(), SignatureError> {
        let name = name.into();
        if !expr::is_type_name(&name) {
            return Err(SignatureError::InvalidName(name));
        }
        if self.generators.contains_key(&name) {
            return Err(SignatureError::DuplicateGenerator(name));
        }
        let g = Generator { name, source, target };
        self.check_generator(&g)?;
        self.generators.insert(g.name.clone(), g);
        Ok(())
    }

    fn check_generator(&self, g: &Generator) -> Result<(), SignatureError> {
        for t in g.source.list_type().into_iter().chain(g.target.list_type()) {
            if !self.types.contains(&t) {
                return Err(SignatureError::UnknownType {
                    name: t,
                    generator: g.name.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SignatureError> {
        self.generators.values().try_for_each(|g| self.check_generator(g))
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(String::as_str)
    }

    pub fn has_type(&self, name: &str) -> bool {
        self.types.contains(name)
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.generators.values()
    }

    pub fn generator(&self, name: &str) -> Result<&Generator, SignatureError> {
        self.generators
            .get(name)
            .ok_or_else(|| SignatureError::UnknownGenerator(name.to_string()))
    }

    /// Parses `type A B ...` and `gen f : E -> E` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SignatureError> {
        let mut sig = Signature::new();
        for (idx, line) in text.lines().enumerate() {
            sig.parse_line(line, idx + 1)?;
        }
        Ok(sig)
    }

    /// Handles one line of the signature format. Returns `Ok(false)` for lines
    /// that are neither blank nor a `type`/`gen` declaration.
    pub(crate) fn parse_line(&mut self, line: &str, lineno: usize) -> Result<bool, SignatureError> {
        let perr = |message: String| SignatureError::Parse { line: lineno, message };
        let toks = tokenize(line).map_err(|e| perr(format!("unexpected character '{}'", e.found)))?;
        let mut cur = Cursor::new(&toks, line.len());
        match cur.peek() {
            None => Ok(true),
            Some(Tok::Ident(kw)) if kw == "type" => {
                cur.bump();
                while let Some(t) = cur.bump() {
                    match t {
                        Tok::Ident(name) => self.add_type(name.clone())?,
                        other => return Err(perr(format!("expected a type name, found {other}"))),
                    }
                }
                Ok(true)
            }
            Some(Tok::Ident(kw)) if kw == "gen" => {
                cur.bump();
                let name = match cur.bump() {
                    Some(Tok::Ident(n)) => n.clone(),
                    _ => return Err(perr("expected a generator name".into())),
                };
                if !cur.eat(&Tok::Colon) {
                    return Err(perr("expected `:`".into()));
                }
                let (source, target) = parse_arrow(&mut cur).map_err(perr)?;
                if !cur.at_end() {
                    return Err(perr(format!("unexpected {}", cur.peek().unwrap())));
                }
                self.add_generator(name, source, target)?;
                Ok(true)
            }
            Some(_) => Ok(false),
        }
    }
}

/// Parses `E -> E` at the cursor.
pub(crate) fn parse_arrow(cur: &mut Cursor<'_>) -> Result<(Expression, Expression), String> {
    let source = expr::parse_tokens(cur).map_err(|e| e.to_string())?;
    if !cur.eat(&Tok::Arrow) {
        return Err("expected `->`".into());
    }
    let target = expr::parse_tokens(cur).map_err(|e| e.to_string())?;
    Ok((source, target))
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.types.is_empty() {
            write!(f, "type")?;
            for t in &self.types {
                write!(f, " {t}")?;
            }
            writeln!(f)?;
        }
        for g in self.generators.values() {
            writeln!(f, "gen {g}")?;
        }
        Ok(())
    }
}

/// A map of signatures: types to types and generators to generators, such that
/// each generator's boundaries are carried to its image's boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureHom {
    pub source: Signature,
    pub target: Signature,
    pub type_map: BTreeMap<String, String>,
    pub gen_map: BTreeMap<String, String>,
}

impl SignatureHom {
    pub fn identity(sig: &Signature) -> Self {
        SignatureHom {
            source: sig.clone(),
            target: sig.clone(),
            type_map: sig.types.iter().map(|t| (t.clone(), t.clone())).collect(),
            gen_map: sig.generators.keys().map(|g| (g.clone(), g.clone())).collect(),
        }
    }

    pub fn map_type(&self, t: &str) -> String {
        self.type_map.get(t).cloned().unwrap_or_else(|| t.to_string())
    }

    pub fn map_generator(&self, g: &str) -> String {
        self.gen_map.get(g).cloned().unwrap_or_else(|| g.to_string())
    }

    pub fn map_expr(&self, e: &Expression) -> Expression {
        e.map_types(&mut |t| self.map_type(t))
    }

    pub fn validate(&self) -> Result<(), SignatureError> {
        for t in &self.source.types {
            let image = self.type_map.get(t).ok_or_else(|| SignatureError::Unmapped(t.clone()))?;
            if !self.target.has_type(image) {
                return Err(SignatureError::UnknownType {
                    name: image.clone(),
                    generator: String::new(),
                });
            }
        }
        for g in self.source.generators() {
            let image = self
                .gen_map
                .get(&g.name)
                .ok_or_else(|| SignatureError::Unmapped(g.name.clone()))?;
            let h = self.target.generator(image)?;
            if self.map_expr(&g.source) != h.source || self.map_expr(&g.target) != h.target {
                return Err(SignatureError::TypeMismatch(g.name.clone()));
            }
        }
        Ok(())
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SignatureHom) -> SignatureHom {
        SignatureHom {
            source: self.source.clone(),
            target: next.target.clone(),
            type_map: self
                .type_map
                .iter()
                .map(|(k, v)| (k.clone(), next.map_type(v)))
                .collect(),
            gen_map: self
                .gen_map
                .iter()
                .map(|(k, v)| (k.clone(), next.map_generator(v)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "type X Y B C A U V\ngen f : X * Y -> B > C\ngen g : A > B -> U * V\n";

    #[test]
    fn worked_signature_validates() {
        let sig = Signature::parse(WORKED).unwrap();
        assert!(sig.validate().is_ok());
        assert_eq!(sig.generator("f").unwrap().target, "B > C".parse().unwrap());
        assert_eq!(Signature::parse(&sig.to_string()).unwrap(), sig);
    }

    #[test]
    fn empty_signature_validates() {
        assert!(Signature::new().validate().is_ok());
        assert_eq!(Signature::parse("# nothing\n\n").unwrap(), Signature::new());
    }

    #[test]
    fn undeclared_type_is_rejected() {
        assert_eq!(
            Signature::parse("type A\ngen f : A -> Q"),
            Err(SignatureError::UnknownType {
                name: "Q".into(),
                generator: "f".into()
            })
        );
    }

    #[test]
    fn duplicate_generator_is_rejected() {
        let err = Signature::parse("type A\ngen f : A -> A\ngen f : A -> N").unwrap_err();
        assert_eq!(err, SignatureError::DuplicateGenerator("f".into()));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = Signature::parse("type A\ngen f A -> A").unwrap_err();
        assert!(matches!(err, SignatureError::Parse { line: 2, .. }));
    }

    fn collapse() -> SignatureHom {
        let source = Signature::parse("type A B\ngen f : A -> B\ngen g : B -> A").unwrap();
        let target = Signature::parse("type T\ngen h : T -> T").unwrap();
        SignatureHom {
            source,
            target,
            type_map: [("A", "T"), ("B", "T")].map(|(a, b)| (a.into(), b.into())).into(),
            gen_map: [("f", "h"), ("g", "h")].map(|(a, b)| (a.into(), b.into())).into(),
        }
    }

    #[test]
    fn homomorphisms_validate() {
        let sig = Signature::parse(WORKED).unwrap();
        assert!(SignatureHom::identity(&sig).validate().is_ok());
        assert!(collapse().validate().is_ok());
    }

    #[test]
    fn wrong_arity_image_is_rejected() {
        let mut h = collapse();
        h.target.add_generator("k", "T * T".parse().unwrap(), "T".parse().unwrap()).unwrap();
        h.gen_map.insert("f".into(), "k".into());
        assert_eq!(h.validate(), Err(SignatureError::TypeMismatch("f".into())));
    }

    #[test]
    fn identity_is_neutral() {
        let h = collapse();
        let left = SignatureHom::identity(&h.source).then(&h);
        let right = h.then(&SignatureHom::identity(&h.target));
        assert_eq!(left, h);
        assert_eq!(right, h);
    }
}
