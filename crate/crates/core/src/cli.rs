//! Batch front-end: a document format for signatures and terms, elaboration
//! of terms into diagrams, and the `physduo` command line.
//!
//! A document is a sequence of lines:
//!
//! ```text
//! # comment
//! type X Y B C A U V
//! gen f : X * Y -> B > C
//! gen g : A > B -> U * V
//! term worked : (A > X) * Y -> (U * V) > C = str[(A>X)*Y -> A>(X*Y)] ; (id[A] > f) ; (g > id[C])
//! ```
//!
//! In terms, `;` is diagrammatic composition and binds loosest, then `>`, then
//! `*`. Atoms are generator names, earlier term names, `id[E]`, `str[E -> E]`
//! and parenthesized terms.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::diagram::{DiagramError, StringDiagram};
use crate::eval::{eval_diagram, SelfAlgebra, WeightAlgebra};
use crate::expr::{self, Expression};
use crate::lex::{tokenize, Cursor, Tok};
use crate::signature::{parse_arrow, Signature, SignatureError};
use crate::zetless::{self, encode, inclusion_exists};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermAst {
    /// A generator, or a previously defined term.
    Gen(String),
    Id(Expression),
    Str(Expression, Expression),
    Comp(Box<TermAst>, Box<TermAst>),
    Par(Box<TermAst>, Box<TermAst>),
    Seq(Box<TermAst>, Box<TermAst>),
}

impl fmt::Display for TermAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermAst::Gen(g) => f.write_str(g),
            TermAst::Id(e) => write!(f, "id[{e}]"),
            TermAst::Str(a, b) => write!(f, "str[{a} -> {b}]"),
            TermAst::Comp(a, b) => write!(f, "({a} ; {b})"),
            TermAst::Par(a, b) => write!(f, "({a} * {b})"),
            TermAst::Seq(a, b) => write!(f, "({a} > {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("cannot compose: {left} does not match {right}")]
    BoundaryMismatch { left: Expression, right: Expression },
    #[error("no structure map {from} -> {to}")]
    NoSuchStructureMap { from: Expression, to: Expression },
    #[error("unknown generator or term `{0}`")]
    UnknownGenerator(String),
    #[error("declared {declared}, elaborated {found}")]
    DeclaredType { declared: String, found: String },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Elaborates a term; `terms` resolves names that are not generators.
pub fn elaborate(
    sig: &Arc<Signature>,
    t: &TermAst,
    terms: &BTreeMap<String, StringDiagram>,
) -> Result<StringDiagram, ElabError> {
    let rec = |t: &TermAst| elaborate(sig, t, terms);
    Ok(match t {
        TermAst::Gen(name) => {
            if sig.generator(name).is_ok() {
                StringDiagram::from_generator(sig, name)?
            } else {
                terms
                    .get(name)
                    .cloned()
                    .ok_or_else(|| ElabError::UnknownGenerator(name.clone()))?
            }
        }
        TermAst::Id(e) => StringDiagram::identity(sig, e),
        TermAst::Str(a, b) => match StringDiagram::structural(sig, a, b) {
            Ok(d) => d,
            Err(DiagramError::NoStructureMap { from, to }) => return Err(ElabError::NoSuchStructureMap { from, to }),
            Err(e) => return Err(e.into()),
        },
        TermAst::Comp(a, b) => {
            let (a, b) = (rec(a)?, rec(b)?);
            if a.target() != b.source() {
                return Err(ElabError::BoundaryMismatch {
                    left: a.target().clone(),
                    right: b.source().clone(),
                });
            }
            a.compose(&b)?
        }
        TermAst::Par(a, b) => rec(a)?.tensor(&rec(b)?)?,
        TermAst::Seq(a, b) => rec(a)?.sequence(&rec(b)?)?,
    })
}

pub fn parse_term(text: &str) -> Result<TermAst, String> {
    let toks = tokenize(text).map_err(|e| format!("unexpected character '{}' at offset {}", e.found, e.pos))?;
    let mut cur = Cursor::new(&toks, text.len());
    let t = parse_comp(&mut cur)?;
    if !cur.at_end() {
        return Err(format!("unexpected {} at offset {}", cur.peek().unwrap(), cur.pos()));
    }
    Ok(t)
}

fn parse_comp(cur: &mut Cursor<'_>) -> Result<TermAst, String> {
    let mut t = parse_seq(cur)?;
    while cur.eat(&Tok::Semi) {
        t = TermAst::Comp(Box::new(t), Box::new(parse_seq(cur)?));
    }
    Ok(t)
}

fn parse_seq(cur: &mut Cursor<'_>) -> Result<TermAst, String> {
    let mut t = parse_par(cur)?;
    while cur.eat(&Tok::Gt) {
        t = TermAst::Seq(Box::new(t), Box::new(parse_par(cur)?));
    }
    Ok(t)
}

fn parse_par(cur: &mut Cursor<'_>) -> Result<TermAst, String> {
    let mut t = parse_atom(cur)?;
    while cur.eat(&Tok::Star) {
        t = TermAst::Par(Box::new(t), Box::new(parse_atom(cur)?));
    }
    Ok(t)
}

fn expect(cur: &mut Cursor<'_>, tok: Tok) -> Result<(), String> {
    if cur.eat(&tok) {
        Ok(())
    } else {
        let found = cur.peek().map_or("end of input".to_string(), |t| t.to_string());
        Err(format!("expected {tok} at offset {}, found {found}", cur.pos()))
    }
}

fn parse_atom(cur: &mut Cursor<'_>) -> Result<TermAst, String> {
    let pos = cur.pos();
    match cur.bump() {
        Some(Tok::Ident(k)) if k == "id" => {
            expect(cur, Tok::LBracket)?;
            let e = expr::parse_tokens(cur).map_err(|e| e.to_string())?;
            expect(cur, Tok::RBracket)?;
            Ok(TermAst::Id(e))
        }
        Some(Tok::Ident(k)) if k == "str" => {
            expect(cur, Tok::LBracket)?;
            let (a, b) = parse_arrow(cur)?;
            expect(cur, Tok::RBracket)?;
            Ok(TermAst::Str(a, b))
        }
        Some(Tok::Ident(name)) => Ok(TermAst::Gen(name.clone())),
        Some(Tok::LParen) => {
            let t = parse_comp(cur)?;
            expect(cur, Tok::RParen)?;
            Ok(t)
        }
        Some(t) => Err(format!("unexpected {t} at offset {pos}")),
        None => Err(format!("unexpected end of term at offset {pos}")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermDef {
    pub name: String,
    pub source: Expression,
    pub target: Expression,
    pub body: TermAst,
    pub line: usize,
}

/// A parsed document: its signature and its term definitions, in order.
#[derive(Debug, Clone)]
pub struct Document {
    pub signature: Arc<Signature>,
    pub terms: Vec<TermDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let mut sig = Signature::new();
        let mut terms: Vec<TermDef> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if sig.parse_line(line, lineno)? {
                continue;
            }
            let perr = |message: String| DocumentError::Parse { line: lineno, message };
            let toks = tokenize(line).map_err(|e| perr(format!("unexpected character '{}'", e.found)))?;
            let mut cur = Cursor::new(&toks, line.len());
            match cur.bump() {
                Some(Tok::Ident(kw)) if kw == "term" => {}
                Some(t) => return Err(perr(format!("expected `type`, `gen` or `term`, found {t}"))),
                None => continue,
            }
            let name = match cur.bump() {
                Some(Tok::Ident(n)) if expr::is_type_name(n) && !matches!(n.as_str(), "id" | "str") => n.clone(),
                _ => return Err(perr("expected a term name".into())),
            };
            if terms.iter().any(|t| t.name == name) {
                return Err(perr(format!("term `{name}` is defined twice")));
            }
            expect(&mut cur, Tok::Colon).map_err(perr)?;
            let (source, target) = parse_arrow(&mut cur).map_err(perr)?;
            expect(&mut cur, Tok::Eq).map_err(perr)?;
            let body_start = toks.get(cur.index()).map_or(line.len(), |t| t.pos);
            let body = parse_term(&line[body_start..]).map_err(perr)?;
            terms.push(TermDef {
                name,
                source,
                target,
                body,
                line: lineno,
            });
        }
        Ok(Document {
            signature: Arc::new(sig),
            terms,
        })
    }

    pub fn term(&self, name: &str) -> Option<&TermDef> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// Elaborates every term in order; later terms may use earlier ones.
    pub fn elaborate_all(&self) -> Vec<(String, Result<StringDiagram, ElabError>)> {
        let mut env = BTreeMap::new();
        let mut out = Vec::new();
        for def in &self.terms {
            let r = self.elaborate_def(def, &env);
            if let Ok(d) = &r {
                env.insert(def.name.clone(), d.clone());
            }
            out.push((def.name.clone(), r));
        }
        out
    }

    fn elaborate_def(&self, def: &TermDef, env: &BTreeMap<String, StringDiagram>) -> Result<StringDiagram, ElabError> {
        let d = elaborate(&self.signature, &def.body, env)?;
        if d.source() != &def.source || d.target() != &def.target {
            return Err(ElabError::DeclaredType {
                declared: format!("{} -> {}", def.source, def.target),
                found: format!("{} -> {}", d.source(), d.target()),
            });
        }
        Ok(d)
    }

    /// Elaborates the named term (and the terms before it).
    pub fn diagram(&self, name: &str) -> Option<Result<StringDiagram, ElabError>> {
        self.term(name)?;
        let mut env = BTreeMap::new();
        for def in &self.terms {
            let r = self.elaborate_def(def, &env);
            if def.name == name {
                return Some(r);
            }
            if let Ok(d) = r {
                env.insert(def.name.clone(), d);
            }
        }
        None
    }
}

#[derive(Debug, Parser)]
#[command(name = "physduo", about = "String diagrams for physical duoidal categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Elaborate and validate every term of a document.
    Check {
        file: PathBuf,
        /// Validate a JSON diagram over the document's signature instead.
        #[arg(long)]
        diagram: Option<PathBuf>,
    },
    /// Decide whether two terms denote equal diagrams.
    Eq {
        file: PathBuf,
        lhs: String,
        rhs: String,
        /// Accept boundaries that agree up to symmetry.
        #[arg(long)]
        modulo_symmetry: bool,
    },
    /// Print the canonical JSON form of a term's diagram.
    Normalize { file: PathBuf, term: String },
    /// Render a term's diagram.
    Render {
        file: PathBuf,
        term: String,
        #[command(flatten)]
        format: RenderFormat,
        /// Include the derived wire order.
        #[arg(long)]
        order: bool,
    },
    /// List the zetless posets of a given size over some types.
    Enumerate {
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        types: Vec<String>,
    },
    /// Evaluate a term's diagram in a built-in algebra.
    Eval {
        file: PathBuf,
        term: String,
        #[arg(long, value_enum, default_value_t = AlgebraKind::Weight)]
        algebra: AlgebraKind,
        /// Generator weights, as `name=value` pairs.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<String>,
    },
    /// Search for a structure map between two expressions.
    Include { source: String, target: String },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct RenderFormat {
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    ascii: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgebraKind {
    Weight,
    #[value(name = "self")]
    SelfDiagrams,
}

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

struct Failure(i32, String);

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure(EXIT_USAGE, m.into())
    }

    fn invalid(m: impl Into<String>) -> Self {
        Failure(EXIT_FALSE, m.into())
    }
}

/// Runs the command line with `args` (program name first) and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn load(path: &Path) -> Result<Document, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Document::parse(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn term_diagram(doc: &Document, path: &Path, name: &str) -> Result<StringDiagram, Failure> {
    let def = doc
        .term(name)
        .ok_or_else(|| Failure::usage(format!("{}: no term named `{name}`", path.display())))?;
    let d = doc
        .diagram(name)
        .expect("term exists")
        .map_err(|e| Failure::invalid(format!("{}:{}: term `{name}`: {e}", path.display(), def.line)))?;
    d.validate()
        .map_err(|e| Failure::invalid(format!("{}:{}: term `{name}`: {e}", path.display(), def.line)))?;
    Ok(d)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::usage(e.to_string());
    match command {
        Command::Check { file, diagram } => {
            let doc = load(&file)?;
            if let Some(path) = diagram {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                let d = StringDiagram::from_json_str(&doc.signature, &text)
                    .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
                return match d.validate() {
                    Ok(()) => {
                        writeln!(out, "ok {} -> {}", d.source(), d.target()).map_err(io)?;
                        Ok(EXIT_OK)
                    }
                    Err(e) => Err(Failure::invalid(format!("{}: {e}", path.display()))),
                };
            }
            let mut failed = false;
            for ((name, result), def) in doc.elaborate_all().into_iter().zip(&doc.terms) {
                match result.map_err(|e| e.to_string()).and_then(|d| d.validate().map(|_| d).map_err(|e| e.to_string())) {
                    Ok(d) => writeln!(out, "ok {name} : {} -> {}", d.source(), d.target()).map_err(io)?,
                    Err(e) => {
                        failed = true;
                        writeln!(out, "invalid {name} ({}:{}): {e}", file.display(), def.line).map_err(io)?;
                    }
                }
            }
            Ok(if failed { EXIT_FALSE } else { EXIT_OK })
        }
        Command::Eq {
            file,
            lhs,
            rhs,
            modulo_symmetry,
        } => {
            let doc = load(&file)?;
            let (a, b) = (term_diagram(&doc, &file, &lhs)?, term_diagram(&doc, &file, &rhs)?);
            let same = if modulo_symmetry { a.equal_modulo_symmetry(&b) } else { a.equal(&b) };
            writeln!(out, "{}", if same { "equal" } else { "distinct" }).map_err(io)?;
            Ok(if same { EXIT_OK } else { EXIT_FALSE })
        }
        Command::Normalize { file, term } => {
            let doc = load(&file)?;
            let d = term_diagram(&doc, &file, &term)?;
            writeln!(out, "{}", d.canonicalize().to_json_string()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Render {
            file,
            term,
            format,
            order,
        } => {
            let doc = load(&file)?;
            let d = term_diagram(&doc, &file, &term)?;
            let text = if format.dot { d.to_dot(order) } else { d.to_ascii() };
            writeln!(out, "{}", text.trim_end()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Enumerate { n, types } => {
            for t in &types {
                if !expr::is_type_name(t) {
                    return Err(Failure::usage(format!("`{t}` is not a type name")));
                }
            }
            let exprs = zetless::enumerate_expressions(n, &types).map_err(|e| Failure::usage(e.to_string()))?;
            for (k, e) in exprs.iter().enumerate() {
                let json = serde_json::to_string(&encode(e).to_json()).expect("poset serializes");
                writeln!(out, "{:>4}  {e}  {json}", k + 1).map_err(io)?;
            }
            writeln!(out, "count: {}", exprs.len()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Eval {
            file,
            term,
            algebra,
            weights,
        } => {
            let doc = load(&file)?;
            let d = term_diagram(&doc, &file, &term)?;
            match algebra {
                AlgebraKind::Weight => {
                    let mut table = Vec::new();
                    for w in &weights {
                        let (k, v) = w
                            .split_once('=')
                            .ok_or_else(|| Failure::usage(format!("weight `{w}` is not name=value")))?;
                        let v: i64 = v
                            .trim()
                            .parse()
                            .map_err(|_| Failure::usage(format!("weight `{w}` is not an integer")))?;
                        table.push((k.trim().to_string(), v));
                    }
                    let alg = WeightAlgebra::product(table);
                    let v = eval_diagram(&alg, &d).map_err(|e| Failure::invalid(e.to_string()))?;
                    writeln!(out, "{v}").map_err(io)?;
                }
                AlgebraKind::SelfDiagrams => {
                    let alg = SelfAlgebra::new(&doc.signature);
                    let v = eval_diagram(&alg, &d).map_err(|e| Failure::invalid(e.to_string()))?;
                    writeln!(out, "{}", v.to_ascii()).map_err(io)?;
                    writeln!(out, "equal to input: {}", v.equal(&d)).map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Include { source, target } => {
            let parse = |s: &str| s.parse::<Expression>().map_err(|e| Failure::usage(format!("`{s}`: {e}")));
            let (a, b) = (parse(&source)?, parse(&target)?);
            match inclusion_exists(&encode(&a), &encode(&b)) {
                Some(inc) => {
                    let t = zetless::synthesize_structure_map(&inc).map_err(|e| Failure::invalid(e.to_string()))?;
                    writeln!(out, "yes").map_err(io)?;
                    writeln!(out, "{t}").map_err(io)?;
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(out, "no").map_err(io)?;
                    Ok(EXIT_FALSE)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "\
type X Y B C A U V
gen f : X * Y -> B > C
gen g : A > B -> U * V
term worked : (A > X) * Y -> (U * V) > C = str[(A>X)*Y -> A>(X*Y)] ; (id[A] > f) ; (g > id[C])
";

    #[test]
    fn term_grammar_precedence() {
        let t = parse_term("a ; b > c * d ; e").unwrap();
        assert_eq!(t.to_string(), "((a ; (b > (c * d))) ; e)");
        assert!(parse_term("str[A > B -> A * B").is_err());
        assert!(parse_term("id[A] ;").is_err());
    }

    #[test]
    fn worked_composite_term_elaborates() {
        let doc = Document::parse(WORKED).unwrap();
        let d = doc.diagram("worked").unwrap().unwrap();
        d.validate().unwrap();
        assert_eq!(d.target(), &"(U * V) > C".parse::<Expression>().unwrap());
        assert_eq!(d.generator_nodes().len(), 2);
    }

    #[test]
    fn identity_on_unit_is_empty() {
        let sig = Arc::new(Signature::new());
        let d = elaborate(&sig, &parse_term("id[N]").unwrap(), &BTreeMap::new()).unwrap();
        assert!(d.wires().is_empty());
        assert!(d.generator_nodes().is_empty());
    }

    #[test]
    fn missing_structure_map_is_reported() {
        let sig = Arc::new(Signature::parse("type A B").unwrap());
        let err = elaborate(&sig, &parse_term("str[A>B -> A*B]").unwrap(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, ElabError::NoSuchStructureMap { .. }));
    }

    #[test]
    fn boundary_mismatch_prints_both_sides() {
        let doc = Document::parse("type A B\ngen f : A -> B\nterm t : A -> B = f ; f").unwrap();
        let err = doc.diagram("t").unwrap().unwrap_err();
        assert_eq!(err.to_string(), "cannot compose: B does not match A");
    }

    #[test]
    fn terms_may_reuse_earlier_terms() {
        let doc = Document::parse("type A\ngen f : A -> A\nterm t : A -> A = f\nterm u : A -> A = t ; t").unwrap();
        assert_eq!(doc.diagram("u").unwrap().unwrap().generator_nodes().len(), 2);
    }

    #[test]
    fn document_errors_carry_lines() {
        let err = Document::parse("type A\nterm t : A -> A f").unwrap_err();
        assert!(matches!(err, DocumentError::Parse { line: 2, .. }));
        assert!(matches!(Document::parse("bogus"), Err(DocumentError::Parse { line: 1, .. })));
    }
}
