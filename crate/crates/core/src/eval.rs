//! Interpretation of diagrams in strict physical duoidal algebras.
//!
//! A diagram is evaluated node by node along a topological order. Before each
//! node, the current level is brought by a structure map into the shape
//! `C[source]` where `C` is a one-hole context around the node's inputs; the
//! generator is then whiskered into `C` by identities. The structure maps are
//! synthesized from the distributor and the symmetry, so an algebra only
//! supplies those two primitives.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::diagram::{DiagramError, StringDiagram, HOLE};
use crate::expr::{par_e, seq_e, Expression};
use crate::signature::{Generator, Signature};
use crate::zetless::{structure_between, StructureTerm, Tagged, ZetlessError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no object assigned to type `{0}`")]
    UnknownType(String),
    #[error("no morphism assigned to generator `{0}`")]
    UnassignedGenerator(String),
    #[error("algebra type mismatch: {0}")]
    AlgebraTypeMismatch(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Zetless(#[from] ZetlessError),
}

/// A strict physical duoidal category presented by its operations.
///
/// Object operations must be strictly associative and unital; `dist` and
/// `sym` interpret the distributor `(X > Z) * (Y > W) -> (X * Y) > (Z * W)`
/// and the symmetry `X * Y -> Y * X`. Law compliance is the implementor's
/// responsibility.
pub trait Algebra {
    type Object: Clone + PartialEq + fmt::Debug;
    type Morphism: Clone + fmt::Debug;

    fn unit(&self) -> Self::Object;
    fn basic(&self, ty: &str) -> Result<Self::Object, EvalError>;
    fn seq_obj(&self, a: &Self::Object, b: &Self::Object) -> Self::Object;
    fn tensor_obj(&self, a: &Self::Object, b: &Self::Object) -> Self::Object;

    fn generator(&self, g: &Generator) -> Result<Self::Morphism, EvalError>;
    fn identity(&self, x: &Self::Object) -> Self::Morphism;
    /// Diagrammatic order: `f` then `g`.
    fn compose(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, EvalError>;
    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, EvalError>;
    fn seq(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, EvalError>;
    fn dist(
        &self,
        x: &Self::Object,
        y: &Self::Object,
        z: &Self::Object,
        w: &Self::Object,
    ) -> Result<Self::Morphism, EvalError>;
    fn sym(&self, x: &Self::Object, y: &Self::Object) -> Result<Self::Morphism, EvalError>;
}

type BinOp<'a, O> = &'a dyn Fn(&O, &O) -> O;

pub fn eval_object<A: Algebra>(alg: &A, e: &Expression) -> Result<A::Object, EvalError> {
    let fold = |cs: &[Expression], op: BinOp<A::Object>| {
        cs.iter()
            .try_fold(None, |acc: Option<A::Object>, c| {
                let x = eval_object(alg, c)?;
                Ok::<_, EvalError>(Some(match acc {
                    None => x,
                    Some(a) => op(&a, &x),
                }))
            })
            .map(|o| o.unwrap_or_else(|| alg.unit()))
    };
    match e {
        Expression::Unit => Ok(alg.unit()),
        Expression::Atom(t) => alg.basic(t),
        Expression::Seq(cs) => fold(cs, &|a, b| alg.seq_obj(a, b)),
        Expression::Par(cs) => fold(cs, &|a, b| alg.tensor_obj(a, b)),
    }
}

fn fold_morphisms<A: Algebra>(
    alg: &A,
    items: impl IntoIterator<Item = Result<A::Morphism, EvalError>>,
    op: impl Fn(&A::Morphism, &A::Morphism) -> Result<A::Morphism, EvalError>,
) -> Result<Option<A::Morphism>, EvalError> {
    let _ = alg;
    let mut acc: Option<A::Morphism> = None;
    for m in items {
        let m = m?;
        acc = Some(match acc {
            None => m,
            Some(a) => op(&a, &m)?,
        });
    }
    Ok(acc)
}

pub fn eval_structure<A: Algebra>(alg: &A, t: &StructureTerm) -> Result<A::Morphism, EvalError> {
    let ob = |e: &Expression| eval_object(alg, e);
    let unit_id = || alg.identity(&alg.unit());
    match t {
        StructureTerm::Id(e) => Ok(alg.identity(&ob(e)?)),
        StructureTerm::Dist(x, y, z, w) => alg.dist(&ob(x)?, &ob(y)?, &ob(z)?, &ob(w)?),
        StructureTerm::Sym(x, y) => alg.sym(&ob(x)?, &ob(y)?),
        StructureTerm::SeqOf(ts) => Ok(fold_morphisms(alg, ts.iter().map(|t| eval_structure(alg, t)), |a, b| {
            alg.seq(a, b)
        })?
        .unwrap_or_else(unit_id)),
        StructureTerm::ParOf(ts) => Ok(fold_morphisms(alg, ts.iter().map(|t| eval_structure(alg, t)), |a, b| {
            alg.tensor(a, b)
        })?
        .unwrap_or_else(unit_id)),
        StructureTerm::Compose(ts) => fold_morphisms(alg, ts.iter().map(|t| eval_structure(alg, t)), |a, b| {
            alg.compose(a, b)
        })?
        .ok_or_else(|| EvalError::AlgebraTypeMismatch("empty composite".into())),
    }
}

/// Evaluates along [`StringDiagram::planned_order`].
pub fn eval_diagram<A: Algebra>(alg: &A, d: &StringDiagram) -> Result<A::Morphism, EvalError> {
    d.validate()?;
    eval_diagram_along(alg, d, &d.planned_order()?)
}

/// Evaluates along a given topological order of the generator nodes.
pub fn eval_diagram_along<A: Algebra>(
    alg: &A,
    d: &StringDiagram,
    order: &[usize],
) -> Result<A::Morphism, EvalError> {
    d.validate()?;
    let plan = d.plan(order)?;
    let label = |w: usize| d.wires()[w].clone();
    let mut current = Tagged::from_expr(d.source(), d.input_wires());
    let mut steps: Vec<A::Morphism> = Vec::new();
    for (ctx, &n) in plan.contexts.iter().zip(order) {
        let node = &d.nodes()[n];
        let g = d.signature().generator(node.generator().expect("generator node")).map_err(DiagramError::from)?;
        let c_src = ctx.plug(HOLE, &Tagged::from_expr(&g.source, &node.inputs));
        let coercion = structure_between(&current, &c_src, &label)?;
        steps.push(eval_structure(alg, &coercion)?);
        steps.push(whisker(alg, ctx, &alg.generator(g)?, &label)?);
        current = ctx.plug(HOLE, &Tagged::from_expr(&g.target, &node.outputs));
    }
    let last = structure_between(&current, &Tagged::from_expr(d.target(), d.output_wires()), &label)?;
    steps.push(eval_structure(alg, &last)?);
    Ok(fold_morphisms(alg, steps.into_iter().map(Ok), |a, b| alg.compose(a, b))?.expect("at least one step"))
}

fn whisker<A: Algebra>(
    alg: &A,
    ctx: &Tagged,
    m: &A::Morphism,
    label: &impl Fn(usize) -> String,
) -> Result<A::Morphism, EvalError> {
    let children = |cs: &[Tagged]| cs.iter().map(|c| whisker(alg, c, m, label)).collect::<Vec<_>>();
    Ok(match ctx {
        Tagged::Leaf(HOLE) => m.clone(),
        Tagged::Leaf(w) => alg.identity(&alg.basic(&label(*w))?),
        Tagged::Unit => alg.identity(&alg.unit()),
        Tagged::Seq(cs) => fold_morphisms(alg, children(cs), |a, b| alg.seq(a, b))?.expect("nonempty"),
        Tagged::Par(cs) => fold_morphisms(alg, children(cs), |a, b| alg.tensor(a, b))?.expect("nonempty"),
    })
}

/// A one-object algebra: every morphism is an element of a commutative
/// monoid, and every operation on morphisms is the monoid product.
#[derive(Debug, Clone)]
pub struct WeightAlgebra<T = i64> {
    weights: BTreeMap<String, T>,
    one: T,
    combine: fn(&T, &T) -> T,
}

impl WeightAlgebra<i64> {
    /// Integers under multiplication.
    pub fn product(weights: impl IntoIterator<Item = (String, i64)>) -> Self {
        WeightAlgebra::new(1, |a, b| a * b, weights)
    }
}

impl<T: Clone + fmt::Debug> WeightAlgebra<T> {
    pub fn new(one: T, combine: fn(&T, &T) -> T, weights: impl IntoIterator<Item = (String, T)>) -> Self {
        WeightAlgebra {
            weights: weights.into_iter().collect(),
            one,
            combine,
        }
    }

    /// The weight assigned to a generator.
    pub fn weight(&self, generator: &str) -> Option<&T> {
        self.weights.get(generator)
    }
}

impl<T: Clone + fmt::Debug> Algebra for WeightAlgebra<T> {
    type Object = ();
    type Morphism = T;

    fn unit(&self) {}

    fn basic(&self, _ty: &str) -> Result<(), EvalError> {
        Ok(())
    }

    fn seq_obj(&self, _: &(), _: &()) {}

    fn tensor_obj(&self, _: &(), _: &()) {}

    fn generator(&self, g: &Generator) -> Result<T, EvalError> {
        self.weights
            .get(&g.name)
            .cloned()
            .ok_or_else(|| EvalError::UnassignedGenerator(g.name.clone()))
    }

    fn identity(&self, _: &()) -> T {
        self.one.clone()
    }

    fn compose(&self, f: &T, g: &T) -> Result<T, EvalError> {
        Ok((self.combine)(f, g))
    }

    fn tensor(&self, f: &T, g: &T) -> Result<T, EvalError> {
        Ok((self.combine)(f, g))
    }

    fn seq(&self, f: &T, g: &T) -> Result<T, EvalError> {
        Ok((self.combine)(f, g))
    }

    fn dist(&self, _: &(), _: &(), _: &(), _: &()) -> Result<T, EvalError> {
        Ok(self.one.clone())
    }

    fn sym(&self, _: &(), _: &()) -> Result<T, EvalError> {
        Ok(self.one.clone())
    }
}

/// Diagrams interpreting themselves: objects are expressions and morphisms
/// are string diagrams over the signature.
#[derive(Debug, Clone)]
pub struct SelfAlgebra {
    signature: Arc<Signature>,
}

impl SelfAlgebra {
    pub fn new(signature: &Arc<Signature>) -> Self {
        SelfAlgebra {
            signature: signature.clone(),
        }
    }
}

impl Algebra for SelfAlgebra {
    type Object = Expression;
    type Morphism = StringDiagram;

    fn unit(&self) -> Expression {
        Expression::Unit
    }

    fn basic(&self, ty: &str) -> Result<Expression, EvalError> {
        if self.signature.has_type(ty) {
            Ok(Expression::atom(ty))
        } else {
            Err(EvalError::UnknownType(ty.to_string()))
        }
    }

    fn seq_obj(&self, a: &Expression, b: &Expression) -> Expression {
        seq_e(a, b)
    }

    fn tensor_obj(&self, a: &Expression, b: &Expression) -> Expression {
        par_e(a, b)
    }

    fn generator(&self, g: &Generator) -> Result<StringDiagram, EvalError> {
        Ok(StringDiagram::from_generator(&self.signature, &g.name)?)
    }

    fn identity(&self, x: &Expression) -> StringDiagram {
        StringDiagram::identity(&self.signature, x)
    }

    fn compose(&self, f: &StringDiagram, g: &StringDiagram) -> Result<StringDiagram, EvalError> {
        Ok(f.compose(g)?)
    }

    fn tensor(&self, f: &StringDiagram, g: &StringDiagram) -> Result<StringDiagram, EvalError> {
        Ok(f.tensor(g)?)
    }

    fn seq(&self, f: &StringDiagram, g: &StringDiagram) -> Result<StringDiagram, EvalError> {
        Ok(f.sequence(g)?)
    }

    fn dist(&self, x: &Expression, y: &Expression, z: &Expression, w: &Expression) -> Result<StringDiagram, EvalError> {
        let (nx, ny, nz, nw) = (x.size(), y.size(), z.size(), w.size());
        // source leaves: x z y w; target leaves: x y z w
        let map: Vec<usize> = (0..nx)
            .chain((0..nz).map(|i| nx + ny + i))
            .chain((0..ny).map(|i| nx + i))
            .chain((0..nw).map(|i| nx + ny + nz + i))
            .collect();
        let source = par_e(&seq_e(x, z), &seq_e(y, w));
        let target = seq_e(&par_e(x, y), &par_e(z, w));
        Ok(StringDiagram::from_permutation(&self.signature, &source, &target, &map)?)
    }

    fn sym(&self, x: &Expression, y: &Expression) -> Result<StringDiagram, EvalError> {
        let (nx, ny) = (x.size(), y.size());
        let map: Vec<usize> = (0..nx).map(|i| ny + i).chain(0..ny).collect();
        Ok(StringDiagram::from_permutation(&self.signature, &par_e(x, y), &par_e(y, x), &map)?)
    }
}
