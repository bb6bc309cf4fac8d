//! The bridge between expressions and zetless posets.
//!
//! [`encode`] sends an expression to its poset of atoms (sequencing orders,
//! tensoring does not); [`decode`] inverts it up to the order of tensor
//! children. Morphisms of the free physical duoidal category on a set are the
//! label-preserving bijective inclusions of these posets ([`Inclusion`]), and
//! [`synthesize_structure_map`] turns an inclusion into an explicit
//! [`StructureTerm`] over the primitive distributor and symmetry.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::expr::{par_e, seq_e, Expression};
use crate::poset::TypedPoset;

/// Largest cardinality accepted by [`enumerate`].
pub const ENUMERATE_MAX: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZetlessError {
    #[error("poset is not zetless{}", .witness.map(|w| format!(" (zigzag {:?})", w)).unwrap_or_default())]
    NotZetless { witness: Option<[usize; 4]> },
    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),
    #[error("inclusion boundaries do not match")]
    BoundaryMismatch,
    #[error("enumeration size {n} exceeds the limit {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("ill-typed structure term: {0}")]
    IllTyped(String),
}

/// Expression tree whose leaves are element ids instead of type names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tagged {
    Unit,
    Leaf(usize),
    Seq(Vec<Tagged>),
    Par(Vec<Tagged>),
}

impl Tagged {
    pub fn seq_all(items: impl IntoIterator<Item = Tagged>) -> Tagged {
        let mut cs = Vec::new();
        for t in items {
            match t {
                Tagged::Unit => {}
                Tagged::Seq(inner) => cs.extend(inner),
                other => cs.push(other),
            }
        }
        match cs.len() {
            0 => Tagged::Unit,
            1 => cs.pop().unwrap(),
            _ => Tagged::Seq(cs),
        }
    }

    pub fn par_all(items: impl IntoIterator<Item = Tagged>) -> Tagged {
        let mut cs = Vec::new();
        for t in items {
            match t {
                Tagged::Unit => {}
                Tagged::Par(inner) => cs.extend(inner),
                other => cs.push(other),
            }
        }
        match cs.len() {
            0 => Tagged::Unit,
            1 => cs.pop().unwrap(),
            _ => Tagged::Par(cs),
        }
    }

    /// Tags the leaves of `e` left to right with `ids`.
    pub fn from_expr(e: &Expression, ids: &[usize]) -> Tagged {
        fn go(e: &Expression, ids: &[usize], next: &mut usize) -> Tagged {
            match e {
                Expression::Unit => Tagged::Unit,
                Expression::Atom(_) => {
                    let t = Tagged::Leaf(ids[*next]);
                    *next += 1;
                    t
                }
                Expression::Seq(cs) => Tagged::Seq(cs.iter().map(|c| go(c, ids, next)).collect()),
                Expression::Par(cs) => Tagged::Par(cs.iter().map(|c| go(c, ids, next)).collect()),
            }
        }
        debug_assert_eq!(e.size(), ids.len());
        go(e, ids, &mut 0)
    }

    pub fn to_expr(&self, label: &impl Fn(usize) -> String) -> Expression {
        match self {
            Tagged::Unit => Expression::Unit,
            Tagged::Leaf(i) => Expression::Atom(label(*i)),
            Tagged::Seq(cs) => Expression::Seq(cs.iter().map(|c| c.to_expr(label)).collect()),
            Tagged::Par(cs) => Expression::Par(cs.iter().map(|c| c.to_expr(label)).collect()),
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            Tagged::Unit => {}
            Tagged::Leaf(i) => out.push(*i),
            Tagged::Seq(cs) | Tagged::Par(cs) => cs.iter().for_each(|c| c.collect(out)),
        }
    }

    fn first_leaf(&self) -> Option<usize> {
        match self {
            Tagged::Unit => None,
            Tagged::Leaf(i) => Some(*i),
            Tagged::Seq(cs) | Tagged::Par(cs) => cs.iter().find_map(Tagged::first_leaf),
        }
    }

    /// Keeps only the leaves accepted by `keep`, re-reducing the tree.
    pub fn restrict(&self, keep: &impl Fn(usize) -> bool) -> Tagged {
        match self {
            Tagged::Unit => Tagged::Unit,
            Tagged::Leaf(i) => {
                if keep(*i) {
                    self.clone()
                } else {
                    Tagged::Unit
                }
            }
            Tagged::Seq(cs) => Tagged::seq_all(cs.iter().map(|c| c.restrict(keep))),
            Tagged::Par(cs) => Tagged::par_all(cs.iter().map(|c| c.restrict(keep))),
        }
    }

    /// Replaces the leaf `hole` by `with`.
    pub fn plug(&self, hole: usize, with: &Tagged) -> Tagged {
        match self {
            Tagged::Unit => Tagged::Unit,
            Tagged::Leaf(i) if *i == hole => with.clone(),
            Tagged::Leaf(_) => self.clone(),
            Tagged::Seq(cs) => Tagged::seq_all(cs.iter().map(|c| c.plug(hole, with))),
            Tagged::Par(cs) => Tagged::par_all(cs.iter().map(|c| c.plug(hole, with))),
        }
    }

    /// Calls `f(x, y)` for every pair of leaves with `x` strictly below `y`.
    pub fn strict_pairs(&self, f: &mut impl FnMut(usize, usize)) {
        match self {
            Tagged::Unit | Tagged::Leaf(_) => {}
            Tagged::Par(cs) => cs.iter().for_each(|c| c.strict_pairs(f)),
            Tagged::Seq(cs) => {
                let leaves: Vec<Vec<usize>> = cs.iter().map(Tagged::leaves).collect();
                for (k, c) in cs.iter().enumerate() {
                    c.strict_pairs(f);
                    for &x in &leaves[k] {
                        for later in &leaves[k + 1..] {
                            later.iter().for_each(|&y| f(x, y));
                        }
                    }
                }
            }
        }
    }

    fn par_children(&self) -> Vec<&Tagged> {
        match self {
            Tagged::Unit => Vec::new(),
            Tagged::Par(cs) => cs.iter().collect(),
            other => vec![other],
        }
    }
}

/// Which of several admissible answers [`zetless_between`] prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bias {
    /// Keep close to the lower bound, adding the cheapest cut when forced.
    Fewest,
    /// Sequence whenever the upper bound allows it.
    Most,
}

/// A zetless order `q` with `lo <= q <= up`, as a tree over the elements of
/// `lo`. `lo` must be closed; `up(x, y)` says whether `x < y` is allowed.
///
/// Zetless orders are series-parallel, so `q` is either disconnected or cut
/// into a lower and an upper block. Restricting an admissible order to a
/// block leaves it admissible, so committing to any valid split never loses
/// a solution; the search is greedy and complete.
pub(crate) fn zetless_between(lo: &TypedPoset, up: &impl Fn(usize, usize) -> bool, bias: Bias) -> Option<Tagged> {
    let all: Vec<usize> = (0..lo.len()).collect();
    between(&all, lo, &|x, y| lo.leq(x, y) || up(x, y), bias)
}

fn between(v: &[usize], lo: &TypedPoset, up: &impl Fn(usize, usize) -> bool, bias: Bias) -> Option<Tagged> {
    if v.len() <= 1 {
        return Some(v.first().map_or(Tagged::Unit, |&x| Tagged::Leaf(x)));
    }
    let recurse = |parts: Vec<Vec<usize>>, seq: bool| -> Option<Tagged> {
        let kids = parts.iter().map(|p| between(p, lo, up, bias)).collect::<Option<Vec<_>>>()?;
        Some(if seq { Tagged::seq_all(kids) } else { Tagged::par_all(kids) })
    };
    let comps = components_within(v, lo);
    let lo_cut = |x: usize, y: usize| lo.leq(x, y);
    match bias {
        Bias::Fewest => {
            if comps.len() > 1 {
                return recurse(comps, false);
            }
            let blocks = cut_blocks(v, lo, &lo_cut);
            if blocks.len() > 1 {
                return recurse(blocks, true);
            }
        }
        Bias::Most => {}
    }
    if bias == Bias::Fewest {
        let added = |d: &[usize]| {
            let d_set: BTreeSet<usize> = d.iter().copied().collect();
            let rest = v.iter().filter(|x| !d_set.contains(x));
            rest.flat_map(|&u| d.iter().map(move |&x| (x, u))).filter(|&(x, u)| !lo.leq(x, u)).count()
        };
        let cheapest = v
            .iter()
            .map(|&x| forced_block(x, v, lo, up))
            .filter(|d| d.len() < v.len())
            .min_by_key(|d| added(d));
        if let Some(d) = cheapest {
            let rest: Vec<usize> = v.iter().copied().filter(|x| !d.contains(x)).collect();
            return recurse(vec![d, rest], true);
        }
    }
    let blocks = cut_blocks(v, lo, up);
    if blocks.len() > 1 {
        return recurse(blocks, true);
    }
    if comps.len() > 1 {
        return recurse(comps, false);
    }
    None
}

fn components_within(v: &[usize], lo: &TypedPoset) -> Vec<Vec<usize>> {
    let mut seen = vec![false; v.len()];
    let mut out = Vec::new();
    for s in 0..v.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![v[s]];
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..v.len() {
                if !seen[j] && lo.comparable(v[i], v[j]) {
                    seen[j] = true;
                    comp.push(v[j]);
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Splits `v` into the longest chain of blocks `b1 < b2 < ...` where each
/// block is a down-set of `lo` in what remains and every pair across blocks
/// is allowed by `ok`.
fn cut_blocks(v: &[usize], lo: &TypedPoset, ok: &impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut rest: Vec<usize> = v.to_vec();
    let mut blocks = Vec::new();
    while !rest.is_empty() {
        let least = rest
            .iter()
            .map(|&x| forced_block(x, &rest, lo, ok))
            .min_by_key(Vec::len)
            .expect("nonempty");
        if least.len() == rest.len() {
            blocks.push(std::mem::take(&mut rest));
            break;
        }
        rest.retain(|x| !least.contains(x));
        blocks.push(least);
    }
    blocks
}

/// The smallest first block of `rest` containing `x`.
fn forced_block(x: usize, rest: &[usize], lo: &TypedPoset, ok: &impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut inside: Vec<bool> = rest.iter().map(|&y| y == x).collect();
    loop {
        let mut grew = false;
        for (j, &u) in rest.iter().enumerate() {
            if inside[j] {
                continue;
            }
            let forced = rest
                .iter()
                .zip(&inside)
                .any(|(&d, &ind)| ind && (lo.leq(u, d) || !ok(d, u)));
            if forced {
                inside[j] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    rest.iter().zip(&inside).filter(|(_, &i)| i).map(|(&y, _)| y).collect()
}

/// Poset of atoms: units vanish, sequencing orders, tensoring juxtaposes.
/// Element `i` is the `i`-th entry of `e.list_type()`.
pub fn encode(e: &Expression) -> TypedPoset {
    match e {
        Expression::Unit => TypedPoset::empty(),
        Expression::Atom(a) => TypedPoset::singleton(a.clone()),
        Expression::Seq(cs) => cs.iter().fold(TypedPoset::empty(), |acc, c| acc.seq(&encode(c))),
        Expression::Par(cs) => cs.iter().fold(TypedPoset::empty(), |acc, c| acc.tensor(&encode(c))),
    }
}

/// Canonical expression of a zetless poset.
pub fn decode(p: &TypedPoset) -> Result<Expression, ZetlessError> {
    decode_with_leaves(p).map(|(e, _)| e)
}

/// [`decode`] together with the element sitting at each leaf position.
pub fn decode_with_leaves(p: &TypedPoset) -> Result<(Expression, Vec<usize>), ZetlessError> {
    let t = decode_tagged(p)?;
    let e = t.to_expr(&|i| p.label(i).to_string());
    Ok((e, t.leaves()))
}

/// Decodes into a tagged tree whose leaves are the elements of `p`.
///
/// Tensor children are ordered by printed form, then least element;
/// sequence children follow the order of the poset.
pub(crate) fn decode_tagged(p: &TypedPoset) -> Result<Tagged, ZetlessError> {
    let all: Vec<usize> = (0..p.len()).collect();
    decode_subset(p, &all)
}

fn decode_subset(p: &TypedPoset, elems: &[usize]) -> Result<Tagged, ZetlessError> {
    match elems.len() {
        0 => return Ok(Tagged::Unit),
        1 => return Ok(Tagged::Leaf(elems[0])),
        _ => {}
    }
    let sub = p.restrict(elems);
    let lift = |comp: &[usize]| comp.iter().map(|&i| elems[i]).collect::<Vec<_>>();
    let connected = sub.connected_components();
    if connected.len() > 1 {
        let mut keyed = Vec::with_capacity(connected.len());
        for comp in &connected {
            let t = decode_subset(p, &lift(comp))?;
            let key = t.to_expr(&|i| p.label(i).to_string()).to_string();
            keyed.push((key, t));
        }
        // stable: ties keep least-element order
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        return Ok(Tagged::Par(keyed.into_iter().map(|k| k.1).collect()));
    }
    let mut layers = sub.incomparable_components();
    if layers.len() > 1 {
        // components are totally ordered; count what lies below a representative
        layers.sort_by_key(|c| (0..sub.len()).filter(|&y| sub.lt(y, c[0])).count());
        let children = layers
            .iter()
            .map(|c| decode_subset(p, &lift(c)))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Tagged::Seq(children));
    }
    let witness = sub.find_zigzag().map(|w| w.map(|i| elems[i]));
    Err(ZetlessError::NotZetless { witness })
}

/// A label-preserving, order-preserving bijection between two posets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inclusion {
    source: TypedPoset,
    target: TypedPoset,
    map: Vec<usize>,
}

impl Inclusion {
    pub fn new(source: TypedPoset, target: TypedPoset, map: Vec<usize>) -> Result<Self, ZetlessError> {
        let n = source.len();
        if target.len() != n || map.len() != n {
            return Err(ZetlessError::InvalidInclusion("sizes differ".into()));
        }
        let mut hit = vec![false; n];
        for &m in &map {
            if m >= n || std::mem::replace(&mut hit[m], true) {
                return Err(ZetlessError::InvalidInclusion("map is not a bijection".into()));
            }
        }
        for x in 0..n {
            if source.label(x) != target.label(map[x]) {
                return Err(ZetlessError::InvalidInclusion(format!("element {x} changes type")));
            }
            for y in 0..n {
                if source.leq(x, y) && !target.leq(map[x], map[y]) {
                    return Err(ZetlessError::InvalidInclusion(format!(
                        "relation {x} <= {y} is not preserved"
                    )));
                }
            }
        }
        Ok(Inclusion { source, target, map })
    }

    pub fn identity(p: &TypedPoset) -> Self {
        Inclusion {
            source: p.clone(),
            target: p.clone(),
            map: (0..p.len()).collect(),
        }
    }

    pub fn source(&self) -> &TypedPoset {
        &self.source
    }

    pub fn target(&self) -> &TypedPoset {
        &self.target
    }

    /// `map()[x]` is the target element of source element `x`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

/// Searches for an inclusion `source -> target`, returning the lexicographically
/// least witness bijection.
pub fn inclusion_exists(source: &TypedPoset, target: &TypedPoset) -> Option<Inclusion> {
    let n = source.len();
    if target.len() != n {
        return None;
    }
    let mut src_labels: Vec<&str> = source.labels().iter().map(String::as_str).collect();
    let mut tgt_labels: Vec<&str> = target.labels().iter().map(String::as_str).collect();
    src_labels.sort_unstable();
    tgt_labels.sort_unstable();
    if src_labels != tgt_labels {
        return None;
    }
    let mut map = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if extend_inclusion(source, target, &mut map, &mut used) {
        Some(Inclusion {
            source: source.clone(),
            target: target.clone(),
            map,
        })
    } else {
        None
    }
}

fn extend_inclusion(s: &TypedPoset, t: &TypedPoset, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let x = map.len();
    if x == s.len() {
        return true;
    }
    for cand in 0..t.len() {
        if used[cand] || s.label(x) != t.label(cand) {
            continue;
        }
        let ok = (0..x).all(|y| {
            (!s.leq(x, y) || t.leq(cand, map[y])) && (!s.leq(y, x) || t.leq(map[y], cand))
        });
        if !ok {
            continue;
        }
        used[cand] = true;
        map.push(cand);
        if extend_inclusion(s, t, map, used) {
            return true;
        }
        map.pop();
        used[cand] = false;
    }
    false
}

/// Composite `i1 ; i2`. When `i1.target()` and `i2.source()` are isomorphic but
/// not identical, they are matched through their canonical labelings.
pub fn compose_inclusions(i1: &Inclusion, i2: &Inclusion) -> Result<Inclusion, ZetlessError> {
    let bridge: Vec<usize> = if i1.target == i2.source {
        (0..i1.target.len()).collect()
    } else {
        i1.target
            .isomorphism(&i2.source)
            .ok_or(ZetlessError::BoundaryMismatch)?
    };
    let map = i1.map.iter().map(|&x| i2.map[bridge[x]]).collect();
    Ok(Inclusion {
        source: i1.source.clone(),
        target: i2.target.clone(),
        map,
    })
}

/// Formal coherence morphisms built from the distributor and the symmetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureTerm {
    Id(Expression),
    /// `(X > Z) * (Y > W) -> (X * Y) > (Z * W)`, arguments in order X, Y, Z, W.
    Dist(Expression, Expression, Expression, Expression),
    /// `X * Y -> Y * X`.
    Sym(Expression, Expression),
    SeqOf(Vec<StructureTerm>),
    ParOf(Vec<StructureTerm>),
    /// Diagrammatic-order composite.
    Compose(Vec<StructureTerm>),
}

impl StructureTerm {
    /// Source and target expressions; composites must match on the nose.
    pub fn typing(&self) -> Result<(Expression, Expression), ZetlessError> {
        use StructureTerm::*;
        Ok(match self {
            Id(e) => (e.clone(), e.clone()),
            Dist(x, y, z, w) => (
                par_e(&seq_e(x, z), &seq_e(y, w)),
                seq_e(&par_e(x, y), &par_e(z, w)),
            ),
            Sym(x, y) => (par_e(x, y), par_e(y, x)),
            SeqOf(ts) => {
                let ty = ts.iter().map(StructureTerm::typing).collect::<Result<Vec<_>, _>>()?;
                let (s, t): (Vec<_>, Vec<_>) = ty.into_iter().unzip();
                (Expression::seq_all(s), Expression::seq_all(t))
            }
            ParOf(ts) => {
                let ty = ts.iter().map(StructureTerm::typing).collect::<Result<Vec<_>, _>>()?;
                let (s, t): (Vec<_>, Vec<_>) = ty.into_iter().unzip();
                (Expression::par_all(s), Expression::par_all(t))
            }
            Compose(ts) => {
                let mut it = ts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| ZetlessError::IllTyped("empty composite".into()))?;
                let (src, mut tgt) = first.typing()?;
                for t in it {
                    let (s, next) = t.typing()?;
                    if s != tgt {
                        return Err(ZetlessError::IllTyped(format!("{tgt} does not match {s}")));
                    }
                    tgt = next;
                }
                (src, tgt)
            }
        })
    }

    pub fn source(&self) -> Result<Expression, ZetlessError> {
        self.typing().map(|t| t.0)
    }

    pub fn target(&self) -> Result<Expression, ZetlessError> {
        self.typing().map(|t| t.1)
    }

    /// Removes identities and trivial distributors and flattens nested
    /// composites. Typing is preserved.
    pub fn simplify(self) -> StructureTerm {
        use StructureTerm::*;
        match self {
            Dist(x, y, z, w) if (x.is_unit() && y.is_unit()) || (z.is_unit() && w.is_unit()) => {
                Id(par_e(&seq_e(&x, &z), &seq_e(&y, &w)))
            }
            Sym(x, y) if x.is_unit() || y.is_unit() => Id(par_e(&x, &y)),
            t @ (Id(_) | Dist(..) | Sym(..)) => t,
            SeqOf(ts) => simplify_monoidal(ts, true),
            ParOf(ts) => simplify_monoidal(ts, false),
            Compose(ts) => {
                let fallback = ts.first().and_then(|t| t.source().ok());
                let mut flat = Vec::new();
                for t in ts {
                    match t.simplify() {
                        Compose(inner) => flat.extend(inner),
                        Id(_) => {}
                        other => flat.push(other),
                    }
                }
                match flat.len() {
                    0 => Id(fallback.unwrap_or(Expression::Unit)),
                    1 => flat.pop().unwrap(),
                    _ => Compose(flat),
                }
            }
        }
    }
}

fn simplify_monoidal(ts: Vec<StructureTerm>, seq: bool) -> StructureTerm {
    use StructureTerm::*;
    let mut flat: Vec<StructureTerm> = Vec::new();
    for t in ts {
        match t.simplify() {
            SeqOf(inner) if seq => flat.extend(inner),
            ParOf(inner) if !seq => flat.extend(inner),
            Id(e) if e.is_unit() => {}
            Id(e) => match flat.last_mut() {
                // merge runs of identities
                Some(Id(prev)) => *prev = if seq { seq_e(prev, &e) } else { par_e(prev, &e) },
                _ => flat.push(Id(e)),
            },
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => Id(Expression::Unit),
        1 => flat.pop().unwrap(),
        _ if seq => SeqOf(flat),
        _ => ParOf(flat),
    }
}

impl fmt::Display for StructureTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ts: &[StructureTerm], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")
        };
        match self {
            StructureTerm::Id(e) => write!(f, "id[{e}]"),
            StructureTerm::Dist(x, y, z, w) => write!(f, "d[{x}; {y}; {z}; {w}]"),
            StructureTerm::Sym(x, y) => write!(f, "sym[{x}; {y}]"),
            StructureTerm::SeqOf(ts) => join(f, ts, " > "),
            StructureTerm::ParOf(ts) => join(f, ts, " * "),
            StructureTerm::Compose(ts) => join(f, ts, " ; "),
        }
    }
}

/// A structure term `decode(source) -> decode(target)` realizing the inclusion.
pub fn synthesize_structure_map(inc: &Inclusion) -> Result<StructureTerm, ZetlessError> {
    let src = decode_tagged(&inc.source)?;
    let tgt = decode_tagged(&inc.target)?;
    // name everything by target elements
    let src = retag(&src, &|x| inc.map[x]);
    let labels = inc.target.labels();
    structure_between(&src, &tgt, &|i| labels[i].clone())
}

fn retag(t: &Tagged, f: &impl Fn(usize) -> usize) -> Tagged {
    match t {
        Tagged::Unit => Tagged::Unit,
        Tagged::Leaf(i) => Tagged::Leaf(f(*i)),
        Tagged::Seq(cs) => Tagged::Seq(cs.iter().map(|c| retag(c, f)).collect()),
        Tagged::Par(cs) => Tagged::Par(cs.iter().map(|c| retag(c, f)).collect()),
    }
}

/// Structure term between two tagged trees over the same leaves. The leaf ids
/// fix the bijection; `label` gives each leaf its type.
pub(crate) fn structure_between(
    src: &Tagged,
    tgt: &Tagged,
    label: &impl Fn(usize) -> String,
) -> Result<StructureTerm, ZetlessError> {
    let mut a = src.leaves();
    let mut b = tgt.leaves();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(ZetlessError::InvalidInclusion("different leaves".into()));
    }
    Ok(synth(src, tgt, label)?.simplify())
}

fn leaf_set(t: &Tagged) -> BTreeSet<usize> {
    t.leaves().into_iter().collect()
}

fn synth(src: &Tagged, tgt: &Tagged, label: &impl Fn(usize) -> String) -> Result<StructureTerm, ZetlessError> {
    use StructureTerm::*;
    let ex = |t: &Tagged| t.to_expr(label);
    if src == tgt {
        return Ok(Id(ex(src)));
    }
    let invalid = || ZetlessError::InvalidInclusion(format!("no structure map {} -> {}", ex(src), ex(tgt)));
    match (src, tgt) {
        (_, Tagged::Par(qs)) => {
            // every source component lies inside one target component
            let q_sets: Vec<BTreeSet<usize>> = qs.iter().map(leaf_set).collect();
            let ps = src.par_children();
            let mut groups: Vec<Vec<&Tagged>> = vec![Vec::new(); qs.len()];
            for p in &ps {
                let first = p.first_leaf().ok_or_else(invalid)?;
                let j = q_sets.iter().position(|s| s.contains(&first)).ok_or_else(invalid)?;
                if !leaf_set(p).is_subset(&q_sets[j]) {
                    return Err(invalid());
                }
                groups[j].push(p);
            }
            if groups.iter().any(Vec::is_empty) {
                return Err(invalid());
            }
            let arranged: Vec<&Tagged> = groups.iter().flatten().copied().collect();
            let mut steps = vec![permute_par(&ps, &arranged, label)];
            let mut blocks = Vec::with_capacity(qs.len());
            for (g, q) in groups.iter().zip(qs) {
                let block = Tagged::par_all(g.iter().map(|t| (*t).clone()));
                blocks.push(synth(&block, q, label)?);
            }
            steps.push(ParOf(blocks));
            Ok(Compose(steps))
        }
        (Tagged::Seq(ps), Tagged::Seq(qs)) => {
            // every source layer is a run of consecutive target layers
            let p_sets: Vec<BTreeSet<usize>> = ps.iter().map(leaf_set).collect();
            let mut blocks: Vec<Vec<Tagged>> = vec![Vec::new(); ps.len()];
            let mut last = 0;
            for q in qs {
                let first = q.first_leaf().ok_or_else(invalid)?;
                let i = p_sets.iter().position(|s| s.contains(&first)).ok_or_else(invalid)?;
                if i < last || !leaf_set(q).is_subset(&p_sets[i]) {
                    return Err(invalid());
                }
                last = i;
                blocks[i].push(q.clone());
            }
            let mut parts = Vec::with_capacity(ps.len());
            for (p, block) in ps.iter().zip(blocks) {
                if block.is_empty() {
                    return Err(invalid());
                }
                parts.push(synth(p, &Tagged::seq_all(block), label)?);
            }
            Ok(SeqOf(parts))
        }
        (Tagged::Par(ps), Tagged::Seq(qs)) => {
            // tensor of rows -> grid -> sequence of columns
            let q_sets: Vec<BTreeSet<usize>> = qs.iter().map(leaf_set).collect();
            let rows: Vec<Vec<Tagged>> = ps
                .iter()
                .map(|p| q_sets.iter().map(|s| p.restrict(&|i| s.contains(&i))).collect())
                .collect();
            let mut first = Vec::with_capacity(ps.len());
            for (p, row) in ps.iter().zip(&rows) {
                first.push(synth(p, &Tagged::seq_all(row.iter().cloned()), label)?);
            }
            let grid: Vec<Vec<Expression>> = rows.iter().map(|r| r.iter().map(ex).collect()).collect();
            let middle = interchange(&grid);
            let mut last = Vec::with_capacity(qs.len());
            for (j, q) in qs.iter().enumerate() {
                let column = Tagged::par_all(rows.iter().map(|r| r[j].clone()));
                last.push(synth(&column, q, label)?);
            }
            Ok(Compose(vec![ParOf(first), middle, SeqOf(last)]))
        }
        _ => Err(invalid()),
    }
}

/// Reorders tensor children `from` into the order `to` by adjacent symmetries.
fn permute_par(from: &[&Tagged], to: &[&Tagged], label: &impl Fn(usize) -> String) -> StructureTerm {
    use StructureTerm::*;
    let target_pos: Vec<usize> = from
        .iter()
        .map(|f| to.iter().position(|t| std::ptr::eq(*t, *f)).unwrap())
        .collect();
    let mut current: Vec<(usize, Expression)> = target_pos
        .iter()
        .zip(from)
        .map(|(&p, t)| (p, t.to_expr(label)))
        .collect();
    let mut steps = Vec::new();
    let n = current.len();
    for pass in 0..n {
        for k in 0..n.saturating_sub(pass + 1) {
            if current[k].0 > current[k + 1].0 {
                let before = Expression::par_all(current[..k].iter().map(|c| c.1.clone()));
                let after = Expression::par_all(current[k + 2..].iter().map(|c| c.1.clone()));
                steps.push(ParOf(vec![
                    Id(before),
                    Sym(current[k].1.clone(), current[k + 1].1.clone()),
                    Id(after),
                ]));
                current.swap(k, k + 1);
            }
        }
    }
    if steps.is_empty() {
        Id(Expression::par_all(current.into_iter().map(|c| c.1)))
    } else {
        Compose(steps)
    }
}

/// `*_i (>_j grid[i][j]) -> >_j (*_i grid[i][j])`, folded from binary distributors.
fn interchange(grid: &[Vec<Expression>]) -> StructureTerm {
    use StructureTerm::*;
    let row = |r: &[Expression]| Expression::seq_all(r.iter().cloned());
    match grid {
        [] => Id(Expression::Unit),
        [only] => Id(row(only)),
        [head, rest @ ..] => {
            let m = head.len();
            let columns: Vec<Expression> = (0..m)
                .map(|j| Expression::par_all(rest.iter().map(|r| r[j].clone())))
                .collect();
            Compose(vec![
                ParOf(vec![Id(row(head)), interchange(rest)]),
                interchange_two(head, &columns),
            ])
        }
    }
}

fn interchange_two(xs: &[Expression], ys: &[Expression]) -> StructureTerm {
    use StructureTerm::*;
    if xs.len() <= 1 {
        return Id(Expression::par_all(xs.iter().chain(ys).cloned()));
    }
    let tail_x = Expression::seq_all(xs[1..].iter().cloned());
    let tail_y = Expression::seq_all(ys[1..].iter().cloned());
    Compose(vec![
        Dist(xs[0].clone(), ys[0].clone(), tail_x, tail_y),
        SeqOf(vec![Id(par_e(&xs[0], &ys[0])), interchange_two(&xs[1..], &ys[1..])]),
    ])
}

/// All zetless posets of cardinality `n` typed over `types`, one per
/// isomorphism class, sorted by their canonical expression.
pub fn enumerate(n: usize, types: &[String]) -> Result<Vec<TypedPoset>, ZetlessError> {
    Ok(enumerate_expressions(n, types)?.iter().map(encode).collect())
}

/// Canonical expressions of the zetless posets of cardinality `n`.
pub fn enumerate_expressions(n: usize, types: &[String]) -> Result<Vec<Expression>, ZetlessError> {
    if n > ENUMERATE_MAX {
        return Err(ZetlessError::SizeLimit { n, max: ENUMERATE_MAX });
    }
    if n == 0 {
        return Ok(vec![Expression::Unit]);
    }
    let atoms: Vec<Expression> = types
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|t| Expression::atom(t.clone()))
        .collect();
    // by size: expressions that are not sequences / not tensors
    let mut not_seq: Vec<Vec<Expression>> = vec![Vec::new(); n + 1];
    let mut not_par: Vec<Vec<Expression>> = vec![Vec::new(); n + 1];
    let mut all = Vec::new();
    for k in 1..=n {
        let seqs = if k >= 2 { sequences(k, &not_seq) } else { Vec::new() };
        let pars = if k >= 2 { tensors(k, &not_par) } else { Vec::new() };
        if k == 1 {
            not_seq[1] = atoms.clone();
            not_par[1] = atoms.clone();
        } else {
            not_seq[k] = pars.clone();
            not_par[k] = seqs.clone();
        }
        if k == n {
            all = if k == 1 { atoms.clone() } else { seqs.into_iter().chain(pars).collect() };
        }
    }
    // generation is canonical already; the set guards the invariant
    let unique: BTreeSet<(String, Expression)> = all
        .into_iter()
        .map(|e| {
            let c = e.canonical();
            (c.to_string(), c)
        })
        .collect();
    Ok(unique.into_iter().map(|(_, e)| e).collect())
}

/// Sequences of size `k` with at least two layers, each layer not a sequence.
fn sequences(k: usize, not_seq: &[Vec<Expression>]) -> Vec<Expression> {
    fn go(rem: usize, parts: usize, not_seq: &[Vec<Expression>], acc: &mut Vec<Expression>, out: &mut Vec<Expression>) {
        if rem == 0 {
            if parts >= 2 {
                out.push(Expression::Seq(acc.clone()));
            }
            return;
        }
        for size in 1..=rem {
            for e in &not_seq[size] {
                acc.push(e.clone());
                go(rem - size, parts + 1, not_seq, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, 0, not_seq, &mut Vec::new(), &mut out);
    out
}

/// Tensors of size `k` with at least two factors, as multisets of non-tensors.
fn tensors(k: usize, not_par: &[Vec<Expression>]) -> Vec<Expression> {
    let pool: Vec<(usize, &Expression)> = not_par
        .iter()
        .enumerate()
        .flat_map(|(size, es)| es.iter().map(move |e| (size, e)))
        .collect();
    fn go(
        rem: usize,
        start: usize,
        pool: &[(usize, &Expression)],
        acc: &mut Vec<Expression>,
        out: &mut Vec<Expression>,
    ) {
        if rem == 0 {
            if acc.len() >= 2 {
                out.push(Expression::Par(acc.clone()));
            }
            return;
        }
        for idx in start..pool.len() {
            let (size, e) = pool[idx];
            if size > rem {
                continue;
            }
            acc.push(e.clone());
            go(rem - size, idx, pool, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(k, 0, &pool, &mut Vec::new(), &mut out);
    out
}
