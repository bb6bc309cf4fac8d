//! Finite typed posets.
//!
//! A [`TypedPoset`] stores its order relation fully closed, so every order query
//! is a lookup. Elements are the indices `0..len()`; labels are basic type names.
//! Structural equality (`==`) compares index by index; equality up to
//! label-preserving isomorphism goes through [`TypedPoset::canonical_form`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("closure relates distinct elements {0} and {1} both ways")]
    AntisymmetryViolation(usize, usize),
    #[error("element {element} out of range for a poset of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("subset is not bracketed")]
    NotBracketed,
    #[error("subset is not an interval")]
    NotInterval,
    #[error("malformed poset: {0}")]
    Malformed(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TypedPoset {
    labels: Vec<String>,
    /// Row-major `len() * len()` matrix; `leq[x * n + y]` iff `x <= y`.
    leq: Vec<bool>,
}

/// Partitions of the elements into components, each sorted, ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Components of the comparability graph.
    pub connected: Vec<Vec<usize>>,
    /// Components of the incomparability graph.
    pub incomparable_connected: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primality {
    Empty,
    Singleton,
    /// Connected with at least two elements. `ambiguous` is set when the poset is
    /// also incomparable-connected, which only happens for posets with a zigzag.
    ParPrime { ambiguous: bool },
    /// Incomparable-connected (and disconnected) with at least two elements.
    SeqPrime,
}

/// Label-preserving isomorphism invariant: equal forms iff isomorphic posets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub labels: Vec<String>,
    pub relation: Vec<bool>,
}

impl TypedPoset {
    pub fn empty() -> Self {
        TypedPoset {
            labels: Vec::new(),
            leq: Vec::new(),
        }
    }

    pub fn singleton(label: impl Into<String>) -> Self {
        TypedPoset {
            labels: vec![label.into()],
            leq: vec![true],
        }
    }

    /// Reflexive-transitive closure of `edges` (0-based `(below, above)` pairs).
    pub fn from_generators(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = labels.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in edges {
            for e in [a, b] {
                if e >= n {
                    return Err(PosetError::OutOfRange { element: e, size: n });
                }
            }
            leq[a * n + b] = true;
        }
        close(&mut leq, n);
        check_antisymmetric(&leq, n)?;
        Ok(TypedPoset { labels, leq })
    }

    /// Builds from a relation that is already reflexive and transitive. Only
    /// antisymmetry is checked.
    pub(crate) fn from_closed(labels: Vec<String>, leq: Vec<bool>) -> Result<Self, PosetError> {
        let n = labels.len();
        debug_assert_eq!(leq.len(), n * n);
        check_antisymmetric(&leq, n)?;
        Ok(TypedPoset { labels, leq })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.len() + y]
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    pub fn incomparable(&self, x: usize, y: usize) -> bool {
        !self.comparable(x, y)
    }

    fn check(&self, x: usize) -> Result<(), PosetError> {
        if x < self.len() {
            Ok(())
        } else {
            Err(PosetError::OutOfRange {
                element: x,
                size: self.len(),
            })
        }
    }

    /// Covering pairs `(x, y)`: `x < y` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if self.lt(x, y) && !(0..n).any(|z| self.lt(x, z) && self.lt(z, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// All strict relations `(x, y)` with `x < y`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if self.lt(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Sequencing: disjoint union with every element of `self` below every element of `other`.
    pub fn seq(&self, other: &TypedPoset) -> TypedPoset {
        self.juxtapose(other, true)
    }

    /// Tensoring: disjoint union, no new relations.
    pub fn tensor(&self, other: &TypedPoset) -> TypedPoset {
        self.juxtapose(other, false)
    }

    fn juxtapose(&self, other: &TypedPoset, link: bool) -> TypedPoset {
        let (n, m) = (self.len(), other.len());
        let t = n + m;
        let mut leq = vec![false; t * t];
        for x in 0..n {
            for y in 0..n {
                leq[x * t + y] = self.leq(x, y);
            }
            if link {
                for y in 0..m {
                    leq[x * t + n + y] = true;
                }
            }
        }
        for x in 0..m {
            for y in 0..m {
                leq[(n + x) * t + n + y] = other.leq(x, y);
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        TypedPoset { labels, leq }
    }

    /// Full subposet on `members`, in the given order.
    pub fn restrict(&self, members: &[usize]) -> TypedPoset {
        let k = members.len();
        let mut leq = vec![false; k * k];
        for (i, &x) in members.iter().enumerate() {
            for (j, &y) in members.iter().enumerate() {
                leq[i * k + j] = self.leq(x, y);
            }
        }
        TypedPoset {
            labels: members.iter().map(|&x| self.labels[x].clone()).collect(),
            leq,
        }
    }

    pub fn components(&self) -> Components {
        Components {
            connected: self.partition(|x, y| self.comparable(x, y)),
            incomparable_connected: self.partition(|x, y| self.incomparable(x, y)),
        }
    }

    pub(crate) fn connected_components(&self) -> Vec<Vec<usize>> {
        self.partition(|x, y| self.comparable(x, y))
    }

    pub(crate) fn incomparable_components(&self) -> Vec<Vec<usize>> {
        self.partition(|x, y| self.incomparable(x, y))
    }

    fn partition(&self, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                let fresh: Vec<usize> = (0..n).filter(|&y| !seen[y] && adjacent(x, y)).collect();
                for y in fresh {
                    seen[y] = true;
                    comp.push(y);
                    stack.push(y);
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// An induced zigzag `(x, u, y, v)`: `x < u > y < v` and no other relations among them.
    pub fn find_zigzag(&self) -> Option<[usize; 4]> {
        let n = self.len();
        for u in 0..n {
            for x in 0..n {
                if !self.lt(x, u) {
                    continue;
                }
                for y in 0..n {
                    if y == x || !self.lt(y, u) || !self.incomparable(x, y) {
                        continue;
                    }
                    for v in 0..n {
                        if v == u || !self.lt(y, v) {
                            continue;
                        }
                        if self.incomparable(x, v) && self.incomparable(u, v) {
                            return Some([x, u, y, v]);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_zetless(&self) -> bool {
        self.find_zigzag().is_none()
    }

    /// Whether `x` and `y` have a common upper bound or a common lower bound.
    pub fn has_span_or_cospan(&self, x: usize, y: usize) -> Result<bool, PosetError> {
        self.check(x)?;
        self.check(y)?;
        Ok((0..self.len()).any(|z| (self.leq(x, z) && self.leq(y, z)) || (self.leq(z, x) && self.leq(z, y))))
    }

    pub fn primality(&self) -> Primality {
        match self.len() {
            0 => Primality::Empty,
            1 => Primality::Singleton,
            _ => {
                let connected = self.connected_components().len() == 1;
                let inc_connected = self.incomparable_components().len() == 1;
                if connected {
                    Primality::ParPrime {
                        ambiguous: inc_connected,
                    }
                } else {
                    Primality::SeqPrime
                }
            }
        }
    }

    /// Substitutes `p` for the element `x`: `p` inherits every relation of `x`.
    /// The elements of `p` take the place of `x` in the index order.
    pub fn substitute(&self, x: usize, p: &TypedPoset) -> Result<TypedPoset, PosetError> {
        self.check(x)?;
        let n = self.len();
        let m = p.len();
        let t = n - 1 + m;
        // origin of each new element: Left(q element) or Right(p element)
        let origin: Vec<Result<usize, usize>> = (0..x)
            .map(Ok)
            .chain((0..m).map(Err))
            .chain((x + 1..n).map(Ok))
            .collect();
        let mut leq = vec![false; t * t];
        for (i, oi) in origin.iter().enumerate() {
            for (j, oj) in origin.iter().enumerate() {
                leq[i * t + j] = match (*oi, *oj) {
                    (Ok(a), Ok(b)) => self.leq(a, b),
                    (Err(a), Err(b)) => p.leq(a, b),
                    (Ok(a), Err(_)) => self.leq(a, x),
                    (Err(_), Ok(b)) => self.leq(x, b),
                };
            }
        }
        let labels = origin
            .iter()
            .map(|o| match *o {
                Ok(a) => self.labels[a].clone(),
                Err(a) => p.labels[a].clone(),
            })
            .collect();
        Ok(TypedPoset { labels, leq })
    }

    pub fn subset(&self, members: impl IntoIterator<Item = usize>) -> Result<SubsetRef<'_>, PosetError> {
        SubsetRef::new(self, members)
    }

    /// Canonical labeling: the lexicographically least code over all orderings
    /// compatible with an equitable label-and-order refinement, found by
    /// individualization and backtracking. Returns the form and the ordering
    /// (`order[k]` is the element placed at canonical position `k`).
    pub fn canonical_labeling(&self) -> (CanonicalForm, Vec<usize>) {
        let n = self.len();
        let distinct: BTreeSet<&str> = self.labels.iter().map(String::as_str).collect();
        let rank = |l: &str| distinct.iter().position(|d| *d == l).unwrap();
        let colors: Vec<usize> = self.labels.iter().map(|l| rank(l)).collect();
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        self.search(densify(&colors), &mut best);
        let order = best.map(|b| b.1).unwrap_or_default();
        let form = CanonicalForm {
            labels: order.iter().map(|&x| self.labels[x].clone()).collect(),
            relation: (0..n * n).map(|k| self.leq(order[k / n], order[k % n])).collect(),
        };
        (form, order)
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        self.canonical_labeling().0
    }

    pub fn is_isomorphic(&self, other: &TypedPoset) -> bool {
        self.len() == other.len() && self.canonical_form() == other.canonical_form()
    }

    /// A label-preserving order isomorphism `self -> other`, as an element map.
    pub fn isomorphism(&self, other: &TypedPoset) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        let (f1, o1) = self.canonical_labeling();
        let (f2, o2) = other.canonical_labeling();
        if f1 != f2 {
            return None;
        }
        let mut map = vec![0; self.len()];
        for k in 0..self.len() {
            map[o1[k]] = o2[k];
        }
        Some(map)
    }

    fn refine(&self, colors: &mut Vec<usize>) {
        let n = self.len();
        loop {
            let classes = colors.iter().collect::<BTreeSet<_>>().len();
            let keys: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
                .map(|x| {
                    let mut up: Vec<usize> = (0..n).filter(|&y| self.lt(x, y)).map(|y| colors[y]).collect();
                    let mut down: Vec<usize> = (0..n).filter(|&y| self.lt(y, x)).map(|y| colors[y]).collect();
                    up.sort_unstable();
                    down.sort_unstable();
                    (colors[x], up, down)
                })
                .collect();
            *colors = densify(&keys);
            if colors.iter().collect::<BTreeSet<_>>().len() == classes {
                return;
            }
        }
    }

    fn twins(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
            && self.incomparable(a, b)
            && (0..self.len())
                .filter(|&z| z != a && z != b)
                .all(|z| self.leq(a, z) == self.leq(b, z) && self.leq(z, a) == self.leq(z, b))
    }

    fn search(&self, mut colors: Vec<usize>, best: &mut Option<(Vec<u32>, Vec<usize>)>) {
        self.refine(&mut colors);
        let n = self.len();
        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, &c) in colors.iter().enumerate() {
            cells[c].push(x);
        }
        let Some(cell) = cells.iter().find(|c| c.len() >= 2) else {
            let mut order = vec![0; n];
            for (x, &c) in colors.iter().enumerate() {
                order[c] = x;
            }
            let mut code: Vec<u32> = order.iter().map(|&x| colors_label_rank(self, x)).collect();
            code.extend((0..n * n).map(|k| self.leq(order[k / n], order[k % n]) as u32));
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                *best = Some((code, order));
            }
            return;
        };
        let c = colors[cell[0]];
        let mut tried: Vec<usize> = Vec::new();
        for &v in cell {
            if tried.iter().any(|&t| self.twins(t, v)) {
                continue;
            }
            tried.push(v);
            let keys: Vec<(usize, bool)> = (0..n).map(|x| (colors[x], colors[x] == c && x != v)).collect();
            self.search(densify(&keys), best);
        }
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            labels: self.labels.clone(),
            leq: self.covers().into_iter().map(|(x, y)| [x + 1, y + 1]).collect(),
        }
    }

    pub fn from_json(json: &PosetJson) -> Result<Self, PosetError> {
        let mut edges = Vec::with_capacity(json.leq.len());
        for &[a, b] in &json.leq {
            if a == 0 || b == 0 {
                return Err(PosetError::Malformed("indices are 1-based".into()));
            }
            edges.push((a - 1, b - 1));
        }
        TypedPoset::from_generators(json.labels.clone(), &edges)
    }
}

fn colors_label_rank(p: &TypedPoset, x: usize) -> u32 {
    p.labels.iter().filter(|l| **l < p.labels[x]).collect::<BTreeSet<_>>().len() as u32
}

/// Maps keys to dense ranks `0..k`, preserving key order.
fn densify<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let sorted: Vec<K> = keys.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

/// Floyd-Warshall transitive closure in place.
pub(crate) fn close(leq: &mut [bool], n: usize) {
    for k in 0..n {
        for i in 0..n {
            if !leq[i * n + k] {
                continue;
            }
            for j in 0..n {
                if leq[k * n + j] {
                    leq[i * n + j] = true;
                }
            }
        }
    }
}

fn check_antisymmetric(leq: &[bool], n: usize) -> Result<(), PosetError> {
    for i in 0..n {
        for j in i + 1..n {
            if leq[i * n + j] && leq[j * n + i] {
                return Err(PosetError::AntisymmetryViolation(i, j));
            }
        }
    }
    Ok(())
}

impl fmt::Debug for TypedPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypedPoset {{ labels: {:?}, covers: {:?} }}", self.labels, self.covers())
    }
}

impl fmt::Display for TypedPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{l}", i + 1)?;
        }
        f.write_str(" |")?;
        for (x, y) in self.covers() {
            write!(f, " {}<{}", x + 1, y + 1)?;
        }
        f.write_str("}")
    }
}

/// JSON form: labels plus 1-based non-reflexive generating pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub labels: Vec<String>,
    pub leq: Vec<[usize; 2]>,
}

/// A subset of a poset's elements, viewed as a full subposet.
#[derive(Debug, Clone)]
pub struct SubsetRef<'a> {
    parent: &'a TypedPoset,
    members: Vec<usize>,
    mask: Vec<bool>,
}

/// Result of factoring a bracketed subset out of its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    /// Parent with the subset collapsed to the single element `hole`.
    pub outer: TypedPoset,
    pub hole: usize,
    /// Parent element behind each outer element; `None` marks the hole.
    pub elements: Vec<Option<usize>>,
    /// The subset as a full subposet, in increasing element order.
    pub inner: TypedPoset,
}

impl<'a> SubsetRef<'a> {
    pub fn new(parent: &'a TypedPoset, members: impl IntoIterator<Item = usize>) -> Result<Self, PosetError> {
        let mut mask = vec![false; parent.len()];
        for m in members {
            parent.check(m)?;
            mask[m] = true;
        }
        let members = (0..parent.len()).filter(|&x| mask[x]).collect();
        Ok(SubsetRef { parent, members, mask })
    }

    pub fn parent(&self) -> &TypedPoset {
        self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    fn outside(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&x| !self.mask[x])
    }

    fn below_some(&self, y: usize) -> bool {
        self.members.iter().any(|&m| self.parent.leq(y, m))
    }

    fn above_some(&self, y: usize) -> bool {
        self.members.iter().any(|&m| self.parent.leq(m, y))
    }

    /// Closed under intermediate elements.
    pub fn is_interval(&self) -> bool {
        self.outside().all(|y| !(self.above_some(y) && self.below_some(y)))
    }

    /// Every outside element above (below) some member is above (below) all members.
    pub fn is_bracketed(&self) -> bool {
        let p = self.parent;
        self.outside().all(|q| {
            (!self.above_some(q) || self.members.iter().all(|&m| p.leq(m, q)))
                && (!self.below_some(q) || self.members.iter().all(|&m| p.leq(q, m)))
        })
    }

    /// Factors the parent as `outer[hole \ inner]`. The hole sits at the index of
    /// the first member; the other elements keep their relative order.
    pub fn extract(&self) -> Result<Extraction, PosetError> {
        if !self.is_bracketed() {
            return Err(PosetError::NotBracketed);
        }
        let p = self.parent;
        let first = self.members.first().copied();
        // None stands for the hole
        let mut slots: Vec<Option<usize>> = Vec::new();
        for x in 0..p.len() {
            if !self.mask[x] {
                slots.push(Some(x));
            } else if Some(x) == first {
                slots.push(None);
            }
        }
        let t = slots.len();
        let mut leq = vec![false; t * t];
        for (i, si) in slots.iter().enumerate() {
            for (j, sj) in slots.iter().enumerate() {
                leq[i * t + j] = match (*si, *sj) {
                    (Some(a), Some(b)) => p.leq(a, b),
                    (None, None) => true,
                    (Some(a), None) => self.below_some(a),
                    (None, Some(b)) => self.above_some(b),
                };
            }
        }
        let labels = slots
            .iter()
            .map(|s| s.map_or_else(|| HOLE_LABEL.to_string(), |a| p.labels[a].clone()))
            .collect();
        let hole = slots.iter().position(Option::is_none).unwrap_or(0);
        if slots.iter().all(Option::is_some) {
            // empty subset: the hole is a fresh element incomparable to everything
            let mut outer = TypedPoset { labels, leq };
            outer = outer.tensor(&TypedPoset::singleton(HOLE_LABEL));
            let hole = outer.len() - 1;
            slots.push(None);
            return Ok(Extraction {
                outer,
                hole,
                elements: slots,
                inner: TypedPoset::empty(),
            });
        }
        Ok(Extraction {
            outer: TypedPoset { labels, leq },
            hole,
            elements: slots,
            inner: p.restrict(&self.members),
        })
    }

    /// Adds relations so that the subset becomes bracketed: every element below
    /// some member goes below all members, and dually. Elements are not identified.
    pub fn saturate_for_interval(&self) -> Result<TypedPoset, PosetError> {
        if !self.is_interval() {
            return Err(PosetError::NotInterval);
        }
        let p = self.parent;
        let n = p.len();
        let mut leq = p.leq.clone();
        for u in self.outside() {
            if self.below_some(u) {
                for &m in &self.members {
                    leq[u * n + m] = true;
                }
            }
            if self.above_some(u) {
                for &m in &self.members {
                    leq[m * n + u] = true;
                }
            }
        }
        close(&mut leq, n);
        TypedPoset::from_closed(p.labels.clone(), leq)
    }
}

/// Label given to the hole element produced by [`SubsetRef::extract`].
pub const HOLE_LABEL: &str = "_hole";
