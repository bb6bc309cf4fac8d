//! Physical string diagrams: wire-linear acyclic hypergraphs between two
//! expressions, whose wires carry a derived zetless order.
//!
//! A diagram never stores its wire order. The order is recomputed from the
//! source expression by propagating through the generator nodes in a
//! topological order (see [`StringDiagram::derived_poset`]), and every level of
//! that propagation (the wires alive between two nodes) is a zetless poset.
//! Validation checks at each node that its inputs form an interval of the
//! current level and that their order is compatible with the generator's source.

mod builder;
mod canon;
mod json;
mod plan;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::Expression;
use crate::poset::{close, TypedPoset};
use crate::signature::{Generator, Signature, SignatureError, SignatureHom};
use crate::zetless::{
    decode_with_leaves, encode, inclusion_exists, Inclusion, Tagged, ZetlessError,
};

pub use builder::DiagramBuilder;
pub use json::{DiagramJson, NodeJson, WireJson};
pub(crate) use plan::{Plan, HOLE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("wire {wire} is not used linearly: {detail}")]
    NotWireLinear { wire: usize, detail: String },
    #[error("cycle through node {node}")]
    Cyclic { node: usize },
    #[error("node {node}: expected wires of type {expected}, found {found}")]
    TypeMismatch {
        node: usize,
        expected: String,
        found: String,
    },
    #[error("node {node}: input wires {wires:?} are not an interval")]
    NotInterval { node: usize, wires: Vec<usize> },
    #[error("node {node}: the order on input wires {wires:?} does not include into the generator source")]
    NoInputInclusion { node: usize, wires: Vec<usize> },
    #[error("boundary mismatch: expected {expected}, found {found}")]
    BoundaryMismatch { expected: String, found: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("diagrams live over different signatures")]
    SignatureMismatch,
    #[error("no structure map {from} -> {to}")]
    NoStructureMap { from: Expression, to: Expression },
    #[error("node {node}: no zetless context around its inputs")]
    NoZetlessContext { node: usize },
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error(transparent)]
    Zetless(#[from] ZetlessError),
}

impl From<SignatureError> for DiagramError {
    fn from(e: SignatureError) -> Self {
        match e {
            SignatureError::UnknownGenerator(g) => DiagramError::UnknownGenerator(g),
            other => DiagramError::Malformed(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Input,
    Output,
    Generator(String),
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Input => f.write_str("input"),
            NodeLabel::Output => f.write_str("output"),
            NodeLabel::Generator(g) => f.write_str(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: NodeLabel,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Node {
    pub fn generator(&self) -> Option<&str> {
        match &self.label {
            NodeLabel::Generator(g) => Some(g),
            _ => None,
        }
    }
}

/// A morphism of the free physical duoidal category over a signature.
///
/// Wires and nodes are identified by their index. Structural equality of the
/// representation is not diagram equality; use [`StringDiagram::equal`].
#[derive(Debug, Clone)]
pub struct StringDiagram {
    signature: Arc<Signature>,
    wires: Vec<String>,
    nodes: Vec<Node>,
    input: usize,
    output: usize,
    source: Expression,
    target: Expression,
}

/// The wires alive between two nodes with their order at that time.
#[derive(Debug, Clone)]
pub(crate) struct Level {
    /// Wire ids in increasing order; element `k` of `poset` is `live[k]`.
    pub live: Vec<usize>,
    pub poset: TypedPoset,
}

impl Level {
    pub fn position(&self, wire: usize) -> usize {
        self.live.binary_search(&wire).expect("wire is live")
    }
}

pub(crate) fn retag(t: &Tagged, f: &impl Fn(usize) -> usize) -> Tagged {
    match t {
        Tagged::Unit => Tagged::Unit,
        Tagged::Leaf(i) => Tagged::Leaf(f(*i)),
        Tagged::Seq(cs) => Tagged::Seq(cs.iter().map(|c| retag(c, f)).collect()),
        Tagged::Par(cs) => Tagged::Par(cs.iter().map(|c| retag(c, f)).collect()),
    }
}

/// Forward propagation along a node order.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub order: Vec<usize>,
    /// `levels[k]` precedes `order[k]`; the last level is the output.
    pub levels: Vec<Level>,
    /// Order on all wires, row-major.
    pub relation: Vec<bool>,
}

/// Propagation state part-way through a node order.
#[derive(Debug, Clone)]
struct Tracer {
    order: Vec<usize>,
    levels: Vec<Level>,
    live: BTreeSet<usize>,
    rel: Vec<bool>,
}

/// Atomic pieces of a diagram together with the boundary structure maps
/// needed to reassemble it.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub entry: StringDiagram,
    pub atomics: Vec<StringDiagram>,
    pub exit: StringDiagram,
}

impl Decomposition {
    /// `entry ; atomics... ; exit`.
    pub fn recompose(&self) -> Result<StringDiagram, DiagramError> {
        let mut acc = self.entry.clone();
        for a in &self.atomics {
            acc = acc.compose(a)?;
        }
        acc.compose(&self.exit)
    }
}

impl StringDiagram {
    /// Assembles a diagram from raw parts, checking only that ids are in range.
    /// Use [`StringDiagram::validate`] for the remaining conditions.
    pub fn from_parts(
        signature: Arc<Signature>,
        wires: Vec<String>,
        nodes: Vec<Node>,
        input: usize,
        output: usize,
        source: Expression,
        target: Expression,
    ) -> Result<Self, DiagramError> {
        if input >= nodes.len() || output >= nodes.len() || input == output {
            return Err(DiagramError::Malformed("boundary node ids".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(&w) = n.inputs.iter().chain(&n.outputs).find(|&&w| w >= wires.len()) {
                return Err(DiagramError::Malformed(format!("node {i} refers to missing wire {w}")));
            }
        }
        Ok(StringDiagram {
            signature,
            wires,
            nodes,
            input,
            output,
            source,
            target,
        })
    }

    fn boundary_only(
        signature: &Arc<Signature>,
        source: Expression,
        target: Expression,
        wires: Vec<String>,
        ins: Vec<usize>,
        outs: Vec<usize>,
    ) -> Self {
        StringDiagram {
            signature: signature.clone(),
            wires,
            nodes: vec![
                Node {
                    label: NodeLabel::Input,
                    inputs: vec![],
                    outputs: ins,
                },
                Node {
                    label: NodeLabel::Output,
                    inputs: outs,
                    outputs: vec![],
                },
            ],
            input: 0,
            output: 1,
            source,
            target,
        }
    }

    /// Single generator node between its source and target.
    pub fn from_generator(signature: &Arc<Signature>, name: &str) -> Result<Self, DiagramError> {
        let g = signature.generator(name)?;
        let mut wires = g.source.list_type();
        let k = wires.len();
        wires.extend(g.target.list_type());
        let ins: Vec<usize> = (0..k).collect();
        let outs: Vec<usize> = (k..wires.len()).collect();
        let mut d = Self::boundary_only(
            signature,
            g.source.clone(),
            g.target.clone(),
            wires,
            ins.clone(),
            outs.clone(),
        );
        d.nodes.push(Node {
            label: NodeLabel::Generator(name.to_string()),
            inputs: ins,
            outputs: outs,
        });
        Ok(d)
    }

    /// Node-free diagram `e -> e`.
    pub fn identity(signature: &Arc<Signature>, e: &Expression) -> Self {
        let wires = e.list_type();
        let ids: Vec<usize> = (0..wires.len()).collect();
        Self::boundary_only(signature, e.clone(), e.clone(), wires, ids.clone(), ids)
    }

    /// Node-free diagram where source leaf `k` becomes target leaf `map[k]`.
    pub fn from_permutation(
        signature: &Arc<Signature>,
        source: &Expression,
        target: &Expression,
        map: &[usize],
    ) -> Result<Self, DiagramError> {
        Inclusion::new(encode(source), encode(target), map.to_vec())?;
        Ok(Self::node_free(signature, source, target, map))
    }

    fn node_free(signature: &Arc<Signature>, source: &Expression, target: &Expression, map: &[usize]) -> Self {
        let wires = source.list_type();
        let mut outs = vec![0; map.len()];
        for (k, &j) in map.iter().enumerate() {
            outs[j] = k;
        }
        Self::boundary_only(
            signature,
            source.clone(),
            target.clone(),
            wires,
            (0..map.len()).collect(),
            outs,
        )
    }

    /// Node-free diagram `source -> target` along the least inclusion of their
    /// posets.
    pub fn structural(
        signature: &Arc<Signature>,
        source: &Expression,
        target: &Expression,
    ) -> Result<Self, DiagramError> {
        let inc = inclusion_exists(&encode(source), &encode(target)).ok_or_else(|| {
            DiagramError::NoStructureMap {
                from: source.clone(),
                to: target.clone(),
            }
        })?;
        Ok(Self::node_free(signature, source, target, inc.map()))
    }

    /// Node-free diagram `decode(source) -> decode(target)` realizing `inc`.
    pub fn structure_diagram(signature: &Arc<Signature>, inc: &Inclusion) -> Result<Self, DiagramError> {
        let (se, s_leaves) = decode_with_leaves(inc.source())?;
        let (te, t_leaves) = decode_with_leaves(inc.target())?;
        let mut t_pos = vec![0; t_leaves.len()];
        for (j, &t) in t_leaves.iter().enumerate() {
            t_pos[t] = j;
        }
        let map: Vec<usize> = s_leaves.iter().map(|&s| t_pos[inc.map()[s]]).collect();
        Ok(Self::node_free(signature, &se, &te, &map))
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn source(&self) -> &Expression {
        &self.source
    }

    pub fn target(&self) -> &Expression {
        &self.target
    }

    /// Wire labels, indexed by wire id.
    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    /// All nodes, boundaries included, indexed by node id.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn input_node(&self) -> usize {
        self.input
    }

    pub fn output_node(&self) -> usize {
        self.output
    }

    pub fn input_wires(&self) -> &[usize] {
        &self.nodes[self.input].outputs
    }

    pub fn output_wires(&self) -> &[usize] {
        &self.nodes[self.output].inputs
    }

    /// Ids of generator nodes, increasing.
    pub fn generator_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| self.nodes[n].generator().is_some())
            .collect()
    }

    fn same_signature(&self, other: &Self) -> Result<(), DiagramError> {
        if Arc::ptr_eq(&self.signature, &other.signature) || self.signature == other.signature {
            Ok(())
        } else {
            Err(DiagramError::SignatureMismatch)
        }
    }

    fn generator_of(&self, node: usize) -> Result<&Generator, DiagramError> {
        match &self.nodes[node].label {
            NodeLabel::Generator(g) => Ok(self.signature.generator(g)?),
            _ => Err(DiagramError::Malformed(format!("node {node} is a boundary"))),
        }
    }

    /// `self` then `other`, gluing wires positionally along the shared expression.
    pub fn compose(&self, other: &Self) -> Result<Self, DiagramError> {
        self.same_signature(other)?;
        if self.target != other.source {
            return Err(DiagramError::BoundaryMismatch {
                expected: self.target.to_string(),
                found: other.source.to_string(),
            });
        }
        let glue_a = self.output_wires();
        let glue_b = other.input_wires();
        let mut map = vec![usize::MAX; other.wires.len()];
        for (k, &w) in glue_b.iter().enumerate() {
            map[w] = glue_a[k];
        }
        let mut wires = self.wires.clone();
        for (w, label) in other.wires.iter().enumerate() {
            if map[w] == usize::MAX {
                map[w] = wires.len();
                wires.push(label.clone());
            }
        }
        let remap = |ws: &[usize]| ws.iter().map(|&w| map[w]).collect::<Vec<_>>();
        let mut d = Self::boundary_only(
            &self.signature,
            self.source.clone(),
            other.target.clone(),
            wires,
            self.input_wires().to_vec(),
            remap(other.output_wires()),
        );
        d.nodes.extend(self.generator_nodes().into_iter().map(|n| self.nodes[n].clone()));
        d.nodes.extend(other.generator_nodes().into_iter().map(|n| {
            let node = &other.nodes[n];
            Node {
                label: node.label.clone(),
                inputs: remap(&node.inputs),
                outputs: remap(&node.outputs),
            }
        }));
        Ok(d)
    }

    /// [`StringDiagram::compose`] allowing `self.target() ≈ other.source()`,
    /// bridged by the symmetry that matches leaves left to right.
    pub fn compose_modulo_symmetry(&self, other: &Self) -> Result<Self, DiagramError> {
        if self.target == other.source {
            return self.compose(other);
        }
        let bridge = self.symmetry_bridge(&self.target, &other.source)?;
        self.compose(&bridge)?.compose(other)
    }

    fn symmetry_bridge(&self, from: &Expression, to: &Expression) -> Result<Self, DiagramError> {
        let map = from
            .sym_witness(to)
            .ok_or_else(|| DiagramError::BoundaryMismatch {
                expected: from.to_string(),
                found: to.to_string(),
            })?;
        Self::from_permutation(&self.signature, from, to, &map)
    }

    fn juxtapose(&self, other: &Self, source: Expression, target: Expression) -> Result<Self, DiagramError> {
        self.same_signature(other)?;
        let off = self.wires.len();
        let shift = |ws: &[usize]| ws.iter().map(|&w| w + off).collect::<Vec<_>>();
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().cloned());
        let mut ins = self.input_wires().to_vec();
        ins.extend(shift(other.input_wires()));
        let mut outs = self.output_wires().to_vec();
        outs.extend(shift(other.output_wires()));
        let mut d = Self::boundary_only(&self.signature, source, target, wires, ins, outs);
        d.nodes.extend(self.generator_nodes().into_iter().map(|n| self.nodes[n].clone()));
        d.nodes.extend(other.generator_nodes().into_iter().map(|n| {
            let node = &other.nodes[n];
            Node {
                label: node.label.clone(),
                inputs: shift(&node.inputs),
                outputs: shift(&node.outputs),
            }
        }));
        Ok(d)
    }

    /// Parallel juxtaposition.
    pub fn tensor(&self, other: &Self) -> Result<Self, DiagramError> {
        let source = crate::expr::par_e(&self.source, &other.source);
        let target = crate::expr::par_e(&self.target, &other.target);
        self.juxtapose(other, source, target)
    }

    /// Sequential juxtaposition: everything in `self` precedes `other`.
    pub fn sequence(&self, other: &Self) -> Result<Self, DiagramError> {
        let source = crate::expr::seq_e(&self.source, &other.source);
        let target = crate::expr::seq_e(&self.target, &other.target);
        self.juxtapose(other, source, target)
    }

    /// Image under a signature homomorphism.
    pub fn relabel(&self, h: &SignatureHom) -> Self {
        StringDiagram {
            signature: Arc::new(h.target.clone()),
            wires: self.wires.iter().map(|t| h.map_type(t)).collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    label: match &n.label {
                        NodeLabel::Generator(g) => NodeLabel::Generator(h.map_generator(g)),
                        other => other.clone(),
                    },
                    inputs: n.inputs.clone(),
                    outputs: n.outputs.clone(),
                })
                .collect(),
            input: self.input,
            output: self.output,
            source: h.map_expr(&self.source),
            target: h.map_expr(&self.target),
        }
    }

    /// Producer and consumer of every wire, checking wire-linearity.
    fn endpoints(&self) -> Result<(Vec<usize>, Vec<usize>), DiagramError> {
        let n = self.wires.len();
        let mut producer = vec![usize::MAX; n];
        let mut consumer = vec![usize::MAX; n];
        for (id, node) in self.nodes.iter().enumerate() {
            for &w in &node.outputs {
                if producer[w] != usize::MAX {
                    return Err(DiagramError::NotWireLinear {
                        wire: w,
                        detail: format!("produced by nodes {} and {id}", producer[w]),
                    });
                }
                producer[w] = id;
            }
            for &w in &node.inputs {
                if consumer[w] != usize::MAX {
                    return Err(DiagramError::NotWireLinear {
                        wire: w,
                        detail: format!("consumed by nodes {} and {id}", consumer[w]),
                    });
                }
                consumer[w] = id;
            }
        }
        for w in 0..n {
            if producer[w] == usize::MAX {
                return Err(DiagramError::NotWireLinear {
                    wire: w,
                    detail: "never produced".into(),
                });
            }
            if consumer[w] == usize::MAX {
                return Err(DiagramError::NotWireLinear {
                    wire: w,
                    detail: "never consumed".into(),
                });
            }
        }
        Ok((producer, consumer))
    }

    /// Generator nodes whose inputs are all produced by the input boundary or
    /// by `done`, smallest id first.
    fn ready(&self, producer: &[usize], done: &[bool]) -> Vec<usize> {
        self.generator_nodes()
            .into_iter()
            .filter(|&n| {
                !done[n]
                    && self.nodes[n]
                        .inputs
                        .iter()
                        .all(|&w| producer[w] == self.input || done[producer[w]])
            })
            .collect()
    }

    /// Topological order of the generator nodes, ties broken by node id.
    pub fn node_order(&self) -> Result<Vec<usize>, DiagramError> {
        let (producer, _) = self.endpoints()?;
        let gens = self.generator_nodes();
        let mut done = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(gens.len());
        while order.len() < gens.len() {
            let next = *self.ready(&producer, &done).first().ok_or_else(|| DiagramError::Cyclic {
                node: *gens.iter().find(|&&n| !done[n]).unwrap(),
            })?;
            done[next] = true;
            order.push(next);
        }
        Ok(order)
    }

    /// Every topological order of the generator nodes. Exponential; meant for
    /// small diagrams.
    pub fn all_node_orders(&self) -> Result<Vec<Vec<usize>>, DiagramError> {
        fn go(
            d: &StringDiagram,
            producer: &[usize],
            done: &mut Vec<bool>,
            acc: &mut Vec<usize>,
            total: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            if acc.len() == total {
                out.push(acc.clone());
                return;
            }
            for n in d.ready(producer, done) {
                done[n] = true;
                acc.push(n);
                go(d, producer, done, acc, total, out);
                acc.pop();
                done[n] = false;
            }
        }
        self.node_order()?;
        let (producer, _) = self.endpoints()?;
        let mut out = Vec::new();
        let total = self.generator_nodes().len();
        go(self, &producer, &mut vec![false; self.nodes.len()], &mut Vec::new(), total, &mut out);
        Ok(out)
    }

    fn check_shape(&self) -> Result<(), DiagramError> {
        for (id, node) in self.nodes.iter().enumerate() {
            let boundary = match node.label {
                NodeLabel::Input => Some(self.input),
                NodeLabel::Output => Some(self.output),
                NodeLabel::Generator(_) => None,
            };
            if boundary.is_some_and(|b| b != id) {
                return Err(DiagramError::Malformed(format!("extra boundary node {id}")));
            }
        }
        let (i, o) = (&self.nodes[self.input], &self.nodes[self.output]);
        if i.label != NodeLabel::Input || !i.inputs.is_empty() {
            return Err(DiagramError::Malformed("bad input boundary".into()));
        }
        if o.label != NodeLabel::Output || !o.outputs.is_empty() {
            return Err(DiagramError::Malformed("bad output boundary".into()));
        }
        self.endpoints()?;
        Ok(())
    }

    fn labels_of(&self, ws: &[usize]) -> Vec<String> {
        ws.iter().map(|&w| self.wires[w].clone()).collect()
    }

    fn check_typing(&self) -> Result<(), DiagramError> {
        let show = |ts: &[String]| format!("[{}]", ts.join(", "));
        let boundary = |expected: &Expression, ws: &[usize]| -> Result<(), DiagramError> {
            let found = self.labels_of(ws);
            if found != expected.list_type() {
                return Err(DiagramError::BoundaryMismatch {
                    expected: expected.to_string(),
                    found: show(&found),
                });
            }
            Ok(())
        };
        boundary(&self.source, self.input_wires())?;
        boundary(&self.target, self.output_wires())?;
        for n in self.generator_nodes() {
            let g = self.generator_of(n)?;
            let node = &self.nodes[n];
            for (expected, ws) in [(&g.source, &node.inputs), (&g.target, &node.outputs)] {
                let found = self.labels_of(ws);
                if found != expected.list_type() {
                    return Err(DiagramError::TypeMismatch {
                        node: n,
                        expected: show(&expected.list_type()),
                        found: show(&found),
                    });
                }
            }
        }
        Ok(())
    }

    fn start_trace(&self) -> Tracer {
        let w = self.wires.len();
        let mut rel = vec![false; w * w];
        let ins = self.input_wires();
        let src = encode(&self.source);
        for (a, &wa) in ins.iter().enumerate() {
            for (b, &wb) in ins.iter().enumerate() {
                rel[wa * w + wb] = src.leq(a, b);
            }
        }
        Tracer {
            order: Vec::new(),
            levels: Vec::new(),
            live: ins.iter().copied().collect(),
            rel,
        }
    }

    /// Checks that the inputs of `n` form an interval of the current level
    /// including into the generator's source, then propagates through `n`.
    fn step(&self, t: &mut Tracer, n: usize) -> Result<(), DiagramError> {
        let w = self.wires.len();
        let level = self.level(&t.live, &t.rel);
        let node = &self.nodes[n];
        if node.inputs.iter().any(|w| !t.live.contains(w)) {
            return Err(DiagramError::Cyclic { node: n });
        }
        let g = self.generator_of(n)?;
        let pos: Vec<usize> = node.inputs.iter().map(|&i| level.position(i)).collect();
        let sub = level
            .poset
            .subset(pos.iter().copied())
            .map_err(|e| DiagramError::Malformed(e.to_string()))?;
        if !sub.is_interval() {
            return Err(DiagramError::NotInterval {
                node: n,
                wires: node.inputs.clone(),
            });
        }
        let sp = encode(&g.source);
        for (a, &pa) in pos.iter().enumerate() {
            for (b, &pb) in pos.iter().enumerate() {
                if level.poset.leq(pa, pb) && !sp.leq(a, b) {
                    return Err(DiagramError::NoInputInclusion {
                        node: n,
                        wires: node.inputs.clone(),
                    });
                }
            }
        }
        t.levels.push(level);
        propagate(&mut t.rel, w, &t.live, node, &encode(&g.target));
        for i in &node.inputs {
            t.live.remove(i);
        }
        t.live.extend(node.outputs.iter().copied());
        t.order.push(n);
        Ok(())
    }

    fn finish_trace(&self, mut t: Tracer) -> Trace {
        t.levels.push(self.level(&t.live, &t.rel));
        Trace {
            order: t.order,
            levels: t.levels,
            relation: t.rel,
        }
    }

    /// Propagates the wire order along `order`, checking every node.
    pub(crate) fn trace(&self, order: &[usize]) -> Result<Trace, DiagramError> {
        let mut t = self.start_trace();
        for &n in order {
            self.step(&mut t, n)?;
        }
        Ok(self.finish_trace(t))
    }

    /// Depth-first search over node orders, in the order of
    /// [`StringDiagram::all_node_orders`], for a trace passing `accept`.
    /// Prefixes failing a node check are pruned.
    pub(crate) fn search_order<T>(&self, accept: &mut impl FnMut(Trace) -> Option<T>) -> Result<Option<T>, DiagramError> {
        fn go<T>(
            d: &StringDiagram,
            producer: &[usize],
            done: &mut Vec<bool>,
            t: &Tracer,
            total: usize,
            accept: &mut impl FnMut(Trace) -> Option<T>,
        ) -> Option<T> {
            if t.order.len() == total {
                return accept(d.finish_trace(t.clone()));
            }
            for n in d.ready(producer, done) {
                let mut next = t.clone();
                if d.step(&mut next, n).is_err() {
                    continue;
                }
                done[n] = true;
                if let Some(found) = go(d, producer, done, &next, total, accept) {
                    return Some(found);
                }
                done[n] = false;
            }
            None
        }
        self.node_order()?;
        let (producer, _) = self.endpoints()?;
        let total = self.generator_nodes().len();
        let mut done = vec![false; self.nodes.len()];
        Ok(go(self, &producer, &mut done, &self.start_trace(), total, accept))
    }

    /// The trace along the first node order satisfying every condition.
    /// Errors report the default order's first violation.
    fn valid_trace(&self) -> Result<Trace, DiagramError> {
        self.check_shape()?;
        self.check_typing()?;
        let order = self.node_order()?;
        let first = self.trace(&order).and_then(|t| self.check_output(&t).map(|_| t));
        match first {
            Ok(t) => Ok(t),
            Err(e) => self
                .search_order(&mut |t| self.check_output(&t).is_ok().then_some(t))?
                .ok_or(e),
        }
    }

    fn level(&self, live: &BTreeSet<usize>, rel: &[bool]) -> Level {
        let w = self.wires.len();
        let live: Vec<usize> = live.iter().copied().collect();
        let k = live.len();
        let mut leq = vec![false; k * k];
        for (i, &a) in live.iter().enumerate() {
            for (j, &b) in live.iter().enumerate() {
                leq[i * k + j] = rel[a * w + b];
            }
        }
        let labels = self.labels_of(&live);
        let poset = TypedPoset::from_closed(labels, leq).expect("levels are partial orders");
        Level { live, poset }
    }

    /// Checks every condition: boundaries, wire-linearity, typing, acyclicity,
    /// and, along some node order, interval and inclusion at each node and
    /// inclusion at the output.
    pub fn validate(&self) -> Result<(), DiagramError> {
        self.valid_trace().map(|_| ())
    }

    fn check_output(&self, trace: &Trace) -> Result<(), DiagramError> {
        let last = trace.levels.last().expect("final level");
        let outs = self.output_wires();
        let pos: Vec<usize> = outs.iter().map(|&o| last.position(o)).collect();
        let tp = encode(&self.target);
        for (a, &pa) in pos.iter().enumerate() {
            for (b, &pb) in pos.iter().enumerate() {
                if last.poset.leq(pa, pb) && !tp.leq(a, b) {
                    return Err(DiagramError::BoundaryMismatch {
                        expected: self.target.to_string(),
                        found: format!(
                            "wire {} below wire {}",
                            outs[a], outs[b]
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// The order on all wires, propagated from the source expression along
    /// the first node order that validates. Fails with the first violated
    /// condition on invalid diagrams.
    pub fn derived_poset(&self) -> Result<TypedPoset, DiagramError> {
        let trace = self.valid_trace()?;
        Ok(TypedPoset::from_closed(self.wires.clone(), trace.relation).expect("derived order is antisymmetric"))
    }

    /// [`StringDiagram::derived_poset`] along a given node order.
    pub fn derived_poset_along(&self, order: &[usize]) -> Result<TypedPoset, DiagramError> {
        let trace = self.trace(order)?;
        Ok(TypedPoset::from_closed(self.wires.clone(), trace.relation).expect("derived order is antisymmetric"))
    }

    /// The wires alive just before `node`, with their order, along the order
    /// used by [`StringDiagram::derived_poset`].
    pub fn level_before(&self, node: usize) -> Result<(Vec<usize>, TypedPoset), DiagramError> {
        let mut trace = self.valid_trace()?;
        let k = trace
            .order
            .iter()
            .position(|&n| n == node)
            .ok_or_else(|| DiagramError::Malformed(format!("node {node} is not a generator")))?;
        let level = trace.levels.swap_remove(k);
        Ok((level.live, level.poset))
    }

    /// The one-node diagram around `node`, between zetless levels chosen
    /// along `order`.
    pub fn atomic(&self, order: &[usize], node: usize) -> Result<Self, DiagramError> {
        let k = order
            .iter()
            .position(|&n| n == node)
            .ok_or_else(|| DiagramError::Malformed(format!("node {node} is not in the order")))?;
        let plan = self.plan(order)?;
        Ok(self.atomic_at(&plan, k))
    }

    fn atomic_at(&self, plan: &Plan, k: usize) -> Self {
        let (src_tree, tgt_tree) = (&plan.levels[k], &plan.levels[k + 1]);
        let node = &self.nodes[plan.trace.order[k]];
        let label = |w: usize| self.wires[w].clone();
        // fresh dense ids: the level before, then the node's outputs
        let mut ids: Vec<usize> = plan.trace.levels[k].live.clone();
        ids.extend(node.outputs.iter().copied());
        let local = |w: usize| ids.iter().position(|&x| x == w).expect("wire in atomic");
        let wires: Vec<String> = ids.iter().map(|&w| label(w)).collect();
        let ins = src_tree.leaves().into_iter().map(local).collect();
        let outs = tgt_tree.leaves().into_iter().map(local).collect();
        let mut d = Self::boundary_only(
            &self.signature,
            src_tree.to_expr(&label),
            tgt_tree.to_expr(&label),
            wires,
            ins,
            outs,
        );
        d.nodes.push(Node {
            label: node.label.clone(),
            inputs: node.inputs.iter().map(|&w| local(w)).collect(),
            outputs: node.outputs.iter().map(|&w| local(w)).collect(),
        });
        d
    }

    /// Splits a valid diagram into atomics along [`StringDiagram::planned_order`].
    pub fn decompose(&self) -> Result<Decomposition, DiagramError> {
        self.decompose_along(&self.planned_order()?)
    }

    /// Splits a valid diagram into atomics along `order`.
    pub fn decompose_along(&self, order: &[usize]) -> Result<Decomposition, DiagramError> {
        let plan = self.plan(order)?;
        let atomics = (0..order.len()).map(|k| self.atomic_at(&plan, k)).collect();
        let label = |w: usize| self.wires[w].clone();
        let (first, last) = (&plan.levels[0], plan.levels.last().expect("output level"));
        let entry = self.wire_bridge(&self.source, self.input_wires(), &first.to_expr(&label), &first.leaves())?;
        let exit = self.wire_bridge(&last.to_expr(&label), &last.leaves(), &self.target, self.output_wires())?;
        Ok(Decomposition { entry, atomics, exit })
    }

    /// Node-free diagram matching leaves that carry the same wire.
    fn wire_bridge(
        &self,
        source: &Expression,
        src_wires: &[usize],
        target: &Expression,
        tgt_wires: &[usize],
    ) -> Result<Self, DiagramError> {
        let map: Vec<usize> = src_wires
            .iter()
            .map(|w| tgt_wires.iter().position(|x| x == w).expect("same wires"))
            .collect();
        Self::from_permutation(&self.signature, source, target, &map)
    }

    /// Isomorphism of diagrams with the same boundary expressions.
    pub fn equal(&self, other: &Self) -> bool {
        self.same_signature(other).is_ok()
            && self.source == other.source
            && self.target == other.target
            && self.canonical_code() == other.canonical_code()
    }

    /// [`StringDiagram::equal`] after bridging boundaries that agree only up to
    /// symmetry.
    pub fn equal_modulo_symmetry(&self, other: &Self) -> bool {
        if self.source == other.source && self.target == other.target {
            return self.equal(other);
        }
        let bridged = || -> Result<Self, DiagramError> {
            let pre = self.symmetry_bridge(&self.source, &other.source)?;
            let post = self.symmetry_bridge(&other.target, &self.target)?;
            pre.compose(other)?.compose(&post)
        };
        bridged().is_ok_and(|b| self.equal(&b))
    }
}

/// One propagation step through `node`: its outputs take the order of the
/// generator's target and inherit the relations of its inputs to the other
/// live wires.
fn propagate(rel: &mut [bool], w: usize, live: &BTreeSet<usize>, node: &Node, target: &TypedPoset) {
    for (a, &oa) in node.outputs.iter().enumerate() {
        for (b, &ob) in node.outputs.iter().enumerate() {
            rel[oa * w + ob] = target.leq(a, b);
        }
        for &i in &node.inputs {
            rel[i * w + oa] = true;
        }
    }
    let outside: Vec<usize> = live.iter().copied().filter(|x| !node.inputs.contains(x)).collect();
    let below: Vec<usize> = outside
        .iter()
        .copied()
        .filter(|&x| node.inputs.iter().any(|&i| rel[x * w + i]))
        .collect();
    let above: Vec<usize> = outside
        .iter()
        .copied()
        .filter(|&x| node.inputs.iter().any(|&i| rel[i * w + x]))
        .collect();
    for &o in &node.outputs {
        below.iter().for_each(|&x| rel[x * w + o] = true);
        above.iter().for_each(|&x| rel[o * w + x] = true);
    }
    // what lies below the node stays below what lies above it, even when
    // there are no outputs to carry the relation
    for &x in &below {
        for &y in &above {
            rel[x * w + y] = true;
        }
    }
    close(rel, w);
}

impl fmt::Display for StringDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render::ascii(self))
    }
}
