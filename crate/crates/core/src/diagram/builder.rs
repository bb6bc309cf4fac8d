//! Incremental construction of valid diagrams, one generator at a time.

use std::sync::Arc;

use super::{retag, DiagramError, Node, NodeLabel, StringDiagram, Trace};
use crate::expr::Expression;
use crate::poset::TypedPoset;
use crate::signature::Signature;
use crate::zetless::{decode, encode, inclusion_exists, zetless_between, Bias};

/// Builds a diagram by applying generators to wires that are currently alive.
///
/// ```
/// use std::sync::Arc;
/// use physduo::{DiagramBuilder, Signature};
///
/// let sig = Arc::new(Signature::parse("type A B\ngen f : A -> B").unwrap());
/// let mut b = DiagramBuilder::new(&sig, "A > A".parse().unwrap());
/// let a0 = b.live()[0];
/// b.apply("f", &[a0]).unwrap();
/// let d = b.finish().unwrap();
/// assert_eq!(d.target().to_string(), "B > A");
/// ```
#[derive(Debug, Clone)]
pub struct DiagramBuilder {
    signature: Arc<Signature>,
    source: Expression,
    wires: Vec<String>,
    nodes: Vec<Node>,
}

impl DiagramBuilder {
    pub fn new(signature: &Arc<Signature>, source: Expression) -> Self {
        DiagramBuilder {
            signature: signature.clone(),
            wires: source.list_type(),
            source,
            nodes: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn wire_label(&self, wire: usize) -> &str {
        &self.wires[wire]
    }

    /// Wires not yet consumed, increasing.
    pub fn live(&self) -> Vec<usize> {
        let mut alive = vec![false; self.wires.len()];
        (0..self.source.size()).for_each(|w| alive[w] = true);
        for n in &self.nodes {
            n.inputs.iter().for_each(|&w| alive[w] = false);
            n.outputs.iter().for_each(|&w| alive[w] = true);
        }
        (0..self.wires.len()).filter(|&w| alive[w]).collect()
    }

    /// Current diagram with the live wires as outputs; the target is not set.
    fn partial(&self, extra: Option<Node>) -> StringDiagram {
        let mut nodes = self.nodes.clone();
        let mut wires = self.wires.clone();
        if let Some(n) = extra {
            wires.extend(std::iter::repeat_n(String::new(), n.outputs.len()));
            nodes.push(n);
        }
        let mut d = StringDiagram::boundary_only(
            &self.signature,
            self.source.clone(),
            Expression::Unit,
            wires,
            (0..self.source.size()).collect(),
            Vec::new(),
        );
        d.nodes.extend(nodes);
        d
    }

    fn trace(&self, extra: Option<Node>) -> Result<Trace, DiagramError> {
        let d = self.partial(extra);
        let order: Vec<usize> = (2..d.nodes.len()).collect();
        d.trace(&order)
    }

    /// The live wires with their current order; element `k` is `live()[k]`.
    pub fn level(&self) -> TypedPoset {
        let trace = self.trace(None).expect("builder keeps the diagram valid");
        trace.levels.last().unwrap().poset.clone()
    }

    /// Checks that `generator` may consume `inputs` in this order.
    pub fn check(&self, generator: &str, inputs: &[usize]) -> Result<(), DiagramError> {
        let g = self.signature.generator(generator)?;
        let live = self.live();
        let mut seen = Vec::new();
        for &w in inputs {
            if !live.contains(&w) || seen.contains(&w) {
                return Err(DiagramError::NotWireLinear {
                    wire: w,
                    detail: "not available".into(),
                });
            }
            seen.push(w);
        }
        let found: Vec<String> = inputs.iter().map(|&w| self.wires[w].clone()).collect();
        if found != g.source.list_type() {
            return Err(DiagramError::TypeMismatch {
                node: self.nodes.len() + 2,
                expected: format!("[{}]", g.source.list_type().join(", ")),
                found: format!("[{}]", found.join(", ")),
            });
        }
        let first = self.wires.len();
        let node = Node {
            label: NodeLabel::Generator(generator.to_string()),
            inputs: inputs.to_vec(),
            outputs: (first..first + g.target.size()).collect(),
        };
        self.trace(Some(node)).map(|_| ())
    }

    /// Applies `generator` to `inputs`, returning the ids of the new wires.
    pub fn apply(&mut self, generator: &str, inputs: &[usize]) -> Result<Vec<usize>, DiagramError> {
        self.check(generator, inputs)?;
        let g = self.signature.generator(generator)?;
        let first = self.wires.len();
        self.wires.extend(g.target.list_type());
        let outputs: Vec<usize> = (first..self.wires.len()).collect();
        self.nodes.push(Node {
            label: NodeLabel::Generator(generator.to_string()),
            inputs: inputs.to_vec(),
            outputs: outputs.clone(),
        });
        Ok(outputs)
    }

    /// Every input assignment accepted by [`DiagramBuilder::check`].
    pub fn applications(&self, generator: &str) -> Vec<Vec<usize>> {
        let Ok(g) = self.signature.generator(generator) else {
            return Vec::new();
        };
        let wanted = g.source.list_type();
        let live = self.live();
        let mut out = Vec::new();
        let mut acc = Vec::new();
        self.assign(&wanted, &live, &mut acc, &mut |ins| {
            if self.check(generator, ins).is_ok() {
                out.push(ins.to_vec());
            }
        });
        out
    }

    fn assign(&self, wanted: &[String], live: &[usize], acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if acc.len() == wanted.len() {
            f(acc);
            return;
        }
        for &w in live {
            if !acc.contains(&w) && self.wires[w] == wanted[acc.len()] {
                acc.push(w);
                self.assign(wanted, live, acc, f);
                acc.pop();
            }
        }
    }

    /// Finishes with the decoded current level as target, first adding the
    /// fewest relations that make it zetless.
    pub fn finish(self) -> Result<StringDiagram, DiagramError> {
        let trace = self.trace(None)?;
        let last = trace.levels.last().unwrap();
        let tree = zetless_between(&last.poset, &|_, _| true, Bias::Fewest).expect("linear extensions are zetless");
        let tree = retag(&tree, &|k| last.live[k]);
        let target = tree.to_expr(&|w| self.wires[w].clone());
        self.close(target, tree.leaves())
    }

    /// Finishes with an explicit target, matched by the least inclusion.
    pub fn finish_with(self, target: &Expression) -> Result<StringDiagram, DiagramError> {
        let level = self.level();
        let live = self.live();
        let inc = inclusion_exists(&level, &encode(target)).ok_or_else(|| DiagramError::NoStructureMap {
            from: decode(&level).unwrap_or(Expression::Unit),
            to: target.clone(),
        })?;
        let mut outs = vec![0; live.len()];
        for (k, &j) in inc.map().iter().enumerate() {
            outs[j] = live[k];
        }
        self.close(target.clone(), outs)
    }

    fn close(self, target: Expression, outputs: Vec<usize>) -> Result<StringDiagram, DiagramError> {
        let mut d = StringDiagram::boundary_only(
            &self.signature,
            self.source.clone(),
            target,
            self.wires,
            (0..self.source.size()).collect(),
            outputs,
        );
        d.nodes.extend(self.nodes);
        d.validate()?;
        Ok(d)
    }
}
