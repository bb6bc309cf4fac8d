//! Canonical codes for diagram isomorphism.
//!
//! Ports are ordered, so a traversal started from a fixed node names every
//! wire and node it reaches deterministically. The boundary nodes pin the part
//! of the diagram connected to them; each floating component is coded from
//! every possible root and the least code is kept.

use super::{NodeLabel, StringDiagram};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(super) enum Token {
    Node(String),
    Wire(usize),
    NewWire(usize, String),
    End,
}

struct Walk<'a> {
    d: &'a StringDiagram,
    producer: Vec<Option<usize>>,
    consumer: Vec<Option<usize>>,
    wire_name: Vec<Option<usize>>,
    visited: Vec<bool>,
    next_wire: usize,
    node_seq: Vec<usize>,
    wire_seq: Vec<usize>,
}

impl<'a> Walk<'a> {
    fn new(d: &'a StringDiagram) -> Self {
        let mut producer = vec![None; d.wires.len()];
        let mut consumer = vec![None; d.wires.len()];
        for (id, n) in d.nodes.iter().enumerate() {
            n.outputs.iter().for_each(|&w| producer[w] = Some(id));
            n.inputs.iter().for_each(|&w| consumer[w] = Some(id));
        }
        Walk {
            d,
            producer,
            consumer,
            wire_name: vec![None; d.wires.len()],
            visited: vec![false; d.nodes.len()],
            next_wire: 0,
            node_seq: Vec::new(),
            wire_seq: Vec::new(),
        }
    }

    fn name(&mut self, w: usize, code: &mut Vec<Token>, queue: &mut Vec<usize>) {
        match self.wire_name[w] {
            Some(k) => code.push(Token::Wire(k)),
            None => {
                let k = self.next_wire;
                self.next_wire += 1;
                self.wire_name[w] = Some(k);
                self.wire_seq.push(w);
                code.push(Token::NewWire(k, self.d.wires[w].clone()));
                queue.push(w);
            }
        }
    }

    fn visit(&mut self, n: usize, code: &mut Vec<Token>, queue: &mut Vec<usize>) {
        self.visited[n] = true;
        self.node_seq.push(n);
        let node = &self.d.nodes[n];
        code.push(Token::Node(match &node.label {
            NodeLabel::Input => "<in>".into(),
            NodeLabel::Output => "<out>".into(),
            NodeLabel::Generator(g) => g.clone(),
        }));
        for &w in &node.inputs {
            self.name(w, code, queue);
        }
        code.push(Token::End);
        for &w in &node.outputs {
            self.name(w, code, queue);
        }
        code.push(Token::End);
    }

    /// Breadth-first over wires from `roots`, visiting both ends of each wire.
    fn run(&mut self, roots: &[usize]) -> Vec<Token> {
        let mut code = Vec::new();
        let mut queue = Vec::new();
        for &r in roots {
            if !self.visited[r] {
                self.visit(r, &mut code, &mut queue);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let w = queue[head];
            head += 1;
            for end in [self.producer[w], self.consumer[w]].into_iter().flatten() {
                if !self.visited[end] {
                    self.visit(end, &mut code, &mut queue);
                }
            }
        }
        code
    }
}

/// Canonical code plus the node and wire visiting orders behind it.
pub(super) struct Canonical {
    pub code: Vec<Token>,
    pub nodes: Vec<usize>,
    pub wires: Vec<usize>,
}

impl StringDiagram {
    pub(super) fn canonical(&self) -> Canonical {
        let mut walk = Walk::new(self);
        let mut code = walk.run(&[self.input, self.output]);
        let pinned = walk.visited.clone();
        let (mut nodes, mut wires) = (walk.node_seq, walk.wire_seq);

        let mut floating: Vec<(Vec<Token>, Vec<usize>, Vec<usize>)> = Vec::new();
        let mut seen = pinned.clone();
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            let mut probe = Walk::new(self);
            probe.visited = pinned.clone();
            probe.run(&[start]);
            let members = probe.node_seq;
            members.iter().for_each(|&n| seen[n] = true);
            let best = members
                .iter()
                .map(|&root| {
                    let mut w = Walk::new(self);
                    w.visited = pinned.clone();
                    let c = w.run(&[root]);
                    (c, w.node_seq, w.wire_seq)
                })
                .min_by(|a, b| a.0.cmp(&b.0))
                .expect("component has a node");
            floating.push(best);
        }
        floating.sort_by(|a, b| a.0.cmp(&b.0));
        for (c, ns, ws) in floating {
            code.push(Token::End);
            code.extend(c);
            nodes.extend(ns);
            wires.extend(ws);
        }
        Canonical { code, nodes, wires }
    }

    pub(super) fn canonical_code(&self) -> Vec<Token> {
        self.canonical().code
    }

    /// The same diagram with nodes and wires renumbered in canonical order, so
    /// that equal diagrams have identical representations.
    pub fn canonicalize(&self) -> StringDiagram {
        let c = self.canonical();
        let mut wire_ix = vec![0; self.wires.len()];
        for (k, &w) in c.wires.iter().enumerate() {
            wire_ix[w] = k;
        }
        let remap = |ws: &[usize]| ws.iter().map(|&w| wire_ix[w]).collect::<Vec<_>>();
        let nodes = c
            .nodes
            .iter()
            .map(|&n| {
                let node = &self.nodes[n];
                super::Node {
                    label: node.label.clone(),
                    inputs: remap(&node.inputs),
                    outputs: remap(&node.outputs),
                }
            })
            .collect();
        StringDiagram {
            signature: self.signature.clone(),
            wires: c.wires.iter().map(|&w| self.wires[w].clone()).collect(),
            nodes,
            input: 0,
            output: 1,
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }
}
