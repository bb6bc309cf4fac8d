//! Text renderings: Graphviz DOT and a plain listing.

use std::fmt::Write;

use super::{NodeLabel, StringDiagram};

fn node_name(d: &StringDiagram, n: usize) -> String {
    match d.nodes[n].label {
        NodeLabel::Input => "input".into(),
        NodeLabel::Output => "output".into(),
        NodeLabel::Generator(_) => format!("n{n}"),
    }
}

/// DOT graph: generator nodes as boxes, boundaries as points pinned to the
/// first and last rank, one edge per wire. With `order`, the covering pairs
/// of the derived wire order are added as dashed non-constraining edges
/// between wire midpoints.
pub fn dot(d: &StringDiagram, order: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph diagram {{");
    let _ = writeln!(s, "  rankdir=TB;");
    let _ = writeln!(s, "  label=\"{} -> {}\";", d.source, d.target);
    let _ = writeln!(s, "  input [shape=point]; output [shape=point];");
    let _ = writeln!(s, "  {{ rank=source; input }}");
    let _ = writeln!(s, "  {{ rank=sink; output }}");
    for n in d.generator_nodes() {
        let _ = writeln!(s, "  n{n} [shape=box, label=\"{}\"];", d.nodes[n].label);
    }
    let mut producer = vec![0; d.wires.len()];
    let mut consumer = vec![0; d.wires.len()];
    for (id, node) in d.nodes.iter().enumerate() {
        node.outputs.iter().for_each(|&w| producer[w] = id);
        node.inputs.iter().for_each(|&w| consumer[w] = id);
    }
    let poset = if order { d.derived_poset().ok() } else { None };
    for (w, label) in d.wires.iter().enumerate() {
        let (p, c) = (node_name(d, producer[w]), node_name(d, consumer[w]));
        if poset.is_some() {
            let _ = writeln!(s, "  w{w} [shape=plaintext, label=\"w{w}:{label}\"];");
            let _ = writeln!(s, "  {p} -> w{w} [arrowhead=none];");
            let _ = writeln!(s, "  w{w} -> {c};");
        } else {
            let _ = writeln!(s, "  {p} -> {c} [label=\"w{w}:{label}\"];");
        }
    }
    if let Some(p) = poset {
        for (a, b) in p.covers() {
            let _ = writeln!(s, "  w{a} -> w{b} [style=dashed, constraint=false];");
        }
    }
    s.push_str("}\n");
    s
}

/// Listing of boundaries and nodes in node order, followed by the covering
/// pairs of the derived wire order when the diagram is valid.
pub fn ascii(d: &StringDiagram) -> String {
    let wire = |w: &usize| format!("w{w}:{}", d.wires[*w]);
    let list = |ws: &[usize]| ws.iter().map(wire).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    let _ = writeln!(s, "{} -> {}", d.source, d.target);
    let _ = writeln!(s, "  in   {}", list(d.input_wires()));
    let order = d.node_order().unwrap_or_else(|_| d.generator_nodes());
    for n in order {
        let node = &d.nodes[n];
        let _ = writeln!(
            s,
            "  n{n:<3} {} : {} -> {}",
            node.label,
            list(&node.inputs),
            list(&node.outputs)
        );
    }
    let _ = writeln!(s, "  out  {}", list(d.output_wires()));
    if let Ok(p) = d.derived_poset() {
        let covers: Vec<String> = p.covers().iter().map(|(a, b)| format!("w{a}<w{b}")).collect();
        let _ = write!(s, "  order {}", covers.join(" "));
    }
    s
}

impl StringDiagram {
    pub fn to_dot(&self, order: bool) -> String {
        dot(self, order)
    }

    pub fn to_ascii(&self) -> String {
        ascii(self)
    }
}
