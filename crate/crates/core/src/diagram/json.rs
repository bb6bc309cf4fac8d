//! JSON form of a diagram.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DiagramError, Node, NodeLabel, StringDiagram};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireJson {
    pub id: usize,
    pub label: String,
}

/// A node; `label` is absent on the two boundary nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub inputs: Vec<usize>,
    #[serde(default)]
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub source: String,
    pub target: String,
    pub wires: Vec<WireJson>,
    pub nodes: Vec<NodeJson>,
    pub input: usize,
    pub output: usize,
}

impl StringDiagram {
    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            source: self.source.to_string(),
            target: self.target.to_string(),
            wires: self
                .wires
                .iter()
                .enumerate()
                .map(|(id, label)| WireJson { id, label: label.clone() })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    label: n.generator().map(str::to_string),
                    inputs: n.inputs.clone(),
                    outputs: n.outputs.clone(),
                })
                .collect(),
            input: self.input,
            output: self.output,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("diagram serializes")
    }

    /// Rebuilds a diagram; ids may be arbitrary but must be unique. The result
    /// is not validated.
    pub fn from_json(signature: &Arc<Signature>, json: &DiagramJson) -> Result<Self, DiagramError> {
        let malformed = |m: String| DiagramError::Malformed(m);
        let mut wire_ix = HashMap::new();
        for (k, w) in json.wires.iter().enumerate() {
            if wire_ix.insert(w.id, k).is_some() {
                return Err(malformed(format!("duplicate wire id {}", w.id)));
            }
        }
        let mut node_ix = HashMap::new();
        for (k, n) in json.nodes.iter().enumerate() {
            if node_ix.insert(n.id, k).is_some() {
                return Err(malformed(format!("duplicate node id {}", n.id)));
            }
        }
        let wire = |id: &usize| wire_ix.get(id).copied().ok_or_else(|| malformed(format!("unknown wire {id}")));
        let node = |id: usize| node_ix.get(&id).copied().ok_or_else(|| malformed(format!("unknown node {id}")));
        let (input, output) = (node(json.input)?, node(json.output)?);
        let mut nodes = Vec::with_capacity(json.nodes.len());
        for (k, n) in json.nodes.iter().enumerate() {
            let label = match (&n.label, k) {
                (Some(g), _) => NodeLabel::Generator(g.clone()),
                (None, k) if k == input => NodeLabel::Input,
                (None, k) if k == output => NodeLabel::Output,
                (None, _) => return Err(malformed(format!("node {} has no label", n.id))),
            };
            nodes.push(Node {
                label,
                inputs: n.inputs.iter().map(wire).collect::<Result<_, _>>()?,
                outputs: n.outputs.iter().map(wire).collect::<Result<_, _>>()?,
            });
        }
        let parse = |s: &str| s.parse().map_err(|e| malformed(format!("expression {s:?}: {e}")));
        StringDiagram::from_parts(
            signature.clone(),
            json.wires.iter().map(|w| w.label.clone()).collect(),
            nodes,
            input,
            output,
            parse(&json.source)?,
            parse(&json.target)?,
        )
    }

    pub fn from_json_str(signature: &Arc<Signature>, text: &str) -> Result<Self, DiagramError> {
        let json: DiagramJson = serde_json::from_str(text).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        Self::from_json(signature, &json)
    }
}
