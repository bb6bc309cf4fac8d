//! Zetless levels and one-hole contexts along a node order.
//!
//! The propagated levels of a valid diagram need not be zetless. A backward
//! pass from the target picks, for every node, a zetless context around its
//! inputs that contains the propagated level and plugs into what later nodes
//! require. A forward pass then picks zetless levels between the propagated
//! ones and those requirements.
use std::collections::{BTreeSet, HashSet};

use super::{propagate, retag, DiagramError, StringDiagram, Trace};
use crate::poset::{close, TypedPoset, HOLE_LABEL};
use crate::zetless::{encode, zetless_between, Bias, Tagged};

/// Leaf tag of the hole in [`Plan::contexts`].
pub(crate) const HOLE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub trace: Trace,
    /// `contexts[k]` surrounds node `order[k]`; leaves are wires or [`HOLE`].
    pub contexts: Vec<Tagged>,
    /// `levels[k]` precedes node `order[k]`; the last level is the output.
    pub levels: Vec<Tagged>,
}

fn pairs(t: &Tagged) -> HashSet<(usize, usize)> {
    let mut out = HashSet::new();
    t.strict_pairs(&mut |x, y| {
        out.insert((x, y));
    });
    out
}

impl StringDiagram {
    /// The first valid node order, in the order of
    /// [`StringDiagram::all_node_orders`], along which every node has a
    /// zetless context. Evaluation and decomposition along other orders may
    /// fail with [`DiagramError::NoZetlessContext`].
    pub fn planned_order(&self) -> Result<Vec<usize>, DiagramError> {
        self.validate()?;
        let mut first_err = None;
        let found = self.search_order(&mut |t| {
            let order = t.order.clone();
            self.check_output(&t).ok()?;
            match self.plan_trace(t) {
                Ok(_) => Some(order),
                Err(e) => {
                    first_err.get_or_insert(e);
                    None
                }
            }
        })?;
        found.ok_or_else(|| first_err.expect("a valid diagram has a valid order"))
    }

    pub(crate) fn plan(&self, order: &[usize]) -> Result<Plan, DiagramError> {
        self.plan_trace(self.trace(order)?)
    }

    fn plan_trace(&self, trace: Trace) -> Result<Plan, DiagramError> {
        let order = trace.order.clone();
        let order = &order[..];
        let target = Tagged::from_expr(&self.target, self.output_wires());
        let mut contexts = vec![Tagged::Unit; order.len()];
        let mut required = pairs(&target);
        let mut requirements = vec![required.clone(); order.len() + 1];
        for k in (0..order.len()).rev() {
            let n = order[k];
            let ctx = self.context_at(&trace, k, &required)?;
            let g = self.generator_of(n)?;
            let plugged = ctx.plug(HOLE, &Tagged::from_expr(&g.source, &self.nodes[n].inputs));
            required = pairs(&plugged);
            requirements[k] = required.clone();
            contexts[k] = ctx;
        }

        let w = self.wires.len();
        let mut levels = vec![Tagged::from_expr(&self.source, self.input_wires())];
        for (k, &n) in order.iter().enumerate() {
            let node = &self.nodes[n];
            let mut rel = vec![false; w * w];
            (0..w).for_each(|x| rel[x * w + x] = true);
            levels[k].strict_pairs(&mut |x, y| rel[x * w + y] = true);
            let live: BTreeSet<usize> = trace.levels[k].live.iter().copied().collect();
            let g = self.generator_of(n)?;
            propagate(&mut rel, w, &live, node, &encode(&g.target));
            let next = &trace.levels[k + 1].live;
            let lo = self.restricted(next, &|a, b| rel[a * w + b]);
            let up = |i: usize, j: usize| requirements[k + 1].contains(&(next[i], next[j]));
            let z = zetless_between(&lo, &up, Bias::Fewest).ok_or(DiagramError::NoZetlessContext { node: n })?;
            levels.push(retag(&z, &|i| next[i]));
        }
        Ok(Plan {
            trace,
            contexts,
            levels,
        })
    }

    /// A zetless context around the inputs of `order[k]` containing the
    /// propagated level whose output plugging lies inside `required`.
    fn context_at(&self, trace: &Trace, k: usize, required: &HashSet<(usize, usize)>) -> Result<Tagged, DiagramError> {
        let n = trace.order[k];
        let node = &self.nodes[n];
        let level = &trace.levels[k];
        let par: Vec<usize> = level.live.iter().copied().filter(|w| !node.inputs.contains(w)).collect();
        let p = par.len();
        let below = |a: usize, b: usize| level.poset.leq(level.position(a), level.position(b));
        let mut leq = vec![false; (p + 1) * (p + 1)];
        for (i, &x) in par.iter().enumerate() {
            for (j, &y) in par.iter().enumerate() {
                leq[i * (p + 1) + j] = below(x, y);
            }
            leq[i * (p + 1) + p] = node.inputs.iter().any(|&h| below(x, h));
            leq[p * (p + 1) + i] = node.inputs.iter().any(|&h| below(h, x));
        }
        leq[p * (p + 1) + p] = true;
        close(&mut leq, p + 1);
        let mut labels = self.labels_of(&par);
        labels.push(HOLE_LABEL.to_string());
        let lo = TypedPoset::from_closed(labels, leq).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        let outs = &node.outputs;
        let up = |i: usize, j: usize| match (i == p, j == p) {
            (false, false) => required.contains(&(par[i], par[j])),
            (false, true) => outs.iter().all(|&o| required.contains(&(par[i], o))),
            (true, false) => outs.iter().all(|&o| required.contains(&(o, par[j]))),
            (true, true) => false,
        };
        let q = zetless_between(&lo, &up, Bias::Most).ok_or(DiagramError::NoZetlessContext { node: n })?;
        Ok(retag(&q, &|i| if i == p { HOLE } else { par[i] }))
    }

    fn restricted(&self, wires: &[usize], rel: &impl Fn(usize, usize) -> bool) -> TypedPoset {
        let k = wires.len();
        let mut leq = vec![false; k * k];
        for (i, &a) in wires.iter().enumerate() {
            for (j, &b) in wires.iter().enumerate() {
                leq[i * k + j] = rel(a, b);
            }
        }
        TypedPoset::from_closed(self.labels_of(wires), leq).expect("restriction of a partial order")
    }
}
