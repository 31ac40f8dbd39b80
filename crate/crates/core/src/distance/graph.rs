use serde::Serialize;

use crate::space::DiffeoSpace;

/// One glue record seen as an edge between two plots, with anchor
/// coordinates (on the `from` side) for seeding joints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionEdge {
    pub entry: usize,
    pub from: usize,
    pub to: usize,
    pub anchors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionGraph {
    pub nodes: usize,
    pub edges: Vec<TransitionEdge>,
}

/// A step along an edge: the edge index and whether it is walked from its
/// `from` plot to its `to` plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl TransitionGraph {
    /// Plot sequences from `start` to `end` visiting each plot at most once
    /// and using at most `max_plots` plots, in breadth-first order.
    pub fn routes(&self, start: usize, end: usize, max_plots: usize) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        let mut frontier: Vec<(usize, Vec<usize>, Vec<Step>)> =
            vec![(start, vec![start], Vec::new())];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (at, visited, steps) in frontier {
                if at == end {
                    out.push(steps.clone());
                }
                if visited.len() >= max_plots {
                    continue;
                }
                for (k, e) in self.edges.iter().enumerate() {
                    let hop = if e.from == at {
                        Some((e.to, true))
                    } else if e.to == at {
                        Some((e.from, false))
                    } else {
                        None
                    };
                    if let Some((to, forward)) = hop {
                        if !visited.contains(&to) {
                            let mut v = visited.clone();
                            v.push(to);
                            let mut s = steps.clone();
                            s.push(Step { edge: k, forward });
                            next.push((to, v, s));
                        }
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

/// Nodes are the generating plots; edges are glue records whose region
/// (shrunk by `margin`) is nonempty, with `anchors` points per axis.
pub fn transition_graph(
    space: &DiffeoSpace,
    anchors: usize,
    margin: f64,
    window: f64,
) -> TransitionGraph {
    let mut edges = Vec::new();
    for (k, entry) in space.glue.iter().enumerate() {
        let mut pts = entry.region.anchors(anchors, margin, window);
        pts.dedup();
        let pts: Vec<Vec<f64>> = pts
            .into_iter()
            .filter(|a| {
                space.plots[entry.from].domain.contains(a)
                    && space.plots[entry.to]
                        .domain
                        .contains(&entry.transfer.apply(a))
            })
            .collect();
        if !pts.is_empty() {
            edges.push(TransitionEdge {
                entry: k,
                from: entry.from,
                to: entry.to,
                anchors: pts,
            });
        }
    }
    TransitionGraph {
        nodes: space.plots.len(),
        edges,
    }
}
