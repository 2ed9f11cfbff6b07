//! Strongly-local minimization of the cut objective.
//!
//! The solver never looks at the whole graph. It keeps a local graph made
//! of every edge incident to an edge-complete node, solves the min-cut
//! problem on that subgraph (with terminal arcs sized by *global* degrees),
//! and expands every edge-incomplete node that lands on the source side.
//! Once the source side is entirely edge-complete, its local and global cut
//! agree and it minimizes the objective over the whole graph.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::flow::{insert, solve_min_cut, FlowNetwork, FlowState};
use crate::graph::{Graph, NodeSet};
use crate::objective::{alpha_objective, SeedSpec};

/// The explored part of the graph.
#[derive(Debug, Clone, Default)]
pub struct LocalGraph {
    complete: HashSet<usize>,
    /// Edge-incomplete nodes with nonzero local degree, mapped to that degree.
    touched: HashMap<usize, f64>,
    edges: Vec<(usize, usize, f64)>,
    weight: f64,
    redundant_expansions: usize,
}

/// New local edges and newly touched nodes produced by one expansion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expansion {
    pub edges: Vec<(usize, usize, f64)>,
    pub nodes: Vec<usize>,
}

impl LocalGraph {
    /// Seeds start edge-complete, with every edge incident to them.
    pub fn init(g: &Graph, spec: &SeedSpec) -> LocalGraph {
        let seeds = spec.seeds();
        let mut lg = LocalGraph {
            complete: seeds.iter().collect(),
            ..Default::default()
        };
        for r in seeds {
            for (w, wt) in g.neighbors(r) {
                if seeds.contains(w) {
                    if r < w {
                        lg.push_edge(r, w, wt);
                    }
                } else {
                    lg.push_edge(r, w, wt);
                    *lg.touched.entry(w).or_insert(0.0) += wt;
                }
            }
        }
        lg
    }

    fn push_edge(&mut self, u: usize, v: usize, w: f64) {
        self.edges.push((u, v, w));
        self.weight += w;
    }

    /// Makes every node of `new_nodes` edge-complete. Already complete
    /// nodes are skipped and counted.
    pub fn expand(&mut self, g: &Graph, new_nodes: &NodeSet) -> Expansion {
        let mut delta = Expansion::default();
        for v in new_nodes {
            if self.complete.contains(&v) {
                self.redundant_expansions += 1;
                continue;
            }
            if self.touched.remove(&v).is_none() {
                delta.nodes.push(v);
            }
            self.complete.insert(v);
            for (w, wt) in g.neighbors(v) {
                if self.complete.contains(&w) {
                    continue;
                }
                self.push_edge(v, w, wt);
                delta.edges.push((v, w, wt));
                let slot = self.touched.entry(w).or_insert(0.0);
                if *slot == 0.0 {
                    delta.nodes.push(w);
                }
                *slot += wt;
            }
        }
        delta
    }

    pub fn is_complete(&self, v: usize) -> bool {
        self.complete.contains(&v)
    }

    pub fn edge_complete(&self) -> NodeSet {
        self.complete.iter().copied().collect()
    }

    pub fn touched_incomplete(&self) -> NodeSet {
        self.touched.keys().copied().collect()
    }

    /// Local degree `d_v^L`; global degree for complete nodes.
    pub fn local_degree(&self, g: &Graph, v: usize) -> f64 {
        if self.complete.contains(&v) {
            g.degrees()[v]
        } else {
            self.touched.get(&v).copied().unwrap_or(0.0)
        }
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `vol(L) = 2 |E_L|`, weighted.
    pub fn volume(&self) -> f64 {
        2.0 * self.weight
    }

    pub fn redundant_expansions(&self) -> usize {
        self.redundant_expansions
    }

    /// Every node present in the local cut network, ascending.
    pub fn interior(&self) -> NodeSet {
        self.complete
            .iter()
            .chain(self.touched.keys())
            .copied()
            .collect()
    }
}

/// Terminal capacities of the cut graph for one `alpha`.
#[derive(Debug, Clone, Copy)]
struct Terminals<'a> {
    g: &'a Graph,
    spec: &'a SeedSpec,
    alpha: f64,
    /// Sink capacity that keeps non-seeds off the source side when epsilon
    /// is unbounded.
    barrier: f64,
}

impl<'a> Terminals<'a> {
    fn new(g: &'a Graph, spec: &'a SeedSpec, alpha: f64) -> Self {
        let mut t = Terminals { g, spec, alpha, barrier: 0.0 };
        let total: f64 = spec.seeds().iter().map(|r| t.source_cap(r)).sum();
        t.barrier = 2.0 * total + 1.0;
        t
    }

    /// `α(1 + p_r) d_r`, with `p_r = vol(G)/α` for strict seeds.
    fn source_cap(&self, r: usize) -> f64 {
        let d = self.g.degrees()[r];
        if self.spec.strict().contains(r) {
            (self.alpha + self.g.total_volume()) * d
        } else {
            self.alpha * (1.0 + self.spec.penalty(r)) * d
        }
    }

    /// `α ε d_v` using the global degree, for non-seeds only.
    fn sink_cap(&self, v: usize) -> f64 {
        if self.spec.seeds().contains(v) {
            0.0
        } else if self.spec.is_unbounded() {
            self.barrier
        } else {
            self.alpha * self.spec.epsilon() * self.g.degrees()[v]
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

/// Cut network of the local graph for parameter `alpha`.
pub fn build_local_cut_network(
    lg: &LocalGraph,
    g: &Graph,
    spec: &SeedSpec,
    alpha: f64,
) -> Result<FlowNetwork> {
    check_alpha(alpha)?;
    let terminals = Terminals::new(g, spec, alpha);
    let interior: Vec<(usize, f64)> = lg
        .interior()
        .iter()
        .map(|v| (v, terminals.sink_cap(v)))
        .collect();
    let sources: Vec<(usize, f64)> = spec
        .seeds()
        .iter()
        .map(|r| (r, terminals.source_cap(r)))
        .collect();
    FlowNetwork::build(&interior, lg.edges(), &sources)
}

/// Outcome of one strongly-local min-cut computation.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolveReport {
    pub alpha: f64,
    pub minimizer: NodeSet,
    /// Objective value of `minimizer` evaluated on the full graph.
    pub objective_value: f64,
    /// Minimum cut of the final local network.
    pub cut_value: f64,
    pub rounds: usize,
    /// Local graph volume at termination (the largest one reached).
    pub peak_local_volume: f64,
    pub explored_edges: usize,
    pub edge_complete: NodeSet,
    pub pushes: u64,
    pub relabels: u64,
    pub global_relabels: u64,
}

/// Minimizes the cut objective for `alpha` over the whole graph while only
/// touching a neighborhood of the seeds. The flow state is carried across
/// expansions.
pub fn local_min_cut(g: &Graph, spec: &SeedSpec, alpha: f64) -> Result<LocalSolveReport> {
    check_alpha(alpha)?;
    let terminals = Terminals::new(g, spec, alpha);
    let mut lg = LocalGraph::init(g, spec);
    let mut net = build_local_cut_network(&lg, g, spec, alpha)?;
    let mut state = FlowState::new(&net);
    let mut rounds = 0;
    let (mut pushes, mut relabels, mut global_relabels) = (0, 0, 0);
    loop {
        let res = solve_min_cut(&net, &mut state)?;
        rounds += 1;
        pushes += res.pushes;
        relabels += res.relabels;
        global_relabels += res.global_relabels;

        let frontier: NodeSet = res
            .source_side
            .iter()
            .filter(|&v| !lg.is_complete(v))
            .collect();
        if frontier.is_empty() {
            let objective_value = alpha_objective(g, spec, alpha, &res.source_side);
            return Ok(LocalSolveReport {
                alpha,
                minimizer: res.source_side,
                objective_value,
                cut_value: res.cut_value,
                rounds,
                peak_local_volume: lg.volume(),
                explored_edges: lg.edge_count(),
                edge_complete: lg.edge_complete(),
                pushes,
                relabels,
                global_relabels,
            });
        }
        log::trace!("alpha {alpha}: round {rounds} expands {} node(s)", frontier.len());
        let delta = lg.expand(g, &frontier);
        let nodes: Vec<(usize, f64)> = delta
            .nodes
            .iter()
            .map(|&v| (v, terminals.sink_cap(v)))
            .collect();
        insert(&mut net, &mut state, &nodes, &delta.edges)?;
    }
}
