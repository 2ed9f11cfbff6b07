//! Incremental FIFO push-relabel for minimum s-t cuts.
//!
//! Only the first phase of push-relabel runs: the solver stops at a maximum
//! preflow, which is enough to read off a minimum cut. Excess stranded at
//! interior nodes is never routed back to the source.
//!
//! A [`FlowNetwork`] can grow after a solve via [`insert`]. The preflow
//! carried by [`FlowState`] stays valid because insertions only add
//! capacity, so the next [`solve_min_cut`] warm-starts from it after a
//! global relabel.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::NodeSet;

/// Residual capacities and excesses at or below this are treated as zero.
pub const FLOW_TOL: f64 = 1e-10;

const SOURCE: usize = 0;
const SINK: usize = 1;

/// s-t network over interior nodes named by base-graph ids.
///
/// Arcs come in pairs `a`, `a ^ 1` running in opposite directions. An
/// undirected edge of weight `w` is one pair with capacity `w` both ways;
/// a terminal arc is a pair whose reverse has capacity zero.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    base_ids: Vec<usize>,
    index: HashMap<usize, usize>,
    adj: Vec<Vec<usize>>,
    head: Vec<usize>,
    cap: Vec<f64>,
    edge_arcs: HashMap<(usize, usize), usize>,
}

fn check_cap(what: &str, c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} capacity must be finite and >= 0, got {c}")))
    }
}

impl FlowNetwork {
    /// Builds a network from interior nodes `(id, sink capacity)`,
    /// undirected interior edges `(u, v, capacity)` and source arcs
    /// `(id, capacity)`. Repeated edges or source arcs merge by adding
    /// capacity.
    pub fn build(
        interior: &[(usize, f64)],
        edges: &[(usize, usize, f64)],
        source_arcs: &[(usize, f64)],
    ) -> Result<FlowNetwork> {
        let mut net = FlowNetwork {
            base_ids: Vec::new(),
            index: HashMap::new(),
            adj: vec![Vec::new(), Vec::new()],
            head: Vec::new(),
            cap: Vec::new(),
            edge_arcs: HashMap::new(),
        };
        net.validate_growth(interior, edges)?;
        net.grow(interior, edges);
        let mut source_arc: HashMap<usize, usize> = HashMap::new();
        for &(v, c) in source_arcs {
            check_cap("source arc", c)?;
            let Some(&x) = net.index.get(&v) else {
                return Err(Error::invalid(format!("source arc to unknown node {v}")));
            };
            match source_arc.get(&x) {
                Some(&a) => net.cap[a] += c,
                None => {
                    let a = net.add_pair(SOURCE, x, c, 0.0);
                    source_arc.insert(x, a);
                }
            }
        }
        Ok(net)
    }

    /// Number of nodes including source and sink.
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn interior_count(&self) -> usize {
        self.base_ids.len()
    }

    /// Number of directed arcs (twice the number of arc pairs).
    pub fn arc_count(&self) -> usize {
        self.head.len()
    }

    /// Interior base ids in insertion order.
    pub fn interior(&self) -> &[usize] {
        &self.base_ids
    }

    pub fn contains(&self, base: usize) -> bool {
        self.index.contains_key(&base)
    }

    pub fn source_capacity(&self, base: usize) -> f64 {
        self.terminal_capacity(base, SOURCE)
    }

    pub fn sink_capacity(&self, base: usize) -> f64 {
        self.terminal_capacity(base, SINK)
    }

    /// Capacity of the undirected interior edge `{u, v}`, zero if absent.
    pub fn edge_capacity(&self, u: usize, v: usize) -> f64 {
        let (Some(&x), Some(&y)) = (self.index.get(&u), self.index.get(&v)) else {
            return 0.0;
        };
        self.edge_arcs
            .get(&(x.min(y), x.max(y)))
            .map_or(0.0, |&a| self.cap[a])
    }

    /// Capacity of the cut with `{s} ∪ side` on the source side.
    pub fn cut_capacity(&self, side: &NodeSet) -> f64 {
        let on_source = self.side_mask(side);
        self.cut_of_mask(&on_source)
    }

    fn terminal_capacity(&self, base: usize, terminal: usize) -> f64 {
        let Some(&x) = self.index.get(&base) else {
            return 0.0;
        };
        let (from, to) = if terminal == SOURCE { (SOURCE, x) } else { (x, SINK) };
        self.adj[from]
            .iter()
            .filter(|&&a| self.head[a] == to)
            .map(|&a| self.cap[a])
            .sum()
    }

    fn side_mask(&self, side: &NodeSet) -> Vec<bool> {
        let mut mask = vec![false; self.node_count()];
        mask[SOURCE] = true;
        for v in side {
            if let Some(&x) = self.index.get(&v) {
                mask[x] = true;
            }
        }
        mask
    }

    fn cut_of_mask(&self, on_source: &[bool]) -> f64 {
        let mut total = 0.0;
        for (u, arcs) in self.adj.iter().enumerate() {
            if !on_source[u] {
                continue;
            }
            for &a in arcs {
                if !on_source[self.head[a]] {
                    total += self.cap[a];
                }
            }
        }
        total
    }

    fn add_pair(&mut self, u: usize, v: usize, forward: f64, backward: f64) -> usize {
        let a = self.head.len();
        self.head.push(v);
        self.cap.push(forward);
        self.head.push(u);
        self.cap.push(backward);
        self.adj[u].push(a);
        self.adj[v].push(a + 1);
        a
    }

    fn validate_growth(&self, nodes: &[(usize, f64)], edges: &[(usize, usize, f64)]) -> Result<()> {
        let mut fresh: HashMap<usize, ()> = HashMap::with_capacity(nodes.len());
        for &(v, c) in nodes {
            check_cap("sink arc", c)?;
            if self.index.contains_key(&v) || fresh.insert(v, ()).is_some() {
                return Err(Error::invalid(format!("interior node {v} declared twice")));
            }
        }
        for &(u, v, c) in edges {
            check_cap("edge", c)?;
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
            for x in [u, v] {
                if !self.index.contains_key(&x) && !fresh.contains_key(&x) {
                    return Err(Error::invalid(format!("edge endpoint {x} is not an interior node")));
                }
            }
        }
        Ok(())
    }

    /// Appends validated nodes and edges; returns the number of new arcs.
    fn grow(&mut self, nodes: &[(usize, f64)], edges: &[(usize, usize, f64)]) -> usize {
        let before = self.head.len();
        for &(v, sink_cap) in nodes {
            let x = self.adj.len();
            self.adj.push(Vec::new());
            self.base_ids.push(v);
            self.index.insert(v, x);
            if sink_cap > 0.0 {
                self.add_pair(x, SINK, sink_cap, 0.0);
            }
        }
        for &(u, v, c) in edges {
            if c == 0.0 {
                continue;
            }
            let (x, y) = (self.index[&u], self.index[&v]);
            let key = (x.min(y), x.max(y));
            match self.edge_arcs.get(&key) {
                Some(&a) => {
                    self.cap[a] += c;
                    self.cap[a ^ 1] += c;
                }
                None => {
                    let a = self.add_pair(key.0, key.1, c, c);
                    self.edge_arcs.insert(key, a);
                }
            }
        }
        self.head.len() - before
    }

    fn tail(&self, a: usize) -> usize {
        self.head[a ^ 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Zero flow; the next solve saturates the source arcs.
    Fresh,
    /// A valid preflow whose labels may be stale.
    Dirty,
    /// No active nodes remain.
    Converged,
}

/// Preflow, labels and the FIFO queue of active nodes for one network.
#[derive(Debug, Clone)]
pub struct FlowState {
    flow: Vec<f64>,
    excess: Vec<f64>,
    label: Vec<usize>,
    current: Vec<usize>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    phase: Phase,
    labels_valid: bool,
    work_relabels: u64,
    work_scans: u64,
    check_steps: bool,
    pushes: u64,
    relabels: u64,
    global_relabels: u64,
}

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCutResult {
    /// Interior base ids on the source side.
    pub source_side: NodeSet,
    pub cut_value: f64,
    /// Flow that reached the sink; equals `cut_value` up to round-off.
    pub flow_value: f64,
    pub pushes: u64,
    pub relabels: u64,
    pub global_relabels: u64,
}

impl FlowState {
    /// Zero preflow for `net`.
    pub fn new(net: &FlowNetwork) -> FlowState {
        let n = net.node_count();
        let mut label = vec![0; n];
        label[SOURCE] = n;
        FlowState {
            flow: vec![0.0; net.arc_count()],
            excess: vec![0.0; n],
            label,
            current: vec![0; n],
            queue: VecDeque::new(),
            queued: vec![false; n],
            phase: Phase::Fresh,
            labels_valid: false,
            work_relabels: 0,
            work_scans: 0,
            check_steps: false,
            pushes: 0,
            relabels: 0,
            global_relabels: 0,
        }
    }

    /// Check every invariant after each push and relabel. Quadratic; meant
    /// for tests on small networks.
    pub fn with_step_checks(mut self, on: bool) -> FlowState {
        self.check_steps = on;
        self
    }

    pub fn is_converged(&self) -> bool {
        self.phase == Phase::Converged
    }

    /// Label of interior node `base`.
    pub fn label_of(&self, net: &FlowNetwork, base: usize) -> Option<usize> {
        net.index.get(&base).map(|&x| self.label[x])
    }

    pub fn source_label(&self) -> usize {
        self.label[SOURCE]
    }

    pub fn sink_label(&self) -> usize {
        self.label[SINK]
    }

    pub fn excess_of(&self, net: &FlowNetwork, base: usize) -> Option<f64> {
        net.index.get(&base).map(|&x| self.excess[x])
    }

    /// Flow that has reached the sink.
    pub fn sink_excess(&self) -> f64 {
        self.excess[SINK]
    }

    /// Active interior base ids currently queued, in queue order.
    pub fn queued(&self, net: &FlowNetwork) -> Vec<usize> {
        self.queue.iter().map(|&x| net.base_ids[x - 2]).collect()
    }

    /// Cumulative `(pushes, relabels, global relabels)`.
    pub fn counters(&self) -> (u64, u64, u64) {
        (self.pushes, self.relabels, self.global_relabels)
    }

    fn ensure_matches(&self, net: &FlowNetwork) -> Result<()> {
        if self.flow.len() != net.arc_count() || self.excess.len() != net.node_count() {
            return Err(Error::Contract(format!(
                "flow state sized for {} nodes / {} arcs, network has {} / {}",
                self.excess.len(),
                self.flow.len(),
                net.node_count(),
                net.arc_count()
            )));
        }
        Ok(())
    }

    fn is_active(&self, x: usize, n: usize) -> bool {
        x > SINK && self.excess[x] > FLOW_TOL && self.label[x] < n
    }

    fn enqueue(&mut self, x: usize) {
        if !self.queued[x] {
            self.queued[x] = true;
            self.queue.push_back(x);
        }
    }

    fn move_flow(&mut self, net: &FlowNetwork, a: usize, delta: f64) {
        let (u, v) = (net.tail(a), net.head[a]);
        self.flow[a] += delta;
        self.flow[a ^ 1] -= delta;
        self.excess[u] -= delta;
        self.excess[v] += delta;
    }

    fn push(&mut self, net: &FlowNetwork, a: usize, delta: f64) {
        self.move_flow(net, a, delta);
        self.pushes += 1;
    }

    fn saturate_source_arcs(&mut self, net: &FlowNetwork) {
        for &a in &net.adj[SOURCE] {
            let r = net.cap[a] - self.flow[a];
            if r > 0.0 {
                self.move_flow(net, a, r);
            }
        }
    }

    fn relabel(&mut self, net: &FlowNetwork, u: usize) {
        let n = net.node_count();
        let old = self.label[u];
        let mut lowest = n;
        for &a in &net.adj[u] {
            if net.cap[a] - self.flow[a] > FLOW_TOL {
                lowest = lowest.min(self.label[net.head[a]] + 1);
            }
        }
        self.work_scans += net.adj[u].len() as u64;
        self.label[u] = lowest.min(n);
        debug_assert!(self.label[u] > old, "relabel must raise the label");
        self.relabels += 1;
        self.work_relabels += 1;
    }

    fn discharge(&mut self, net: &FlowNetwork, u: usize) -> Result<()> {
        let n = net.node_count();
        while self.excess[u] > FLOW_TOL {
            if self.current[u] == net.adj[u].len() {
                self.relabel(net, u);
                self.current[u] = 0;
                if self.check_steps {
                    self.check_invariants(net)?;
                }
                if self.label[u] >= n {
                    break;
                }
                continue;
            }
            let a = net.adj[u][self.current[u]];
            let v = net.head[a];
            let residual = net.cap[a] - self.flow[a];
            self.work_scans += 1;
            if residual > FLOW_TOL && self.label[u] == self.label[v] + 1 {
                let delta = self.excess[u].min(residual);
                self.push(net, a, delta);
                if self.is_active(v, n) {
                    self.enqueue(v);
                }
                if net.cap[a] - self.flow[a] <= FLOW_TOL {
                    self.current[u] += 1;
                }
                if self.check_steps {
                    self.check_invariants(net)?;
                }
            } else {
                self.current[u] += 1;
            }
        }
        Ok(())
    }

    fn work_exceeded(&self, net: &FlowNetwork) -> bool {
        let m = net.arc_count().max(1) as u64;
        let n = net.node_count() as u64;
        self.work_relabels * m + self.work_scans > n * m
    }

    /// Verifies capacity, skew symmetry, excess bookkeeping, preflow and
    /// (when labels are current) label validity.
    pub fn check_invariants(&self, net: &FlowNetwork) -> Result<()> {
        self.ensure_matches(net)?;
        let n = net.node_count();
        let mut inflow = vec![0.0; n];
        let mut scale = 1.0f64;
        for a in 0..net.arc_count() {
            scale = scale.max(net.cap[a].abs());
            if self.flow[a] > net.cap[a] + FLOW_TOL * (1.0 + net.cap[a]) {
                return Err(Error::Contract(format!(
                    "arc {a}: flow {} exceeds capacity {}",
                    self.flow[a], net.cap[a]
                )));
            }
            if self.flow[a] != -self.flow[a ^ 1] {
                return Err(Error::Contract(format!("arc {a}: flow is not skew-symmetric")));
            }
            inflow[net.head[a]] += self.flow[a].max(0.0);
            inflow[net.tail(a)] -= self.flow[a].max(0.0);
        }
        for x in 2..n {
            if (inflow[x] - self.excess[x]).abs() > 1e-9 * scale {
                return Err(Error::Contract(format!(
                    "node {}: stored excess {} but net inflow {}",
                    net.base_ids[x - 2],
                    self.excess[x],
                    inflow[x]
                )));
            }
            if self.excess[x] < -FLOW_TOL * scale {
                return Err(Error::Contract(format!(
                    "node {}: negative excess {}",
                    net.base_ids[x - 2],
                    self.excess[x]
                )));
            }
        }
        if self.labels_valid {
            for a in 0..net.arc_count() {
                let (u, v) = (net.tail(a), net.head[a]);
                if net.cap[a] - self.flow[a] > FLOW_TOL && self.label[u] > self.label[v] + 1 {
                    return Err(Error::Contract(format!(
                        "residual arc {a} ({u}->{v}) violates label validity: {} > {} + 1",
                        self.label[u], self.label[v]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that the queue holds exactly the active nodes.
    pub fn check_queue(&self, net: &FlowNetwork) -> Result<()> {
        let n = net.node_count();
        for x in 2..n {
            if self.is_active(x, n) != self.queued[x] {
                return Err(Error::Contract(format!(
                    "node {} active={} but queued={}",
                    net.base_ids[x - 2],
                    self.is_active(x, n),
                    self.queued[x]
                )));
            }
        }
        Ok(())
    }
}

/// Resets labels to exact residual distances to the sink. Nodes that cannot
/// reach the sink, and the source, get label `n`. Rebuilds the queue.
pub fn global_relabel(net: &FlowNetwork, state: &mut FlowState) -> Result<()> {
    state.ensure_matches(net)?;
    let n = net.node_count();
    state.label.clear();
    state.label.resize(n, n);
    state.label[SINK] = 0;
    let mut bfs = VecDeque::with_capacity(n);
    bfs.push_back(SINK);
    while let Some(v) = bfs.pop_front() {
        let next = state.label[v] + 1;
        for &a in &net.adj[v] {
            let u = net.head[a];
            let back = a ^ 1;
            if u != SOURCE
                && state.label[u] == n
                && net.cap[back] - state.flow[back] > FLOW_TOL
            {
                state.label[u] = next;
                bfs.push_back(u);
            }
        }
    }
    state.label[SOURCE] = n;
    state.current.clear();
    state.current.resize(n, 0);
    state.queue.clear();
    state.queued.clear();
    state.queued.resize(n, false);
    for x in 2..n {
        if state.is_active(x, n) {
            state.enqueue(x);
        }
    }
    state.labels_valid = true;
    state.work_relabels = 0;
    state.work_scans = 0;
    state.global_relabels += 1;
    Ok(())
}

/// Runs push-relabel to a maximum preflow, warm-starting from `state`
/// unless it is fresh.
pub fn solve_min_cut(net: &FlowNetwork, state: &mut FlowState) -> Result<MinCutResult> {
    state.ensure_matches(net)?;
    let (p0, r0, g0) = state.counters();
    if state.phase == Phase::Fresh {
        state.label.fill(0);
        state.label[SOURCE] = net.node_count();
        state.saturate_source_arcs(net);
        state.phase = Phase::Dirty;
    }
    global_relabel(net, state)?;
    if state.check_steps {
        state.check_invariants(net)?;
        state.check_queue(net)?;
    }
    let n = net.node_count();
    while let Some(u) = state.queue.pop_front() {
        state.queued[u] = false;
        if !state.is_active(u, n) {
            continue;
        }
        state.discharge(net, u)?;
        if state.work_exceeded(net) {
            global_relabel(net, state)?;
        }
    }
    state.phase = Phase::Converged;
    let source_side = extract_source_side(net, state)?;
    let cut_value = net.cut_capacity(&source_side);
    let (p1, r1, g1) = state.counters();
    Ok(MinCutResult {
        source_side,
        cut_value,
        flow_value: state.excess[SINK],
        pushes: p1 - p0,
        relabels: r1 - r0,
        global_relabels: g1 - g0,
    })
}

/// Interior nodes with no residual path to the sink. Requires a converged
/// state.
pub fn extract_source_side(net: &FlowNetwork, state: &FlowState) -> Result<NodeSet> {
    state.ensure_matches(net)?;
    if state.phase != Phase::Converged {
        return Err(Error::Contract(
            "source side requested before the preflow converged".into(),
        ));
    }
    let n = net.node_count();
    let mut reaches = vec![false; n];
    reaches[SINK] = true;
    let mut bfs = VecDeque::new();
    bfs.push_back(SINK);
    while let Some(v) = bfs.pop_front() {
        for &a in &net.adj[v] {
            let u = net.head[a];
            let back = a ^ 1;
            if u != SOURCE && !reaches[u] && net.cap[back] - state.flow[back] > FLOW_TOL {
                reaches[u] = true;
                bfs.push_back(u);
            }
        }
    }
    Ok((2..n)
        .filter(|&x| !reaches[x])
        .map(|x| net.base_ids[x - 2])
        .collect())
}

/// Adds interior nodes `(id, sink capacity)` and undirected edges to a
/// network, extending `state` with zero flow on the new arcs. Source arcs
/// cannot be added, so the carried preflow stays valid.
pub fn insert(
    net: &mut FlowNetwork,
    state: &mut FlowState,
    new_interior: &[(usize, f64)],
    new_edges: &[(usize, usize, f64)],
) -> Result<()> {
    state.ensure_matches(net)?;
    net.validate_growth(new_interior, new_edges)?;
    let added_arcs = net.grow(new_interior, new_edges);
    let n = net.node_count();
    state.flow.extend(std::iter::repeat_n(0.0, added_arcs));
    state.excess.resize(n, 0.0);
    state.label.resize(n, 0);
    state.current.resize(n, 0);
    state.queued.resize(n, false);
    if state.phase == Phase::Fresh {
        state.label[SOURCE] = n;
    } else if !new_interior.is_empty() || !new_edges.is_empty() {
        state.phase = Phase::Dirty;
        state.labels_valid = false;
    }
    Ok(())
}
