//! Brute-force oracles and random instance generators shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use flowseed::objective::{alpha_objective, seed_penalized_conductance};
use flowseed::{Graph, NodeSet, SeedSpec};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Every subset of `0..n` as a node set, `n <= 16`.
pub fn subsets(n: usize) -> impl Iterator<Item = NodeSet> {
    assert!(n <= 16);
    (0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Smallest seed-penalized conductance over all subsets, with one argmin.
pub fn brute_pi_min(g: &Graph, spec: &SeedSpec) -> (f64, NodeSet) {
    let mut best = (f64::INFINITY, NodeSet::new());
    for s in subsets(g.node_count()) {
        let p = seed_penalized_conductance(g, spec, &s);
        if p < best.0 {
            best = (p, s);
        }
    }
    best
}

/// All subsets whose score is within `tol` of the minimum.
pub fn brute_argmins(g: &Graph, spec: &SeedSpec, tol: f64) -> Vec<NodeSet> {
    let (min, _) = brute_pi_min(g, spec);
    subsets(g.node_count())
        .filter(|s| (seed_penalized_conductance(g, spec, s) - min).abs() <= tol)
        .collect()
}

/// Smallest cut objective at `alpha` over subsets that keep every strict seed.
pub fn brute_objective_min(g: &Graph, spec: &SeedSpec, alpha: f64) -> f64 {
    subsets(g.node_count())
        .filter(|s| spec.strict().is_subset(s))
        .map(|s| alpha_objective(g, spec, alpha, &s))
        .fold(f64::INFINITY, f64::min)
}

pub fn conductance_or_inf(g: &Graph, s: &NodeSet) -> f64 {
    g.conductance(s).unwrap_or(f64::INFINITY)
}

/// Edge list of a G(n, p) graph with weights from `weights` (unit if empty).
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, p: f64, weights: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                let w = if weights.is_empty() { 1.0 } else { *weights.choose(rng).unwrap() };
                edges.push((u, v, w));
            }
        }
    }
    edges
}

/// One randomized clustering instance on at most ten nodes.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub graph: Graph,
    pub spec: SeedSpec,
    pub unweighted: bool,
}

/// Random graph on `4..=10` nodes with edge probability 0.4, a seed set of
/// 2 to 4 nodes with positive volume, random strict seeds, penalties from
/// `{0, 0.5, 1}` and epsilon from `{0.1, 0.5, 1}`.
pub fn small_instance<R: Rng>(rng: &mut R, weighted: bool) -> SmallInstance {
    loop {
        let n = rng.random_range(4..=10);
        let weights: &[f64] = if weighted { &[0.5, 1.0, 2.0, 3.0] } else { &[] };
        let graph = Graph::from_edges(n, random_edges(rng, n, 0.4, weights)).unwrap();
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        let k = rng.random_range(2..=4);
        let seeds: NodeSet = nodes[..k].iter().copied().collect();
        if graph.volume(&seeds).unwrap() <= 0.0 {
            continue;
        }
        let strict: NodeSet = seeds.iter().filter(|_| rng.random_bool(0.3)).collect();
        let penalties: BTreeMap<usize, f64> = seeds
            .iter()
            .map(|r| (r, *[0.0, 0.5, 1.0].choose(rng).unwrap()))
            .collect();
        let eps = *[0.1, 0.5, 1.0].choose(rng).unwrap();
        let spec = SeedSpec::new(&graph, seeds, strict, &penalties, eps).unwrap();
        return SmallInstance { graph, spec, unweighted: !weighted };
    }
}

/// s-t network description: interior `(id, sink cap)`, undirected edges and
/// source arcs.
#[derive(Debug, Clone, Default)]
pub struct NetSpec {
    pub interior: Vec<(usize, f64)>,
    pub edges: Vec<(usize, usize, f64)>,
    pub sources: Vec<(usize, f64)>,
}

impl NetSpec {
    pub fn build(&self) -> flowseed::flow::FlowNetwork {
        flowseed::flow::FlowNetwork::build(&self.interior, &self.edges, &self.sources).unwrap()
    }

    pub fn arc_count(&self) -> usize {
        2 * (self.edges.len() + self.sources.len() + self.interior.iter().filter(|x| x.1 > 0.0).count())
    }
}

/// Random network with `2..=max_nodes` interior nodes (ids spread out so
/// they are not dense indices) and at most `max_arcs` directed arcs.
pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, max_arcs: usize) -> NetSpec {
    let n = rng.random_range(2..=max_nodes);
    let id = |i: usize| 3 * i + 7;
    let cap = |rng: &mut R| rng.random_range(0.1..=10.0);
    let mut spec = NetSpec::default();
    let budget = max_arcs / 2;
    for i in 0..n {
        let c = if rng.random_bool(0.4) { cap(rng) } else { 0.0 };
        spec.interior.push((id(i), c));
    }
    let sinks = spec.interior.iter().filter(|x| x.1 > 0.0).count();
    let n_sources = rng.random_range(1..=n.min(10));
    for i in rand::seq::index::sample(rng, n, n_sources) {
        spec.sources.push((id(i), cap(rng)));
    }
    let room = budget.saturating_sub(sinks + n_sources);
    let m = rng.random_range(0..=room.min(n * (n - 1) / 2).min(4 * n));
    for _ in 0..m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            spec.edges.push((id(u), id(v), cap(rng)));
        }
    }
    spec
}

/// Max-flow value by shortest augmenting paths on a dense matrix.
pub fn edmonds_karp(spec: &NetSpec) -> f64 {
    let mut index = BTreeMap::new();
    for (i, &(v, _)) in spec.interior.iter().enumerate() {
        index.insert(v, i + 2);
    }
    let n = spec.interior.len() + 2;
    let mut cap = vec![vec![0.0f64; n]; n];
    for &(v, c) in &spec.interior {
        cap[index[&v]][1] += c;
    }
    for &(u, v, c) in &spec.edges {
        let (a, b) = (index[&u], index[&v]);
        cap[a][b] += c;
        cap[b][a] += c;
    }
    for &(v, c) in &spec.sources {
        cap[0][index[&v]] += c;
    }
    let mut total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 1e-12 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[1] == usize::MAX {
            return total;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = 1;
        while v != 0 {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = 1;
        while v != 0 {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        total += bottleneck;
    }
}

/// A random network split into an initial part and `batches` insertions.
/// Nodes appear before any edge that uses them; source arcs all touch the
/// initial part.
/// New interior nodes and new edges of one insertion.
pub type Batch = (Vec<(usize, f64)>, Vec<(usize, usize, f64)>);

pub struct Incremental {
    pub initial: NetSpec,
    pub batches: Vec<Batch>,
    pub full: NetSpec,
}

pub fn random_incremental<R: Rng>(rng: &mut R, max_nodes: usize, batches: usize) -> Incremental {
    let full = random_network(rng, max_nodes, 2000);
    let n = full.interior.len();
    let mut stage = vec![0usize; n];
    let source_ids: Vec<usize> = full.sources.iter().map(|s| s.0).collect();
    for (i, &(v, _)) in full.interior.iter().enumerate() {
        if !source_ids.contains(&v) {
            stage[i] = rng.random_range(0..=batches);
        }
    }
    let stage_of = |v: usize| stage[full.interior.iter().position(|x| x.0 == v).unwrap()];
    let mut initial = NetSpec { sources: full.sources.clone(), ..Default::default() };
    let mut steps: Vec<Batch> = vec![(Vec::new(), Vec::new()); batches];
    for (i, &node) in full.interior.iter().enumerate() {
        match stage[i] {
            0 => initial.interior.push(node),
            k => steps[k - 1].0.push(node),
        }
    }
    for &e in &full.edges {
        let earliest = stage_of(e.0).max(stage_of(e.1));
        let k = rng.random_range(earliest..=batches);
        match k {
            0 => initial.edges.push(e),
            k => steps[k - 1].1.push(e),
        }
    }
    Incremental { initial, batches: steps, full }
}
