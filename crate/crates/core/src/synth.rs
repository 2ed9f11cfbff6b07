//! Planted-community graphs for benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};

const MAX_ATTEMPTS: usize = 32;

#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: Graph,
    /// Nodes of the first block.
    pub target: NodeSet,
    /// Block index of every node.
    pub block_of: Vec<usize>,
}

/// Calls `emit(u, v)` for each pair `u` x `v in range` independently with
/// probability `p`, skipping ahead geometrically between hits.
fn bernoulli_pairs<R, I, F>(rng: &mut R, p: f64, rows: I, mut emit: F)
where
    R: Rng,
    I: IntoIterator<Item = (usize, std::ops::Range<usize>)>,
    F: FnMut(usize, usize),
{
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for (u, range) in rows {
            range.for_each(|v| emit(u, v));
        }
        return;
    }
    let ln_q = (1.0 - p).ln();
    let draw = |rng: &mut R| {
        let x: f64 = rng.random();
        let skip = ((1.0 - x).ln() / ln_q).floor();
        if skip >= usize::MAX as f64 / 4.0 {
            usize::MAX / 4
        } else {
            skip as usize
        }
    };
    let mut skip = draw(rng);
    for (u, range) in rows {
        let mut pos = range.start;
        loop {
            let left = range.end - pos;
            if skip >= left {
                skip -= left;
                break;
            }
            pos += skip;
            emit(u, pos);
            pos += 1;
            skip = draw(rng);
        }
    }
}

fn sbm_edges<R: Rng>(rng: &mut R, blocks: &[usize], p_in: f64, p_out: f64) -> Vec<(usize, usize)> {
    let mut starts = Vec::with_capacity(blocks.len() + 1);
    let mut acc = 0;
    for &b in blocks {
        starts.push(acc);
        acc += b;
    }
    starts.push(acc);
    let mut edges = Vec::new();
    for a in 0..blocks.len() {
        let (lo, hi) = (starts[a], starts[a + 1]);
        bernoulli_pairs(rng, p_in, (lo..hi).map(|u| (u, u + 1..hi)), |u, v| edges.push((u, v)));
        if hi < acc {
            bernoulli_pairs(rng, p_out, (lo..hi).map(|u| (u, hi..acc)), |u, v| edges.push((u, v)));
        }
    }
    edges
}

fn is_connected(g: &Graph, s: &NodeSet) -> bool {
    let Some(start) = s.iter().next() else { return true };
    let mut seen = vec![false; g.node_count()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for (w, _) in g.neighbors(u) {
            if !seen[w] && s.contains(w) {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == s.len()
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Stochastic block model with unit weights. Block 0 is the target and is
/// resampled until its induced subgraph is connected.
pub fn generate_planted(blocks: &[usize], p_in: f64, p_out: f64, rng_seed: u64) -> Result<Planted> {
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(Error::invalid("blocks must be nonempty and of positive size"));
    }
    let n: usize = blocks.iter().sum();
    let block_of: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(i, &b)| std::iter::repeat_n(i, b))
        .collect();
    let target: NodeSet = (0..blocks[0]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for attempt in 0..MAX_ATTEMPTS {
        let edges = sbm_edges(&mut rng, blocks, p_in, p_out);
        let graph = Graph::from_unweighted(n, edges)?;
        if is_connected(&graph, &target) {
            return Ok(Planted { graph, target, block_of });
        }
        log::debug!("planted block disconnected on attempt {}", attempt + 1);
    }
    Err(Error::invalid(format!(
        "target block stayed disconnected after {MAX_ATTEMPTS} attempts"
    )))
}

/// A fixed cluster wired into a random host graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostParams {
    pub host_nodes: usize,
    /// Expected degree of a host node within the host.
    pub host_degree: f64,
    /// Edges from each cluster node to uniformly random host nodes.
    pub links_per_node: usize,
}

/// Places `cluster` on nodes `0..cluster.node_count()` and adds an
/// Erdős–Rényi host after it. The link endpoints inside the cluster do not
/// depend on the host size, only the host endpoints do.
pub fn embed_in_host(cluster: &Graph, params: HostParams, rng_seed: u64) -> Result<Planted> {
    let c = cluster.node_count();
    let h = params.host_nodes;
    if h < 2 {
        return Err(Error::invalid("host needs at least two nodes"));
    }
    let p = params.host_degree / (h - 1) as f64;
    check_probability("host edge probability", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges: Vec<(usize, usize, f64)> = cluster.edges().collect();
    bernoulli_pairs(&mut rng, p, (0..h).map(|u| (u, u + 1..h)), |u, v| {
        edges.push((c + u, c + v, 1.0))
    });
    let mut link_rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    for u in 0..c {
        for _ in 0..params.links_per_node {
            let x: f64 = link_rng.random();
            edges.push((u, c + (x * h as f64) as usize % h, 1.0));
        }
    }
    let graph = Graph::from_edges(c + h, edges)?;
    let block_of = (0..c + h).map(|v| usize::from(v >= c)).collect();
    Ok(Planted {
        graph,
        target: (0..c).collect(),
        block_of,
    })
}
