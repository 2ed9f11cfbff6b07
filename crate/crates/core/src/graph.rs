//! Weighted undirected graph in compressed sparse row form, plus the
//! set functionals (volume, cut, conductance) the rest of the crate uses.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing derived real quantities.
pub const EPS: f64 = 1e-10;

/// A set of node ids, kept sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodeSet {
    ids: Vec<usize>,
}

impl NodeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sorted_unchecked(ids: Vec<usize>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        NodeSet { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ids
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.ids
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.ids.len() <= other.ids.len() && self.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            ids: self.iter().filter(|&v| other.contains(v)).collect(),
        }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            ids: self.iter().filter(|&v| !other.contains(v)).collect(),
        }
    }

    /// Largest id plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.ids.last().map_or(0, |&v| v + 1)
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut ids: Vec<usize> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        NodeSet { ids }
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.ids.iter().copied()
    }
}

/// Immutable weighted undirected graph.
///
/// Adjacency rows are sorted by neighbor id. Every edge `{u, v}` appears in
/// both rows with the same weight; self-loops are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    total_volume: f64,
    dropped_self_loops: usize,
    merged_duplicates: usize,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Parallel edges are merged by
    /// summing weights and self-loops are dropped (and counted).
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut dropped_self_loops = 0;
        let mut merged_duplicates = 0;
        for (u, v, w) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            if u == v {
                dropped_self_loops += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            match merged.get_mut(&key) {
                Some(acc) => {
                    *acc += w;
                    merged_duplicates += 1;
                }
                None => {
                    merged.insert(key, w);
                }
            }
        }
        if dropped_self_loops > 0 {
            log::warn!("dropped {dropped_self_loops} self-loop(s)");
        }

        let mut counts = vec![0usize; node_count + 1];
        for &(u, v) in merged.keys() {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..node_count {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut targets = vec![0usize; offsets[node_count]];
        let mut weights = vec![0.0; offsets[node_count]];
        // Keys are ordered by (min, max): writing every row's lower
        // neighbors first and its upper neighbors second keeps rows sorted.
        for (&(u, v), &w) in &merged {
            targets[cursor[v]] = u;
            weights[cursor[v]] = w;
            cursor[v] += 1;
        }
        for (&(u, v), &w) in &merged {
            targets[cursor[u]] = v;
            weights[cursor[u]] = w;
            cursor[u] += 1;
        }

        let degrees: Vec<f64> = (0..node_count)
            .map(|v| weights[offsets[v]..offsets[v + 1]].iter().sum())
            .collect();
        let total_volume = degrees.iter().sum();
        Ok(Graph {
            offsets,
            targets,
            weights,
            degrees,
            total_volume,
            dropped_self_loops,
            merged_duplicates,
        })
    }

    /// Unit-weight convenience constructor.
    pub fn from_unweighted<I>(node_count: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(node_count, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn dropped_self_loops(&self) -> usize {
        self.dropped_self_loops
    }

    pub fn merged_duplicates(&self) -> usize {
        self.merged_duplicates
    }

    /// All weighted degrees, indexed by node id.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Neighbors of `v` with edge weights, in ascending neighbor order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn neighbor_count(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "node {v} out of range for {} nodes",
                self.node_count()
            )))
        }
    }

    pub fn check_set(&self, s: &NodeSet) -> Result<()> {
        match s.as_slice().last() {
            Some(&v) => self.check_node(v),
            None => Ok(()),
        }
    }

    pub fn degree(&self, v: usize) -> Result<f64> {
        self.check_node(v)?;
        Ok(self.degrees[v])
    }

    pub fn volume(&self, s: &NodeSet) -> Result<f64> {
        self.check_set(s)?;
        Ok(self.volume_of(s))
    }

    pub fn cut(&self, s: &NodeSet) -> Result<f64> {
        self.check_set(s)?;
        Ok(self.cut_of(s))
    }

    /// `cut(S) / min(vol(S), vol(V \ S))`.
    pub fn conductance(&self, s: &NodeSet) -> Result<f64> {
        self.check_set(s)?;
        if s.is_empty() {
            return Err(Error::ConductanceUndefined("empty set"));
        }
        if s.len() == self.node_count() {
            return Err(Error::ConductanceUndefined("set contains every node"));
        }
        let vol = self.volume_of(s);
        let denom = vol.min(self.total_volume - vol);
        if denom <= 0.0 {
            return Err(Error::ConductanceUndefined("zero volume on one side"));
        }
        Ok(self.cut_of(s) / denom)
    }

    pub(crate) fn volume_of(&self, s: &NodeSet) -> f64 {
        s.iter().map(|v| self.degrees[v]).sum()
    }

    /// Total weight of edges with exactly one endpoint in `s`.
    pub(crate) fn cut_of(&self, s: &NodeSet) -> f64 {
        s.iter()
            .flat_map(|u| self.neighbors(u))
            .filter(|&(v, _)| !s.contains(v))
            .map(|(_, w)| w)
            .sum()
    }

    /// Total weight of edges with both endpoints in `s`.
    pub fn internal_weight(&self, s: &NodeSet) -> f64 {
        s.iter()
            .flat_map(|u| self.neighbors(u).map(move |e| (u, e)))
            .filter(|&(u, (v, _))| u < v && s.contains(v))
            .map(|(_, (_, w))| w)
            .sum()
    }

    /// Nodes of `s` together with all their neighbors.
    pub fn closed_neighborhood(&self, s: &NodeSet) -> NodeSet {
        s.iter()
            .chain(s.iter().flat_map(|u| self.neighbors(u).map(|(v, _)| v)))
            .collect()
    }

    /// The same graph with every edge weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Graph> {
        Graph::from_edges(
            self.node_count(),
            self.edges().map(|(u, v, w)| (u, v, w * k)).collect::<Vec<_>>(),
        )
    }
}
