//! Text formats: edge lists, seed files, node lists and result documents.
//!
//! External node ids are arbitrary non-negative integers. They are compacted
//! to `0..n` in ascending order, so internal order follows external order.
//! See `docs/FORMAT.md` for the exact layouts.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::driver::{AlphaUpdate, ClusterResult, IterationRecord, Mode};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::graph::{Graph, NodeSet};
use crate::objective::SeedSpec;

pub const RESULT_FORMAT: &str = "flowseed-result-v1";

/// Bijection between external ids and internal indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    external: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl IdMap {
    /// Builds the map from any collection of ids; duplicates are fine.
    pub fn from_ids(ids: impl IntoIterator<Item = u64>) -> IdMap {
        let mut external: Vec<u64> = ids.into_iter().collect();
        external.sort_unstable();
        external.dedup();
        let index = external.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        IdMap { external, index }
    }

    /// Identity map on `0..n`.
    pub fn identity(n: usize) -> IdMap {
        IdMap::from_ids(0..n as u64)
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn internal(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn external(&self, v: usize) -> u64 {
        self.external[v]
    }

    /// Maps external ids to a node set; unknown ids are an input error.
    pub fn to_internal_set(&self, ids: &[u64]) -> Result<NodeSet> {
        ids.iter()
            .map(|&id| {
                self.internal(id)
                    .ok_or_else(|| Error::invalid(format!("node {id} does not appear in the graph")))
            })
            .collect()
    }

    pub fn to_external(&self, s: &NodeSet) -> Vec<u64> {
        s.iter().map(|v| self.external[v]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Smallest valid id, 0 or 1.
    pub index_base: u64,
    /// Read the optional third column. When false every edge has weight 1.
    pub weighted: bool,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        EdgeListOptions {
            index_base: 0,
            weighted: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Splits a line into tokens, dropping `#` comments. `None` for blank lines.
fn tokens(line: &str) -> Option<Vec<&str>> {
    let body = line.split('#').next().unwrap_or("");
    let toks: Vec<&str> = body.split_whitespace().collect();
    (!toks.is_empty()).then_some(toks)
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_id(path: &Path, line: usize, tok: &str, base: u64) -> Result<u64> {
    let id: u64 = tok
        .parse()
        .map_err(|_| parse_error(path, line, format!("bad node id {tok:?}")))?;
    if id < base {
        return Err(parse_error(path, line, format!("node id {id} is below index base {base}")));
    }
    Ok(id)
}

/// Parses an edge list. `path` is only used in error messages.
pub fn parse_edge_list(text: &str, path: &Path, opts: EdgeListOptions) -> Result<LoadedGraph> {
    if opts.index_base > 1 {
        return Err(Error::invalid(format!("index base must be 0 or 1, got {}", opts.index_base)));
    }
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let Some(toks) = tokens(line) else { continue };
        if toks.len() < 2 || toks.len() > 3 {
            return Err(parse_error(path, lineno, "expected \"u v\" or \"u v w\""));
        }
        let u = parse_id(path, lineno, toks[0], opts.index_base)?;
        let v = parse_id(path, lineno, toks[1], opts.index_base)?;
        let w = match toks.get(2) {
            Some(t) if opts.weighted => {
                let w: f64 = t
                    .parse()
                    .map_err(|_| parse_error(path, lineno, format!("bad weight {t:?}")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(parse_error(path, lineno, format!("weight must be positive, got {w}")));
                }
                w
            }
            _ => 1.0,
        };
        raw.push((u, v, w));
    }
    let ids = IdMap::from_ids(raw.iter().flat_map(|&(u, v, _)| [u, v]));
    let graph = Graph::from_edges(
        ids.len(),
        raw.iter().map(|&(u, v, w)| (ids.index[&u], ids.index[&v], w)),
    )?;
    Ok(LoadedGraph { graph, ids })
}

pub fn load_graph(path: &Path, opts: EdgeListOptions) -> Result<LoadedGraph> {
    parse_edge_list(&read_text(path)?, path, opts)
}

/// Emits `u v w` lines with `u < v`, in ascending order. Reloading the output
/// reproduces the same graph and id map.
pub fn format_edge_list(g: &Graph, ids: &IdMap) -> String {
    let mut out = String::new();
    for (u, v, w) in g.edges() {
        out.push_str(&format!("{} {} {}\n", ids.external(u), ids.external(v), w));
    }
    out
}

pub fn write_edge_list(path: &Path, g: &Graph, ids: &IdMap) -> Result<()> {
    fs::write(path, format_edge_list(g, ids)).map_err(|e| Error::io(path, e))
}

/// One row of a seed file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRow {
    pub node: u64,
    pub strict: bool,
    /// `None` when the column is absent, so a command-line default can apply.
    pub penalty: Option<f64>,
}

/// Parses `node [strict] [penalty]` rows. Strict is `0` or `1`.
pub fn parse_seed_file(text: &str, path: &Path) -> Result<Vec<SeedRow>> {
    let mut rows = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let Some(toks) = tokens(line) else { continue };
        if toks.len() > 3 {
            return Err(parse_error(path, lineno, "expected \"node [strict] [penalty]\""));
        }
        let node = parse_id(path, lineno, toks[0], 0)?;
        let strict = match toks.get(1).copied() {
            None | Some("0") => false,
            Some("1") => true,
            Some(t) => return Err(parse_error(path, lineno, format!("strict flag must be 0 or 1, got {t:?}"))),
        };
        let penalty = match toks.get(2) {
            None => None,
            Some(t) => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| parse_error(path, lineno, format!("bad penalty {t:?}")))?;
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(parse_error(path, lineno, format!("penalty must be finite and >= 0, got {p}")));
                }
                Some(p)
            }
        };
        if let Some(first) = seen.insert(node, lineno) {
            return Err(parse_error(path, lineno, format!("node {node} already listed on line {first}")));
        }
        rows.push(SeedRow { node, strict, penalty });
    }
    Ok(rows)
}

pub fn load_seed_file(path: &Path) -> Result<Vec<SeedRow>> {
    parse_seed_file(&read_text(path)?, path)
}

/// How seed rows become a [`SeedSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedOptions {
    pub epsilon: f64,
    /// Soft penalty for non-strict seeds whose row has no penalty column.
    pub default_penalty: f64,
    pub strict_all: bool,
}

pub fn seed_spec_from_rows(g: &Graph, ids: &IdMap, rows: &[SeedRow], opts: SeedOptions) -> Result<SeedSpec> {
    if !(opts.default_penalty >= 0.0 && opts.default_penalty.is_finite()) {
        return Err(Error::invalid(format!(
            "default penalty must be finite and >= 0, got {}",
            opts.default_penalty
        )));
    }
    let mut seeds = Vec::with_capacity(rows.len());
    let mut strict = Vec::new();
    let mut penalties = BTreeMap::new();
    for row in rows {
        let v = ids
            .internal(row.node)
            .ok_or_else(|| Error::invalid(format!("seed {} does not appear in the graph", row.node)))?;
        seeds.push(v);
        if row.strict || opts.strict_all {
            strict.push(v);
        } else {
            penalties.insert(v, row.penalty.unwrap_or(opts.default_penalty));
        }
    }
    SeedSpec::new(
        g,
        seeds.into_iter().collect(),
        strict.into_iter().collect(),
        &penalties,
        opts.epsilon,
    )
}

/// Parses a plain list of node ids, one or more per line.
pub fn parse_node_list(text: &str, path: &Path) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(toks) = tokens(line) else { continue };
        for t in toks {
            out.push(parse_id(path, i + 1, t, 0)?);
        }
    }
    Ok(out)
}

pub fn load_node_list(path: &Path) -> Result<Vec<u64>> {
    parse_node_list(&read_text(path)?, path)
}

pub fn format_node_list(ids: &[u64]) -> String {
    ids.iter().map(|id| format!("{id}\n")).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Per-solve telemetry as written to the result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDoc {
    pub alpha: f64,
    pub candidate_size: usize,
    pub candidate_pi: Option<f64>,
    pub candidate_overlap: Option<f64>,
    pub candidate_conductance: Option<f64>,
    pub next_alpha: Option<f64>,
    pub accepted: bool,
    pub rounds: usize,
    pub explored_edges: usize,
    pub peak_local_volume: f64,
    pub edge_complete: usize,
    pub pushes: u64,
    pub relabels: u64,
    pub global_relabels: u64,
}

impl From<&IterationRecord> for IterationDoc {
    fn from(it: &IterationRecord) -> Self {
        IterationDoc {
            alpha: it.alpha,
            candidate_size: it.report.minimizer.len(),
            candidate_pi: finite(it.candidate_pi),
            candidate_overlap: finite(it.candidate_overlap),
            candidate_conductance: it.candidate_conductance,
            next_alpha: finite(it.next_alpha),
            accepted: it.accepted,
            rounds: it.report.rounds,
            explored_edges: it.report.explored_edges,
            peak_local_volume: it.report.peak_local_volume,
            edge_complete: it.report.edge_complete.len(),
            pushes: it.report.pushes,
            relabels: it.report.relabels,
            global_relabels: it.report.global_relabels,
        }
    }
}

/// The structured result file. Infinite values are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format: String,
    pub mode: Mode,
    pub alpha_update: AlphaUpdate,
    pub epsilon: Option<f64>,
    pub size: usize,
    pub volume: f64,
    pub cut: f64,
    pub conductance: Option<f64>,
    pub pi_score: Option<f64>,
    pub overlap: f64,
    pub alpha_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub iterations: Vec<IterationDoc>,
    pub members: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl ResultDocument {
    /// Wall time is left out unless `with_timing`, so that repeated runs
    /// produce identical files.
    pub fn new(
        result: &ClusterResult,
        ids: &IdMap,
        mode: Mode,
        alpha_update: AlphaUpdate,
        epsilon: f64,
        evaluation: Option<EvalReport>,
        with_timing: bool,
    ) -> Result<ResultDocument> {
        if result.best_set.is_empty() {
            return Err(Error::Contract("refusing to write an empty result set".into()));
        }
        Ok(ResultDocument {
            format: RESULT_FORMAT.to_string(),
            mode,
            alpha_update,
            epsilon: finite(epsilon),
            size: result.best_set.len(),
            volume: result.volume,
            cut: result.cut,
            conductance: result.conductance,
            pi_score: finite(result.pi_score),
            overlap: result.overlap,
            alpha_trace: result.alpha_trace.clone(),
            outer_iterations: result.outer_iterations,
            iterations: result.iterations.iter().map(IterationDoc::from).collect(),
            members: ids.to_external(&result.best_set),
            evaluation,
            wall_time_ms: with_timing.then_some(result.wall_time.as_secs_f64() * 1e3),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResultFormat {
    #[default]
    Json,
    /// Member ids only, one per line.
    Members,
}

pub fn write_result(path: &Path, doc: &ResultDocument, format: ResultFormat) -> Result<()> {
    let text = match format {
        ResultFormat::Json => doc.to_json(),
        ResultFormat::Members => format_node_list(&doc.members),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads the member ids back from either result format.
pub fn read_result_members(path: &Path) -> Result<Vec<u64>> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let doc: ResultDocument = serde_json::from_str(&text)
            .map_err(|e| parse_error(path, e.line(), e.to_string()))?;
        Ok(doc.members)
    } else {
        parse_node_list(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{cluster, SolveOptions};

    const B6: &str = "# barbell\n1 2\n1 3\n2 3\n3 4\n4 5\n4 6\n5 6\n";

    fn p() -> &'static Path {
        Path::new("test.txt")
    }

    fn one_based() -> EdgeListOptions {
        EdgeListOptions { index_base: 1, weighted: true }
    }

    #[test]
    fn loads_barbell() {
        let lg = parse_edge_list(B6, p(), one_based()).unwrap();
        assert_eq!(lg.graph.node_count(), 6);
        assert_eq!(lg.graph.total_volume(), 14.0);
        assert_eq!(lg.ids.internal(1), Some(0));
        assert_eq!(lg.ids.external(5), 6);
    }

    #[test]
    fn self_loops_and_duplicates() {
        let lg = parse_edge_list("1 1\n1 2\n2 1\n", p(), one_based()).unwrap();
        assert_eq!(lg.graph.dropped_self_loops(), 1);
        assert_eq!(lg.graph.edge_count(), 1);
        assert_eq!(lg.graph.degrees(), &[2.0, 2.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("1 2\n1\n", 2),
            ("1 2\n\n2 x\n", 3),
            ("1 2 0\n", 1),
            ("1 2 -3\n", 1),
            ("0 2\n", 1),
            ("1 2 3 4\n", 1),
        ] {
            match parse_edge_list(text, p(), one_based()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn unweighted_ignores_third_column() {
        let opts = EdgeListOptions { index_base: 0, weighted: false };
        let lg = parse_edge_list("0 1 123456\n", p(), opts).unwrap();
        assert_eq!(lg.graph.total_volume(), 2.0);
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "10 20 0.5\n20 30 2\n30 10 1.25\n# tail\n40 10\n";
        let a = parse_edge_list(text, p(), EdgeListOptions::default()).unwrap();
        let emitted = format_edge_list(&a.graph, &a.ids);
        let b = parse_edge_list(&emitted, p(), EdgeListOptions::default()).unwrap();
        assert_eq!(a.ids, b.ids);
        assert_eq!(a.graph.edges().collect::<Vec<_>>(), b.graph.edges().collect::<Vec<_>>());
        assert_eq!(emitted, format_edge_list(&b.graph, &b.ids));
    }

    #[test]
    fn seed_rows() {
        let rows = parse_seed_file("1 1\n2\n3 0 2.5 # soft\n", p()).unwrap();
        assert_eq!(
            rows,
            vec![
                SeedRow { node: 1, strict: true, penalty: None },
                SeedRow { node: 2, strict: false, penalty: None },
                SeedRow { node: 3, strict: false, penalty: Some(2.5) },
            ]
        );
        assert!(parse_seed_file("1\n1 1\n", p()).is_err());
        assert!(parse_seed_file("1 2\n", p()).is_err());
        assert!(parse_seed_file("1 0 -1\n", p()).is_err());
    }

    #[test]
    fn seed_spec_applies_defaults_and_overrides() {
        let lg = parse_edge_list(B6, p(), one_based()).unwrap();
        let rows = parse_seed_file("1 1\n2\n3 0 2.5\n", p()).unwrap();
        let opts = SeedOptions { epsilon: 1.0, default_penalty: 1.0, strict_all: false };
        let sp = seed_spec_from_rows(&lg.graph, &lg.ids, &rows, opts).unwrap();
        assert_eq!(sp.strict().as_slice(), &[0]);
        assert_eq!(sp.penalty(1), 1.0);
        assert_eq!(sp.penalty(2), 2.5);

        let all = SeedOptions { strict_all: true, ..opts };
        let sp = seed_spec_from_rows(&lg.graph, &lg.ids, &rows, all).unwrap();
        assert_eq!(sp.strict(), sp.seeds());

        let unknown = parse_seed_file("99\n", p()).unwrap();
        assert!(matches!(
            seed_spec_from_rows(&lg.graph, &lg.ids, &unknown, opts),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn result_document_round_trip() {
        let lg = parse_edge_list(B6, p(), one_based()).unwrap();
        let rows = parse_seed_file("1 1\n2 1\n3 1\n", p()).unwrap();
        let opts = SeedOptions { epsilon: 1.0, default_penalty: 0.0, strict_all: false };
        let sp = seed_spec_from_rows(&lg.graph, &lg.ids, &rows, opts).unwrap();
        let res = cluster(&lg.graph, &sp, &SolveOptions::default()).unwrap();
        let doc = ResultDocument::new(&res, &lg.ids, Mode::FlowSeed, AlphaUpdate::Pi, 1.0, None, false).unwrap();
        assert_eq!(doc.size, 3);
        assert!((doc.conductance.unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(doc.members, vec![1, 2, 3]);
        assert!(doc.wall_time_ms.is_none());

        let dir = tempfile::tempdir().unwrap();
        for (name, fmt) in [("r.json", ResultFormat::Json), ("r.txt", ResultFormat::Members)] {
            let path = dir.path().join(name);
            write_result(&path, &doc, fmt).unwrap();
            assert_eq!(read_result_members(&path).unwrap(), vec![1, 2, 3]);
        }
        let parsed: ResultDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(parsed, doc);
    }

    #[test]
    fn empty_result_is_rejected() {
        let g = Graph::from_unweighted(2, [(0, 1)]).unwrap();
        let sp = SeedSpec::plain(&g, [0].into_iter().collect(), 1.0).unwrap();
        let mut res = cluster(&g, &sp, &SolveOptions::default()).unwrap();
        res.best_set = NodeSet::new();
        let ids = IdMap::identity(2);
        assert!(ResultDocument::new(&res, &ids, Mode::FlowSeed, AlphaUpdate::Pi, 1.0, None, false).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_graph(Path::new("/nonexistent/graph.txt"), EdgeListOptions::default()),
            Err(Error::Io { .. })
        ));
    }
}
