//! Outer descent on `alpha`: repeatedly solve the local min-cut problem and
//! lower `alpha` to the score of the set found, until nothing better exists.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::local::{local_min_cut, LocalSolveReport};
use crate::objective::{overlap_score, seed_penalized_conductance, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Strict seeds and soft penalties as given.
    #[default]
    FlowSeed,
    /// Penalties and strict seeds are dropped: plain local conductance.
    SimpleLocal,
    /// Unbounded epsilon: best subset of the seed set.
    Mqi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaUpdate {
    /// `α ← π_R(S)`.
    #[default]
    Pi,
    /// `α ← φ(S)`, standard conductance.
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub alpha_update: AlphaUpdate,
    pub max_outer_iterations: Option<usize>,
    /// Stop once the new alpha is not below `alpha * (1 - relative_tolerance)`.
    pub relative_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: Mode::FlowSeed,
            alpha_update: AlphaUpdate::Pi,
            max_outer_iterations: None,
            relative_tolerance: 1e-10,
        }
    }
}

/// One min-cut solve of the descent.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub alpha: f64,
    pub candidate_pi: f64,
    pub candidate_overlap: f64,
    pub candidate_conductance: Option<f64>,
    /// The value the update rule proposes as the next alpha.
    pub next_alpha: f64,
    pub accepted: bool,
    pub report: LocalSolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub best_set: NodeSet,
    pub pi_score: f64,
    /// `None` when conductance is undefined (for instance the whole graph).
    pub conductance: Option<f64>,
    pub overlap: f64,
    pub volume: f64,
    pub cut: f64,
    pub alpha_trace: Vec<f64>,
    /// Number of min-cut solves.
    pub outer_iterations: usize,
    pub iterations: Vec<IterationRecord>,
    pub wall_time: Duration,
}

/// Seed spec after applying the mode's parameterization.
pub fn effective_spec(spec: &SeedSpec, mode: Mode) -> Result<SeedSpec> {
    match mode {
        Mode::FlowSeed => Ok(spec.clone()),
        Mode::SimpleLocal => Ok(spec.without_penalties()),
        Mode::Mqi => spec.with_epsilon(f64::INFINITY),
    }
}

/// Result of a single alpha step.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    pub set: NodeSet,
    pub new_alpha: f64,
    pub report: LocalSolveReport,
}

fn score(g: &Graph, spec: &SeedSpec, s: &NodeSet, update: AlphaUpdate) -> f64 {
    match update {
        AlphaUpdate::Pi => seed_penalized_conductance(g, spec, s),
        AlphaUpdate::Phi => g.conductance(s).unwrap_or(f64::INFINITY),
    }
}

/// Minimizes the cut objective at `alpha` and scores the minimizer.
pub fn alpha_search_step(
    g: &Graph,
    spec: &SeedSpec,
    alpha: f64,
    update: AlphaUpdate,
) -> Result<SearchStep> {
    let report = local_min_cut(g, spec, alpha)?;
    let set = report.minimizer.clone();
    let new_alpha = score(g, spec, &set, update);
    Ok(SearchStep {
        set,
        new_alpha,
        report,
    })
}

/// Grows the seed set into the set of smallest seed-penalized conductance
/// reachable by the descent.
pub fn cluster(g: &Graph, spec: &SeedSpec, opts: &SolveOptions) -> Result<ClusterResult> {
    let started = Instant::now();
    let spec = effective_spec(spec, opts.mode)?;
    let seeds = spec.seeds();
    if seeds.is_empty() {
        return Err(Error::invalid("seed set is empty"));
    }
    let seed_volume = g.volume_of(seeds);
    if seed_volume <= 0.0 {
        return Err(Error::invalid("seed set has zero volume"));
    }
    let seed_overlap = overlap_score(g, &spec, seeds);
    if seed_overlap <= 0.0 {
        return Err(Error::Infeasible(format!(
            "overlap of the seed set with itself is {seed_overlap}"
        )));
    }

    let shrink = 1.0 - opts.relative_tolerance;
    let mut candidate = seeds.clone();
    let mut next = g.cut_of(seeds) / seed_volume;
    let mut alpha = f64::INFINITY;
    let mut best = candidate.clone();
    let mut alpha_trace = Vec::new();
    let mut iterations: Vec<IterationRecord> = Vec::new();

    while next < alpha * shrink {
        best = candidate;
        alpha = next;
        alpha_trace.push(alpha);
        if let Some(last) = iterations.last_mut() {
            last.accepted = true;
        }
        if alpha <= 0.0 {
            break;
        }
        if opts.max_outer_iterations.is_some_and(|cap| iterations.len() >= cap) {
            break;
        }
        let step = alpha_search_step(g, &spec, alpha, opts.alpha_update)?;
        iterations.push(IterationRecord {
            alpha,
            candidate_pi: seed_penalized_conductance(g, &spec, &step.set),
            candidate_overlap: overlap_score(g, &spec, &step.set),
            candidate_conductance: g.conductance(&step.set).ok(),
            next_alpha: step.new_alpha,
            accepted: false,
            report: step.report,
        });
        candidate = step.set;
        next = step.new_alpha;
    }

    if !spec.strict().is_subset(&best) {
        return Err(Error::Contract("result dropped a strict seed".into()));
    }
    Ok(ClusterResult {
        pi_score: seed_penalized_conductance(g, &spec, &best),
        conductance: g.conductance(&best).ok(),
        overlap: overlap_score(g, &spec, &best),
        volume: g.volume_of(&best),
        cut: g.cut_of(&best),
        outer_iterations: iterations.len(),
        best_set: best,
        alpha_trace,
        iterations,
        wall_time: started.elapsed(),
    })
}

/// Runs independent seed specs on up to `jobs` threads, preserving order.
pub fn cluster_batch(
    g: &Graph,
    specs: &[SeedSpec],
    opts: &SolveOptions,
    jobs: usize,
) -> Vec<Result<ClusterResult>> {
    let jobs = jobs.max(1).min(specs.len().max(1));
    if jobs == 1 {
        return specs.iter().map(|s| cluster(g, s, opts)).collect();
    }
    let chunk = specs.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|s| cluster(g, s, opts)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("clustering worker panicked"))
            .collect()
    })
}
