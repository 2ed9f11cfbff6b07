//! Recovery metrics and the seed sampling protocol used in experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::objective::{seed_penalized_conductance, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub set_size: usize,
    pub conductance: Option<f64>,
    pub pi_score: Option<f64>,
}

/// Precision, recall and F1 of `output` against `target`.
pub fn evaluate(output: &NodeSet, target: &NodeSet) -> Result<EvalReport> {
    if target.is_empty() {
        return Err(Error::invalid("target set is empty"));
    }
    let hit = output.intersection(target).len() as f64;
    let precision = if output.is_empty() { 0.0 } else { hit / output.len() as f64 };
    let recall = hit / target.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        precision,
        recall,
        f1,
        set_size: output.len(),
        conductance: None,
        pi_score: None,
    })
}

impl EvalReport {
    /// Fills in the graph-dependent scores of the evaluated set.
    pub fn with_scores(mut self, g: &Graph, spec: Option<&SeedSpec>, output: &NodeSet) -> EvalReport {
        self.conductance = g.conductance(output).ok();
        self.pi_score = spec
            .map(|sp| seed_penalized_conductance(g, sp, output))
            .filter(|p| p.is_finite());
        self
    }
}

/// Sampled starter nodes and the seed set grown from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSample {
    pub starters: NodeSet,
    pub seeds: NodeSet,
}

/// Samples `⌈fraction·|target|⌉` starters uniformly from `target` and grows
/// them by their one-hop neighborhood.
pub fn make_seed(g: &Graph, target: &NodeSet, fraction: f64, rng_seed: u64) -> Result<SeedSample> {
    if target.is_empty() {
        return Err(Error::invalid("target set is empty"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    g.check_set(target)?;
    // the small slack keeps 0.05 * 100 at 5 despite rounding
    let k = ((fraction * target.len() as f64 - 1e-9).ceil() as usize).clamp(1, target.len());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let picked = rand::seq::index::sample(&mut rng, target.len(), k);
    let starters: NodeSet = picked.iter().map(|i| target.as_slice()[i]).collect();
    let seeds = g.closed_neighborhood(&starters);
    Ok(SeedSample { starters, seeds })
}
