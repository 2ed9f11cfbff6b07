//! Seed-penalized conductance and the cut objective used to minimize it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};

/// Seed set with strict members, soft exclusion penalties and the locality
/// parameter. `epsilon = f64::INFINITY` restricts candidates to subsets of
/// the seed set.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSpec {
    seeds: NodeSet,
    strict: NodeSet,
    /// Soft penalty per seed, aligned with `seeds`; zero for strict seeds.
    penalties: Vec<f64>,
    epsilon: f64,
}

impl SeedSpec {
    /// Checks the seeds against `g`. Penalties on strict seeds are ignored.
    pub fn new(
        g: &Graph,
        seeds: NodeSet,
        strict: NodeSet,
        penalties: &BTreeMap<usize, f64>,
        epsilon: f64,
    ) -> Result<SeedSpec> {
        if seeds.is_empty() {
            return Err(Error::invalid("seed set is empty"));
        }
        g.check_set(&seeds)?;
        if !strict.is_subset(&seeds) {
            return Err(Error::invalid("strict seeds must be a subset of the seed set"));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        for (&v, &p) in penalties {
            if !seeds.contains(v) {
                return Err(Error::invalid(format!("penalty given for non-seed node {v}")));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("penalty for node {v} must be finite and >= 0")));
            }
        }
        let penalties = seeds
            .iter()
            .map(|v| {
                if strict.contains(v) {
                    0.0
                } else {
                    penalties.get(&v).copied().unwrap_or(0.0)
                }
            })
            .collect();
        Ok(SeedSpec {
            seeds,
            strict,
            penalties,
            epsilon,
        })
    }

    /// Seeds with no strict members and no penalties.
    pub fn plain(g: &Graph, seeds: NodeSet, epsilon: f64) -> Result<SeedSpec> {
        Self::new(g, seeds, NodeSet::new(), &BTreeMap::new(), epsilon)
    }

    pub fn seeds(&self) -> &NodeSet {
        &self.seeds
    }

    pub fn strict(&self) -> &NodeSet {
        &self.strict
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_unbounded(&self) -> bool {
        self.epsilon.is_infinite()
    }

    /// `(seed, soft penalty)` pairs in ascending seed order.
    pub fn penalties(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.seeds.iter().zip(self.penalties.iter().copied())
    }

    pub fn penalty(&self, v: usize) -> f64 {
        match self.seeds.as_slice().binary_search(&v) {
            Ok(i) => self.penalties[i],
            Err(_) => 0.0,
        }
    }

    /// Same seeds with a different locality parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<SeedSpec> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(SeedSpec {
            epsilon,
            ..self.clone()
        })
    }

    /// Drops strict seeds and soft penalties.
    pub fn without_penalties(&self) -> SeedSpec {
        SeedSpec {
            seeds: self.seeds.clone(),
            strict: NodeSet::new(),
            penalties: vec![0.0; self.seeds.len()],
            epsilon: self.epsilon,
        }
    }
}

/// `vol(R ∩ S) - ε vol(S \ R) - Σ_{r ∈ R \ S} p_r d_r`.
///
/// With unbounded ε, any `S` reaching outside `R` scores `-∞`.
pub fn overlap_score(g: &Graph, spec: &SeedSpec, s: &NodeSet) -> f64 {
    let d = g.degrees();
    let mut inside = 0.0;
    let mut outside = 0.0;
    let mut escaped = false;
    for v in s {
        if spec.seeds.contains(v) {
            inside += d[v];
        } else {
            escaped = true;
            outside += d[v];
        }
    }
    if spec.is_unbounded() && escaped {
        return f64::NEG_INFINITY;
    }
    let dropped: f64 = spec
        .penalties()
        .filter(|&(r, p)| p > 0.0 && !s.contains(r))
        .map(|(r, p)| p * d[r])
        .sum();
    let leak = if spec.is_unbounded() { 0.0 } else { spec.epsilon * outside };
    inside - leak - dropped
}

/// `cut(S) / O_R(S)` when the overlap is positive and every strict seed is
/// in `S`; `+∞` otherwise.
pub fn seed_penalized_conductance(g: &Graph, spec: &SeedSpec, s: &NodeSet) -> f64 {
    if !spec.strict.is_subset(s) {
        return f64::INFINITY;
    }
    let overlap = overlap_score(g, spec, s);
    if overlap > 0.0 {
        g.cut_of(s) / overlap
    } else {
        f64::INFINITY
    }
}

/// `cut(S) - α O_R(S) + α vol(R)`; equals the s-t cut of `S` in the cut
/// graph whenever `S` keeps every strict seed.
pub fn alpha_objective(g: &Graph, spec: &SeedSpec, alpha: f64, s: &NodeSet) -> f64 {
    g.cut_of(s) - alpha * overlap_score(g, spec, s) + alpha * g.volume_of(&spec.seeds)
}

/// Parameters of the cut-improvement guarantee: `gamma = vol(R) / vol(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub gamma: f64,
    pub epsilon: f64,
}

/// `1 / (γ + εγ - ε)`, the factor bounding `φ(S*) / φ(T)`.
pub fn improvement_constant(tp: TheoryParams) -> Result<f64> {
    if !(tp.gamma > 0.0 && tp.gamma <= 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1], got {}", tp.gamma)));
    }
    let denominator = tp.gamma + tp.epsilon * tp.gamma - tp.epsilon;
    if denominator <= 0.0 {
        return Err(Error::BoundUndefined { denominator });
    }
    Ok(1.0 / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn b6() -> Graph {
        Graph::from_unweighted(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    fn set(ids: &[usize]) -> NodeSet {
        ids.iter().copied().collect()
    }

    fn spec(g: &Graph, strict: &[usize], pen: &[(usize, f64)], eps: f64) -> SeedSpec {
        SeedSpec::new(g, set(&[0, 1, 2]), set(strict), &pen.iter().copied().collect(), eps).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let g = b6();
        let sp = spec(&g, &[], &[], 0.1);
        assert_abs_diff_eq!(overlap_score(&g, &sp, &set(&[0, 1, 2])), 7.0);
        assert_abs_diff_eq!(overlap_score(&g, &sp, &set(&[0, 1, 2, 3])), 6.7, epsilon = 1e-12);
        let sp = spec(&g, &[], &[(0, 1.0)], 0.1);
        assert_abs_diff_eq!(overlap_score(&g, &sp, &set(&[1, 2])), 3.0);
    }

    #[test]
    fn pi_examples() {
        let g = b6();
        let sp = spec(&g, &[0], &[], 0.5);
        assert_abs_diff_eq!(seed_penalized_conductance(&g, &sp, &set(&[0, 1, 2])), 1.0 / 7.0);
        assert_eq!(seed_penalized_conductance(&g, &sp, &set(&[1, 2])), f64::INFINITY);
        let sp = spec(&g, &[], &[], 10.0);
        assert_eq!(seed_penalized_conductance(&g, &sp, &(0..6).collect()), f64::INFINITY);
    }

    #[test]
    fn alpha_objective_examples() {
        let g = b6();
        let sp = spec(&g, &[], &[], 1.0);
        assert_abs_diff_eq!(alpha_objective(&g, &sp, 0.2, &NodeSet::new()), 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_objective(&g, &sp, 0.2, &set(&[0, 1, 2])), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_objective(&g, &sp, 0.2, &set(&[0, 1, 2, 3])), 2.6, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_epsilon_rejects_supersets() {
        let g = b6();
        let sp = spec(&g, &[], &[], f64::INFINITY);
        assert_eq!(overlap_score(&g, &sp, &set(&[0, 1, 2, 3])), f64::NEG_INFINITY);
        assert_abs_diff_eq!(overlap_score(&g, &sp, &set(&[0, 1])), 4.0);
        assert_eq!(seed_penalized_conductance(&g, &sp, &set(&[2, 3])), f64::INFINITY);
    }

    #[test]
    fn improvement_constant_examples() {
        let c = improvement_constant(TheoryParams { gamma: 0.5, epsilon: 0.5 }).unwrap();
        assert_abs_diff_eq!(c, 4.0, epsilon = 1e-12);
        let c = improvement_constant(TheoryParams { gamma: 1.0, epsilon: 3.0 }).unwrap();
        assert_abs_diff_eq!(c, 1.0);
        assert!(matches!(
            improvement_constant(TheoryParams { gamma: 0.5, epsilon: 1.0 }),
            Err(Error::BoundUndefined { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let g = b6();
        let pen = BTreeMap::new();
        assert!(SeedSpec::new(&g, NodeSet::new(), NodeSet::new(), &pen, 1.0).is_err());
        assert!(SeedSpec::new(&g, set(&[0]), set(&[1]), &pen, 1.0).is_err());
        assert!(SeedSpec::new(&g, set(&[0]), NodeSet::new(), &pen, 0.0).is_err());
        assert!(SeedSpec::new(&g, set(&[9]), NodeSet::new(), &pen, 1.0).is_err());
        let bad: BTreeMap<usize, f64> = [(3, 1.0)].into_iter().collect();
        assert!(SeedSpec::new(&g, set(&[0]), NodeSet::new(), &bad, 1.0).is_err());
        let neg: BTreeMap<usize, f64> = [(0, -1.0)].into_iter().collect();
        assert!(SeedSpec::new(&g, set(&[0]), NodeSet::new(), &neg, 1.0).is_err());
        // penalty on a strict seed is ignored
        let on_strict: BTreeMap<usize, f64> = [(0, 5.0)].into_iter().collect();
        let sp = SeedSpec::new(&g, set(&[0, 1]), set(&[0]), &on_strict, 1.0).unwrap();
        assert_eq!(sp.penalty(0), 0.0);
    }
}
