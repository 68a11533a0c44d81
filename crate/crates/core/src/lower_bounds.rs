//! Packing lower-bound instances and their empirical verification.
//!
//! From a set of pairwise-distant spanning trees S, scaling each tree's
//! indicator vector by alpha gives a family of weight vectors whose "light"
//! output sets (trees within additive x of the optimum) are pairwise
//! disjoint. Any private mechanism must then fail to land in its light set
//! on at least one of the weight vectors, which lower-bounds its error.

use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counting::{diameter_exact, enumerate_spanning_trees};
use crate::error::{Error, Result};
use crate::graph::{
    diameter_2approx, indicator_weights, mst, tree_weight, validate_weights, Graph,
    NeighborRelation, SpanningTree, WeightVector,
};
use crate::mechanisms::{
    derive_seed, exp_mech_log_factors, laplace_mechanism, Mechanism, MechanismConfig,
    TreeSampler,
};
use crate::tree_space::{dissimilar_set, DissimilarSet};

/// Whether a diameter value is exact or only the 2-approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiameterEstimate {
    Exact(usize),
    TwoApprox(usize),
}

impl DiameterEstimate {
    pub fn value(&self) -> usize {
        match *self {
            DiameterEstimate::Exact(d) | DiameterEstimate::TwoApprox(d) => d,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DiameterEstimate::Exact(_))
    }
}

impl std::fmt::Display for DiameterEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiameterEstimate::Exact(d) => write!(f, "{d} (exact)"),
            DiameterEstimate::TwoApprox(d) => write!(f, "{d} (2-approx)"),
        }
    }
}

/// Exact diameter when the tree set is enumerable, otherwise the
/// eccentricity of the zero-weight MST.
pub fn diameter_estimate(graph: &Graph) -> Result<DiameterEstimate> {
    match diameter_exact(graph) {
        Ok(d) => Ok(DiameterEstimate::Exact(d)),
        Err(Error::GuardExceeded(_)) => {
            let t0 = mst(graph, &WeightVector::zeros(graph.edge_count()));
            Ok(DiameterEstimate::TwoApprox(diameter_2approx(graph, &t0)))
        }
        Err(e) => Err(e),
    }
}

/// A family of scaled indicator weights with certified packing parameters.
#[derive(Clone, Debug)]
pub struct PackingInstance {
    /// The distant trees the weights were derived from.
    pub trees: Vec<SpanningTree>,
    /// alpha times the indicator vector of each tree, aligned with `trees`.
    pub weights: Vec<WeightVector>,
    /// Indicator scale.
    pub alpha: f64,
    /// Light-set slack: alpha * separation / 2.
    pub x: f64,
    /// Strict pairwise distance lower bound of the tree set.
    pub separation: f64,
    pub relation: NeighborRelation,
    pub epsilon: f64,
    /// Radius certificate: every instance weight is within this
    /// neighbor-metric distance of every other.
    pub radius: u64,
    pub diameter: DiameterEstimate,
}

/// Builds the weight family {alpha * indicator(T)} for a dissimilar set.
///
/// The scale alpha balances the light-set slack against the privacy cost of
/// moving between instance weights; it is positive only when the set is
/// large enough for the given epsilon, and the construction is rejected as
/// vacuous otherwise.
pub fn build_packing_instance(
    graph: &Graph,
    set: &DissimilarSet,
    epsilon: f64,
    relation: NeighborRelation,
) -> Result<PackingInstance> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::validation("epsilon must be positive and finite"));
    }
    if set.trees.len() < 2 {
        return Err(Error::validation(
            "packing needs at least two trees in the dissimilar set",
        ));
    }
    let diameter = diameter_estimate(graph)?;
    let d_big = diameter.value() as f64;
    let size_log = (set.trees.len() as f64).ln();
    let alpha = match relation {
        NeighborRelation::L1 => size_log / (4.0 * epsilon * d_big) - 1.0 / (2.0 * d_big),
        NeighborRelation::Linf => size_log / (2.0 * epsilon) - 1.0,
    };
    if alpha <= 0.0 {
        return Err(Error::validation(format!(
            "vacuous instance: alpha = {alpha:.6} <= 0 (set of {} trees is too small for epsilon {epsilon})",
            set.trees.len()
        )));
    }
    let weights: Vec<WeightVector> = set
        .trees
        .iter()
        .map(|t| indicator_weights(graph, t).scale(alpha))
        .collect::<Result<_>>()?;
    let x = alpha * set.separation / 2.0;
    let radius = match relation {
        NeighborRelation::L1 => (2.0 * alpha * d_big).ceil() as u64,
        NeighborRelation::Linf => alpha.ceil() as u64,
    };
    Ok(PackingInstance {
        trees: set.trees.clone(),
        weights,
        alpha,
        x,
        separation: set.separation,
        relation,
        epsilon,
        radius,
        diameter,
    })
}

/// All spanning trees within additive slack `x` of the minimum weight.
pub fn light_set(graph: &Graph, weights: &WeightVector, x: f64) -> Result<Vec<SpanningTree>> {
    validate_weights(graph, weights)?;
    let trees = enumerate_spanning_trees(graph)?;
    let best = trees
        .iter()
        .map(|t| tree_weight(weights, t))
        .fold(f64::INFINITY, f64::min);
    Ok(trees
        .into_iter()
        .filter(|t| tree_weight(weights, t) <= best + x)
        .collect())
}

/// A tree claimed by two different instance weights.
#[derive(Clone, Debug)]
pub struct DisjointnessWitness {
    pub tree: SpanningTree,
    pub first_weight: usize,
    pub second_weight: usize,
}

#[derive(Clone, Debug)]
pub struct DisjointnessReport {
    pub disjoint: bool,
    pub witness: Option<DisjointnessWitness>,
}

/// Checks that the light sets of all instance weights are pairwise disjoint.
pub fn verify_disjointness(graph: &Graph, instance: &PackingInstance) -> Result<DisjointnessReport> {
    let mut owner: HashMap<SpanningTree, usize> = HashMap::new();
    for (i, w) in instance.weights.iter().enumerate() {
        for t in light_set(graph, w, instance.x)? {
            if let Some(&j) = owner.get(&t) {
                return Ok(DisjointnessReport {
                    disjoint: false,
                    witness: Some(DisjointnessWitness {
                        tree: t,
                        first_weight: j,
                        second_weight: i,
                    }),
                });
            }
            owner.insert(t, i);
        }
    }
    Ok(DisjointnessReport {
        disjoint: true,
        witness: None,
    })
}

/// The concrete lower-bound level for a graph: the error x below which any
/// private mechanism succeeds with probability at most |S|^(-1/2).
#[derive(Clone, Debug)]
pub struct LowerBoundReport {
    pub value: f64,
    pub set_size: usize,
    pub separation: f64,
    pub diameter: DiameterEstimate,
    /// Non-positive values carry no information at this scale; they are
    /// reported rather than suppressed.
    pub vacuous: bool,
}

pub fn lower_bound_value(
    graph: &Graph,
    epsilon: f64,
    relation: NeighborRelation,
) -> Result<LowerBoundReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::validation("epsilon must be positive and finite"));
    }
    let set = dissimilar_set(graph)?;
    let diameter = diameter_estimate(graph)?;
    let size_log = (set.trees.len() as f64).ln();
    let d = set.separation;
    let value = match relation {
        NeighborRelation::L1 => {
            d / diameter.value() as f64 * (size_log / (8.0 * epsilon) - 0.25)
        }
        NeighborRelation::Linf => d * (size_log / (4.0 * epsilon) - 0.5),
    };
    Ok(LowerBoundReport {
        value,
        set_size: set.trees.len(),
        separation: d,
        diameter,
        vacuous: value <= 0.0 || value.is_nan() || set.trees.len() < 2,
    })
}

/// Empirical success fractions of a mechanism against a packing instance.
#[derive(Clone, Debug)]
pub struct StressReport {
    /// Fraction of runs with error <= x, per instance weight.
    pub per_weight: Vec<f64>,
    pub min_fraction: Option<f64>,
    /// |S|^(-1/2): the packing argument caps the minimum success
    /// probability of any private mechanism at this level.
    pub cap: f64,
    pub trials: u64,
    pub x: f64,
}

/// Runs `mechanism` against every weight of the instance and reports how
/// often it lands inside the light set.
pub fn stress_mechanism(
    graph: &Graph,
    instance: &PackingInstance,
    mechanism: Mechanism,
    trials: u64,
    seed: u64,
) -> Result<StressReport> {
    let cap = 1.0 / (instance.weights.len() as f64).sqrt();
    if trials == 0 {
        return Ok(StressReport {
            per_weight: Vec::new(),
            min_fraction: None,
            cap,
            trials: 0,
            x: instance.x,
        });
    }
    let mut per_weight = Vec::with_capacity(instance.weights.len());
    for (wi, w) in instance.weights.iter().enumerate() {
        let base = tree_weight(w, &mst(graph, w));
        let mut successes = 0u64;
        match mechanism {
            Mechanism::Laplace => {
                for t in 0..trials {
                    let cfg = MechanismConfig::new(
                        instance.epsilon,
                        instance.relation,
                        derive_seed(seed, (wi as u64) * trials + t),
                    )?;
                    let released = laplace_mechanism(graph, w, &cfg)?;
                    if tree_weight(w, &released) - base <= instance.x {
                        successes += 1;
                    }
                }
            }
            Mechanism::Exponential => {
                let log_factors =
                    exp_mech_log_factors(graph, w, instance.epsilon, instance.relation);
                let mut sampler = TreeSampler::from_log_factors(graph, log_factors)?;
                for t in 0..trials {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(seed, (wi as u64) * trials + t));
                    let released = sampler.sample(&mut rng)?;
                    if tree_weight(w, &released) - base <= instance.x {
                        successes += 1;
                    }
                }
            }
        }
        per_weight.push(successes as f64 / trials as f64);
    }
    let min_fraction = per_weight.iter().copied().fold(None, |acc: Option<f64>, f| {
        Some(acc.map_or(f, |m| m.min(f)))
    });
    Ok(StressReport {
        per_weight,
        min_fraction,
        cap,
        trials,
        x: instance.x,
    })
}
