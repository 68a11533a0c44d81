//! The two private release mechanisms and the exact tree sampler behind the
//! exponential one.
//!
//! The Laplace mechanism perturbs every weight independently and returns the
//! MST of the noisy vector. The exponential mechanism samples a tree with
//! probability proportional to exp(-lambda * w(T)); it is realized exactly by
//! deciding each edge in ascending id order with its conditional inclusion
//! probability, a ratio of weighted spanning-tree sums, then contracting or
//! deleting the edge.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::graph::{
    diameter_2approx, mst, mst_from_slice, validate_weights, Graph, NeighborRelation,
    SpanningTree, WeightVector,
};
use crate::numeric::lu_log_det;

/// Privacy budget, neighbor relation, and randomness root for one release.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechanismConfig {
    pub epsilon: f64,
    pub relation: NeighborRelation,
    pub seed: u64,
}

impl MechanismConfig {
    pub fn new(epsilon: f64, relation: NeighborRelation, seed: u64) -> Result<Self> {
        let cfg = MechanismConfig {
            epsilon,
            relation,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::validation(format!(
                "epsilon must be finite and positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Which release mechanism to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Laplace,
    Exponential,
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mechanism::Laplace => write!(f, "laplace"),
            Mechanism::Exponential => write!(f, "expmech"),
        }
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(Mechanism::Laplace),
            "expmech" | "exponential" => Ok(Mechanism::Exponential),
            other => Err(Error::validation(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Derives an independent seed for a sub-stream (trial, weight draw, ...).
///
/// SplitMix64 finalizer over the root seed and the stream index; used so
/// trials are reproducible individually and independent of scheduling.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(31);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from the Laplace distribution with mean 0 and the given scale,
/// via inverse-CDF sampling: u uniform in (-1/2, 1/2], result
/// -scale * sign(u) * ln(1 - 2|u|).
pub fn sample_laplace<R: Rng>(scale: f64, rng: &mut R) -> f64 {
    debug_assert!(scale > 0.0);
    let u = 0.5 - rng.gen::<f64>();
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Noise scale calibrated to the neighbor relation: 1/eps for l1 (unit
/// sensitivity per vector) and m/eps for l-infinity (every edge may move
/// by 1 at once).
pub fn noise_scale(relation: NeighborRelation, epsilon: f64, edge_count: usize) -> f64 {
    match relation {
        NeighborRelation::L1 => 1.0 / epsilon,
        NeighborRelation::Linf => edge_count as f64 / epsilon,
    }
}

/// Laplace mechanism: noise every weight, release the MST of the noisy
/// vector. Fully determined by the inputs and the seed; edge noise is drawn
/// in ascending edge order.
pub fn laplace_mechanism(
    graph: &Graph,
    weights: &WeightVector,
    cfg: &MechanismConfig,
) -> Result<SpanningTree> {
    cfg.validate()?;
    validate_weights(graph, weights)?;
    let b = noise_scale(cfg.relation, cfg.epsilon, graph.edge_count());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noisy: Vec<f64> = weights
        .values()
        .iter()
        .map(|w| w + sample_laplace(b, &mut rng))
        .collect();
    Ok(mst_from_slice(graph, &noisy))
}

/// A connected multigraph with positive multiplicative edge factors, the
/// intermediate state of contraction/deletion sampling. Factors are kept in
/// log form; parallel edges are meaningful, self-loops are not allowed
/// (contraction drops them since they can join no spanning tree).
#[derive(Clone, Debug)]
pub struct MultiGraph {
    vertices: usize,
    edges: Vec<MultiEdge>,
}

#[derive(Clone, Copy, Debug)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    pub log_factor: f64,
    pub origin: usize,
}

impl MultiGraph {
    /// Builds a multigraph from `(u, v, factor, originating edge id)` records.
    pub fn new(vertices: usize, records: Vec<(usize, usize, f64, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::validation("multigraph needs at least one vertex"));
        }
        let mut edges = Vec::with_capacity(records.len());
        for (u, v, q, origin) in records {
            if u >= vertices || v >= vertices {
                return Err(Error::validation("multigraph edge endpoint out of range"));
            }
            if u == v {
                return Err(Error::validation("multigraph edge is a self-loop"));
            }
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::validation(format!(
                    "edge factor must be positive and finite, got {q}"
                )));
            }
            edges.push(MultiEdge {
                u,
                v,
                log_factor: q.ln(),
                origin,
            });
        }
        let mg = MultiGraph { vertices, edges };
        if !mg.is_connected() {
            return Err(Error::validation("multigraph is not connected"));
        }
        Ok(mg)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        let mut dsu = Dsu::new(self.vertices);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.components() == 1
    }

    /// Contracts the edge at `index`: its endpoints merge, other edges are
    /// relabeled, and parallel copies that become self-loops are dropped.
    pub fn contract(&self, index: usize) -> MultiGraph {
        let MultiEdge { u, v, .. } = self.edges[index];
        let (keep, drop) = (u.min(v), u.max(v));
        let relabel = |w: usize| -> usize {
            if w == drop {
                keep
            } else if w > drop {
                w - 1
            } else {
                w
            }
        };
        let mut edges = Vec::with_capacity(self.edges.len() - 1);
        for (i, e) in self.edges.iter().enumerate() {
            if i == index {
                continue;
            }
            let (nu, nv) = (relabel(e.u), relabel(e.v));
            if nu == nv {
                continue;
            }
            edges.push(MultiEdge {
                u: nu,
                v: nv,
                ..*e
            });
        }
        MultiGraph {
            vertices: self.vertices - 1,
            edges,
        }
    }

    /// Removes the edge at `index`. The result may be disconnected; the
    /// sampler never deletes such edges, and `tree_sum` reports them.
    pub fn delete(&self, index: usize) -> MultiGraph {
        let mut edges = self.edges.clone();
        edges.remove(index);
        MultiGraph {
            vertices: self.vertices,
            edges,
        }
    }

}

/// Log of the weighted spanning-tree sum: log sum over trees of the product
/// of edge factors.
///
/// Evaluates the log-determinant of the factor-weighted Laplacian with one
/// row and column removed, after rescaling by the largest factor so the
/// matrix entries stay in range. A singular reduced Laplacian means the
/// multigraph is disconnected, which callers treat as a construction bug.
pub fn tree_sum(mg: &MultiGraph) -> Result<f64> {
    let nv = mg.vertex_count();
    if nv == 1 {
        return Ok(0.0); // a single vertex has the empty tree, with product 1
    }
    // A disconnected multigraph has an exactly singular reduced Laplacian;
    // catch it combinatorially rather than trusting pivot roundoff on a
    // zero determinant.
    if !mg.is_connected() {
        return Err(Error::numerics(
            "reduced Laplacian is singular: multigraph is disconnected",
        ));
    }
    let shift = mg
        .edges()
        .iter()
        .map(|e| e.log_factor)
        .fold(f64::NEG_INFINITY, f64::max);
    let k = nv - 1;
    let mut lap = vec![0.0f64; k * k];
    for e in mg.edges() {
        let w = (e.log_factor - shift).exp();
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if a > 0 {
                lap[(a - 1) * k + (a - 1)] += w;
                if b > 0 {
                    lap[(a - 1) * k + (b - 1)] -= w;
                }
            }
        }
    }
    match lu_log_det(lap, k) {
        Some(log_det) => Ok(log_det + k as f64 * shift),
        None => Err(Error::numerics(
            "reduced Laplacian is singular: multigraph is disconnected",
        )),
    }
}

/// Tolerance beyond which an out-of-range inclusion probability is a bug
/// rather than roundoff.
const PROB_ABORT_TOL: f64 = 1e-6;

/// Exact weighted spanning-tree sampler.
///
/// Edges are decided in ascending id order; each decision consumes exactly
/// one uniform draw. The conditional inclusion probability of an edge is
/// q_e * treesum(M/e) / treesum(M) over the current contracted multigraph.
/// Decision probabilities depend only on the set of edges included so far,
/// so they are cached in a lazily grown decision tree, which makes repeated
/// sampling from the same distribution cheap.
pub struct TreeSampler {
    graph: Graph,
    log_factors: Vec<f64>,
    nodes: Vec<Node>,
    clamp_events: u64,
}

#[derive(Clone, Copy)]
struct Node {
    prob: f64,
    include: u32,
    exclude: u32,
}

const UNSET: u32 = u32::MAX;

impl Node {
    fn fresh() -> Self {
        Node {
            prob: f64::NAN,
            include: UNSET,
            exclude: UNSET,
        }
    }
}

impl TreeSampler {
    /// Sampler with multiplicative factors `q` (probability of a tree is
    /// proportional to the product of its factors).
    pub fn new(graph: &Graph, factors: &[f64]) -> Result<Self> {
        if factors.len() != graph.edge_count() {
            return Err(Error::validation("factor vector length mismatch"));
        }
        if let Some(i) = factors.iter().position(|q| !(q.is_finite() && *q > 0.0)) {
            return Err(Error::validation(format!(
                "factor {i} must be positive and finite"
            )));
        }
        Ok(Self::from_log_factors_unchecked(
            graph.clone(),
            factors.iter().map(|q| q.ln()).collect(),
        ))
    }

    /// Sampler with factors given in log form, avoiding an exp/ln round trip.
    pub fn from_log_factors(graph: &Graph, log_factors: Vec<f64>) -> Result<Self> {
        if log_factors.len() != graph.edge_count() {
            return Err(Error::validation("factor vector length mismatch"));
        }
        if log_factors.iter().any(|l| !l.is_finite()) {
            return Err(Error::validation("log factors must be finite"));
        }
        Ok(Self::from_log_factors_unchecked(graph.clone(), log_factors))
    }

    fn from_log_factors_unchecked(graph: Graph, log_factors: Vec<f64>) -> Self {
        TreeSampler {
            graph,
            log_factors,
            nodes: vec![Node::fresh()],
            clamp_events: 0,
        }
    }

    /// Number of times a computed probability fell outside [0, 1] by at most
    /// the abort tolerance and was clamped.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events
    }

    /// Draws one spanning tree. Consumes exactly one uniform per edge.
    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> Result<SpanningTree> {
        let m = self.graph.edge_count();
        let n = self.graph.vertex_count();
        let mut included: Vec<usize> = Vec::with_capacity(n - 1);
        let mut node = 0usize;
        for edge in 0..m {
            if self.nodes[node].prob.is_nan() {
                self.nodes[node].prob = self.decision_probability(edge, &included)?;
            }
            let p = self.nodes[node].prob;
            let take = rng.gen::<f64>() < p;
            if take {
                included.push(edge);
            }
            node = self.child(node, take);
        }
        if included.len() != n - 1 {
            return Err(Error::numerics(
                "sampler finished without a spanning tree; inclusion probabilities are off",
            ));
        }
        Ok(SpanningTree::from_sorted_unchecked(included))
    }

    fn child(&mut self, node: usize, take: bool) -> usize {
        let slot = if take {
            self.nodes[node].include
        } else {
            self.nodes[node].exclude
        };
        if slot != UNSET {
            return slot as usize;
        }
        let idx = self.nodes.len();
        assert!(idx < UNSET as usize, "decision tree exhausted its index space");
        self.nodes.push(Node::fresh());
        if take {
            self.nodes[node].include = idx as u32;
        } else {
            self.nodes[node].exclude = idx as u32;
        }
        idx
    }

    fn decision_probability(&mut self, edge: usize, included: &[usize]) -> Result<f64> {
        let n = self.graph.vertex_count();
        let m = self.graph.edge_count();
        let mut dsu = Dsu::new(n);
        for &e in included {
            let (u, v) = self.graph.endpoints(e);
            dsu.union(u, v);
        }
        let (u, v) = self.graph.endpoints(edge);
        if dsu.find(u) == dsu.find(v) {
            return Ok(0.0); // contracted self-loop: the edge would close a cycle
        }
        // A bridge of the remaining graph is in every completion.
        let mut probe = dsu.clone();
        for e in edge + 1..m {
            let (a, b) = self.graph.endpoints(e);
            probe.union(a, b);
        }
        if probe.components() > 1 {
            return Ok(1.0);
        }
        let raw = raw_inclusion_probability(&self.graph, &self.log_factors, &mut dsu, edge)?;
        self.clamp(raw)
    }

    fn clamp(&mut self, raw: f64) -> Result<f64> {
        if raw.is_nan() || !(-PROB_ABORT_TOL..=1.0 + PROB_ABORT_TOL).contains(&raw) {
            return Err(Error::numerics(format!(
                "inclusion probability {raw} is outside [0, 1] beyond tolerance"
            )));
        }
        if !(0.0..=1.0).contains(&raw) {
            self.clamp_events += 1;
            return Ok(raw.clamp(0.0, 1.0));
        }
        Ok(raw)
    }
}

/// Contracted multigraph for the state (edges before `edge` decided, the set
/// bits of `dsu` included) restricted to the undecided edges from `edge` on.
/// The decided edge sits at index 0.
fn state_multigraph(
    graph: &Graph,
    log_factors: &[f64],
    dsu: &mut Dsu,
    edge: usize,
) -> MultiGraph {
    let n = graph.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut next = 0usize;
    for w in 0..n {
        let root = dsu.find(w);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
    }
    let mut edges = Vec::with_capacity(graph.edge_count() - edge);
    for (offset, (&(u, v), &log_factor)) in graph.edges()[edge..]
        .iter()
        .zip(&log_factors[edge..])
        .enumerate()
    {
        let (nu, nv) = (label[dsu.find(u)], label[dsu.find(v)]);
        if nu == nv {
            continue;
        }
        edges.push(MultiEdge {
            u: nu,
            v: nv,
            log_factor,
            origin: edge + offset,
        });
    }
    MultiGraph {
        vertices: next,
        edges,
    }
}

fn raw_inclusion_probability(
    graph: &Graph,
    log_factors: &[f64],
    dsu: &mut Dsu,
    edge: usize,
) -> Result<f64> {
    let state = state_multigraph(graph, log_factors, dsu, edge);
    debug_assert_eq!(state.edges()[0].origin, edge);
    let full = tree_sum(&state)?;
    let contracted = tree_sum(&state.contract(0))?;
    Ok((log_factors[edge] + contracted - full).exp())
}

/// Conditional inclusion probability of `edge` given that exactly the edges
/// in `included` (all with smaller ids) were taken and the other smaller ids
/// were rejected. Returns the raw determinant ratio without clamping or
/// bridge shortcuts, so callers can check numeric identities on it.
pub fn inclusion_probability(
    graph: &Graph,
    factors: &[f64],
    included: &[usize],
    edge: usize,
) -> Result<f64> {
    if factors.len() != graph.edge_count() {
        return Err(Error::validation("factor vector length mismatch"));
    }
    if edge >= graph.edge_count() {
        return Err(Error::validation("edge id out of range"));
    }
    let log_factors: Vec<f64> = factors.iter().map(|q| q.ln()).collect();
    let mut dsu = Dsu::new(graph.vertex_count());
    for &e in included {
        if e >= edge {
            return Err(Error::validation(
                "included edges must have smaller ids than the decided edge",
            ));
        }
        let (u, v) = graph.endpoints(e);
        if !dsu.union(u, v) {
            return Err(Error::validation("included edges contain a cycle"));
        }
    }
    let (u, v) = graph.endpoints(edge);
    if dsu.find(u) == dsu.find(v) {
        return Ok(0.0);
    }
    raw_inclusion_probability(graph, &log_factors, &mut dsu, edge)
}

/// One-shot sampling: probability of a tree is proportional to the product
/// of its edge factors.
pub fn sample_spanning_tree<R: Rng>(
    graph: &Graph,
    factors: &[f64],
    rng: &mut R,
) -> Result<SpanningTree> {
    TreeSampler::new(graph, factors)?.sample(rng)
}

/// The exponent used by the exponential mechanism: eps/2 under l1 (the tree
/// weight has unit sensitivity), eps/(4 R0) under l-infinity, where R0 is the
/// eccentricity of the zero-weight MST and bounds the shifted-loss
/// sensitivity by 2 R0.
pub fn exp_mech_lambda(graph: &Graph, epsilon: f64, relation: NeighborRelation) -> f64 {
    match relation {
        NeighborRelation::L1 => epsilon / 2.0,
        NeighborRelation::Linf => {
            let t0 = mst(graph, &WeightVector::zeros(graph.edge_count()));
            let r0 = diameter_2approx(graph, &t0);
            epsilon / (4.0 * r0 as f64)
        }
    }
}

/// Log factors exp(-lambda (w_e - min w)) for the exponential mechanism.
///
/// Subtracting the minimum weight keeps every factor in (0, 1]. Every
/// spanning tree has the same number of edges, so the shift cancels in the
/// normalized distribution and only improves the floating-point range.
pub fn exp_mech_log_factors(
    graph: &Graph,
    weights: &WeightVector,
    epsilon: f64,
    relation: NeighborRelation,
) -> Vec<f64> {
    let lambda = exp_mech_lambda(graph, epsilon, relation);
    let w_min = weights.values().iter().copied().fold(f64::INFINITY, f64::min);
    weights
        .values()
        .iter()
        .map(|w| -lambda * (w - w_min))
        .collect()
}

/// Exponential mechanism: samples a tree with probability proportional to
/// exp(-lambda * w(T)). Fully determined by the inputs and the seed.
pub fn exponential_mechanism(
    graph: &Graph,
    weights: &WeightVector,
    cfg: &MechanismConfig,
) -> Result<SpanningTree> {
    cfg.validate()?;
    validate_weights(graph, weights)?;
    let log_factors = exp_mech_log_factors(graph, weights, cfg.epsilon, cfg.relation);
    let mut sampler = TreeSampler::from_log_factors(graph, log_factors)?;
    sampler.sample(&mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

/// Runs the selected mechanism.
pub fn release(
    graph: &Graph,
    weights: &WeightVector,
    mechanism: Mechanism,
    cfg: &MechanismConfig,
) -> Result<SpanningTree> {
    match mechanism {
        Mechanism::Laplace => laplace_mechanism(graph, weights, cfg),
        Mechanism::Exponential => exponential_mechanism(graph, weights, cfg),
    }
}

/// Normalized distribution over `trees` induced by per-edge log factors.
pub fn distribution_from_log_factors(trees: &[SpanningTree], log_factors: &[f64]) -> Vec<f64> {
    let scores: Vec<f64> = trees
        .iter()
        .map(|t| t.edge_ids().iter().map(|&e| log_factors[e]).sum())
        .collect();
    let peak = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = scores.iter().map(|s| (s - peak).exp()).sum();
    let log_total = peak + total.ln();
    scores.iter().map(|s| (s - log_total).exp()).collect()
}

/// Exact output distribution of the exponential mechanism over `trees`
/// (normally the full enumeration).
pub fn exact_distribution(
    graph: &Graph,
    trees: &[SpanningTree],
    weights: &WeightVector,
    epsilon: f64,
    relation: NeighborRelation,
) -> Vec<f64> {
    let log_factors = exp_mech_log_factors(graph, weights, epsilon, relation);
    distribution_from_log_factors(trees, &log_factors)
}
