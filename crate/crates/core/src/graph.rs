//! Graph, weight, and spanning-tree data model.
//!
//! Graphs are simple, undirected, connected, and fixed once built. The edge
//! list order given at construction is the canonical edge indexing used by
//! every other operation (weight vectors, tree edge ids, noise draws).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::dsu::Dsu;
use crate::error::{Error, Result};

/// Public unweighted topology with indexed edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a validated graph from an edge list.
    ///
    /// Rejects self-loops, duplicate edges, disconnected inputs, and graphs
    /// that are themselves trees (those have a single spanning tree and
    /// nothing to release).
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 vertices, got {n}")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge {i} = ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("edge {i} is a self-loop at {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::validation(format!(
                    "duplicate edge ({}, {}) at index {i}",
                    key.0, key.1
                )));
            }
            normalized.push(key);
        }
        let mut dsu = Dsu::new(n);
        for &(u, v) in &normalized {
            dsu.union(u, v);
        }
        if dsu.components() != 1 {
            return Err(Error::validation("graph is not connected".to_string()));
        }
        if normalized.len() == n - 1 {
            return Err(Error::validation(
                "graph is a tree; it has a unique spanning tree".to_string(),
            ));
        }
        Ok(Graph { n, edges: normalized })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.edges[edge]
    }

    pub fn is_clique(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }
}

/// Private per-edge weights, aligned to the graph's edge indexing.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("weight vector is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("weight {i} is not finite")));
        }
        Ok(WeightVector(values))
    }

    pub fn zeros(len: usize) -> Self {
        WeightVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    /// Entry-wise sum with another vector of the same length.
    pub fn add(&self, other: &WeightVector) -> Result<WeightVector> {
        if self.len() != other.len() {
            return Err(Error::validation("weight vector length mismatch"));
        }
        WeightVector::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: f64) -> Result<WeightVector> {
        WeightVector::new(self.0.iter().map(|v| v * c).collect())
    }

    pub fn l1_distance(&self, other: &WeightVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn linf_distance(&self, other: &WeightVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks a weight vector against a graph's edge count.
pub fn validate_weights(graph: &Graph, weights: &WeightVector) -> Result<()> {
    if weights.len() != graph.edge_count() {
        return Err(Error::validation(format!(
            "weight vector has {} entries, graph has {} edges",
            weights.len(),
            graph.edge_count()
        )));
    }
    Ok(())
}

/// A spanning tree, identified with its sorted set of edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree {
    edge_ids: Vec<usize>,
}

impl SpanningTree {
    /// Validates that the edge ids form a spanning tree of `graph`.
    pub fn new(graph: &Graph, mut edge_ids: Vec<usize>) -> Result<Self> {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        if edge_ids.len() != graph.vertex_count() - 1 {
            return Err(Error::validation(format!(
                "expected {} distinct edges, got {}",
                graph.vertex_count() - 1,
                edge_ids.len()
            )));
        }
        let mut dsu = Dsu::new(graph.vertex_count());
        for &e in &edge_ids {
            if e >= graph.edge_count() {
                return Err(Error::validation(format!("edge id {e} out of range")));
            }
            let (u, v) = graph.endpoints(e);
            if !dsu.union(u, v) {
                return Err(Error::validation(format!("edge id {e} closes a cycle")));
            }
        }
        Ok(SpanningTree { edge_ids })
    }

    /// Wraps edge ids already known to form a spanning tree.
    pub(crate) fn from_sorted_unchecked(edge_ids: Vec<usize>) -> Self {
        debug_assert!(edge_ids.windows(2).all(|w| w[0] < w[1]));
        SpanningTree { edge_ids }
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edge_ids.binary_search(&edge).is_ok()
    }
}

impl fmt::Display for SpanningTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.edge_ids.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", ids.join(" "))
    }
}

/// Which metric defines neighboring weight vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NeighborRelation {
    /// Neighbors differ by at most 1 in the l1 norm.
    L1,
    /// Neighbors differ by at most 1 in the l-infinity norm.
    Linf,
}

impl fmt::Display for NeighborRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborRelation::L1 => write!(f, "l1"),
            NeighborRelation::Linf => write!(f, "linf"),
        }
    }
}

impl FromStr for NeighborRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NeighborRelation::L1),
            "linf" => Ok(NeighborRelation::Linf),
            other => Err(Error::validation(format!("unknown relation {other:?}"))),
        }
    }
}

/// Minimum spanning tree under `weights`, ties broken by lower edge id.
///
/// Kruskal order is (weight, edge id), so the output is a pure function of
/// the inputs. Callers that need randomness inject it through the weights.
pub fn mst(graph: &Graph, weights: &WeightVector) -> SpanningTree {
    assert_eq!(
        weights.len(),
        graph.edge_count(),
        "weight vector length must match the edge count"
    );
    mst_from_slice(graph, weights.values())
}

/// Kruskal over raw weights; also used internally with noisy or {-1, 0} weights.
pub(crate) fn mst_from_slice(graph: &Graph, weights: &[f64]) -> SpanningTree {
    let mut order: Vec<usize> = (0..graph.edge_count()).collect();
    order.sort_unstable_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let mut dsu = Dsu::new(graph.vertex_count());
    let mut picked = Vec::with_capacity(graph.vertex_count() - 1);
    for e in order {
        let (u, v) = graph.endpoints(e);
        if dsu.union(u, v) {
            picked.push(e);
            if picked.len() == graph.vertex_count() - 1 {
                break;
            }
        }
    }
    picked.sort_unstable();
    SpanningTree::from_sorted_unchecked(picked)
}

/// Total weight of a tree: the sum of its edge weights.
pub fn tree_weight(weights: &WeightVector, tree: &SpanningTree) -> f64 {
    tree.edge_ids().iter().map(|&e| weights.get(e)).sum()
}

/// Number of edges of `a` that are not in `b` (equal to the reverse count).
pub fn hamming_distance(a: &SpanningTree, b: &SpanningTree) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    let (xa, xb) = (a.edge_ids(), b.edge_ids());
    while i < xa.len() && j < xb.len() {
        match xa[i].cmp(&xb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    xa.len() - common
}

/// Zero-one weights that charge 1 for every edge outside the tree.
///
/// The induced weight of any other tree equals its Hamming distance from
/// `tree`, which is what makes these vectors the adversarial inputs of the
/// packing construction.
pub fn indicator_weights(graph: &Graph, tree: &SpanningTree) -> WeightVector {
    let mut w = vec![1.0; graph.edge_count()];
    for &e in tree.edge_ids() {
        w[e] = 0.0;
    }
    WeightVector(w)
}

/// Farthest Hamming distance from `base` to any spanning tree.
///
/// Computed as the MST under weights that pay -1 for every edge outside
/// `base`: that MST maximizes the number of non-`base` edges, so its distance
/// from `base` is the exact eccentricity, which 2-approximates the diameter
/// of the tree space.
pub fn diameter_2approx(graph: &Graph, base: &SpanningTree) -> usize {
    hamming_distance(base, &farthest_tree(graph, base))
}

/// The spanning tree attaining the eccentricity of `base`.
pub(crate) fn farthest_tree(graph: &Graph, base: &SpanningTree) -> SpanningTree {
    let mut w = vec![-1.0; graph.edge_count()];
    for &e in base.edge_ids() {
        w[e] = 0.0;
    }
    mst_from_slice(graph, &w)
}
