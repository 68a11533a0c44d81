//! Exact tree counting, enumeration, and tree-space diameter oracles.
//!
//! Everything here is desk-scale audit machinery: the enumerator and the
//! exact diameter exist so that mechanisms and bounds can be checked against
//! ground truth, not to be fast.

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::graph::{farthest_tree, hamming_distance, Graph, SpanningTree};
use crate::numeric::{bareiss_det, lu_log_det};

/// Enumeration refuses to produce more trees than this.
pub const MAX_ENUMERATED_TREES: usize = 1_000_000;

const PAIRWISE_DIAMETER_LIMIT: usize = 20_000;

/// Spanning tree count via the matrix-tree determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeCount {
    /// Natural log of the number of spanning trees.
    pub log_count: f64,
    /// Exact count, available for graphs on at most 16 vertices.
    pub exact: Option<u128>,
}

/// Counts spanning trees from the reduced Laplacian.
///
/// The log count comes from LU with partial pivoting; the exact count uses
/// fraction-free integer elimination and is reported when n <= 16.
pub fn count_spanning_trees(graph: &Graph) -> TreeCount {
    let n = graph.vertex_count();
    let k = n - 1;
    let mut lap = vec![0.0f64; k * k];
    let mut lap_int = vec![0i128; k * k];
    for &(u, v) in graph.edges() {
        for (a, b) in [(u, v), (v, u)] {
            if a > 0 {
                lap[(a - 1) * k + (a - 1)] += 1.0;
                lap_int[(a - 1) * k + (a - 1)] += 1;
                if b > 0 {
                    lap[(a - 1) * k + (b - 1)] -= 1.0;
                    lap_int[(a - 1) * k + (b - 1)] -= 1;
                }
            }
        }
    }
    let log_count = lu_log_det(lap, k)
        .expect("a connected graph has a positive spanning-tree count");
    let exact = if n <= 16 {
        let det = bareiss_det(lap_int, k);
        debug_assert!(det > 0);
        Some(det as u128)
    } else {
        None
    };
    TreeCount { log_count, exact }
}

/// Union-find without path compression so unions can be undone.
struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    trail: Vec<usize>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu {
            parent: (0..n).collect(),
            size: vec![1; n],
            trail: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.trail.push(rb);
        true
    }

    fn undo(&mut self) {
        let rb = self.trail.pop().expect("undo without a matching union");
        let ra = self.parent[rb];
        self.parent[rb] = rb;
        self.size[ra] -= self.size[rb];
    }
}

struct Enumerator<'g> {
    graph: &'g Graph,
    included: Vec<usize>,
    dsu: RollbackDsu,
    out: Vec<SpanningTree>,
}

impl<'g> Enumerator<'g> {
    fn run(mut self) -> Result<Vec<SpanningTree>> {
        self.descend(0)?;
        Ok(self.out)
    }

    fn emit(&mut self) -> Result<()> {
        if self.out.len() >= MAX_ENUMERATED_TREES {
            return Err(Error::guard(format!(
                "more than {MAX_ENUMERATED_TREES} spanning trees"
            )));
        }
        self.out
            .push(SpanningTree::from_sorted_unchecked(self.included.clone()));
        Ok(())
    }

    fn descend(&mut self, edge: usize) -> Result<()> {
        let n = self.graph.vertex_count();
        if self.included.len() == n - 1 {
            return self.emit();
        }
        debug_assert!(edge < self.graph.edge_count(), "ran out of edges mid-tree");
        let (u, v) = self.graph.endpoints(edge);
        if self.dsu.find(u) == self.dsu.find(v) {
            // Closes a cycle with the included edges: exclusion is forced.
            return self.descend(edge + 1);
        }
        // Include branch.
        self.dsu.union(u, v);
        self.included.push(edge);
        self.descend(edge + 1)?;
        self.included.pop();
        self.dsu.undo();
        // Exclude branch, unless that makes spanning impossible.
        if self.connected_without(edge) {
            self.descend(edge + 1)?;
        }
        Ok(())
    }

    /// Can the included edges plus the undecided edges after `edge` still span?
    fn connected_without(&mut self, edge: usize) -> bool {
        let mut probe = Dsu::new(self.graph.vertex_count());
        for &e in &self.included {
            let (u, v) = self.graph.endpoints(e);
            probe.union(u, v);
        }
        for e in edge + 1..self.graph.edge_count() {
            let (u, v) = self.graph.endpoints(e);
            probe.union(u, v);
        }
        probe.components() == 1
    }
}

/// Enumerates every spanning tree by deciding edges in ascending id order,
/// pruning decisions that close a cycle or disconnect the remainder.
pub fn enumerate_spanning_trees(graph: &Graph) -> Result<Vec<SpanningTree>> {
    Enumerator {
        graph,
        included: Vec::with_capacity(graph.vertex_count() - 1),
        dsu: RollbackDsu::new(graph.vertex_count()),
        out: Vec::new(),
    }
    .run()
}

/// Exact diameter of the tree space under the Hamming metric.
///
/// Brute force over the enumeration: pairwise scan on small tree sets,
/// per-tree eccentricity (max distance realized by an MST under {-1, 0}
/// weights) when the pairwise scan would be quadratic in too many trees.
pub fn diameter_exact(graph: &Graph) -> Result<usize> {
    let trees = enumerate_spanning_trees(graph)?;
    // No pair of trees can differ in more edges than either the tree size or
    // the number of non-tree edges.
    let cap = (graph.vertex_count() - 1).min(graph.edge_count() - graph.vertex_count() + 1);
    let mut best = 0;
    if trees.len() <= PAIRWISE_DIAMETER_LIMIT && graph.edge_count() <= 128 {
        let masks: Vec<u128> = trees
            .iter()
            .map(|t| {
                t.edge_ids()
                    .iter()
                    .fold(0u128, |acc, &e| acc | (1u128 << e))
            })
            .collect();
        'outer: for i in 0..masks.len() {
            for j in i + 1..masks.len() {
                let d = (masks[i] & !masks[j]).count_ones() as usize;
                if d > best {
                    best = d;
                    if best == cap {
                        break 'outer;
                    }
                }
            }
        }
    } else {
        for t in &trees {
            let ecc = hamming_distance(t, &farthest_tree(graph, t));
            if ecc > best {
                best = ecc;
                if best == cap {
                    break;
                }
            }
        }
    }
    Ok(best)
}
