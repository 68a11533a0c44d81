//! Combinatorics of the spanning-tree metric space.
//!
//! The central objects are sets of pairwise-distant spanning trees. They are
//! built either by embedding a binary code along an edge-exchange path
//! between two distant trees, or by greedy packing over a full enumeration.

use std::collections::{HashSet, VecDeque};

use crate::counting::enumerate_spanning_trees;
use crate::error::{Error, Result};
use crate::graph::{
    farthest_tree, hamming_distance, mst, Graph, SpanningTree, WeightVector,
};

/// A set of binary words of equal length with a certified minimum distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBook {
    /// Word length in bits.
    pub length: usize,
    /// Words encoded as integers; bit `length - 1 - i` carries position `i`.
    pub words: Vec<u64>,
    /// Certified minimum pairwise Hamming distance.
    pub min_distance: usize,
}

impl CodeBook {
    pub fn new(length: usize, words: Vec<u64>, min_distance: usize) -> Result<Self> {
        if length == 0 || length > 63 {
            return Err(Error::validation("code length must be in 1..=63"));
        }
        if words.is_empty() {
            return Err(Error::validation("code book needs at least one word"));
        }
        if words.iter().any(|&w| w >> length != 0) {
            return Err(Error::validation("code word wider than the stated length"));
        }
        let code = CodeBook {
            length,
            words,
            min_distance,
        };
        if !code.verify() {
            return Err(Error::validation(
                "code words violate the stated minimum distance",
            ));
        }
        Ok(code)
    }

    /// True when the word has a 1 at (0-indexed) position `i`.
    pub fn position_set(&self, word: u64, i: usize) -> bool {
        (word >> (self.length - 1 - i)) & 1 == 1
    }

    /// Full pairwise scan against the certified minimum distance.
    pub fn verify(&self) -> bool {
        for (i, &a) in self.words.iter().enumerate() {
            for &b in &self.words[i + 1..] {
                if ((a ^ b).count_ones() as usize) < self.min_distance {
                    return false;
                }
            }
        }
        true
    }
}

/// Spanning trees whose pairwise Hamming distance strictly exceeds `separation`.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarSet {
    pub trees: Vec<SpanningTree>,
    pub separation: f64,
}

impl DissimilarSet {
    /// Checks the strict pairwise-distance invariant by exhaustive scan.
    pub fn verify(&self) -> bool {
        for (i, a) in self.trees.iter().enumerate() {
            for b in &self.trees[i + 1..] {
                if hamming_distance(a, b) as f64 <= self.separation {
                    return false;
                }
            }
        }
        true
    }

    pub fn min_pairwise_distance(&self) -> Option<usize> {
        let mut best = None;
        for (i, a) in self.trees.iter().enumerate() {
            for b in &self.trees[i + 1..] {
                let d = hamming_distance(a, b);
                best = Some(best.map_or(d, |m: usize| m.min(d)));
            }
        }
        best
    }
}

/// Edge ids on the unique path between `from` and `to` inside `tree`.
fn tree_path_edges(graph: &Graph, tree: &SpanningTree, from: usize, to: usize) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &e in tree.edge_ids() {
        let (u, v) = graph.endpoints(e);
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &(v, e) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, e));
                queue.push_back(v);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let (prev, e) = parent[cur].expect("tree path must exist");
        path.push(e);
        cur = prev;
    }
    path
}

/// Single edge exchange: moves `tx` one step closer to `ty`.
///
/// Adding `e` from `ty` to `tx` closes exactly one cycle; that cycle must
/// contain an edge outside `ty`, and removing one such edge yields a tree
/// one Hamming step nearer to `ty`. Among the valid removals the smallest
/// edge id is chosen so the surgery is deterministic.
pub fn exchange_step(
    graph: &Graph,
    tx: &SpanningTree,
    ty: &SpanningTree,
    e: usize,
) -> Result<(usize, SpanningTree)> {
    if !ty.contains(e) || tx.contains(e) {
        return Err(Error::validation(format!(
            "edge {e} must lie in the target tree and outside the source tree"
        )));
    }
    let (u, v) = graph.endpoints(e);
    let cycle = tree_path_edges(graph, tx, u, v);
    let f = cycle
        .iter()
        .copied()
        .filter(|&id| !ty.contains(id))
        .min()
        .expect("the fundamental cycle always contains an edge outside the target tree");
    let mut ids: Vec<usize> = tx
        .edge_ids()
        .iter()
        .copied()
        .filter(|&id| id != f)
        .collect();
    ids.push(e);
    ids.sort_unstable();
    Ok((f, SpanningTree::from_sorted_unchecked(ids)))
}

/// Repeated exchange: produces the tree `t` with `t \ ta` exactly `q`.
///
/// Edges of `q` are processed in ascending id order; together with the
/// tie-break inside [`exchange_step`] this makes the result a pure function
/// of its inputs.
pub fn iterated_exchange(
    graph: &Graph,
    ta: &SpanningTree,
    tb: &SpanningTree,
    q: &[usize],
) -> Result<SpanningTree> {
    let mut q = q.to_vec();
    q.sort_unstable();
    q.dedup();
    for &e in &q {
        if !tb.contains(e) || ta.contains(e) {
            return Err(Error::validation(format!(
                "edge {e} is not in the difference of the two trees"
            )));
        }
    }
    let mut current = ta.clone();
    for &e in &q {
        let (_, next) = exchange_step(graph, &current, tb, e)?;
        current = next;
    }
    Ok(current)
}

/// Scan budget for the greedy code construction.
const GV_SCAN_BUDGET: u64 = 1 << 28;

/// Greedy minimum-distance code of length `n`.
///
/// Scans words in lexicographic order and keeps each word that is at
/// distance >= n/6 + 1 from everything kept so far, stopping once
/// 2^(n/3) words are found. A counting argument over Hamming balls
/// guarantees the scan reaches that size.
pub fn gv_code(n: usize) -> Result<CodeBook> {
    if n == 0 {
        return Err(Error::validation("code length must be at least 1"));
    }
    if n > 48 {
        return Err(Error::guard(format!(
            "greedy code scan supports length <= 48, got {n}"
        )));
    }
    let min_distance = n / 6 + 1;
    let target = 1usize << (n / 3);
    let mut words: Vec<u64> = Vec::with_capacity(target);
    let space = 1u64 << n;
    let mut scanned = 0u64;
    let mut w = 0u64;
    while w < space && words.len() < target {
        scanned += 1;
        if scanned > GV_SCAN_BUDGET {
            return Err(Error::guard("greedy code scan budget exhausted"));
        }
        if words
            .iter()
            .all(|&kept| (kept ^ w).count_ones() as usize >= min_distance)
        {
            words.push(w);
        }
        w += 1;
    }
    assert_eq!(
        words.len(),
        target,
        "greedy scan must reach its target size before exhausting the space"
    );
    Ok(CodeBook {
        length: n,
        words,
        min_distance,
    })
}

/// Maps a code along the edge-exchange coordinates between two trees.
///
/// The edges of `tb \ ta` are numbered ascending by edge id; word `x` selects
/// the subset `q_x` of those edges and maps to the tree with `t \ ta = q_x`.
/// Words differing in k positions map to trees at Hamming distance > k/2, so
/// a code of minimum distance d+1 yields pairwise tree distance > d/2.
pub fn embed_code(
    graph: &Graph,
    ta: &SpanningTree,
    tb: &SpanningTree,
    code: &CodeBook,
) -> Result<DissimilarSet> {
    let diff: Vec<usize> = tb
        .edge_ids()
        .iter()
        .copied()
        .filter(|&e| !ta.contains(e))
        .collect();
    if diff.len() != code.length {
        return Err(Error::validation(format!(
            "tree pair differs in {} edges but the code has length {}",
            diff.len(),
            code.length
        )));
    }
    let mut trees = Vec::with_capacity(code.words.len());
    for &word in &code.words {
        let q: Vec<usize> = (0..code.length)
            .filter(|&i| code.position_set(word, i))
            .map(|i| diff[i])
            .collect();
        trees.push(iterated_exchange(graph, ta, tb, &q)?);
    }
    let distinct: HashSet<&SpanningTree> = trees.iter().collect();
    assert_eq!(
        distinct.len(),
        trees.len(),
        "distinct words must map to distinct trees"
    );
    Ok(DissimilarSet {
        trees,
        separation: (code.min_distance as f64 - 1.0) / 2.0,
    })
}

/// Greedy packing: keeps a tree iff it is strictly farther than `d` from
/// every tree kept so far. Candidates are visited in lexicographic order of
/// their edge-id lists.
///
/// Given the full enumeration of a graph's trees, the result has at least
/// |T(G)| / (m^d n^d) elements, because each kept tree disqualifies at most
/// a closed d-ball.
pub fn greedy_packing(trees: &[SpanningTree], d: f64) -> DissimilarSet {
    assert!(d > 0.0, "packing distance must be positive");
    let mut order: Vec<&SpanningTree> = trees.iter().collect();
    order.sort_unstable();
    let mut kept: Vec<SpanningTree> = Vec::new();
    for t in order {
        if kept.iter().all(|k| hamming_distance(k, t) as f64 > d) {
            kept.push(t.clone());
        }
    }
    DissimilarSet {
        trees: kept,
        separation: d,
    }
}

/// Log of the certified upper bound m^floor(d) * n^floor(d) on the number of
/// trees within Hamming distance d of a fixed tree.
pub fn ball_volume_bound(graph: &Graph, d: f64) -> f64 {
    assert!(d > 0.0, "ball radius must be positive");
    let steps = d.floor();
    steps * ((graph.edge_count() as f64).ln() + (graph.vertex_count() as f64).ln())
}

/// Builds a large set of pairwise-distant spanning trees for `graph`.
///
/// Cliques with an enumerable tree set use greedy packing at distance
/// (n-2)/6, which yields a set of size about sqrt(|T(G)|). Everything else
/// uses the code embedding along a maximally distant tree pair found from
/// the zero-weight MST; the achievable constants then degrade by at most 2
/// because only the eccentricity, not the exact diameter, is known.
pub fn dissimilar_set(graph: &Graph) -> Result<DissimilarSet> {
    if graph.is_clique() {
        match enumerate_spanning_trees(graph) {
            Ok(trees) => {
                let d = (graph.vertex_count() as f64 - 2.0) / 6.0;
                return Ok(greedy_packing(&trees, d));
            }
            Err(Error::GuardExceeded(_)) => {} // too many trees; fall back to the code path
            Err(e) => return Err(e),
        }
    }
    let ta = mst(graph, &WeightVector::zeros(graph.edge_count()));
    let tb = farthest_tree(graph, &ta);
    let r0 = hamming_distance(&ta, &tb);
    let code = gv_code(r0)?;
    embed_code(graph, &ta, &tb, &code)
}
