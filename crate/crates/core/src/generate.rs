//! Graph generators for experiments and the small-graph census used as the
//! test corpus.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// The generator families. Their parameters pick out the different diameter
/// regimes: cycles pin the tree-space diameter at 1, a tree plus k extra
/// edges caps it at k, cliques maximize the number of trees.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphFamily {
    Cycle { n: usize },
    Clique { n: usize },
    Grid { rows: usize, cols: usize },
    TreePlusK { n: usize, k: usize, seed: u64 },
    GnpConnected { n: usize, p: f64, seed: u64 },
}

impl GraphFamily {
    /// Parses a family from its name and a flat numeric parameter list, the
    /// form the command line delivers.
    pub fn from_name_params(name: &str, params: &[f64]) -> Result<Self> {
        let int = |v: f64, what: &str| -> Result<usize> {
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                return Err(Error::validation(format!("{what} must be a small non-negative integer, got {v}")));
            }
            Ok(v as usize)
        };
        let arity = |k: usize| -> Result<()> {
            if params.len() != k {
                return Err(Error::validation(format!(
                    "family {name} takes {k} parameters, got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        match name {
            "cycle" => {
                arity(1)?;
                Ok(GraphFamily::Cycle { n: int(params[0], "n")? })
            }
            "clique" => {
                arity(1)?;
                Ok(GraphFamily::Clique { n: int(params[0], "n")? })
            }
            "grid" => {
                arity(2)?;
                Ok(GraphFamily::Grid {
                    rows: int(params[0], "rows")?,
                    cols: int(params[1], "cols")?,
                })
            }
            "tree_plus_k" => {
                arity(3)?;
                Ok(GraphFamily::TreePlusK {
                    n: int(params[0], "n")?,
                    k: int(params[1], "k")?,
                    seed: int(params[2], "seed")? as u64,
                })
            }
            "gnp_connected" => {
                arity(3)?;
                Ok(GraphFamily::GnpConnected {
                    n: int(params[0], "n")?,
                    p: params[1],
                    seed: int(params[2], "seed")? as u64,
                })
            }
            other => Err(Error::validation(format!("unknown graph family {other:?}"))),
        }
    }
}

impl std::fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphFamily::Cycle { n } => write!(f, "cycle({n})"),
            GraphFamily::Clique { n } => write!(f, "clique({n})"),
            GraphFamily::Grid { rows, cols } => write!(f, "grid({rows},{cols})"),
            GraphFamily::TreePlusK { n, k, seed } => write!(f, "tree_plus_k({n},{k},{seed})"),
            GraphFamily::GnpConnected { n, p, seed } => {
                write!(f, "gnp_connected({n},{p},{seed})")
            }
        }
    }
}

pub fn generate_graph(family: &GraphFamily) -> Result<Graph> {
    match *family {
        GraphFamily::Cycle { n } => cycle(n),
        GraphFamily::Clique { n } => clique(n),
        GraphFamily::Grid { rows, cols } => grid(rows, cols),
        GraphFamily::TreePlusK { n, k, seed } => tree_plus_k(n, k, seed),
        GraphFamily::GnpConnected { n, p, seed } => gnp_connected(n, p, seed),
    }
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::validation("cycle needs at least 3 vertices"));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
}

pub fn clique(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::validation("clique needs at least 3 vertices"));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges)
}

pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows < 2 || cols < 2 {
        return Err(Error::validation("grid needs at least 2 rows and 2 columns"));
    }
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                edges.push((v, v + 1));
            }
            if i + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Decodes a Pruefer sequence into tree edges (smallest leaf first).
fn pruefer_tree(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    debug_assert_eq!(seq.len(), n - 2);
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = *leaves.iter().next().expect("a leaf always remains");
        leaves.remove(&leaf);
        edges.push((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.insert(v);
        }
    }
    let mut it = leaves.iter();
    let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
    edges.push((a.min(b), a.max(b)));
    edges
}

/// A uniformly random spanning tree on n vertices plus k distinct extra
/// edges. The tree-space diameter of the result is at most k.
pub fn tree_plus_k(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(Error::validation("tree_plus_k needs at least 3 vertices"));
    }
    let slots = n * (n - 1) / 2 - (n - 1);
    if k < 1 || k > slots {
        return Err(Error::validation(format!(
            "k must be between 1 and {slots} for n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let mut tree = pruefer_tree(n, &seq);
    tree.sort_unstable();
    let tree_set: HashSet<(usize, usize)> = tree.iter().copied().collect();
    let mut complement = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !tree_set.contains(&(u, v)) {
                complement.push((u, v));
            }
        }
    }
    let mut extra: Vec<(usize, usize)> = complement
        .choose_multiple(&mut rng, k)
        .copied()
        .collect();
    extra.sort_unstable();
    let mut edges = tree;
    edges.extend(extra);
    Graph::new(n, edges)
}

const GNP_RETRY_BUDGET: usize = 100;

/// Bernoulli(p) edges, retried until the result is connected and not a tree.
pub fn gnp_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(Error::validation("gnp_connected needs at least 3 vertices"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::validation("edge probability must lie in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GNP_RETRY_BUDGET {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        if let Ok(g) = Graph::new(n, edges) {
            return Ok(g);
        }
    }
    Err(Error::validation(format!(
        "no connected non-tree graph within {GNP_RETRY_BUDGET} draws of G({n}, {p})"
    )))
}

/// Every connected non-tree graph with 3..=max_n vertices, one representative
/// per isomorphism class. Edge masks are canonicalized by minimizing over all
/// vertex permutations, so the census is exhaustive and duplicate-free.
pub fn all_connected_non_tree_graphs(max_n: usize) -> Result<Vec<Graph>> {
    if max_n < 3 {
        return Err(Error::validation("census starts at 3 vertices"));
    }
    if max_n > 6 {
        return Err(Error::guard(
            "census is limited to 6 vertices (the permutation scan grows factorially)",
        ));
    }
    let mut out = Vec::new();
    for n in 3..=max_n {
        let pairs: Vec<(usize, usize)> = {
            let mut p = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    p.push((u, v));
                }
            }
            p
        };
        let mut pair_index = vec![vec![0usize; n]; n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            pair_index[u][v] = i;
            pair_index[v][u] = i;
        }
        let perms = permutations(n);
        let num_pairs = pairs.len();
        let mut seen: HashSet<u32> = HashSet::new();
        let mut reps: Vec<u32> = Vec::new();
        for mask in 0u32..(1u32 << num_pairs) {
            if (mask.count_ones() as usize) < n {
                continue; // connected non-trees have at least n edges
            }
            let mut dsu = Dsu::new(n);
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    dsu.union(u, v);
                }
            }
            if dsu.components() != 1 {
                continue;
            }
            let canonical = perms
                .iter()
                .map(|perm| {
                    let mut remapped = 0u32;
                    for (i, &(u, v)) in pairs.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            remapped |= 1 << pair_index[perm[u]][perm[v]];
                        }
                    }
                    remapped
                })
                .min()
                .unwrap();
            if seen.insert(canonical) {
                reps.push(canonical);
            }
        }
        reps.sort_unstable();
        for mask in reps {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            out.push(Graph::new(n, edges).expect("census masks are valid graphs"));
        }
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}
