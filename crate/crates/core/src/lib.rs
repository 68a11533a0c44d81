//! Differentially private release of minimum spanning trees on a public
//! graph with private edge weights, plus the machinery to audit it.
//!
//! The crate provides:
//!
//! - a deterministic graph/weight/tree data model with exact counting,
//!   enumeration, and tree-space diameter oracles ([`graph`], [`counting`]);
//! - two private release mechanisms: Laplace-noised MST and the exponential
//!   mechanism realized by exact weighted spanning-tree sampling via
//!   contraction/deletion with matrix-tree determinant ratios
//!   ([`mechanisms`]);
//! - combinatorics of the spanning-tree metric space: edge-exchange surgery,
//!   greedy minimum-distance codes and their embedding, and greedy packing
//!   ([`tree_space`]);
//! - packing lower-bound instances with exhaustive disjointness verification
//!   and an empirical stress harness ([`lower_bounds`]);
//! - graph generators, a seeded experiment runner with CSV output, and an
//!   exact privacy audit ([`generate`], [`experiments`]).
//!
//! Everything randomized is seedable and reproducible: rerunning any
//! mechanism or experiment with the same inputs and seed gives identical
//! results.

pub mod counting;
mod dsu;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod graph;
pub mod io;
pub mod lower_bounds;
pub mod mechanisms;
mod numeric;
pub mod tree_space;

pub use counting::{
    count_spanning_trees, diameter_exact, enumerate_spanning_trees, TreeCount,
    MAX_ENUMERATED_TREES,
};
pub use error::{Error, Result};
pub use experiments::{
    audit_mechanisms, load_spec, rows_to_csv, run_experiment, separation_experiment,
    separation_to_csv, AuditReport, ExperimentRow, ExperimentSpec, GraphSpec, RunSpec,
    SeparationRow, WeightSpec,
};
pub use generate::{all_connected_non_tree_graphs, generate_graph, GraphFamily};
pub use graph::{
    diameter_2approx, hamming_distance, indicator_weights, mst, tree_weight, validate_weights,
    Graph, NeighborRelation, SpanningTree, WeightVector,
};
pub use lower_bounds::{
    build_packing_instance, diameter_estimate, light_set, lower_bound_value, stress_mechanism,
    verify_disjointness, DiameterEstimate, DisjointnessReport, LowerBoundReport, PackingInstance,
    StressReport,
};
pub use mechanisms::{
    derive_seed, exact_distribution, exp_mech_lambda, exp_mech_log_factors,
    exponential_mechanism, inclusion_probability, laplace_mechanism, noise_scale, release,
    sample_laplace, sample_spanning_tree, tree_sum, Mechanism, MechanismConfig, MultiGraph,
    TreeSampler,
};
pub use tree_space::{
    ball_volume_bound, dissimilar_set, embed_code, exchange_step, greedy_packing, gv_code,
    iterated_exchange, CodeBook, DissimilarSet,
};
