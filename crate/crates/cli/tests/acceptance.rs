//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line with the measured quantities (visible with `--nocapture`).
//!
//! The graph corpus is every connected non-tree graph on up to 6 vertices
//! (one representative per isomorphism class), plus C8, C64, K5, the 3x3
//! grid, and a 20-vertex tree with 4 extra edges. All randomness is seeded;
//! reruns are bit-identical.

use std::collections::HashMap;
use std::process::Command;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dpmst::mechanisms::distribution_from_log_factors;
use dpmst::{
    all_connected_non_tree_graphs, audit_mechanisms, ball_volume_bound, build_packing_instance,
    count_spanning_trees, derive_seed, diameter_2approx, diameter_exact, dissimilar_set,
    embed_code, enumerate_spanning_trees, exact_distribution, exp_mech_log_factors, generate,
    greedy_packing, gv_code, hamming_distance, inclusion_probability, indicator_weights,
    iterated_exchange, laplace_mechanism, mst, separation_experiment, stress_mechanism,
    tree_weight, verify_disjointness, Error, Graph, Mechanism, MechanismConfig,
    NeighborRelation, SpanningTree, TreeSampler, WeightVector,
};

const SUITE_SEED: u64 = 0x5EED_0001;

fn corpus() -> &'static Vec<(String, Graph)> {
    static CORPUS: OnceLock<Vec<(String, Graph)>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut out: Vec<(String, Graph)> = all_connected_non_tree_graphs(6)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("census{:03}(n={})", i, g.vertex_count()), g))
            .collect();
        out.push(("cycle(8)".into(), generate::cycle(8).unwrap()));
        out.push(("cycle(64)".into(), generate::cycle(64).unwrap()));
        out.push(("clique(5)".into(), generate::clique(5).unwrap()));
        out.push(("grid(3,3)".into(), generate::grid(3, 3).unwrap()));
        out.push(("tree_plus_k(20,4,7)".into(), generate::tree_plus_k(20, 4, 7).unwrap()));
        out
    })
}

fn uniform_weights(m: usize, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightVector::new((0..m).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sampler exactness: on every corpus graph with at most 200 trees and five
/// fixed weight vectors, the empirical distribution of 100k seeded samples
/// stays within total-variation distance 0.02 of the enumerated exact
/// distribution.
#[test]
fn a01_sampler_matches_enumerated_distribution() {
    let samples = 100_000usize;
    let mut checked = 0usize;
    let mut worst: (f64, String) = (0.0, String::new());
    for (gi, (name, g)) in corpus().iter().enumerate() {
        let count = count_spanning_trees(g);
        let too_many = match count.exact {
            Some(c) => c > 200,
            None => count.log_count > 200.0f64.ln() + 1e-9,
        };
        if too_many {
            continue;
        }
        let trees = enumerate_spanning_trees(g).unwrap();
        let index: HashMap<&SpanningTree, usize> =
            trees.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let m = g.edge_count();
        let ta = trees.first().unwrap().clone();
        let tb = trees.last().unwrap().clone();
        let mut spiked = vec![0.0; m];
        spiked[m / 2] = 5.0;
        let weight_vectors = [
            WeightVector::zeros(m),
            uniform_weights(m, derive_seed(SUITE_SEED, gi as u64)),
            indicator_weights(g, &ta),
            indicator_weights(g, &tb),
            WeightVector::new(spiked).unwrap(),
        ];
        for (wi, w) in weight_vectors.iter().enumerate() {
            let w_min = w.values().iter().copied().fold(f64::INFINITY, f64::min);
            let log_factors: Vec<f64> = w.values().iter().map(|v| -(v - w_min)).collect();
            let exact = distribution_from_log_factors(&trees, &log_factors);
            let mut sampler = TreeSampler::from_log_factors(g, log_factors.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                SUITE_SEED,
                1_000 + (gi * 8 + wi) as u64,
            ));
            let mut counts = vec![0u32; trees.len()];
            for _ in 0..samples {
                let t = sampler.sample(&mut rng).unwrap();
                counts[index[&t]] += 1;
            }
            assert_eq!(sampler.clamp_events(), 0, "{name}: unexpected clamping");
            let tv: f64 = counts
                .iter()
                .zip(&exact)
                .map(|(&c, p)| (c as f64 / samples as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.02, "{name} weight set {wi}: TV {tv}");
            if tv > worst.0 {
                worst = (tv, format!("{name} weight set {wi}"));
            }
            checked += 1;
        }
    }
    assert!(checked >= 5 * 100, "corpus shrank unexpectedly: {checked}");
    println!(
        "PASS sampler exactness: {checked} (graph, weight) pairs, worst TV {:.4} ({}) < 0.02",
        worst.0, worst.1
    );
}

/// Exact privacy audit: the exponential mechanism's analytic output ratios
/// stay within e^eps (up to 1e-9 relative slack) over 50 neighboring
/// directions per graph, relation, and epsilon in {0.1, 0.5, 1, 2}; the
/// Laplace noise budget never exceeds e^eps either.
#[test]
fn a02_exact_privacy_audit() {
    let mut audits = 0usize;
    let mut worst_margin: f64 = f64::INFINITY;
    for (gi, (name, g)) in corpus().iter().enumerate() {
        let w = uniform_weights(g.edge_count(), derive_seed(SUITE_SEED, 2_000 + gi as u64));
        for relation in [NeighborRelation::L1, NeighborRelation::Linf] {
            for eps in [0.1, 0.5, 1.0, 2.0] {
                let report = audit_mechanisms(
                    g,
                    &w,
                    eps,
                    relation,
                    50,
                    derive_seed(SUITE_SEED, 3_000 + gi as u64),
                )
                .unwrap();
                assert!(
                    report.expmech_pass,
                    "{name} {relation} eps {eps}: ratio {} > bound {}",
                    report.expmech_max_ratio, report.bound
                );
                assert!(report.laplace_pass, "{name} {relation} eps {eps}");
                worst_margin = worst_margin.min(report.bound - report.expmech_max_ratio);
                audits += 1;
            }
        }
    }
    println!(
        "PASS exact privacy audit: {audits} audits (50 directions each), min bound margin {worst_margin:.3e}"
    );
}

fn laplace_errors(g: &Graph, w: &WeightVector, eps: f64, trials: u64, seed: u64) -> Vec<f64> {
    let best = tree_weight(w, &mst(g, w));
    (0..trials)
        .map(|t| {
            let cfg =
                MechanismConfig::new(eps, NeighborRelation::L1, derive_seed(seed, t)).unwrap();
            let released = laplace_mechanism(g, w, &cfg).unwrap();
            tree_weight(w, &released) - best
        })
        .collect()
}

/// Laplace utility under l1: measured mean error within the
/// 4 D (ln n + 1) / eps bound (plus 3 standard errors) on the cycle C64
/// and on a tree plus 4 extra edges.
#[test]
fn a03_laplace_l1_utility() {
    for (name, g) in [
        ("cycle(64)", generate::cycle(64).unwrap()),
        ("tree_plus_k(20,4,7)", generate::tree_plus_k(20, 4, 7).unwrap()),
    ] {
        let d = diameter_exact(&g).unwrap() as f64;
        let n = g.vertex_count() as f64;
        let w = uniform_weights(g.edge_count(), derive_seed(SUITE_SEED, 4_000));
        let errors = laplace_errors(&g, &w, 1.0, 10_000, derive_seed(SUITE_SEED, 4_100));
        let (mean, se) = mean_and_se(&errors);
        let bound = 4.0 * d * (n.ln() + 1.0);
        assert!(
            mean <= bound + 3.0 * se,
            "{name}: mean {mean} vs bound {bound} + 3se {se}"
        );
        println!("PASS laplace l1 utility on {name}: mean {mean:.3} <= {bound:.3} + 3*{se:.4}");
    }
}

/// High-probability bound: at gamma = 0.1 the fraction of trials whose error
/// exceeds 4 D ln(n/gamma) / eps is at most 0.1 (plus 3 binomial SEs).
#[test]
fn a04_laplace_high_probability_bound() {
    let gamma: f64 = 0.1;
    for (name, g) in [
        ("cycle(64)", generate::cycle(64).unwrap()),
        ("tree_plus_k(20,4,7)", generate::tree_plus_k(20, 4, 7).unwrap()),
    ] {
        let d = diameter_exact(&g).unwrap() as f64;
        let n = g.vertex_count() as f64;
        let w = uniform_weights(g.edge_count(), derive_seed(SUITE_SEED, 4_000));
        let trials = 10_000u64;
        let errors = laplace_errors(&g, &w, 1.0, trials, derive_seed(SUITE_SEED, 4_200));
        let threshold = 4.0 * d * (n / gamma).ln();
        let exceed =
            errors.iter().filter(|&&e| e > threshold).count() as f64 / trials as f64;
        let se = (gamma * (1.0 - gamma) / trials as f64).sqrt();
        assert!(
            exceed <= gamma + 3.0 * se,
            "{name}: exceed fraction {exceed} vs {gamma} + 3se"
        );
        println!(
            "PASS laplace high-probability bound on {name}: exceed fraction {exceed:.4} <= {:.4}",
            gamma + 3.0 * se
        );
    }
}

/// Exponential-mechanism utility: mean error within 2 ln|T| / eps (l1) and
/// 4 D ln|T| / eps (linf), plus 3 standard errors, on K5 and the 3x3 grid.
#[test]
fn a05_exponential_mechanism_utility() {
    for (name, g) in [
        ("clique(5)", generate::clique(5).unwrap()),
        ("grid(3,3)", generate::grid(3, 3).unwrap()),
    ] {
        let log_tree_count = count_spanning_trees(&g).log_count;
        let d = diameter_exact(&g).unwrap() as f64;
        let w = uniform_weights(g.edge_count(), derive_seed(SUITE_SEED, 5_000));
        let best = tree_weight(&w, &mst(&g, &w));
        for (relation, bound) in [
            (NeighborRelation::L1, 2.0 * log_tree_count),
            (NeighborRelation::Linf, 4.0 * d * log_tree_count),
        ] {
            let trials = 10_000u64;
            let mut sampler = TreeSampler::from_log_factors(
                &g,
                exp_mech_log_factors(&g, &w, 1.0, relation),
            )
            .unwrap();
            let errors: Vec<f64> = (0..trials)
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        SUITE_SEED,
                        5_100 + t,
                    ));
                    tree_weight(&w, &sampler.sample(&mut rng).unwrap()) - best
                })
                .collect();
            let (mean, se) = mean_and_se(&errors);
            assert!(
                mean <= bound + 3.0 * se,
                "{name} {relation}: mean {mean} vs bound {bound}"
            );
            println!(
                "PASS expmech utility on {name} ({relation}): mean {mean:.3} <= {bound:.3} + 3*{se:.4}"
            );
        }
    }
}

/// Separation on cycles under linf: the Laplace mechanism's mean error grows
/// monotonically with n and is at least twice the exponential mechanism's at
/// n = 64.
#[test]
fn a06_mechanism_separation_on_cycles() {
    let rows = separation_experiment(&[8, 16, 32, 64], 1.0, 10_000, SUITE_SEED).unwrap();
    for pair in rows.windows(2) {
        assert!(
            pair[1].laplace_mean > pair[0].laplace_mean,
            "laplace mean not increasing: {pair:?}"
        );
    }
    let last = rows.last().unwrap();
    assert!(
        last.laplace_mean >= 2.0 * last.expmech_mean,
        "no separation at n=64: {last:?}"
    );
    let summary: Vec<String> = rows
        .iter()
        .map(|r| format!("n={}: {:.2} vs {:.2}", r.n, r.laplace_mean, r.expmech_mean))
        .collect();
    println!(
        "PASS separation on cycles (laplace vs expmech mean error): {}",
        summary.join(", ")
    );
}

/// Combinatorics of the tree space, checked exactly on the whole corpus:
/// tree-count bounds 2^D <= |T| <= 2^(3 D log2 n), exact ball volumes under
/// m^d n^d, greedy packing sizes over |T| / (m^d n^d), code-embedding
/// separation, and the exchange postconditions on random triples.
#[test]
fn a07_tree_space_combinatorics() {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SUITE_SEED, 7_000));
    for (name, g) in corpus() {
        let n = g.vertex_count() as f64;
        let m = g.edge_count() as f64;
        let trees = enumerate_spanning_trees(g).unwrap();
        let d_exact = diameter_exact(g).unwrap();
        let log_count = count_spanning_trees(g).log_count;

        // Count bounds: at least 2^D, at most 2^(3 D log2 n).
        assert!(
            log_count >= d_exact as f64 * 2.0f64.ln() - 1e-9,
            "{name}: |T| < 2^D"
        );
        assert!(
            log_count <= 3.0 * d_exact as f64 * n.ln() + 1e-9,
            "{name}: |T| > n^(3D)"
        );

        // Exact ball volumes against the m^d n^d certificate.
        let step = (trees.len() / 25).max(1);
        for d in [1.0f64, 2.0] {
            let bound = ball_volume_bound(g, d).exp();
            for t in trees.iter().step_by(step) {
                let ball = trees
                    .iter()
                    .filter(|u| hamming_distance(t, u) as f64 <= d)
                    .count() as f64;
                assert!(ball <= bound + 1e-9, "{name}: ball {ball} > bound {bound}");
            }
        }

        // Greedy packing meets the size bound and its separation invariant.
        for d in [0.5f64, 1.0, 2.0] {
            let s = greedy_packing(&trees, d);
            assert!(s.verify(), "{name}: packing separation violated at d={d}");
            let floor_bound = trees.len() as f64 / (m.powf(d) * n.powf(d));
            assert!(
                s.trees.len() as f64 >= floor_bound,
                "{name}: packing size {} below bound {floor_bound}",
                s.trees.len()
            );
        }

        // Code embedding along a maximally distant pair.
        let ta = mst(g, &WeightVector::zeros(g.edge_count()));
        let r0 = diameter_2approx(g, &ta);
        let tb = trees
            .iter()
            .find(|t| hamming_distance(&ta, t) == r0)
            .unwrap();
        let code = gv_code(r0).unwrap();
        assert!(code.verify());
        let embedded = embed_code(g, &ta, tb, &code).unwrap();
        assert!(
            embedded.verify(),
            "{name}: embedded set violates separation {}",
            embedded.separation
        );
        assert_eq!(embedded.trees.len(), code.words.len());

        // Exchange postconditions on 100 random (Ta, Tb, Q) triples.
        for _ in 0..100 {
            let ta = &trees[rng.gen_range(0..trees.len())];
            let tb = &trees[rng.gen_range(0..trees.len())];
            let diff: Vec<usize> = tb
                .edge_ids()
                .iter()
                .copied()
                .filter(|&e| !ta.contains(e))
                .collect();
            let q: Vec<usize> = diff.iter().copied().filter(|_| rng.gen::<bool>()).collect();
            let t = iterated_exchange(g, ta, tb, &q).unwrap();
            let got: Vec<usize> = t
                .edge_ids()
                .iter()
                .copied()
                .filter(|&e| !ta.contains(e))
                .collect();
            assert_eq!(got, q, "{name}: surgery difference mismatch");
            assert_eq!(
                hamming_distance(tb, &t),
                hamming_distance(tb, ta) - q.len(),
                "{name}: surgery distance mismatch"
            );
        }
    }
    println!(
        "PASS tree-space combinatorics on {} corpus graphs (count bounds, balls, packing, embedding, surgery)",
        corpus().len()
    );
}

/// Packing lower-bound instances: every non-vacuous instance built from the
/// corpus has pairwise-disjoint light sets, neighbor-radius certificates
/// within 1e-12, and neither mechanism beats the |S|^(-1/2) success cap by
/// more than 3 standard errors.
#[test]
fn a08_packing_instances_and_stress() {
    let mut built = 0usize;
    let mut skipped = 0usize;
    for (gi, (name, g)) in corpus().iter().enumerate() {
        let set = match dissimilar_set(g) {
            Ok(s) => s,
            Err(e) => panic!("{name}: dissimilar set failed: {e}"),
        };
        if set.trees.len() < 2 {
            skipped += 1;
            continue;
        }
        for relation in [NeighborRelation::L1, NeighborRelation::Linf] {
            for eps in [0.5, 1.0, 2.0] {
                let instance = match build_packing_instance(g, &set, eps, relation) {
                    Ok(inst) => inst,
                    Err(Error::Validation(_)) => {
                        skipped += 1;
                        continue; // vacuous at this epsilon
                    }
                    Err(e) => panic!("{name}: {e}"),
                };
                built += 1;

                let report = verify_disjointness(g, &instance).unwrap();
                assert!(
                    report.disjoint,
                    "{name} {relation} eps {eps}: light sets overlap"
                );

                let d_big = instance.diameter.value() as f64;
                for i in 0..instance.weights.len() {
                    for j in i + 1..instance.weights.len() {
                        let (a, b) = (&instance.weights[i], &instance.weights[j]);
                        assert!(
                            a.l1_distance(b) <= 2.0 * instance.alpha * d_big + 1e-12,
                            "{name}: l1 radius certificate"
                        );
                        assert!(
                            a.linf_distance(b) <= instance.alpha + 1e-12,
                            "{name}: linf radius certificate"
                        );
                    }
                }

                let trials = (20_000 / instance.weights.len() as u64).max(25);
                for mechanism in [Mechanism::Laplace, Mechanism::Exponential] {
                    let stress = stress_mechanism(
                        g,
                        &instance,
                        mechanism,
                        trials,
                        derive_seed(SUITE_SEED, 8_000 + gi as u64),
                    )
                    .unwrap();
                    let se = (stress.cap * (1.0 - stress.cap) / trials as f64).sqrt();
                    let min = stress.min_fraction.unwrap();
                    assert!(
                        min <= stress.cap + 3.0 * se,
                        "{name} {relation} eps {eps} {mechanism}: min fraction {min} vs cap {} (trials {trials})",
                        stress.cap
                    );
                }
            }
        }
    }
    assert!(built >= 12, "expected the clique instances to be non-vacuous, built {built}");
    println!(
        "PASS packing instances: {built} non-vacuous instances verified (disjointness, radii, stress caps), {skipped} vacuous skipped"
    );
}

/// Determinism: repeated `release` invocations are byte-identical, repeated
/// `bench` runs agree on everything but the wall-clock column, and the
/// shift/scale invariances hold to 1e-12.
#[test]
fn a09_determinism_and_invariances() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_dpmst");
    let run = |args: &[&str]| -> Vec<u8> {
        let out = Command::new(bin)
            .current_dir(dir.path())
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{args:?}: {out:?}");
        out.stdout
    };
    run(&["gen", "--family", "grid", "--params", "3,3", "--out", "g.txt"]);
    let w = uniform_weights(12, derive_seed(SUITE_SEED, 9_000));
    let text: String = w.values().iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(dir.path().join("w.txt"), text).unwrap();
    for mech in ["laplace", "expmech"] {
        let args = [
            "release", "--graph", "g.txt", "--weights", "w.txt", "--mech", mech, "--rel",
            "linf", "--eps", "1", "--seed", "31",
        ];
        assert_eq!(run(&args), run(&args), "release rerun differs for {mech}");
    }

    let spec = r#"
[graph]
family = "grid"
params = [3, 3]

[weights]
source = "uniform"

[run]
mechanism = "expmech"
relation = "l1"
epsilons = [0.5, 1.0]
trials = 25
seed = 77
out = "results.csv"
"#;
    std::fs::write(dir.path().join("spec.toml"), spec).unwrap();
    run(&["bench", "--spec", "spec.toml"]);
    let first = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    run(&["bench", "--spec", "spec.toml", "--out", "again.csv"]);
    let second = std::fs::read_to_string(dir.path().join("again.csv")).unwrap();
    let strip_runtime = |text: &str| -> String {
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip_runtime(&first), strip_runtime(&second), "bench rerun differs");

    // Shift invariance of the exact exponential-mechanism distribution.
    let g = generate::clique(5).unwrap();
    let trees = enumerate_spanning_trees(&g).unwrap();
    let w = uniform_weights(g.edge_count(), derive_seed(SUITE_SEED, 9_100));
    for c in [-17.5, 0.25, 400.0] {
        let shifted = w
            .add(&WeightVector::new(vec![c; g.edge_count()]).unwrap())
            .unwrap();
        for relation in [NeighborRelation::L1, NeighborRelation::Linf] {
            let a = exact_distribution(&g, &trees, &w, 1.0, relation);
            let b = exact_distribution(&g, &trees, &shifted, 1.0, relation);
            let gap = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(gap < 1e-12, "shift invariance violated: {gap}");
        }
    }

    // Scale invariance of sampler inclusion probabilities.
    let factors: Vec<f64> = (0..g.edge_count()).map(|i| 0.25 + 0.3 * i as f64).collect();
    let scaled: Vec<f64> = factors.iter().map(|q| q * 512.0).collect();
    for edge in 0..2 {
        let a = inclusion_probability(&g, &factors, &[], edge).unwrap();
        let b = inclusion_probability(&g, &scaled, &[], edge).unwrap();
        assert!((a - b).abs() < 1e-12, "scale invariance violated");
    }
    println!("PASS determinism: byte-identical reruns; shift/scale invariances within 1e-12");
}

/// The linear-time eccentricity estimate brackets the exact diameter:
/// D/2 <= R0 <= D on every corpus graph.
#[test]
fn a10_diameter_two_approximation() {
    for (name, g) in corpus() {
        let d = diameter_exact(g).unwrap();
        let t0 = mst(g, &WeightVector::zeros(g.edge_count()));
        let r0 = diameter_2approx(g, &t0);
        assert!(
            r0 <= d && d <= 2 * r0,
            "{name}: R0 {r0} vs exact diameter {d}"
        );
    }
    println!(
        "PASS diameter 2-approximation brackets the exact value on {} corpus graphs",
        corpus().len()
    );
}
