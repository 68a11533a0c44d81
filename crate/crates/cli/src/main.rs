//! Command-line front end: graph generation, private release, diameter and
//! lower-bound reports, privacy audits, and the seeded experiment runner.
//!
//! Exit codes: 0 success, 1 validation error, 2 enumeration/scan guard
//! exceeded, 3 numerics error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpmst::{
    audit_mechanisms, diameter_exact, dissimilar_set, io, load_spec, lower_bound_value, mst,
    release, rows_to_csv, run_experiment, separation_experiment, separation_to_csv,
    tree_weight, diameter_2approx, Error, GraphFamily, Mechanism, MechanismConfig,
    NeighborRelation, WeightVector,
};

/// Seed for the audit's random neighbor directions; fixed so audits are
/// reproducible run to run.
const AUDIT_DIRECTION_SEED: u64 = 0xA0D1_7D15;

#[derive(Parser)]
#[command(name = "dpmst", version, about = "Differentially private minimum spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file from a named family.
    Gen {
        /// cycle, clique, grid, tree_plus_k, or gnp_connected.
        #[arg(long)]
        family: String,
        /// Comma-separated numeric parameters, e.g. `--params 20,4,7`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deterministic minimum spanning tree of a weighted graph.
    Mst {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Release a spanning tree under differential privacy.
    Release {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// laplace or expmech.
        #[arg(long)]
        mech: String,
        /// l1 or linf.
        #[arg(long)]
        rel: String,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Tree-space diameter: 2-approximation, optionally the exact value.
    Diam {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Build a set of pairwise-distant spanning trees.
    Dissimilar {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concrete packing lower bound for a graph at a privacy level.
    Lowerbound {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        rel: String,
    },
    /// Exact privacy audit over sampled neighboring weight vectors.
    Audit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        rel: String,
        /// Number of neighboring directions to test.
        #[arg(long)]
        dirs: usize,
    },
    /// Run a TOML experiment spec and write CSV rows.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laplace vs exponential mechanism on growing cycles under linf.
    Separation {
        /// Comma-separated cycle sizes, e.g. `--sizes 8,16,32,64`.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Io(_) => ExitCode::from(1),
                Error::GuardExceeded(_) => ExitCode::from(2),
                Error::Numerics(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(command: Command) -> dpmst::Result<()> {
    match command {
        Command::Gen { family, params, out } => {
            let family = GraphFamily::from_name_params(&family, &params)?;
            let graph = dpmst::generate_graph(&family)?;
            io::write_graph(&out, &graph)?;
            println!(
                "wrote {} ({}): n={} m={}",
                out.display(),
                family,
                graph.vertex_count(),
                graph.edge_count()
            );
            Ok(())
        }
        Command::Mst { graph, weights } => {
            let g = io::read_graph(graph)?;
            let w = io::read_weights(weights)?;
            dpmst::validate_weights(&g, &w)?;
            let t = mst(&g, &w);
            println!("{t}");
            println!("weight {}", tree_weight(&w, &t));
            Ok(())
        }
        Command::Release {
            graph,
            weights,
            mech,
            rel,
            eps,
            seed,
        } => {
            let g = io::read_graph(graph)?;
            let w = io::read_weights(weights)?;
            dpmst::validate_weights(&g, &w)?;
            let mechanism: Mechanism = mech.parse()?;
            let relation: NeighborRelation = rel.parse()?;
            let cfg = MechanismConfig::new(eps, relation, seed)?;
            let t = release(&g, &w, mechanism, &cfg)?;
            println!("{t}");
            println!("error {}", tree_weight(&w, &t) - tree_weight(&w, &mst(&g, &w)));
            Ok(())
        }
        Command::Diam { graph, exact } => {
            let g = io::read_graph(graph)?;
            let t0 = mst(&g, &WeightVector::zeros(g.edge_count()));
            println!("R0 {}", diameter_2approx(&g, &t0));
            if exact {
                println!("D {}", diameter_exact(&g)?);
            }
            Ok(())
        }
        Command::Dissimilar { graph, out } => {
            let g = io::read_graph(graph)?;
            let s = dissimilar_set(&g)?;
            std::fs::write(&out, io::trees_to_string(&s.trees))?;
            println!("size {}", s.trees.len());
            println!("separation {}", s.separation);
            Ok(())
        }
        Command::Lowerbound { graph, eps, rel } => {
            let g = io::read_graph(graph)?;
            let relation: NeighborRelation = rel.parse()?;
            let report = lower_bound_value(&g, eps, relation)?;
            println!("value {}", report.value);
            println!("set_size {}", report.set_size);
            println!("separation {}", report.separation);
            println!("diameter {}", report.diameter);
            println!("vacuous {}", report.vacuous);
            Ok(())
        }
        Command::Audit {
            graph,
            weights,
            eps,
            rel,
            dirs,
        } => {
            let g = io::read_graph(graph)?;
            let w = io::read_weights(weights)?;
            let relation: NeighborRelation = rel.parse()?;
            let report = audit_mechanisms(&g, &w, eps, relation, dirs, AUDIT_DIRECTION_SEED)?;
            println!("relation {}", report.relation);
            println!("epsilon {}", report.epsilon);
            println!("directions {}", report.directions);
            println!("expmech_max_ratio {}", report.expmech_max_ratio);
            println!("bound {}", report.bound);
            println!("expmech_pass {}", report.expmech_pass);
            println!("laplace_max_budget {}", report.laplace_max_budget);
            println!("laplace_pass {}", report.laplace_pass);
            println!("pass {}", report.expmech_pass && report.laplace_pass);
            Ok(())
        }
        Command::Bench { spec, out } => {
            let experiment = load_spec(&spec)?;
            let rows = run_experiment(&experiment)?;
            let csv = rows_to_csv(&rows)?;
            let path = out
                .or(experiment.run.out.clone())
                .ok_or_else(|| Error::validation("no output path: pass --out or set run.out"))?;
            std::fs::write(&path, csv)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(())
        }
        Command::Separation {
            sizes,
            eps,
            trials,
            seed,
            out,
        } => {
            if sizes.is_empty() {
                return Err(Error::validation("need at least one cycle size"));
            }
            let rows = separation_experiment(&sizes, eps, trials, seed)?;
            let csv = separation_to_csv(&rows)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, csv)?;
                    println!("wrote {} ({} rows)", path.display(), rows.len());
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
