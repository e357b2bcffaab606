//! File-based interface to the matchgate contraction library.
//!
//! Exit codes: 0 success, 2 validation failure (non-matchgate tensor or bad
//! planar cut), 3 size limit exceeded on an oracle path.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mgc::error::Error;
use mgc::io::{CompiledGraphJson, NetworkJson, ReportJson, TensorJson};
use mgc::matchgate::{check_matchgate, from_dense};
use mgc::pipeline::{
    contract_with_options, gen_ising_network, gen_matching_network, gen_random_network, grid_graph,
};

#[derive(Parser)]
#[command(name = "mgc", about = "Exact contraction of matchgate tensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contract a tensor network (two-stage planar-cut + genus pipeline).
    Contract {
        /// Network JSON file.
        network: PathBuf,
        /// Write a JSON contraction report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Cross-check against direct summation (small networks only).
        #[arg(long)]
        bruteforce_check: bool,
    },
    /// Check a tensor against the matchgate identities.
    Check {
        /// Tensor JSON file (dense or canonical).
        tensor: PathBuf,
        /// Relative tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Compile a matchgate into a planar matching-sum graph.
    CompileMatchsum {
        /// Tensor JSON file (dense or canonical).
        tensor: PathBuf,
        /// Output graph JSON file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate example networks.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Perfect-matching-sum network on a grid.
    Matching {
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 4)]
        cols: usize,
        /// Wrap the grid into a torus (wrap edges become the planar cut).
        #[arg(long)]
        torus: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Ising partition-function network on a grid (prints the prefactor).
    Ising {
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        /// Uniform coupling βJ.
        #[arg(long, default_value_t = 0.4)]
        beta: f64,
        #[arg(long)]
        torus: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random planar matchgate network on a thinned grid.
    Random {
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NotAMatchgate { .. }
                | Error::BadCut(_)
                | Error::BadNetwork(_)
                | Error::BadPairing(_)
                | Error::NotPlanar(_)
                | Error::ZeroTensor
                | Error::NotSkew { .. }
                | Error::Disconnected => ExitCode::from(2),
                Error::SizeLimit { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Contract {
            network,
            report,
            bruteforce_check,
        } => {
            let text = std::fs::read_to_string(network)?;
            let json: NetworkJson = serde_json::from_str(&text)?;
            let net = json.to_network()?;
            let r = contract_with_options(&net, bruteforce_check)?;
            println!("value = {} + {}i", r.value.re, r.value.im);
            println!(
                "planar stage: matrix dimension {}, {:.3}s",
                r.planar_matrix_dim, r.stage1_seconds
            );
            println!(
                "genus stage: intersection rank {}, {} Pfaffian term(s), {:.3}s",
                r.genus_rank, r.pfaffian_terms, r.stage2_seconds
            );
            if let Some(bf) = r.bruteforce_value {
                let diff = (r.value - bf).norm();
                println!("bruteforce = {} + {}i (|diff| = {diff:.3e})", bf.re, bf.im);
            }
            if let Some(path) = report {
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&ReportJson::from_report(&r))?,
                )?;
            }
            Ok(())
        }
        Command::Check { tensor, tol } => {
            let text = std::fs::read_to_string(tensor)?;
            let json: TensorJson = serde_json::from_str(&text)?;
            let dense = json.to_vertex()?.to_dense()?;
            let report = check_matchgate(&dense, tol);
            println!(
                "matchgate: {} (worst violation {:.3e}, scale {:.3e})",
                report.is_matchgate, report.worst_violation, report.scale
            );
            if report.is_matchgate {
                Ok(())
            } else {
                Err(Error::NotAMatchgate {
                    worst: report.worst_violation,
                    tol: tol * report.scale,
                })
            }
        }
        Command::CompileMatchsum { tensor, output } => {
            let text = std::fs::read_to_string(tensor)?;
            let json: TensorJson = serde_json::from_str(&text)?;
            let g = match json.to_vertex()? {
                mgc::network::VertexTensor::Canonical(g) => g,
                mgc::network::VertexTensor::Dense(d) => from_dense(&d, 1e-9)?,
            };
            let compiled = mgc::planar::compile_matchsum(&g)?;
            let dump = CompiledGraphJson::from_graph(&compiled.graph, None, &compiled.externals);
            std::fs::write(output, serde_json::to_string_pretty(&dump)?)?;
            println!(
                "compiled graph: {} vertices, {} edges, {} externals",
                compiled.graph.n_vertices(),
                compiled.graph.n_edges(),
                compiled.externals.len()
            );
            Ok(())
        }
        Command::Gen { kind } => match kind {
            GenKind::Matching {
                rows,
                cols,
                torus,
                seed,
                output,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = grid_edge_count(rows, cols, torus);
                let weights: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.gen_range(0.2..1.2), 0.0))
                    .collect();
                let g = grid_graph(rows, cols, torus, &weights)?;
                let net = gen_matching_network(&g)?;
                std::fs::write(
                    output,
                    serde_json::to_string_pretty(&NetworkJson::from_network(&net))?,
                )?;
                println!(
                    "matching network: {} vertices, {} edges, cut size {}",
                    net.n_vertices(),
                    net.n_edges(),
                    net.planar_cut().map(|c| c.len()).unwrap_or(0)
                );
                Ok(())
            }
            GenKind::Ising {
                rows,
                cols,
                beta,
                torus,
                output,
            } => {
                let n_edges = grid_edge_count(rows, cols, torus);
                let weights = vec![Complex64::new(beta, 0.0); n_edges];
                let g = grid_graph(rows, cols, torus, &weights)?;
                let (net, prefactor) = gen_ising_network(&g)?;
                std::fs::write(
                    output,
                    serde_json::to_string_pretty(&NetworkJson::from_network(&net))?,
                )?;
                println!(
                    "ising network: {} vertices, {} edges; Z = prefactor × value, prefactor = {} + {}i",
                    net.n_vertices(),
                    net.n_edges(),
                    prefactor.re,
                    prefactor.im
                );
                Ok(())
            }
            GenKind::Random {
                rows,
                cols,
                seed,
                output,
            } => {
                let net = gen_random_network(seed, rows, cols, 0.85)?;
                std::fs::write(
                    output,
                    serde_json::to_string_pretty(&NetworkJson::from_network(&net))?,
                )?;
                println!(
                    "random network: {} vertices, {} edges",
                    net.n_vertices(),
                    net.n_edges()
                );
                Ok(())
            }
        },
    }
}

fn grid_edge_count(rows: usize, cols: usize, torus: bool) -> usize {
    let h = if torus && cols > 1 {
        rows * cols
    } else {
        rows * (cols - 1)
    };
    let v = if torus && rows > 1 {
        rows * cols
    } else {
        (rows - 1) * cols
    };
    h + v
}
