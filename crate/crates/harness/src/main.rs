//! Command-line front end: simulation, embedding, clustering, theory
//! values, sweeps, and real-data evaluation as composable subcommands.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::Rng;
use serde_json::json;

use dase_core::cluster::{gmm, kmeans, ClusterLabels, GmmConfig, KMeansConfig};
use dase_core::embed::{ase_embedding, dase_embedding, laplacian_sc_embedding};
use dase_core::graph::{
    edge_density, expected_density, sample_assignment, sample_sbm, scaled_block_matrix, BlockModel,
};
use dase_core::metrics::{
    ase_block_moments, bound_constants_from_model, bound_core, bound_general_dase,
    chernoff_information, dase_block_moments, misclustering, nmi, BoundMethod,
};
use dase_core::rng::seeded_rng;

use dase_harness::config::{ClustererChoice, ExperimentConfig, MethodChoice, Scenario};
use dase_harness::heatmap::{heatmap_order, write_heatmap_csv};
use dase_harness::ingest::{parse_edge_list, write_edge_list, write_names_csv, IngestedGraph};
use dase_harness::real::{evaluate_real, RealEvalOptions};
use dase_harness::report::{
    read_embedding_csv, read_labels_csv, write_chernoff_csv, write_json_report, write_labels_csv,
    write_replicate_csv, write_summary_csv,
};
use dase_harness::sweep::{run_chernoff_sweep, run_sweep};

#[derive(Parser)]
#[command(
    name = "dase",
    version,
    about = "Community detection through spectral embedding of the doubled adjacency matrix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a stochastic block model and write the edge list with labels.
    Simulate(SimulateArgs),
    /// Spectrally embed an edge list.
    Embed(EmbedArgs),
    /// Cluster embedding coordinates.
    Cluster(ClusterArgs),
    /// Compare an estimated partition against reference labels.
    Evaluate(EvaluateArgs),
    /// Closed-form Chernoff information of a block model.
    Chernoff(ChernoffArgs),
    /// Misclustering bound constants across network sizes.
    Bounds(BoundsArgs),
    /// Run the replicated sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Clean a raw edge list into the canonical format.
    Ingest(IngestArgs),
    /// Reorder an adjacency matrix by cluster for plotting.
    Heatmap(HeatmapArgs),
    /// Evaluate all methods on one real network.
    Real(RealArgs),
}

/// Edge direction flags shared by the graph-reading subcommands.
#[derive(Args)]
struct DirectionArgs {
    /// Treat edges as ordered pairs (the default).
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    /// Treat edges as unordered pairs.
    #[arg(long)]
    undirected: bool,
}

impl DirectionArgs {
    fn directed(&self) -> bool {
        !self.undirected
    }
}

/// Embedding scale flags: weight singular vectors by √σ or keep them bare.
#[derive(Args)]
struct ScalingArgs {
    /// Weight coordinates by the square root of the singular values (the default).
    #[arg(long, conflicts_with = "unscaled")]
    scaled: bool,
    /// Keep bare singular vectors.
    #[arg(long)]
    unscaled: bool,
}

impl ScalingArgs {
    fn scaled(&self) -> bool {
        !self.unscaled
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of nodes.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Density scale multiplying the ratio matrix.
    #[arg(long, default_value_t = 0.05)]
    scale: f64,
    /// Proportion of the first block (two-block models only).
    #[arg(long, default_value_t = 0.5)]
    pi1: f64,
    /// Row-major block ratio matrix.
    #[arg(long, default_value = "1,0.6,0.6,0.3")]
    ratios: String,
    #[command(flatten)]
    direction: DirectionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for edges.tsv, labels.csv, meta.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    /// Edge list in `source<TAB>target` format.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    direction: DirectionArgs,
    #[arg(long, value_enum, default_value_t = MethodChoice::Dase)]
    method: MethodChoice,
    /// Embedding dimension for the adjacency-spectrum methods.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Cluster count used by the Laplacian method.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[command(flatten)]
    scaling: ScalingArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file of coordinates.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Embedding CSV produced by `embed`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ClustererChoice::Kmeans)]
    clusterer: ClustererChoice,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for labels.csv and fit.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reference labels CSV.
    #[arg(long)]
    truth: PathBuf,
    /// Estimated labels CSV.
    #[arg(long)]
    estimate: PathBuf,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChernoffArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    scale: f64,
    #[arg(long, default_value_t = 0.5)]
    pi1: f64,
    #[arg(long, default_value = "1,0.6,0.6,0.3")]
    ratios: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 0.08)]
    scale: f64,
    #[arg(long, default_value_t = 0.5)]
    pi1: f64,
    #[arg(long, default_value = "1,0.6,0.6,0.3")]
    ratios: String,
    /// Comma-separated network sizes to evaluate the bounds at.
    #[arg(long, default_value = "1000,10000,100000,1000000")]
    n_grid: String,
    #[command(flatten)]
    direction: DirectionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment description, JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Raw edge list.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    direction: DirectionArgs,
    /// Threshold positive weights to 1 instead of rejecting them.
    #[arg(long)]
    binarize: bool,
    /// Output directory for edges.tsv, names.csv, stats.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Edge list in the canonical format.
    #[arg(long)]
    input: PathBuf,
    /// Labels CSV aligned with the edge-list node ids.
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    direction: DirectionArgs,
    /// Output directory for heatmap.csv and heatmap.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RealArgs {
    /// Edge list of the network.
    #[arg(long)]
    input: PathBuf,
    /// Reference labels; agreement statistics are skipped when absent.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    direction: DirectionArgs,
    /// Threshold positive weights to 1 instead of rejecting them.
    #[arg(long)]
    binarize: bool,
    /// Methods to evaluate.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [MethodChoice::Sc, MethodChoice::Ase, MethodChoice::Dase])]
    methods: Vec<MethodChoice>,
    #[arg(long, value_enum, default_value_t = ClustererChoice::Kmeans)]
    clusterer: ClustererChoice,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[command(flatten)]
    scaling: ScalingArgs,
    /// Clustering repetitions per method.
    #[arg(long, default_value_t = 50)]
    reseeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset name recorded in the report; defaults to the input stem.
    #[arg(long)]
    name: Option<String>,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => run_simulate(args),
        Command::Embed(args) => run_embed(args),
        Command::Cluster(args) => run_cluster(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Chernoff(args) => run_chernoff(args),
        Command::Bounds(args) => run_bounds(args),
        Command::Sweep(args) => run_sweep_command(args),
        Command::Ingest(args) => run_ingest(args),
        Command::Heatmap(args) => run_heatmap(args),
        Command::Real(args) => run_real(args),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let model = build_model(&args.ratios, args.scale, args.pi1, args.direction.directed())?;
    let mut rng = seeded_rng(args.seed);
    let assignment_seed: u64 = rng.gen();
    let graph_seed: u64 = rng.gen();
    let assignment = sample_assignment(model.pi(), args.n, assignment_seed)?;
    let graph = sample_sbm(&model, &assignment, graph_seed)?;

    fs::create_dir_all(&args.out)?;
    to_file(&args.out.join("edges.tsv"), |w| write_edge_list(w, &graph))?;
    to_file(&args.out.join("labels.csv"), |w| {
        write_labels_csv(w, &ClusterLabels::from(&assignment))
    })?;
    let meta = json!({
        "n": args.n,
        "directed": graph.directed(),
        "scale": args.scale,
        "pi1": args.pi1,
        "block_matrix": matrix_rows(model.b()),
        "block_sizes": assignment.sizes(),
        "seed": args.seed,
        "expected_density": expected_density(&model),
        "realized_density": edge_density(&graph)?,
        "m": graph.edge_count(),
    });
    to_file(&args.out.join("meta.json"), |w| {
        write_json_report(w, &meta)
    })?;
    eprintln!(
        "wrote {} nodes, {} edges to {}",
        args.n,
        graph.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn run_embed(args: EmbedArgs) -> Result<()> {
    let graph = load_graph(&args.input, args.direction.directed(), false)?.adjacency;
    let embedding = match args.method {
        MethodChoice::Sc => laplacian_sc_embedding(&graph, args.k, args.seed)?,
        MethodChoice::Ase => ase_embedding(&graph, args.d, args.scaling.scaled(), args.seed)?,
        MethodChoice::Dase => dase_embedding(&graph, args.d, args.scaling.scaled(), args.seed)?,
    };
    to_file(&args.out, |w| {
        embedding.write_csv(w).map_err(Into::into)
    })?;
    Ok(())
}

fn run_cluster(args: ClusterArgs) -> Result<()> {
    let coords = read_embedding_csv(open(&args.input)?)?;
    let (labels, fit) = match args.clusterer {
        ClustererChoice::Kmeans => {
            let fit = kmeans(&coords, args.k, &KMeansConfig::default(), args.seed)?;
            let summary = json!({
                "clusterer": "kmeans",
                "k": args.k,
                "objective": fit.objective,
                "iterations": fit.iterations,
                "cluster_sizes": fit.labels.counts(),
            });
            (fit.labels, summary)
        }
        ClustererChoice::Gmm => {
            let fit = gmm(&coords, args.k, &GmmConfig::default(), args.seed)?;
            let summary = json!({
                "clusterer": "gmm",
                "k": args.k,
                "log_likelihood": fit.log_likelihood,
                "iterations": fit.iterations,
                "cluster_sizes": fit.labels.counts(),
            });
            (fit.labels, summary)
        }
    };
    fs::create_dir_all(&args.out)?;
    to_file(&args.out.join("labels.csv"), |w| write_labels_csv(w, &labels))?;
    to_file(&args.out.join("fit.json"), |w| write_json_report(w, &fit))?;
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let truth = read_labels_csv(open(&args.truth)?)
        .with_context(|| format!("reading {}", args.truth.display()))?;
    let estimate = read_labels_csv(open(&args.estimate)?)
        .with_context(|| format!("reading {}", args.estimate.display()))?;
    let wrong = misclustering(&truth, &estimate)?;
    let report = json!({
        "n": truth.n(),
        "nmi": nmi(&truth, &estimate)?,
        "misclustering_count": wrong.count,
        "misclustering_rate": wrong.rate,
    });
    emit(args.out.as_deref(), &report)
}

fn run_chernoff(args: ChernoffArgs) -> Result<()> {
    let model = build_model(&args.ratios, args.scale, args.pi1, true)?;
    let ci_ase = chernoff_information(&ase_block_moments(model.b(), model.pi())?)?;
    let sizes: Vec<f64> = model.pi().iter().map(|&p| p * args.n as f64).collect();
    let ci_dase = chernoff_information(&dase_block_moments(&model, &sizes)?)?;
    let report = json!({
        "n": args.n,
        "scale": args.scale,
        "pi1": args.pi1,
        "expected_density": expected_density(&model),
        "ci_ase": ci_ase,
        "ci_dase": ci_dase,
        "ci_ratio": ci_dase / ci_ase,
    });
    emit(args.out.as_deref(), &report)
}

fn run_bounds(args: BoundsArgs) -> Result<()> {
    let directed = args.direction.directed();
    let model = build_model(&args.ratios, args.scale, args.pi1, directed)?;
    let grid: Vec<usize> = args
        .n_grid
        .split(',')
        .map(|tok| tok.trim().parse().with_context(|| format!("bad size `{tok}`")))
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        bail!("n_grid is empty");
    }

    // The constants come from (B, π) alone — normalized to unit total size —
    // so the network size enters the bounds only through the formulas'
    // explicit log N and log N / N factors.
    let constants = bound_constants_from_model(&model, model.pi())?;
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let general_dase = bound_general_dase(&constants, n, directed)?;
        let core = constants.t.as_ref().map(|_| {
            let dase = bound_core(&constants, n, BoundMethod::Dase);
            let ase = bound_core(&constants, n, BoundMethod::Ase);
            json!({
                "bound_dase": dase.as_ref().ok(),
                "bound_ase": ase.as_ref().ok(),
                "ratio_dase_over_ase": match (&dase, &ase) {
                    (Ok(d), Ok(a)) if *a > 0.0 => Some(d / a),
                    _ => None,
                },
            })
        });
        rows.push(json!({
            "n": n,
            "bound_general_dase": general_dase,
            "core": core,
        }));
    }
    let report = json!({
        "scale": args.scale,
        "pi1": args.pi1,
        "directed": directed,
        "constants": {
            "b": constants.b,
            "btilde": constants.btilde,
            "beta": constants.beta,
            "beta_hat": constants.beta_hat,
            "pi_min": constants.pi_min,
            "t": constants.t.as_ref().map(|t| t.t),
            "ttilde": constants.t.as_ref().map(|t| t.ttilde),
        },
        "rows": rows,
    });
    emit(args.out.as_deref(), &report)
}

fn run_sweep_command(args: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config = ExperimentConfig::from_json(&text)?;
    fs::create_dir_all(&args.out)?;
    to_file(&args.out.join("config_used.json"), |w| {
        write_json_report(w, &config)
    })?;
    if config.scenario == Scenario::ChernoffSweep {
        let rows = run_chernoff_sweep(&config)?;
        to_file(&args.out.join("chernoff.csv"), |w| {
            write_chernoff_csv(w, &rows)
        })?;
        eprintln!("wrote {} grid points to {}", rows.len(), args.out.display());
    } else {
        let output = run_sweep(&config)?;
        to_file(&args.out.join("summary.csv"), |w| {
            write_summary_csv(w, &output.rows)
        })?;
        to_file(&args.out.join("replicates.csv"), |w| {
            write_replicate_csv(w, &output.log)
        })?;
        let failures: usize = output.rows.iter().map(|r| r.failures).sum();
        eprintln!(
            "wrote {} summary rows ({} replicate records, {} failures) to {}",
            output.rows.len(),
            output.log.len(),
            failures,
            args.out.display()
        );
    }
    Ok(())
}

fn run_ingest(args: IngestArgs) -> Result<()> {
    let graph = load_graph(&args.input, args.direction.directed(), args.binarize)?;
    fs::create_dir_all(&args.out)?;
    to_file(&args.out.join("edges.tsv"), |w| {
        write_edge_list(w, &graph.adjacency)
    })?;
    to_file(&args.out.join("names.csv"), |w| write_names_csv(w, &graph.names))?;
    to_file(&args.out.join("stats.json"), |w| {
        write_json_report(w, &graph.stats)
    })?;
    eprintln!(
        "{} nodes, {} edges ({} self-loops, {} duplicates, {} nonpositive weights dropped)",
        graph.stats.n,
        graph.stats.m,
        graph.stats.self_loops_dropped,
        graph.stats.duplicates_collapsed,
        graph.stats.nonpositive_dropped
    );
    Ok(())
}

fn run_heatmap(args: HeatmapArgs) -> Result<()> {
    let graph = load_graph(&args.input, args.direction.directed(), false)?.adjacency;
    let labels = read_labels_csv(open(&args.labels)?)?;
    let sidecar = heatmap_order(&graph, &labels)?;
    fs::create_dir_all(&args.out)?;
    to_file(&args.out.join("heatmap.csv"), |w| {
        write_heatmap_csv(w, &graph, &sidecar.order)
    })?;
    to_file(&args.out.join("heatmap.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &sidecar)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(())
}

fn run_real(args: RealArgs) -> Result<()> {
    let graph = load_graph(&args.input, args.direction.directed(), args.binarize)?;
    let truth = args
        .truth
        .as_ref()
        .map(|path| read_labels_csv(open(path)?).with_context(|| format!("reading {}", path.display())))
        .transpose()?;
    if let Some(truth) = &truth {
        if truth.n() != graph.adjacency.n() {
            bail!(
                "truth labels cover {} nodes but the edge list has {}",
                truth.n(),
                graph.adjacency.n()
            );
        }
    }
    let name = match &args.name {
        Some(name) => name.clone(),
        None => args
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string()),
    };
    let opts = RealEvalOptions {
        methods: args.methods.clone(),
        clusterer: args.clusterer,
        k: args.k,
        d: args.d,
        scaled: args.scaling.scaled(),
        seed: args.seed,
        reseeds: args.reseeds,
    };
    let report = evaluate_real(&name, &graph.adjacency, truth.as_ref(), &opts)?;
    let value = serde_json::to_value(&report)?;
    emit(args.out.as_deref(), &value)
}

/// Builds a block model from CLI parameters: ratio matrix × density scale,
/// with π = (π₁, 1 − π₁) for two blocks and uniform proportions otherwise.
fn build_model(ratios: &str, scale: f64, pi1: f64, directed: bool) -> Result<BlockModel> {
    let values: Vec<f64> = ratios
        .split(',')
        .map(|tok| tok.trim().parse().with_context(|| format!("bad ratio `{tok}`")))
        .collect::<Result<_>>()?;
    let k = (values.len() as f64).sqrt().round() as usize;
    if k * k != values.len() || k == 0 {
        bail!(
            "ratio list has {} entries; expected a square count (k×k row-major)",
            values.len()
        );
    }
    let ratio_matrix = DMatrix::from_row_slice(k, k, &values);
    let b = scaled_block_matrix(scale, &ratio_matrix)?;
    let pi = if k == 2 {
        if !(pi1 > 0.0 && pi1 < 1.0) {
            bail!("pi1 = {pi1} must lie strictly between 0 and 1");
        }
        vec![pi1, 1.0 - pi1]
    } else {
        vec![1.0 / k as f64; k]
    };
    Ok(BlockModel::new(b, pi, directed)?)
}

fn load_graph(path: &Path, directed: bool, binarize: bool) -> Result<IngestedGraph> {
    parse_edge_list(open(path)?, directed, binarize)
        .with_context(|| format!("reading {}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

/// Writes through a closure into a buffered file, so every command creates
/// its outputs the same way.
fn to_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}

fn emit(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    match path {
        Some(path) => to_file(path, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        }),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ratio_parsing_accepts_square_lists_only() {
        assert!(build_model("1,0.6,0.6,0.3", 0.05, 0.5, true).is_ok());
        assert!(build_model("1,0.6,0.6", 0.05, 0.5, true).is_err());
        assert!(build_model("1,0.6,0.6,nope", 0.05, 0.5, true).is_err());
        let three = build_model("1,.5,.5,.5,1,.5,.5,.5,1", 0.1, 0.5, false).unwrap();
        assert_eq!(three.k(), 3);
        assert!((three.pi()[0] - 1.0 / 3.0).abs() < 1e-15);
    }
}
