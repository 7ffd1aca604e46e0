//! Batch front end: generate synthetic collections, summarize them,
//! embed them with any method family, classify embeddings, and merge
//! score tables into a comparison report.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use sgvec::data::{
    collection_stats, generate_planted, load_collection, save_collection, ClassRule,
    GeneratorConfig, GraphCollection,
};
use sgvec::embed::{
    embed_collection, read_embeddings, write_embeddings, EmbeddingMatrix, PvdbowConfig,
};
use sgvec::eval::{cross_validate, format_report_table, LabeledEmbeddings, ReportRow, C_GRID};
use sgvec::sine::{embed_collection_sine, Aggregate, SineConfig};
use sgvec::wl::WlVariant;
use sgvec::wsgcn::{
    embed_collection_wsgcn, MasterScheme, ReprMode, VertexAggregate, WsgcnConfig,
};
use sgvec::{Result, SgError};

const BUILD: &str = match option_env!("SGVEC_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

#[derive(Parser)]
#[command(name = "sgvec", version, about = "Whole-graph embeddings of signed networks")]
struct Cli {
    /// Global random seed; all randomness is derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (1 = bit-exact reference mode). Falls back to the
    /// SGVEC_THREADS environment variable, then to 1.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClassRuleArg {
    ClusterCount,
    NoiseBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Triad model, vertex vectors summed.
    SineSum,
    /// Triad model, vertex vectors averaged.
    SineAvg,
    /// Sign-blind relabeling + document embedding.
    G2v,
    /// Sign-annotated relabeling + document embedding.
    Sg2vn,
    /// Dual balance-aware relabeling + document embedding.
    Sg2vsb,
    /// Signed convolution without masters (vertex-sum readout).
    Sgcn,
    /// Signed convolution, one all-positive master.
    #[value(name = "wsgcn+")]
    WsgcnPlus,
    /// Signed convolution, one all-negative master.
    #[value(name = "wsgcn-")]
    WsgcnMinus,
    /// Signed convolution, positive and negative masters.
    #[value(name = "wsgcn+-", alias = "wsgcn±")]
    WsgcnPlusMinus,
    /// Signed convolution, masters on the optimal bisection.
    WsgcnSb,
    /// Signed convolution, one master per generalized-balance cluster.
    WsgcnGb,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::SineSum => "sine-sum",
            MethodArg::SineAvg => "sine-avg",
            MethodArg::G2v => "g2v",
            MethodArg::Sg2vn => "sg2vn",
            MethodArg::Sg2vsb => "sg2vsb",
            MethodArg::Sgcn => "sgcn",
            MethodArg::WsgcnPlus => "wsgcn+",
            MethodArg::WsgcnMinus => "wsgcn-",
            MethodArg::WsgcnPlusMinus => "wsgcn+-",
            MethodArg::WsgcnSb => "wsgcn-sb",
            MethodArg::WsgcnGb => "wsgcn-gb",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition collection on disk.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_graphs: usize,
        #[arg(long, default_value_t = 12)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        #[arg(long, default_value_t = 0.4)]
        density_min: f64,
        #[arg(long, default_value_t = 1.0)]
        density_max: f64,
        /// Comma-separated sign-noise levels, each in [0, 0.5).
        #[arg(long, default_value = "0.05,0.15", value_delimiter = ',')]
        noise: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ClassRuleArg::ClusterCount)]
        class_rule: ClassRuleArg,
    },
    /// Summary statistics of a collection (CSV).
    Stats {
        #[arg(long)]
        collection: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a collection with one method.
    Embed {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Relabeling iterations or convolution layers, 1-5.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Optional key=value file supplying defaults; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Cross-validate a classifier on an embedding file.
    Classify {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        collection: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print an aligned text table to stderr.
        #[arg(long)]
        table: bool,
    },
    /// Merge classify CSVs into a best-per-method comparison table.
    Report {
        /// One or more score CSV files.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_generate(
    seed: u64,
    out: &Path,
    config: GeneratorConfig,
) -> Result<()> {
    let _ = seed;
    let collection = generate_planted(&config)?;
    let manifest = save_collection(out, &collection)?;
    eprintln!(
        "wrote {} graphs to {} ({} classes)",
        collection.len(),
        manifest.display(),
        collection.class_names.len()
    );
    Ok(())
}

fn cmd_stats(seed: u64, collection: &Path, out: Option<&Path>) -> Result<()> {
    let c = load_collection(collection)?;
    let stats = collection_stats(&c, seed);
    write_or_print(out, &stats.to_csv())
}

/// key=value configuration file; unknown keys are rejected.
fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| SgError::Config(format!("{}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SgError::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !["method", "depth", "dim", "epochs"].contains(&key.as_str()) {
            return Err(SgError::Config(format!(
                "{}:{}: unknown key {key:?}",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

struct EmbedRun {
    method: MethodArg,
    depth: usize,
    dim: usize,
    epochs: usize,
}

fn resolve_embed_run(
    method: Option<MethodArg>,
    depth: Option<usize>,
    dim: Option<usize>,
    epochs: Option<usize>,
    config: Option<&Path>,
) -> Result<EmbedRun> {
    let file = match config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    let parse_usize = |key: &str| -> Result<Option<usize>> {
        match file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| SgError::Config(format!("config key {key}: bad value {v:?}"))),
        }
    };
    let method = match method {
        Some(m) => m,
        None => match file.get("method") {
            Some(name) => MethodArg::from_str(name, true)
                .map_err(|_| SgError::Config(format!("config key method: unknown value {name:?}")))?,
            None => return Err(SgError::Config("no method given (flag or config file)".into())),
        },
    };
    let depth = depth.or(parse_usize("depth")?).unwrap_or(3);
    if !(1..=5).contains(&depth) {
        return Err(SgError::Config(format!("depth must be in 1..=5, got {depth}")));
    }
    let dim = dim.or(parse_usize("dim")?).unwrap_or(64);
    let epochs = epochs.or(parse_usize("epochs")?).unwrap_or(20);
    if dim == 0 || epochs == 0 {
        return Err(SgError::Config("dim and epochs must be positive".into()));
    }
    Ok(EmbedRun {
        method,
        depth,
        dim,
        epochs,
    })
}

fn run_embedding(
    collection: &GraphCollection,
    run: &EmbedRun,
    seed: u64,
) -> Result<(EmbeddingMatrix, Option<Vec<sgvec::wsgcn::WsgcnMeta>>)> {
    let graphs = &collection.graphs;
    let ids = &collection.ids;
    match run.method {
        MethodArg::G2v | MethodArg::Sg2vn | MethodArg::Sg2vsb => {
            let variant = match run.method {
                MethodArg::G2v => WlVariant::Unsigned,
                MethodArg::Sg2vn => WlVariant::Sg2vn,
                _ => WlVariant::Sg2vsb,
            };
            let config = PvdbowConfig {
                dim: run.dim,
                epochs: run.epochs,
                ..PvdbowConfig::default()
            };
            let (matrix, _) = embed_collection(graphs, ids, variant, run.depth, &config, seed)?;
            Ok((matrix, None))
        }
        MethodArg::SineSum | MethodArg::SineAvg => {
            let config = SineConfig {
                dim: run.dim,
                epochs: run.epochs,
                ..SineConfig::default()
            };
            let mode = if run.method == MethodArg::SineSum {
                Aggregate::Sum
            } else {
                Aggregate::Average
            };
            let matrix = embed_collection_sine(graphs, ids, &config, mode, seed)?;
            Ok((matrix, None))
        }
        _ => {
            let scheme = match run.method {
                MethodArg::Sgcn => MasterScheme::None,
                MethodArg::WsgcnPlus => MasterScheme::Plus,
                MethodArg::WsgcnMinus => MasterScheme::Minus,
                MethodArg::WsgcnPlusMinus => MasterScheme::PlusMinus,
                MethodArg::WsgcnSb => MasterScheme::Sb,
                _ => MasterScheme::Gb,
            };
            let config = WsgcnConfig {
                dim: run.dim,
                layers: run.depth,
                epochs: run.epochs,
                ..WsgcnConfig::default()
            };
            let (matrix, metas) = embed_collection_wsgcn(
                graphs,
                ids,
                scheme,
                &config,
                ReprMode::LastLayer,
                VertexAggregate::Sum,
                seed,
            )?;
            Ok((matrix, Some(metas)))
        }
    }
}

fn cmd_embed(
    seed: u64,
    collection_path: &Path,
    run: &EmbedRun,
    out: &Path,
) -> Result<()> {
    let collection = load_collection(collection_path)?;
    if collection.is_empty() {
        return Err(SgError::Data("collection is empty".into()));
    }
    let start = Instant::now();
    let (matrix, metas) = run_embedding(&collection, run, seed)?;
    let seconds_per_graph = start.elapsed().as_secs_f64() / collection.len() as f64;
    let comments = vec![
        format!("method={}", run.method.name()),
        format!("depth={}", run.depth),
        format!("dim={}", run.dim),
        format!("epochs={}", run.epochs),
        format!("seed={seed}"),
        format!("build={BUILD}"),
        format!("seconds_per_graph={seconds_per_graph:.6}"),
    ];
    write_embeddings(out, &collection.ids, &matrix, &comments)?;
    if let Some(metas) = metas {
        let mut sidecar = String::from("graph_id scheme masters partition_checksum frustration\n");
        for m in &metas {
            sidecar.push_str(&format!(
                "{} {} {} {} {}\n",
                m.id,
                m.scheme.name(),
                m.master_count,
                if m.partition_checksum.is_empty() { "-" } else { &m.partition_checksum },
                m.frustration.map_or("-".into(), |f| f.to_string()),
            ));
        }
        std::fs::write(out.with_extension("meta"), sidecar)?;
    }
    eprintln!(
        "embedded {} graphs with {} (depth {}) in {:.2}s",
        collection.len(),
        run.method.name(),
        run.depth,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Leading `# key=value` comments of an embedding file.
fn embedding_header(path: &Path) -> Result<HashMap<String, String>> {
    let content = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for line in content.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim().split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}

fn cmd_classify(
    seed: u64,
    embeddings_path: &Path,
    collection_path: &Path,
    folds: usize,
    out: Option<&Path>,
    table: bool,
) -> Result<()> {
    let (ids, matrix) = read_embeddings(embeddings_path)?;
    let collection = load_collection(collection_path)?;
    let label_by_id: HashMap<&str, usize> = collection
        .ids
        .iter()
        .map(String::as_str)
        .zip(collection.labels.iter().copied())
        .collect();
    let missing: Vec<&String> = ids.iter().filter(|id| !label_by_id.contains_key(id.as_str())).collect();
    if !missing.is_empty() {
        return Err(SgError::Data(format!(
            "embedding ids missing from the manifest: {}",
            missing
                .iter()
                .take(5)
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    if ids.len() != collection.len() {
        return Err(SgError::Data(format!(
            "embedding file has {} rows but the manifest lists {} graphs",
            ids.len(),
            collection.len()
        )));
    }
    let labels: Vec<usize> = ids.iter().map(|id| label_by_id[id.as_str()]).collect();
    let data = LabeledEmbeddings::new(matrix, labels)?;
    let report = cross_validate(&data, folds, &C_GRID, seed)?;

    let header = embedding_header(embeddings_path)?;
    let method = header.get("method").cloned().unwrap_or_else(|| "unknown".into());
    let depth = header.get("depth").cloned().unwrap_or_else(|| "-".into());
    let seconds = header
        .get("seconds_per_graph")
        .cloned()
        .unwrap_or_else(|| "0".into());

    let mut csv = String::from(
        "method,parameter,macro_precision,macro_recall,macro_f,accuracy,seconds_per_graph\n",
    );
    csv.push_str(&format!(
        "{method},{depth},{:.2},{:.2},{:.2},{:.2},{seconds}\n",
        report.macro_precision, report.macro_recall, report.macro_f, report.accuracy
    ));
    write_or_print(out, &csv)?;
    if table {
        let rows = vec![ReportRow {
            method,
            parameter: depth,
            macro_precision: report.macro_precision,
            macro_recall: report.macro_recall,
            macro_f: report.macro_f,
        }];
        eprint!("{}", format_report_table(&rows));
    }
    Ok(())
}

struct ScoreLine {
    method: String,
    parameter: String,
    precision: f64,
    recall: f64,
    f: f64,
    seconds: f64,
}

fn read_score_csv(path: &Path) -> Result<Vec<ScoreLine>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| SgError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| SgError::Data(format!("{}: empty score file", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| SgError::Data(format!("{}: missing column {name}", path.display())))
    };
    let (im, ip, ir, if_, ipar) = (
        idx("method")?,
        idx("macro_precision")?,
        idx("macro_recall")?,
        idx("macro_f")?,
        idx("parameter")?,
    );
    let isec = columns.iter().position(|c| *c == "seconds_per_graph");
    let mut out = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| SgError::Data(format!("{}: bad number {:?}", path.display(), fields[i])))
        };
        out.push(ScoreLine {
            method: fields[im].to_string(),
            parameter: fields[ipar].to_string(),
            precision: get(ip)?,
            recall: get(ir)?,
            f: get(if_)?,
            seconds: isec.map_or(Ok(0.0), get)?,
        });
    }
    Ok(out)
}

fn cmd_report(inputs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    if inputs.is_empty() {
        return Err(SgError::Config("report needs at least one score CSV".into()));
    }
    let mut all = Vec::new();
    for path in inputs {
        all.extend(read_score_csv(path)?);
    }
    // Best row per method by macro-F.
    let mut best: Vec<ScoreLine> = Vec::new();
    for line in all {
        match best.iter_mut().find(|b| b.method == line.method) {
            Some(b) if b.f >= line.f => {}
            Some(b) => *b = line,
            None => best.push(line),
        }
    }
    let max_p = best.iter().map(|b| b.precision).fold(f64::NEG_INFINITY, f64::max);
    let max_r = best.iter().map(|b| b.recall).fold(f64::NEG_INFINITY, f64::max);
    let max_f = best.iter().map(|b| b.f).fold(f64::NEG_INFINITY, f64::max);
    let cell = |v: f64, max: f64| {
        if (v - max).abs() < 1e-9 {
            format!("*{v:.2}*")
        } else {
            format!("{v:.2}")
        }
    };
    let mut table = format!(
        "{:<12} {:<10} {:>12} {:>12} {:>12} {:>14}\n",
        "method", "parameter", "precision", "recall", "f-measure", "sec/graph"
    );
    for b in &best {
        table.push_str(&format!(
            "{:<12} {:<10} {:>12} {:>12} {:>12} {:>14.6}\n",
            b.method,
            b.parameter,
            cell(b.precision, max_p),
            cell(b.recall, max_r),
            cell(b.f, max_f),
            b.seconds,
        ));
    }
    write_or_print(out, &table)
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("SGVEC_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| SgError::Config(format!("thread pool: {e}")))?;

    match cli.command {
        Command::Generate {
            out,
            n_graphs,
            n_min,
            n_max,
            k_min,
            k_max,
            density_min,
            density_max,
            noise,
            class_rule,
        } => cmd_generate(
            cli.seed,
            &out,
            GeneratorConfig {
                n_graphs,
                order_range: (n_min, n_max),
                cluster_range: (k_min, k_max),
                density_range: (density_min, density_max),
                noise_choices: noise,
                class_rule: match class_rule {
                    ClassRuleArg::ClusterCount => ClassRule::ClusterCount,
                    ClassRuleArg::NoiseBand => ClassRule::NoiseBand,
                },
                seed: cli.seed,
            },
        ),
        Command::Stats { collection, out } => cmd_stats(cli.seed, &collection, out.as_deref()),
        Command::Embed {
            collection,
            method,
            depth,
            dim,
            epochs,
            out,
            config,
        } => {
            let run = resolve_embed_run(method, depth, dim, epochs, config.as_deref())?;
            cmd_embed(cli.seed, &collection, &run, &out)
        }
        Command::Classify {
            embeddings,
            collection,
            folds,
            out,
            table,
        } => cmd_classify(
            cli.seed,
            &embeddings,
            &collection,
            folds,
            out.as_deref(),
            table,
        ),
        Command::Report { inputs, out } => cmd_report(&inputs, out.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
