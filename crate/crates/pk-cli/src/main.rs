//! `pk` — encode incomplete tabular data into proximity representations,
//! build similarity matrices, and evaluate clustering quality.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pk_core::{encode_dataset, fit_bin_centers, gram, min_eigenvalue};

use pk_cli::harness::{self, Method};
use pk_cli::{formats, io, CliError};

#[derive(Parser)]
#[command(
    name = "pk",
    version,
    about = "Density-adaptive proximity encoding and clustering for incomplete tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit bin centers and encode a CSV into one-hot proximity blocks.
    Encode(EncodeArgs),
    /// Build the pairwise similarity (gram) matrix of an encoded dataset.
    Gram(GramArgs),
    /// Cluster a labelled CSV with k-means and score against the labels.
    Cluster(ClusterArgs),
    /// Sweep missing rates or bin counts, or benchmark encoding speed.
    Sweep(SweepArgs),
}

/// Representation used by `cluster` and `sweep`.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Proximity blocks with cascading fallback for missing cells.
    Pk,
    /// Mean/mode imputation with min-max scaling.
    Mean,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pk => Method::Pk,
            MethodArg::Mean => Method::Mean,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Label column to exclude from the features.
    #[arg(long)]
    label: Option<String>,
    /// Comma-separated cell values treated as missing ("?," = "?" or empty).
    #[arg(long, default_value = "?,")]
    markers: String,
    /// Bins per feature.
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Output prefix (.model.json, .rep.json, .rep.csv, .rep.sparse.csv).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GramArgs {
    /// Prefix of an encoded representation written by `pk encode`.
    #[arg(long)]
    rep: PathBuf,
    /// Output prefix (.gram.json, .gram.csv).
    #[arg(long)]
    out: PathBuf,
    /// Also compute the smallest eigenvalue to confirm the matrix is PSD.
    #[arg(long)]
    check_psd: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Label column holding the reference classes.
    #[arg(long)]
    label: String,
    /// Comma-separated cell values treated as missing ("?," = "?" or empty).
    #[arg(long, default_value = "?,")]
    markers: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Pk)]
    method: MethodArg,
    /// Bins per feature (pk method).
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Independent k-means evaluations (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restarts inside each k-means evaluation.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["rates", "bins", "scale"])))]
struct SweepArgs {
    /// Input CSV (rate and bin sweeps; scaling mode generates its own data).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Label column holding the reference classes.
    #[arg(long)]
    label: Option<String>,
    /// Comma-separated cell values treated as missing ("?," = "?" or empty).
    #[arg(long, default_value = "?,")]
    markers: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Pk)]
    method: MethodArg,
    /// Bins per feature for rate sweeps and scaling.
    #[arg(long, default_value_t = 4)]
    nbins: usize,
    /// Missing rates to inject into a complete dataset, e.g. 0.1,0.3,0.5.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Bin counts to compare on the dataset as-is, e.g. 2,4,8.
    #[arg(long, value_delimiter = ',')]
    bins: Option<Vec<usize>>,
    /// Dataset sizes for the synthetic encoding benchmark, e.g. 1000,10000.
    #[arg(long, value_delimiter = ',')]
    scale: Option<Vec<usize>>,
    /// Independent k-means evaluations per experiment.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restarts inside each k-means evaluation.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    /// Output prefix (.reports.json + .summary.csv, or .scaling.json + .scaling.csv).
    #[arg(long)]
    out: PathBuf,
    /// Feature count for scaling mode.
    #[arg(long, default_value_t = 20)]
    scale_d: usize,
    /// Injected missing rate for scaling mode.
    #[arg(long, default_value_t = 0.1)]
    scale_rate: f64,
    /// Timing repeats per size for scaling mode (after one warmup pass).
    #[arg(long, default_value_t = 3)]
    scale_repeats: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Gram(args) => cmd_gram(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn parse_markers(raw: &str) -> Vec<String> {
    raw.split(',').map(|s| s.to_string()).collect()
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn require_bins(bins: usize) -> Result<(), CliError> {
    if bins < 2 {
        return Err(CliError::Usage(format!("need at least 2 bins, got {bins}")));
    }
    Ok(())
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    require_bins(args.bins)?;
    let markers = parse_markers(&args.markers);
    let opts = io::LoadOptions {
        label_column: args.label.clone(),
        missing_markers: markers.clone(),
    };
    let table = io::load_csv(&args.input, &opts)?;
    let ds = &table.dataset;

    let model = fit_bin_centers(ds, args.bins)?;
    let rep = encode_dataset(ds, &model)?;

    let mut written = vec![formats::write_bin_model(&model, &args.out)?];
    let config = formats::EncodeConfig {
        input: args.input.display().to_string(),
        label_column: args.label,
        n_bins: args.bins,
        missing_markers: markers,
    };
    written.extend(formats::write_representation(
        &rep,
        &args.out,
        Some(io::dataset_hash(ds)),
        Some(config),
    )?);

    let counts = rep.level_counts();
    println!(
        "encoded {} rows x {} features into {} columns ({} bins per feature)",
        rep.n(),
        rep.d(),
        rep.width(),
        rep.n_bins()
    );
    println!(
        "fallback levels: observed={} intersection={} union={} prior={}",
        counts.observed, counts.intersection, counts.union_match, counts.prior
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_gram(args: GramArgs) -> Result<(), CliError> {
    let (rep, meta) = formats::read_representation(&args.rep)?;
    let g = gram(&rep);
    let min_eig = if args.check_psd {
        Some(min_eigenvalue(&g)?)
    } else {
        None
    };
    let gmeta = formats::GramMeta {
        schema_version: formats::SCHEMA_VERSION,
        n: g.n(),
        d: meta.d,
        n_bins: meta.n_bins,
        dataset_hash: meta.dataset_hash.clone(),
        min_eigenvalue: min_eig,
    };
    let written = formats::write_gram(&g, &args.out, &gmeta)?;
    println!("gram matrix: {} x {}", g.n(), g.n());
    if let Some(eig) = min_eig {
        println!("min eigenvalue: {eig:.6e}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), CliError> {
    require_bins(args.bins)?;
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".to_string()));
    }
    let opts = io::LoadOptions {
        label_column: Some(args.label.clone()),
        missing_markers: parse_markers(&args.markers),
    };
    let table = io::load_csv(&args.input, &opts)?;
    let cfg = harness::ExperimentConfig {
        method: args.method.into(),
        n_bins: args.bins,
        runs: args.runs,
        seed: args.seed,
        restarts: args.restarts,
        max_iter: args.max_iter,
    };
    let report = harness::run_experiment(&table.dataset, &dataset_name(&args.input), &cfg)?;
    println!(
        "dataset: {} ({} rows, {} features, k={})",
        report.dataset,
        table.dataset.n(),
        table.dataset.d(),
        report.k
    );
    match report.method {
        Method::Pk => println!("method: pk (bins={})", report.n_bins),
        Method::Mean => println!("method: mean"),
    }
    println!(
        "mean NMI over {} runs: {:.4} (std {:.4})",
        report.runs, report.mean_nmi, report.std_nmi
    );
    if let Some(out) = args.out {
        harness::write_report_json(&report, &out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    require_bins(args.nbins)?;
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".to_string()));
    }
    let cfg = harness::ExperimentConfig {
        method: args.method.into(),
        n_bins: args.nbins,
        runs: args.runs,
        seed: args.seed,
        restarts: args.restarts,
        max_iter: args.max_iter,
    };

    if let Some(sizes) = args.scale {
        if args.input.is_some() {
            return Err(CliError::Usage(
                "--scale benchmarks synthetic data; --input does not apply".to_string(),
            ));
        }
        if !(0.0..1.0).contains(&args.scale_rate) {
            return Err(CliError::Usage(format!(
                "--scale-rate must be in [0, 1), got {}",
                args.scale_rate
            )));
        }
        let rows = harness::scaling_bench(
            &sizes,
            args.scale_d,
            args.nbins,
            args.scale_rate,
            args.seed,
            args.scale_repeats,
        )?;
        let json_path = formats::artifact_path(&args.out, ".scaling.json");
        let csv_path = formats::artifact_path(&args.out, ".scaling.csv");
        harness::write_scaling_json(&rows, &json_path)?;
        harness::write_scaling_csv(&rows, &csv_path)?;
        for row in &rows {
            println!(
                "n={}: fit {:.4}s, assign+encode {:.4}s, fallback {:.4}s, nnz {} / {}",
                row.n, row.fit_s, row.assign_encode_s, row.fallback_s, row.nnz, row.dense_cells
            );
        }
        println!("wrote {}", json_path.display());
        println!("wrote {}", csv_path.display());
        return Ok(());
    }

    let input = args.input.ok_or_else(|| {
        CliError::Usage("--input is required for rate and bin sweeps".to_string())
    })?;
    let label = args.label.ok_or_else(|| {
        CliError::Usage("--label is required for rate and bin sweeps".to_string())
    })?;
    let opts = io::LoadOptions {
        label_column: Some(label),
        missing_markers: parse_markers(&args.markers),
    };
    let table = io::load_csv(&input, &opts)?;
    let name = dataset_name(&input);

    let reports = if let Some(rates) = args.rates {
        for &rate in &rates {
            if !(0.0..1.0).contains(&rate) {
                return Err(CliError::Usage(format!("rate {rate} outside [0, 1)")));
            }
        }
        harness::missing_rate_sweep(&table.dataset, &name, &rates, &cfg)?
    } else {
        let bins = args.bins.expect("mode group guarantees one sweep flag");
        for &b in &bins {
            require_bins(b)?;
        }
        harness::sensitivity_sweep(&table.dataset, &name, &bins, &cfg)?
    };

    let json_path = formats::artifact_path(&args.out, ".reports.json");
    let csv_path = formats::artifact_path(&args.out, ".summary.csv");
    harness::write_reports_json(&reports, &json_path)?;
    harness::write_summary_csv(&reports, &csv_path)?;
    for r in &reports {
        match r.missing_rate {
            Some(rate) => println!(
                "rate={rate}: mean NMI {:.4} (std {:.4})",
                r.mean_nmi, r.std_nmi
            ),
            None => println!(
                "bins={}: mean NMI {:.4} (std {:.4})",
                r.n_bins, r.mean_nmi, r.std_nmi
            ),
        }
    }
    println!("wrote {}", json_path.display());
    println!("wrote {}", csv_path.display());
    Ok(())
}
