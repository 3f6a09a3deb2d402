//! Clustering evaluation harness.
//!
//! An experiment encodes a labelled dataset, runs k-means `runs` times with
//! consecutive seeds, and scores each run against the class labels with
//! normalized mutual information. Sweeps repeat that experiment across
//! missing rates (with fresh mask injection per rate) or bin counts, and the
//! scaling bench times the encode phases across dataset sizes.
//!
//! Everything in a report except `timing` and `created_at_unix` is a pure
//! function of the input data and the configuration, so identical invocations
//! agree byte for byte once those two fields are set aside.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use pk_core::{
    apply_fallback, assign_all, encode_observed, fit_bin_centers, global_prior, kmeans,
    mean_impute, min_max_scale, nmi, Dataset, KMeansConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::formats::{write_json, SCHEMA_VERSION};
use crate::io::dataset_hash;
use crate::synth::discrete_blobs;

/// How rows are turned into clusterable points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Bin-based proximity representation with cascading fallback.
    Pk,
    /// Per-feature mean (numeric) / mode (categorical) imputation followed
    /// by min-max scaling.
    Mean,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pk => "pk",
            Method::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub method: Method,
    pub n_bins: usize,
    /// Independent k-means evaluations (seeds `seed, seed+1, ...`).
    pub runs: usize,
    pub seed: u64,
    /// Restarts inside each k-means evaluation.
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Pk,
            n_bins: 4,
            runs: 10,
            seed: 0,
            restarts: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub fit_s: f64,
    pub encode_s: f64,
    pub cluster_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub dataset: String,
    pub dataset_hash: String,
    pub method: Method,
    pub n_bins: usize,
    /// Injected missing rate when the harness added the mask itself.
    pub missing_rate: Option<f64>,
    /// Cluster count (= number of distinct labels).
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub run_seeds: Vec<u64>,
    pub nmi_runs: Vec<f64>,
    pub mean_nmi: f64,
    /// Sample standard deviation over the runs (0 for a single run).
    pub std_nmi: f64,
    pub timing: PhaseTimings,
    pub created_at_unix: u64,
}

/// Bundle format for sweep outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportsFile {
    pub schema_version: u32,
    pub reports: Vec<ExperimentReport>,
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Encodes `ds`, clusters it `cfg.runs` times, and scores against its labels.
pub fn run_experiment(
    ds: &Dataset,
    name: &str,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, CliError> {
    run_tagged(ds, name, None, cfg)
}

fn run_tagged(
    ds: &Dataset,
    name: &str,
    missing_rate: Option<f64>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, CliError> {
    let labels: Vec<u32> = ds
        .labels()
        .ok_or_else(|| CliError::Data("dataset has no class labels".to_string()))?
        .to_vec();
    let k = labels.iter().collect::<BTreeSet<_>>().len();
    if cfg.runs == 0 {
        return Err(CliError::Usage("runs must be at least 1".to_string()));
    }

    let total_start = Instant::now();
    let (points, fit_s, encode_s) = match cfg.method {
        Method::Pk => {
            let t = Instant::now();
            let model = fit_bin_centers(ds, cfg.n_bins)?;
            let fit_s = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let assignment = assign_all(ds, &model)?;
            let mut rep = encode_observed(&assignment);
            let priors = global_prior(&assignment)?;
            apply_fallback(&mut rep, &assignment, &priors)?;
            let points = rep.to_matrix();
            (points, fit_s, t.elapsed().as_secs_f64())
        }
        Method::Mean => {
            let t = Instant::now();
            let mut m = mean_impute(ds);
            min_max_scale(&mut m);
            (m, 0.0, t.elapsed().as_secs_f64())
        }
    };

    let cluster_start = Instant::now();
    let run_seeds: Vec<u64> = (0..cfg.runs)
        .map(|r| cfg.seed.wrapping_add(r as u64))
        .collect();
    let mut nmi_runs = vec![0.0f64; cfg.runs];
    std::thread::scope(|scope| -> Result<(), CliError> {
        let mut handles = Vec::with_capacity(cfg.runs);
        for &run_seed in &run_seeds {
            let points = &points;
            let labels = &labels;
            handles.push(scope.spawn(move || -> Result<f64, CliError> {
                let kcfg = KMeansConfig {
                    k,
                    seed: run_seed,
                    restarts: cfg.restarts,
                    max_iter: cfg.max_iter,
                };
                let result = kmeans(points, &kcfg)?;
                Ok(nmi(result.labels(), labels)?)
            }));
        }
        for (slot, handle) in nmi_runs.iter_mut().zip(handles) {
            *slot = handle
                .join()
                .map_err(|_| CliError::Internal("clustering worker panicked".to_string()))??;
        }
        Ok(())
    })?;
    let cluster_s = cluster_start.elapsed().as_secs_f64();

    let mean_nmi = nmi_runs.iter().sum::<f64>() / cfg.runs as f64;
    let std_nmi = sample_std(&nmi_runs, mean_nmi);
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        dataset: name.to_string(),
        dataset_hash: dataset_hash(ds),
        method: cfg.method,
        n_bins: cfg.n_bins,
        missing_rate,
        k,
        runs: cfg.runs,
        seed: cfg.seed,
        restarts: cfg.restarts,
        max_iter: cfg.max_iter,
        run_seeds,
        nmi_runs,
        mean_nmi,
        std_nmi,
        timing: PhaseTimings {
            fit_s,
            encode_s,
            cluster_s,
            total_s: total_start.elapsed().as_secs_f64(),
        },
        created_at_unix: unix_now(),
    })
}

/// Injects a fresh mask per rate into a complete dataset and evaluates each.
/// Rates are sorted and deduplicated; rate `i` uses seed `cfg.seed + 10000 + i`.
pub fn missing_rate_sweep(
    ds: &Dataset,
    name: &str,
    rates: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, CliError> {
    let mut rates = rates.to_vec();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let mut reports = Vec::with_capacity(rates.len());
    for (idx, &rate) in rates.iter().enumerate() {
        let injected = ds.inject_mcar(rate, cfg.seed.wrapping_add(10_000 + idx as u64))?;
        reports.push(run_tagged(&injected, name, Some(rate), cfg)?);
    }
    Ok(reports)
}

/// Evaluates the same dataset across bin counts (sorted, deduplicated).
pub fn sensitivity_sweep(
    ds: &Dataset,
    name: &str,
    bin_counts: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, CliError> {
    if cfg.method != Method::Pk {
        return Err(CliError::Usage(
            "bin sensitivity sweep only applies to the pk method".to_string(),
        ));
    }
    let mut bins = bin_counts.to_vec();
    bins.sort_unstable();
    bins.dedup();
    let mut reports = Vec::with_capacity(bins.len());
    for &b in &bins {
        let run_cfg = ExperimentConfig {
            n_bins: b,
            ..cfg.clone()
        };
        reports.push(run_tagged(ds, name, None, &run_cfg)?);
    }
    Ok(reports)
}

/// One scaling-bench measurement. Timings are minimums over the repeats,
/// taken after one untimed warmup pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleRow {
    pub n: usize,
    pub d: usize,
    pub n_bins: usize,
    pub missing_rate: f64,
    pub fit_s: f64,
    /// Bin assignment plus one-hot encoding of observed cells.
    pub assign_encode_s: f64,
    /// Prior computation plus cascade over missing cells.
    pub fallback_s: f64,
    pub total_s: f64,
    /// Nonzero entries in the final representation.
    pub nnz: usize,
    /// `n * d * n_bins`, for comparing against `nnz`.
    pub dense_cells: usize,
}

/// Times the encode pipeline on synthetic clustered data of each size.
pub fn scaling_bench(
    sizes: &[usize],
    d: usize,
    n_bins: usize,
    rate: f64,
    seed: u64,
    repeats: usize,
) -> Result<Vec<ScaleRow>, CliError> {
    if repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".to_string()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || sizes[0] == 0 {
        return Err(CliError::Usage("sizes must be positive".to_string()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let complete = discrete_blobs(n, d, 5.min(n), 8, 0.3, seed);
        let ds = if rate > 0.0 {
            complete.inject_mcar(rate, seed.wrapping_add(n as u64))?
        } else {
            complete
        };
        let mut fit_s = f64::INFINITY;
        let mut assign_encode_s = f64::INFINITY;
        let mut fallback_s = f64::INFINITY;
        let mut nnz = 0usize;
        for pass in 0..=repeats {
            let t = Instant::now();
            let model = fit_bin_centers(&ds, n_bins)?;
            let t_fit = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let assignment = assign_all(&ds, &model)?;
            let mut rep = encode_observed(&assignment);
            let t_assign = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let priors = global_prior(&assignment)?;
            apply_fallback(&mut rep, &assignment, &priors)?;
            let t_fallback = t.elapsed().as_secs_f64();

            if pass == 0 {
                nnz = rep.nnz();
                continue; // warmup
            }
            fit_s = fit_s.min(t_fit);
            assign_encode_s = assign_encode_s.min(t_assign);
            fallback_s = fallback_s.min(t_fallback);
        }
        rows.push(ScaleRow {
            n,
            d,
            n_bins,
            missing_rate: rate,
            fit_s,
            assign_encode_s,
            fallback_s,
            total_s: fit_s + assign_encode_s + fallback_s,
            nnz,
            dense_cells: n * d * n_bins,
        });
    }
    Ok(rows)
}

// ------------------------------------------------------------------ output

pub fn write_report_json(report: &ExperimentReport, path: &Path) -> Result<(), CliError> {
    write_json(report, path)
}

pub fn write_reports_json(reports: &[ExperimentReport], path: &Path) -> Result<(), CliError> {
    let file = ReportsFile {
        schema_version: SCHEMA_VERSION,
        reports: reports.to_vec(),
    };
    write_json(&file, path)
}

/// One row per report: dataset, method, n_bins, missing_rate, k, runs,
/// mean_nmi, std_nmi, total_s.
pub fn write_summary_csv(reports: &[ExperimentReport], path: &Path) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writer.write_record([
        "dataset",
        "method",
        "n_bins",
        "missing_rate",
        "k",
        "runs",
        "mean_nmi",
        "std_nmi",
        "total_s",
    ])?;
    for r in reports {
        writer.write_record([
            r.dataset.clone(),
            r.method.name().to_string(),
            r.n_bins.to_string(),
            r.missing_rate.map(|x| format!("{x}")).unwrap_or_default(),
            r.k.to_string(),
            r.runs.to_string(),
            format!("{}", r.mean_nmi),
            format!("{}", r.std_nmi),
            format!("{}", r.timing.total_s),
        ])?;
    }
    writer.flush().map_err(CliError::from)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScalingFile {
    pub schema_version: u32,
    pub rows: Vec<ScaleRow>,
}

pub fn write_scaling_json(rows: &[ScaleRow], path: &Path) -> Result<(), CliError> {
    let file = ScalingFile {
        schema_version: SCHEMA_VERSION,
        rows: rows.to_vec(),
    };
    write_json(&file, path)
}

pub fn write_scaling_csv(rows: &[ScaleRow], path: &Path) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writer.write_record([
        "n",
        "d",
        "n_bins",
        "missing_rate",
        "fit_s",
        "assign_encode_s",
        "fallback_s",
        "total_s",
        "nnz",
        "dense_cells",
    ])?;
    for r in rows {
        writer.write_record([
            r.n.to_string(),
            r.d.to_string(),
            r.n_bins.to_string(),
            format!("{}", r.missing_rate),
            format!("{}", r.fit_s),
            format!("{}", r.assign_encode_s),
            format!("{}", r.fallback_s),
            format!("{}", r.total_s),
            r.nnz.to_string(),
            r.dense_cells.to_string(),
        ])?;
    }
    writer.flush().map_err(CliError::from)?;
    Ok(())
}
