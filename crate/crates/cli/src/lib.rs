//! Harness around `spmm`: single runs with optional verification,
//! the aspect-ratio and density sweeps, and heuristic classification of a
//! local corpus. Every command returns plain rows that serialize to CSV.

pub mod app;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use spmm::matrix::{gen_aspect_matrix, gen_uniform_random, load_matrix_market, max_relative_error, random_dense_in};
use spmm::{
    choose_algorithm, gemm_reference, mean_row_length, spmm_auto, spmm_merge, spmm_reference, spmm_rowsplit,
    Algorithm, CsrMatrix, DenseMatrix, ExecConfig, HeuristicConfig, Instrument, KernelOutput, KernelReport, Layout,
    RngSeed, RowSplitParams, Scalar,
};

pub const DEFAULT_REPS: usize = 5;
/// Verification tolerance for 32-bit elements.
pub const VERIFY_TOLERANCE: f64 = 1e-5;

/// Kernel requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoChoice {
    RowSplit,
    Merge,
    Auto,
    Reference,
}

impl FromStr for AlgoChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rowsplit" | "row-split" => Ok(AlgoChoice::RowSplit),
            "merge" | "merge-based" => Ok(AlgoChoice::Merge),
            "auto" => Ok(AlgoChoice::Auto),
            "reference" | "ref" => Ok(AlgoChoice::Reference),
            _ => bail!("unknown algorithm '{s}' (expected rowsplit, merge, auto or reference)"),
        }
    }
}

impl fmt::Display for AlgoChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgoChoice::RowSplit => "rowsplit",
            AlgoChoice::Merge => "merge",
            AlgoChoice::Auto => "auto",
            AlgoChoice::Reference => "reference",
        })
    }
}

impl From<Algorithm> for AlgoChoice {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::RowSplit => AlgoChoice::RowSplit,
            Algorithm::MergeBased => AlgoChoice::Merge,
            Algorithm::Reference => AlgoChoice::Reference,
        }
    }
}

/// Where `run` gets its sparse operand.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    /// `aspect:TOTAL_NNZ:ROWS`
    Aspect { total_nnz: usize, rows: usize },
    /// `random:ROWS:COLS:FILL`
    Random { rows: usize, cols: usize, fill: f64 },
}

impl FromStr for MatrixSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts[i]
                .parse()
                .with_context(|| format!("'{}' in '{s}' is not a count", parts[i]))
        };
        match parts[0] {
            "aspect" => {
                ensure!(parts.len() == 3, "expected aspect:TOTAL_NNZ:ROWS, got '{s}'");
                Ok(MatrixSource::Aspect {
                    total_nnz: num(1)?,
                    rows: num(2)?,
                })
            }
            "random" => {
                ensure!(parts.len() == 4, "expected random:ROWS:COLS:FILL, got '{s}'");
                Ok(MatrixSource::Random {
                    rows: num(1)?,
                    cols: num(2)?,
                    fill: parts[3].parse().with_context(|| format!("bad fill fraction in '{s}'"))?,
                })
            }
            _ => Ok(MatrixSource::File(PathBuf::from(s))),
        }
    }
}

impl MatrixSource {
    pub fn load(&self, seed: RngSeed) -> Result<CsrMatrix<f32>> {
        Ok(match self {
            MatrixSource::File(path) => {
                load_matrix_market(path).with_context(|| format!("reading {}", path.display()))?
            }
            MatrixSource::Aspect { total_nnz, rows } => gen_aspect_matrix(*total_nnz, *rows)?,
            MatrixSource::Random { rows, cols, fill } => gen_uniform_random(*rows, *cols, *fill, seed)?,
        })
    }
}

/// Calls `f` once to warm up, then `reps` more times, and returns the last
/// result with the median of the timed calls in seconds.
pub fn time_median<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    ensure!(reps >= 1, "repetitions must be at least 1");
    let mut last = f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        last = f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((last, median(&mut times)))
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    }
}

/// Runs one kernel. `Reference` produces a report without metrics.
pub fn run_kernel<S: Scalar>(
    algo: AlgoChoice,
    a: &CsrMatrix<S>,
    b: &DenseMatrix<S>,
    cfg: &ExecConfig,
    heuristic: &HeuristicConfig,
    instrument: Instrument,
) -> Result<KernelOutput<S>> {
    Ok(match algo {
        AlgoChoice::RowSplit => spmm_rowsplit(a, b, &RowSplitParams::from_config(*cfg), instrument)?,
        AlgoChoice::Merge => spmm_merge(a, b, cfg, instrument)?,
        AlgoChoice::Auto => spmm_auto(a, b, heuristic, cfg, instrument)?,
        AlgoChoice::Reference => {
            let start = Instant::now();
            let c = spmm_reference(a, b)?;
            KernelOutput {
                c,
                trace: None,
                report: KernelReport::new(Algorithm::Reference, start.elapsed(), a.nnz(), b.num_cols()),
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub algo: AlgoChoice,
    pub n: usize,
    pub reps: usize,
    pub seed: RngSeed,
    pub verify: bool,
    pub instrument: Instrument,
    pub heuristic: HeuristicConfig,
    pub exec: ExecConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            algo: AlgoChoice::Auto,
            n: 32,
            reps: DEFAULT_REPS,
            seed: RngSeed(0),
            verify: false,
            instrument: Instrument::Off,
            heuristic: HeuristicConfig::default(),
            exec: ExecConfig::default(),
        }
    }
}

/// One line of `run` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub d: f64,
    pub n: usize,
    pub algo: String,
    pub reps: usize,
    pub time_s: f64,
    pub gflops: f64,
    pub type1: Option<f64>,
    pub type2: Option<f64>,
    pub coalescing_read_b: Option<f64>,
    pub partition_overhead: u64,
    pub carryout: u64,
    pub max_rel_err: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub report: KernelReport,
    pub c: DenseMatrix<f32>,
    pub trace: Option<spmm::ExecTrace>,
}

impl RunOutcome {
    /// `false` only when verification ran and exceeded the tolerance.
    pub fn passed(&self) -> bool {
        self.record.max_rel_err.is_none_or(|e| e <= VERIFY_TOLERANCE)
    }
}

pub fn cmd_run(a: &CsrMatrix<f32>, opts: &RunOptions) -> Result<RunOutcome> {
    ensure!(opts.n >= 1, "n must be at least 1");
    let b = operand_b(a.num_cols(), opts.n, RngSeed(opts.seed.0 ^ 0x5eed));
    let (timed, secs) = time_median(opts.reps, || {
        run_kernel(opts.algo, a, &b, &opts.exec, &opts.heuristic, Instrument::Off)
    })?;
    let mut out = if opts.instrument.enabled() {
        run_kernel(opts.algo, a, &b, &opts.exec, &opts.heuristic, opts.instrument)?
    } else {
        timed
    };
    out.report.set_wall_time(secs);

    let max_rel_err = if opts.verify {
        Some(max_relative_error(&out.c, &spmm_reference(a, &b)?)?)
    } else {
        None
    };
    let metrics = out.report.metrics;
    let record = RunRecord {
        rows: a.num_rows(),
        cols: a.num_cols(),
        nnz: a.nnz(),
        d: row_length_or_zero(a),
        n: opts.n,
        algo: out.report.algorithm.to_string(),
        reps: opts.reps,
        time_s: secs,
        gflops: out.report.effective_gflops,
        type1: metrics.map(|m| m.type1),
        type2: metrics.map(|m| m.type2),
        coalescing_read_b: metrics.and_then(|m| m.coalescing_read_b),
        partition_overhead: out.report.counters.partition_overhead_accesses,
        carryout: out.report.counters.carryout_accesses,
        max_rel_err,
    };
    Ok(RunOutcome {
        record,
        report: out.report,
        c: out.c,
        trace: out.trace,
    })
}

/// Dense operand for timed runs, uniform in `[0, 1)`. Non-negative
/// entries keep the 32-bit oracle's own rounding below the verification
/// tolerance.
pub fn operand_b(rows: usize, cols: usize, seed: RngSeed) -> DenseMatrix<f32> {
    random_dense_in(rows, cols, Layout::RowMajor, 0.0..1.0, seed)
}

fn row_length_or_zero<S>(a: &CsrMatrix<S>) -> f64 {
    mean_row_length(a).unwrap_or(0.0)
}

/// Settings shared by every sweep.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub repetitions: usize,
    pub seed: RngSeed,
    /// Verify every kernel call against the oracle.
    pub paranoid: bool,
    pub exec: ExecConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            repetitions: DEFAULT_REPS,
            seed: RngSeed(0),
            paranoid: false,
            exec: ExecConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepKind {
    AspectRatio {
        total_nnz: usize,
        row_counts: Vec<usize>,
        n: usize,
        algos: Vec<Algorithm>,
    },
    Density {
        size: usize,
        fractions: Vec<f64>,
        n: usize,
    },
    Corpus {
        dir: PathBuf,
        n: usize,
        heuristic: HeuristicConfig,
    },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub settings: SweepSettings,
}

#[derive(Debug, Clone)]
pub enum SweepOutput {
    Aspect(Vec<SweepRecord>),
    Density(DensitySweep),
    Corpus(ClassifyReport),
}

impl SweepSpec {
    pub fn run(&self) -> Result<SweepOutput> {
        ensure!(self.settings.repetitions >= 1, "repetitions must be at least 1");
        Ok(match &self.kind {
            SweepKind::AspectRatio {
                total_nnz,
                row_counts,
                n,
                algos,
            } => SweepOutput::Aspect(cmd_sweep_aspect(*total_nnz, row_counts, *n, algos, &self.settings)?),
            SweepKind::Density { size, fractions, n } => {
                SweepOutput::Density(cmd_sweep_density(*size, fractions, *n, &self.settings)?)
            }
            SweepKind::Corpus { dir, n, heuristic } => {
                SweepOutput::Corpus(cmd_classify(dir, *n, heuristic, &self.settings)?)
            }
        })
    }
}

/// Row counts `2, 4, ..., 2^19` for the aspect sweep.
pub fn default_row_counts() -> Vec<usize> {
    (1..=19).map(|p| 1usize << p).collect()
}

/// One `(matrix, kernel)` line of the aspect sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub d: f64,
    pub n: usize,
    pub algo: String,
    pub reps: usize,
    pub time_s: f64,
    pub gflops: f64,
    pub type1: f64,
    pub type2: f64,
    pub type2_read_a: Option<f64>,
    pub type2_read_b: Option<f64>,
    pub coalescing: Option<f64>,
    pub coalescing_read_a: Option<f64>,
    pub coalescing_read_b: Option<f64>,
    pub coalescing_write_c: Option<f64>,
    pub max_rel_err: Option<f64>,
}

/// Times each kernel on `gen_aspect_matrix(total_nnz, rows)` for every row
/// count. The instrumented run doubles as the warm-up; the timed
/// repetitions run uninstrumented.
pub fn cmd_sweep_aspect(
    total_nnz: usize,
    row_counts: &[usize],
    n: usize,
    algos: &[Algorithm],
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    ensure!(n >= 1, "n must be at least 1");
    ensure!(settings.repetitions >= 1, "repetitions must be at least 1");
    if let Some(&bad) = row_counts.iter().find(|&&r| r == 0 || !total_nnz.is_multiple_of(r)) {
        bail!("row count {bad} does not divide {total_nnz} nonzeros");
    }
    let heuristic = HeuristicConfig::default();
    let mut records = Vec::with_capacity(row_counts.len() * algos.len());
    for &rows in row_counts {
        let a = gen_aspect_matrix::<f32>(total_nnz, rows)?;
        let b = operand_b(a.num_cols(), n, settings.seed);
        let oracle = if settings.paranoid { Some(spmm_reference(&a, &b)?) } else { None };
        for &algo in algos {
            let choice = AlgoChoice::from(algo);
            let probe = run_kernel(choice, &a, &b, &settings.exec, &heuristic, Instrument::Summary)?;
            let mut times = Vec::with_capacity(settings.repetitions);
            let mut max_rel_err = None;
            for _ in 0..settings.repetitions {
                let start = Instant::now();
                let out = run_kernel(choice, &a, &b, &settings.exec, &heuristic, Instrument::Off)?;
                times.push(start.elapsed().as_secs_f64());
                if let Some(expect) = &oracle {
                    let err = max_relative_error(&out.c, expect)?;
                    max_rel_err = Some(max_rel_err.map_or(err, |e: f64| e.max(err)));
                }
            }
            let time_s = median(&mut times);
            let mut report = probe.report;
            report.set_wall_time(time_s);
            let m = report.metrics;
            records.push(SweepRecord {
                rows,
                cols: a.num_cols(),
                nnz: a.nnz(),
                d: row_length_or_zero(&a),
                n,
                algo: algo.to_string(),
                reps: settings.repetitions,
                time_s,
                gflops: report.effective_gflops,
                type1: m.map_or(1.0, |m| m.type1),
                type2: m.map_or(1.0, |m| m.type2),
                type2_read_a: m.and_then(|m| m.type2_read_a),
                type2_read_b: m.and_then(|m| m.type2_read_b),
                coalescing: m.and_then(|m| m.coalescing),
                coalescing_read_a: m.and_then(|m| m.coalescing_read_a),
                coalescing_read_b: m.and_then(|m| m.coalescing_read_b),
                coalescing_write_c: m.and_then(|m| m.coalescing_write_c),
                max_rel_err,
            });
        }
    }
    Ok(records)
}

/// Fill fractions `0.01, 0.02, ..., 0.20`.
pub fn default_fractions() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 100.0).collect()
}

/// One `(fraction, kernel)` line of the density sweep. The dense baseline
/// appears as algo `gemm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub size: usize,
    pub fraction: f64,
    pub nnz: usize,
    pub n: usize,
    pub algo: String,
    pub reps: usize,
    pub time_s: f64,
    pub gflops: f64,
    pub max_rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySweep {
    pub records: Vec<DensityRecord>,
    /// Per sparse kernel, the first fraction at which it ran slower than
    /// the dense baseline, if any.
    pub crossover: Vec<(String, Option<f64>)>,
    /// Per sparse kernel, where a least-squares line through its times
    /// meets the mean dense time. `None` when the fit is flat or falling.
    pub extrapolated: Vec<(String, Option<f64>)>,
}

impl DensitySweep {
    pub fn crossover_summary(&self) -> String {
        self.crossover
            .iter()
            .zip(&self.extrapolated)
            .map(|((algo, f), (_, est))| match (f, est) {
                (Some(f), _) => format!("{algo}: crossover at fill {f}"),
                (None, Some(est)) => format!("{algo}: no crossover within the swept fractions; linear estimate {est:.4}"),
                (None, None) => format!("{algo}: no crossover within the swept fractions"),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Sparse kernels against `gemm_reference` on the densified matrix, per
/// fill fraction of a `size x size` uniform random matrix.
pub fn cmd_sweep_density(size: usize, fractions: &[f64], n: usize, settings: &SweepSettings) -> Result<DensitySweep> {
    ensure!(n >= 1, "n must be at least 1");
    if let Some(bad) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        bail!("fill fraction {bad} outside [0, 1]");
    }
    let heuristic = HeuristicConfig::default();
    let kernels = [Algorithm::RowSplit, Algorithm::MergeBased];
    let b = operand_b(size, n, RngSeed(settings.seed.0 ^ 0xb));
    let mut records = Vec::new();
    let mut crossover: Vec<(String, Option<f64>)> = kernels.iter().map(|k| (k.to_string(), None)).collect();

    for &fraction in fractions {
        let a = gen_uniform_random::<f32>(size, size, fraction, settings.seed)?;
        let dense = a.to_dense();
        let (c_dense, dense_time) = time_median(settings.repetitions, || Ok(gemm_reference(&dense, &b)?))?;
        let oracle = settings.paranoid.then(|| spmm_reference(&a, &b)).transpose()?;
        let record = |algo: String, time_s: f64, max_rel_err| DensityRecord {
            size,
            fraction,
            nnz: a.nnz(),
            n,
            algo,
            reps: settings.repetitions,
            time_s,
            gflops: spmm::report::effective_gflops(a.nnz(), n, time_s),
            max_rel_err,
        };
        let dense_err = oracle.as_ref().map(|o| max_relative_error(&c_dense, o)).transpose()?;
        records.push(record("gemm".into(), dense_time, dense_err));

        for (k, &algo) in kernels.iter().enumerate() {
            let (out, t) = time_median(settings.repetitions, || {
                run_kernel(algo.into(), &a, &b, &settings.exec, &heuristic, Instrument::Off)
            })?;
            let err = oracle.as_ref().map(|o| max_relative_error(&out.c, o)).transpose()?;
            records.push(record(algo.to_string(), t, err));
            if t > dense_time && crossover[k].1.is_none() {
                crossover[k].1 = Some(fraction);
            }
        }
    }
    let dense_times: Vec<f64> = records.iter().filter(|r| r.algo == "gemm").map(|r| r.time_s).collect();
    let dense_mean = dense_times.iter().sum::<f64>() / dense_times.len().max(1) as f64;
    let extrapolated = kernels
        .iter()
        .map(|k| {
            let name = k.to_string();
            let points: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.algo == name)
                .map(|r| (r.fraction, r.time_s))
                .collect();
            let est = linear_fit(&points).and_then(|(a, b)| (b > 0.0).then(|| (dense_mean - a) / b));
            (name, est)
        })
        .collect();
    Ok(DensitySweep {
        records,
        crossover,
        extrapolated,
    })
}

/// Least-squares `y = a + b x`; `None` for fewer than two distinct `x`.
fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// One matrix of a classification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub d: f64,
    pub rowsplit_s: f64,
    pub merge_s: f64,
    pub oracle: String,
    pub heuristic: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyReport {
    pub records: Vec<ClassifyRecord>,
    pub threshold: f64,
    pub accuracy: f64,
    pub fitted_threshold: f64,
    pub fitted_accuracy: f64,
    /// Files that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl ClassifyReport {
    pub fn summary(&self) -> String {
        format!(
            "matrices={} skipped={} threshold={} accuracy={:.4} fitted_threshold={} fitted_accuracy={:.4}",
            self.records.len(),
            self.skipped.len(),
            self.threshold,
            self.accuracy,
            self.fitted_threshold,
            self.fitted_accuracy
        )
    }
}

/// Fraction of `(d, merge_faster)` samples classified correctly by "merge
/// iff d < threshold".
pub fn threshold_accuracy(samples: &[(f64, bool)], threshold: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hits = samples.iter().filter(|&&(d, merge)| (d < threshold) == merge).count();
    hits as f64 / samples.len() as f64
}

/// Best threshold over the midpoints between consecutive distinct `d`
/// values, plus one below and one above all of them. Ties go to the
/// candidate closest to `prior`.
pub fn fit_threshold(samples: &[(f64, bool)], prior: f64) -> (f64, f64) {
    let mut ds: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let mut candidates = Vec::with_capacity(ds.len() + 1);
    if let (Some(&lo), Some(&hi)) = (ds.first(), ds.last()) {
        candidates.push(lo / 2.0);
        candidates.extend(ds.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        candidates.push(hi + 1.0);
    }
    let mut best = (prior, threshold_accuracy(samples, prior));
    for t in candidates {
        let acc = threshold_accuracy(samples, t);
        if acc > best.1 || (acc == best.1 && (t - prior).abs() < (best.0 - prior).abs()) {
            best = (t, acc);
        }
    }
    best
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("mtx")))
        .collect();
    files.sort();
    Ok(files)
}

/// Times both kernels on every `.mtx` file in `dir`, labels the faster
/// one as the oracle choice and scores the heuristic against it.
pub fn cmd_classify(
    dir: &Path,
    n: usize,
    heuristic: &HeuristicConfig,
    settings: &SweepSettings,
) -> Result<ClassifyReport> {
    ensure!(n >= 1, "n must be at least 1");
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for path in corpus_files(dir)? {
        let a = match load_matrix_market::<f32>(&path) {
            Ok(a) if a.num_rows() > 0 => a,
            Ok(_) => {
                eprintln!("warning: skipping {}: matrix has no rows", path.display());
                skipped.push((path, "matrix has no rows".to_string()));
                continue;
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                skipped.push((path, e.to_string()));
                continue;
            }
        };
        let b = operand_b(a.num_cols(), n, settings.seed);
        let time = |algo| -> Result<f64> {
            let (out, t) = time_median(settings.repetitions, || {
                run_kernel(algo, &a, &b, &settings.exec, heuristic, Instrument::Off)
            })?;
            if settings.paranoid {
                let err = max_relative_error(&out.c, &spmm_reference(&a, &b)?)?;
                ensure!(err <= VERIFY_TOLERANCE, "{algo} on {}: max relative error {err}", path.display());
            }
            Ok(t)
        };
        let rowsplit_s = time(AlgoChoice::RowSplit)?;
        let merge_s = time(AlgoChoice::Merge)?;
        let d = mean_row_length(&a)?;
        let oracle = if merge_s < rowsplit_s { Algorithm::MergeBased } else { Algorithm::RowSplit };
        let chosen = choose_algorithm(d, heuristic);
        records.push(ClassifyRecord {
            matrix: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            rows: a.num_rows(),
            cols: a.num_cols(),
            nnz: a.nnz(),
            d,
            rowsplit_s,
            merge_s,
            oracle: oracle.to_string(),
            heuristic: chosen.to_string(),
            correct: oracle == chosen,
        });
    }
    ensure!(
        records.len() >= 2,
        "classification needs at least 2 readable matrices in {}, found {}",
        dir.display(),
        records.len()
    );
    let samples: Vec<(f64, bool)> = records
        .iter()
        .map(|r| (r.d, r.oracle == Algorithm::MergeBased.as_str()))
        .collect();
    let threshold = heuristic.threshold();
    let (fitted_threshold, fitted_accuracy) = fit_threshold(&samples, threshold);
    Ok(ClassifyReport {
        accuracy: threshold_accuracy(&samples, threshold),
        records,
        threshold,
        fitted_threshold,
        fitted_accuracy,
        skipped,
    })
}

/// Writes `rows` as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl std::io::Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .context("parsing CSV")
}

/// Dense matrix as CSV, one line per row, no header.
pub fn write_dense_csv<S: Scalar, W: Write>(c: &DenseMatrix<S>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..c.num_rows() {
        w.write_record((0..c.num_cols()).map(|j| c.get(i, j).to_string()))?;
    }
    w.flush()?;
    Ok(())
}
