use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use spmm::selector::DEFAULT_THRESHOLD;
use spmm::{Algorithm, ExecConfig, HeuristicConfig, Instrument, RngSeed};

use crate::{
    cmd_classify, cmd_run, cmd_sweep_aspect, cmd_sweep_density, default_fractions, default_row_counts, write_csv,
    write_dense_csv, AlgoChoice, MatrixSource, RunOptions, SweepSettings, DEFAULT_REPS, VERIFY_TOLERANCE,
};

/// How a successful invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Verification ran and exceeded the tolerance.
    VerificationFailed,
}

/// CSR SpMM kernels: single runs, sweeps and heuristic classification.
///
/// Set SPMM_LANE_WIDTH to change the lane-group width (default 32).
#[derive(Parser)]
#[command(name = "spmm", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Dense columns of B.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Timed repetitions after one warm-up; the median is reported.
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one kernel on a Matrix Market file or a generated matrix.
    Run {
        /// Path to a .mtx file, `aspect:TOTAL_NNZ:ROWS` or `random:ROWS:COLS:FILL`.
        matrix: MatrixSource,
        #[arg(long, default_value = "auto")]
        algo: AlgoChoice,
        /// Compare against the sequential oracle; exit 1 above tolerance.
        #[arg(long)]
        verify: bool,
        /// Record memory accesses and report imbalance and coalescing.
        #[arg(long)]
        instrument: bool,
        /// Write the full per-access trace as CSV (implies --instrument).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write C as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fixed nonzero count, varying rows-per-matrix.
    SweepAspect {
        #[arg(long, default_value_t = 1 << 20)]
        total_nnz: usize,
        /// Comma-separated row counts (default 2,4,...,2^19).
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "rowsplit,merge")]
        algos: Vec<Algorithm>,
        /// Verify every kernel call against the oracle.
        #[arg(long)]
        paranoid: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fixed size, varying fill fraction, against a dense product.
    SweepDensity {
        #[arg(long, default_value_t = 1000)]
        size: usize,
        /// Comma-separated fill fractions (default 0.01..0.20).
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        #[arg(long)]
        paranoid: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Score the mean-row-length heuristic on a directory of .mtx files.
    Classify {
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        paranoid: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn output(csv: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match csv {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn settings(common: &Common, paranoid: bool, exec: ExecConfig) -> SweepSettings {
    SweepSettings {
        repetitions: common.reps,
        seed: RngSeed(common.seed),
        paranoid,
        exec,
    }
}

fn worst_error(errors: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    errors.flatten().reduce(f64::max)
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<Status> {
    let exec = ExecConfig::from_env()?;
    match cli.command {
        Command::Run {
            matrix,
            algo,
            verify,
            instrument,
            trace,
            dump,
            threshold,
            common,
        } => {
            let seed = RngSeed(common.seed);
            let a = matrix.load(seed)?;
            let opts = RunOptions {
                algo,
                n: common.n,
                reps: common.reps,
                seed,
                verify,
                instrument: match (&trace, instrument) {
                    (Some(_), _) => Instrument::Full,
                    (None, true) => Instrument::Summary,
                    (None, false) => Instrument::Off,
                },
                heuristic: HeuristicConfig::new(threshold)?,
                exec,
            };
            let outcome = cmd_run(&a, &opts)?;
            write_csv(std::slice::from_ref(&outcome.record), output(common.csv.as_deref())?)?;
            if let (Some(path), Some(t)) = (&trace, &outcome.trace) {
                t.write_csv(BufWriter::new(File::create(path)?))?;
            }
            if let Some(path) = &dump {
                write_dense_csv(&outcome.c, BufWriter::new(File::create(path)?))?;
            }
            if let Some(err) = outcome.record.max_rel_err {
                eprintln!("max_rel_err={err:e} (tolerance {VERIFY_TOLERANCE:e})");
                if !outcome.passed() {
                    eprintln!("verification FAILED");
                    return Ok(Status::VerificationFailed);
                }
            }
        }
        Command::SweepAspect {
            total_nnz,
            rows,
            algos,
            paranoid,
            common,
        } => {
            let rows = rows.unwrap_or_else(default_row_counts);
            let records = cmd_sweep_aspect(total_nnz, &rows, common.n, &algos, &settings(&common, paranoid, exec))?;
            write_csv(&records, output(common.csv.as_deref())?)?;
            if let Some(err) = worst_error(records.iter().map(|r| r.max_rel_err)) {
                eprintln!("worst max_rel_err={err:e}");
                if err > VERIFY_TOLERANCE {
                    return Ok(Status::VerificationFailed);
                }
            }
        }
        Command::SweepDensity {
            size,
            fractions,
            paranoid,
            common,
        } => {
            let fractions = fractions.unwrap_or_else(default_fractions);
            let sweep = cmd_sweep_density(size, &fractions, common.n, &settings(&common, paranoid, exec))?;
            write_csv(&sweep.records, output(common.csv.as_deref())?)?;
            eprintln!("{}", sweep.crossover_summary());
            if let Some(err) = worst_error(sweep.records.iter().map(|r| r.max_rel_err)) {
                eprintln!("worst max_rel_err={err:e}");
                if err > VERIFY_TOLERANCE {
                    return Ok(Status::VerificationFailed);
                }
            }
        }
        Command::Classify {
            dir,
            threshold,
            paranoid,
            common,
        } => {
            let heuristic = HeuristicConfig::new(threshold)?;
            let report = cmd_classify(&dir, common.n, &heuristic, &settings(&common, paranoid, exec))?;
            write_csv(&report.records, output(common.csv.as_deref())?)?;
            eprintln!("{}", report.summary());
        }
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{read_csv, ClassifyRecord, DensityRecord, RunRecord, SweepRecord};
    use spmm::matrix::{gen_aspect_matrix, write_matrix_market};
    use spmm::CsrMatrix;
    use std::path::Path;

    fn invoke(args: &[&str]) -> Result<Status> {
        let mut full = vec!["spmm"];
        full.extend_from_slice(args);
        run(Cli::try_parse_from(full)?)
    }

    fn write_mtx(path: &Path, a: &CsrMatrix<f32>) {
        write_matrix_market(a, File::create(path).unwrap()).unwrap();
    }

    fn records<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Vec<T> {
        read_csv(File::open(path).unwrap()).unwrap()
    }

    #[test]
    fn run_verify_on_matrix_market_file() {
        let dir = tempfile::tempdir().unwrap();
        let mtx = dir.path().join("a.mtx");
        write_mtx(&mtx, &gen_aspect_matrix(4096, 64).unwrap());
        let csv = dir.path().join("run.csv");
        let status = invoke(&[
            "run",
            mtx.to_str().unwrap(),
            "--algo",
            "merge",
            "--verify",
            "--reps",
            "2",
            "--csv",
            csv.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(status, Status::Ok);
        let rows: Vec<RunRecord> = records(&csv);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].algo, "merge");
        assert!(rows[0].max_rel_err.unwrap() <= VERIFY_TOLERANCE);
        assert_eq!((rows[0].rows, rows[0].cols, rows[0].nnz), (64, 64, 4096));
    }

    #[test]
    fn auto_on_unit_rows_picks_merge() {
        let dir = tempfile::tempdir().unwrap();
        let mtx = dir.path().join("eye.mtx");
        write_mtx(&mtx, &CsrMatrix::identity(100));
        let csv = dir.path().join("run.csv");
        invoke(&["run", mtx.to_str().unwrap(), "--reps", "1", "--csv", csv.to_str().unwrap()]).unwrap();
        let rows: Vec<RunRecord> = records(&csv);
        assert_eq!(rows[0].algo, "merge");
        assert_eq!(rows[0].d, 1.0);
    }

    #[test]
    fn reference_run_has_no_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("run.csv");
        invoke(&[
            "run",
            "aspect:2048:16",
            "--algo",
            "reference",
            "--instrument",
            "--reps",
            "1",
            "--csv",
            csv.to_str().unwrap(),
        ])
        .unwrap();
        let rows: Vec<RunRecord> = records(&csv);
        assert_eq!(rows[0].algo, "reference");
        assert!(rows[0].gflops > 0.0);
        assert_eq!((rows[0].type1, rows[0].type2, rows[0].coalescing_read_b), (None, None, None));
    }

    #[test]
    fn trace_and_dump_files() {
        let dir = tempfile::tempdir().unwrap();
        let (csv, trace, dump) = (dir.path().join("r.csv"), dir.path().join("t.csv"), dir.path().join("c.csv"));
        invoke(&[
            "run",
            "random:40:50:0.2",
            "--algo",
            "rowsplit",
            "--n",
            "8",
            "--reps",
            "1",
            "--csv",
            csv.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
            "--dump",
            dump.to_str().unwrap(),
        ])
        .unwrap();
        let rows: Vec<RunRecord> = records(&csv);
        assert!(rows[0].type2.is_some());
        let trace = std::fs::read_to_string(trace).unwrap();
        assert!(trace.starts_with("group_id,step,kind,active_lanes,distinct_segments"));
        assert!(trace.lines().count() > 40);
        let dump = std::fs::read_to_string(dump).unwrap();
        assert_eq!(dump.lines().count(), 40);
        assert!(dump.lines().all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn missing_matrix_is_an_error() {
        assert!(invoke(&["run", "/nonexistent/x.mtx", "--reps", "1"]).is_err());
        assert!(invoke(&["run", "aspect:100:3", "--reps", "1"]).is_err());
        assert!(Cli::try_parse_from(["spmm", "run", "aspect:8:2", "--algo", "gemm"]).is_err());
    }

    #[test]
    fn paranoid_aspect_sweep_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("aspect.csv");
        let status = invoke(&[
            "sweep-aspect",
            "--total-nnz",
            "8192",
            "--rows",
            "2,8,64,1024",
            "--paranoid",
            "--reps",
            "1",
            "--csv",
            csv.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(status, Status::Ok);
        let rows: Vec<SweepRecord> = records(&csv);
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.max_rel_err.unwrap() <= VERIFY_TOLERANCE));
        let rowsplit: Vec<_> = rows.iter().filter(|r| r.algo == "rowsplit").collect();
        assert_eq!(rowsplit.last().unwrap().type1, 1.0);
        assert!((rowsplit[0].type2 - 1.0).abs() < 1e-3);
        assert!(invoke(&["sweep-aspect", "--total-nnz", "100", "--rows", "3"]).is_err());
    }

    #[test]
    fn density_sweep_rows() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("density.csv");
        invoke(&[
            "sweep-density",
            "--size",
            "120",
            "--fractions",
            "0.05,0.1,0.2",
            "--reps",
            "1",
            "--paranoid",
            "--csv",
            csv.to_str().unwrap(),
        ])
        .unwrap();
        let rows: Vec<DensityRecord> = records(&csv);
        assert_eq!(rows.len(), 9);
        for algo in ["gemm", "rowsplit", "merge"] {
            assert_eq!(rows.iter().filter(|r| r.algo == algo).count(), 3);
        }
        assert!(invoke(&["sweep-density", "--fractions", "1.5"]).is_err());
    }

    #[test]
    fn classify_aspect_corpus() {
        let dir = tempfile::tempdir().unwrap();
        for rows in [2048usize, 512, 64, 8, 2] {
            write_mtx(&dir.path().join(format!("aspect_{rows}.mtx")), &gen_aspect_matrix(4096, rows).unwrap());
        }
        std::fs::write(dir.path().join("broken.mtx"), "not a matrix\n").unwrap();
        let csv = dir.path().join("classify.csv");
        invoke(&[
            "classify",
            dir.path().to_str().unwrap(),
            "--threshold",
            "9.35",
            "--reps",
            "1",
            "--csv",
            csv.to_str().unwrap(),
        ])
        .unwrap();
        let rows: Vec<ClassifyRecord> = records(&csv);
        assert_eq!(rows.len(), 5);
        for r in &rows {
            let expect = if r.d < 9.35 { "merge" } else { "rowsplit" };
            assert_eq!(r.heuristic, expect);
            assert_eq!(r.correct, r.heuristic == r.oracle);
        }

        let single = tempfile::tempdir().unwrap();
        write_mtx(&single.path().join("one.mtx"), &gen_aspect_matrix(64, 8).unwrap());
        assert!(invoke(&["classify", single.path().to_str().unwrap(), "--reps", "1"]).is_err());
    }
}
