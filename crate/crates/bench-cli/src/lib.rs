//! Library behind the `mpmm-bench` command. Every subcommand is a plain
//! function writing to a caller-supplied sink, so tests can run the same
//! code the binary runs.

mod args;
mod host;
mod report;

use std::fs;
use std::hint::black_box;
use std::io::Write;
use std::path::{Path, PathBuf};

use mpmm::predictor::select_block_size;
use mpmm::timing::{Clock, Probe, WallClock};
use mpmm::tuner::{
    load_table, measure_block_sizes, parse_dims, rel_diff, save_table, tune_sweep_with,
    SelectionMode, SweepEvent, TuningConfig, TuningTable,
};
use mpmm::{
    frobenius_rel_diff, frobenius_rel_diff_units, generate_test_pair, matmul_block, matmul_simple,
    matmul_strassen, AlgorithmChoice, BigFloat, DenseMatrix, DoubleDouble, PrecisionKind,
    PrecisionSpec, QuadDouble, Scalar,
};

pub use args::{
    Cli, Command, PredictArgs, ReportArgs, ReportFormat, TimingArgs, TuneArgs, VerifyArgs,
};
pub use host::{cap_thread_list, thread_cap, HostInfo, RunLock, LOCK_PATH_ENV, THREADS_MAX_ENV};
pub use report::{read_csv, report_rows, winners_grid, write_csv, ReportRow};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Io = 3,
    VerificationFailed = 4,
    Measurement = 5,
    LockBusy = 6,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mpmm::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed in {0} case(s)")]
    Verification(usize),
    #[error("another timed run holds the lock {0}")]
    LockBusy(PathBuf),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        use mpmm::Error as E;
        match self {
            Self::Core(E::Measurement(_)) => ExitStatus::Measurement,
            Self::Core(E::Io(_) | E::Format(_))
            | Self::Io { .. }
            | Self::Output(_)
            | Self::Csv(_) => ExitStatus::Io,
            Self::Core(_) | Self::Usage(_) => ExitStatus::Usage,
            Self::Verification(_) => ExitStatus::VerificationFailed,
            Self::LockBusy(_) => ExitStatus::LockBusy,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Core errors with a path attached when they come from the file system.
fn with_path(path: &Path) -> impl FnOnce(mpmm::Error) -> CliError + '_ {
    move |e| match e {
        mpmm::Error::Io(source) => io_at(path)(source),
        other => CliError::Core(other),
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Tune(a) => cmd_tune(a, out).map(drop),
        Command::Verify(a) => cmd_verify(a, out).map(drop),
        Command::Predict(a) => cmd_predict(a, out).map(drop),
        Command::Report(a) => cmd_report(a, out),
    }
}

macro_rules! with_scalar {
    ($prec:expr, $t:ident => $body:expr) => {
        match $prec.kind() {
            PrecisionKind::Dd => {
                type $t = DoubleDouble;
                $body
            }
            PrecisionKind::Qd => {
                type $t = QuadDouble;
                $body
            }
            PrecisionKind::Ap => {
                type $t = BigFloat;
                $body
            }
        }
    };
}

/// A single thread count clamped to the environment cap.
fn capped(threads: usize) -> CliResult<usize> {
    Ok(thread_cap()?.map_or(threads, |cap| threads.min(cap)))
}

fn fmt_units(x: f64) -> String {
    if x < 1e6 {
        format!("{x:.2}")
    } else {
        format!("{x:.2e}")
    }
}

fn fmt_opt(t: Option<f64>) -> String {
    t.map_or_else(|| "-".to_string(), |t| format!("{t:.4}"))
}

/// `tune`: sweeps the grid, writes the table and its CSV report.
pub fn cmd_tune(args: &TuneArgs, out: &mut dyn Write) -> CliResult<TuningTable> {
    let cfg = TuningConfig {
        precisions: args.prec.clone(),
        dims: parse_dims(&args.dims)?,
        block_candidates: args.nmin.clone(),
        thread_counts: cap_thread_list(&args.threads, thread_cap()?)?,
        strassen_cutoff: args.cutoff,
        timing: args.timing.policy(),
        mode: if args.no_predict {
            SelectionMode::Exhaustive
        } else {
            SelectionMode::Predict
        },
        slice_multiplier: args.slice_mult,
        simple_max_n: (!args.simple_always).then_some(args.simple_max),
        output: Some(args.out.clone()),
    };
    cfg.validate()?;
    let csv_path = args
        .csv
        .clone()
        .unwrap_or_else(|| args.out.with_extension("csv"));
    let _lock = RunLock::acquire()?;

    writeln!(
        out,
        "{:<8} {:>5} {:>3} {:>5} {:>10} {:>10} {:>10} {:>8} {:>10} {:>10}  winner",
        "prec",
        "n",
        "thr",
        "nmin",
        "block_s",
        "slice_s",
        "pred_s",
        "rel.diff",
        "simple_s",
        "strassen_s"
    )?;
    let mut clock = WallClock::new(cfg.timing);
    let mut write_err = None;
    let mut table = tune_sweep_with(&cfg, &mut clock, |event| {
        let line = match event {
            SweepEvent::Cell(c) => {
                let r = &c.result;
                format!(
                    "{:<8} {:>5} {:>3} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>7.2}% {:>10} {:>10.4}  {}",
                    r.prec.short_name(),
                    r.n,
                    r.threads,
                    r.best_n_min,
                    r.block_time_s,
                    r.prediction_time_s,
                    r.predicted_s,
                    100.0 * r.rel_diff,
                    fmt_opt(r.simple_time_s),
                    r.strassen_time_s,
                    r.winner
                )
            }
            SweepEvent::Gap(g) => format!(
                "{:<8} {:>5} {:>3}  failed: {}",
                g.prec.short_name(),
                g.n,
                g.threads,
                g.reason
            ),
        };
        if let Err(e) = writeln!(out, "{line}") {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }

    let mut comments = HostInfo::detect().to_comments();
    comments.push(format!(
        "mode: {}",
        if args.no_predict {
            "exhaustive"
        } else {
            "predict"
        }
    ));
    table.comments = comments;
    for t in &table.thresholds {
        let n =
            t.n.map_or_else(|| "none".to_string(), |n| format!("n >= {n}"));
        writeln!(
            out,
            "threshold {} threads {}: {n}",
            t.prec.short_name(),
            t.threads
        )?;
    }
    writeln!(
        out,
        "total tuning time {:.3} s, block size selection {:.3} s",
        table.total_tuning_time_s, table.selection_phase_s
    )?;

    save_table(&table, &args.out).map_err(with_path(&args.out))?;
    let file = fs::File::create(&csv_path).map_err(io_at(&csv_path))?;
    write_csv(&report_rows(&table), file)?;
    writeln!(
        out,
        "wrote {} and {}",
        args.out.display(),
        csv_path.display()
    )?;
    if !table.gaps.is_empty() {
        return Err(
            mpmm::Error::Measurement(format!("{} grid point(s) failed", table.gaps.len())).into(),
        );
    }
    Ok(table)
}

/// Outcome of one `verify` case.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyCase {
    pub prec: PrecisionSpec,
    pub n: usize,
    pub block_vs_simple: f64,
    pub strassen_vs_simple: f64,
    /// The same differences in units of `2^-bits`.
    pub block_units: f64,
    pub strassen_units: f64,
    pub integer_exact: bool,
    pub single_block_identical: bool,
    pub threads_invariant: bool,
}

impl VerifyCase {
    /// Block may differ from simple by `4 n u`, Strassen by `100 n u`.
    pub fn passed(&self) -> bool {
        let n = self.n as f64;
        self.block_units <= 4.0 * n
            && self.strassen_units <= 100.0 * n
            && self.integer_exact
            && self.single_block_identical
            && self.threads_invariant
    }
}

fn integer_matrix<T: Scalar>(
    n: usize,
    prec: PrecisionSpec,
    seed: usize,
) -> mpmm::Result<DenseMatrix<T>> {
    DenseMatrix::from_fn(n, n, prec, |i, j| {
        let v = (i * 7 + j * 13 + seed * 5 + i * j) % 17;
        T::from_f64(v as f64 - 8.0, prec)
    })
}

fn verify_case<T: Scalar>(
    prec: PrecisionSpec,
    n: usize,
    args: &VerifyArgs,
    threads: usize,
) -> CliResult<VerifyCase> {
    let strassen = |a: &DenseMatrix<T>, b: &DenseMatrix<T>, t| {
        matmul_strassen(a, b, args.cutoff, args.nmin, t)
    };

    let (a, b) = generate_test_pair::<T>(n, prec)?;
    let simple = matmul_simple(&a, &b, 1)?;
    let block = matmul_block(&a, &b, args.nmin, 1)?;
    let mut fast = strassen(&a, &b, 1)?;
    if args.inject_fault {
        let mut bumped = fast.get(0, 0).clone();
        let delta = T::from_f64(fast.get(0, 0).to_f64().abs().max(1.0) * 1e-12, prec);
        bumped.add_assign_ref(&delta);
        fast.set(0, 0, bumped)?;
    }
    let threads_invariant = matmul_simple(&a, &b, threads)? == simple
        && matmul_block(&a, &b, args.nmin, threads)? == block
        && strassen(&a, &b, threads)? == fast;
    let single_block_identical = matmul_block(&a, &b, n, threads)? == simple;

    let ia = integer_matrix::<T>(n, prec, 1)?;
    let ib = integer_matrix::<T>(n, prec, 2)?;
    let reference = DenseMatrix::from_fn(n, n, prec, |i, j| {
        let s: i64 = (0..n)
            .map(|k| ia.get(i, k).to_f64() as i64 * ib.get(k, j).to_f64() as i64)
            .sum();
        T::from_f64(s as f64, prec)
    })?;
    let mut integer_strassen = strassen(&ia, &ib, threads)?;
    if args.inject_fault {
        let mut v = integer_strassen.get(0, 0).clone();
        v.add_assign_ref(&T::from_f64(1.0, prec));
        integer_strassen.set(0, 0, v)?;
    }
    let integer_exact = matmul_simple(&ia, &ib, threads)? == reference
        && matmul_block(&ia, &ib, args.nmin, threads)? == reference
        && integer_strassen == reference;

    Ok(VerifyCase {
        prec,
        n,
        block_vs_simple: frobenius_rel_diff(&block, &simple)?,
        strassen_vs_simple: frobenius_rel_diff(&fast, &simple)?,
        block_units: frobenius_rel_diff_units(&block, &simple)?,
        strassen_units: frobenius_rel_diff_units(&fast, &simple)?,
        integer_exact,
        single_block_identical,
        threads_invariant,
    })
}

/// `verify`: cross-algorithm agreement, exact integer products, thread
/// invariance. Fails with [`CliError::Verification`] if any case is out
/// of bounds.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<Vec<VerifyCase>> {
    let dims = parse_dims(&args.dims)?;
    let threads = capped(args.threads)?;
    AlgorithmChoice::Strassen {
        cutoff: args.cutoff,
        leaf_n_min: args.nmin,
    }
    .validate()?;
    if threads == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    writeln!(
        out,
        "{:<8} {:>5} {:>12} {:>12} {:>9} {:>9} {:>7} {:>7} {:>7}  status",
        "prec", "n", "block/simp", "strs/simp", "block/u", "strs/u", "integer", "1block", "threads"
    )?;
    let mut cases = Vec::new();
    for &prec in &args.prec {
        for &n in &dims {
            let case = with_scalar!(prec, S => verify_case::<S>(prec, n, args, threads))?;
            let yn = |b: bool| if b { "ok" } else { "FAIL" };
            writeln!(
                out,
                "{:<8} {:>5} {:>12.3e} {:>12.3e} {:>9} {:>9} {:>7} {:>7} {:>7}  {}",
                prec.short_name(),
                n,
                case.block_vs_simple,
                case.strassen_vs_simple,
                fmt_units(case.block_units),
                fmt_units(case.strassen_units),
                yn(case.integer_exact),
                yn(case.single_block_identical),
                yn(case.threads_invariant),
                if case.passed() { "pass" } else { "FAIL" }
            )?;
            cases.push(case);
        }
    }
    let failed = cases.iter().filter(|c| !c.passed()).count();
    writeln!(out, "{} case(s), {failed} failed", cases.len())?;
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(cases)
}

/// One candidate row of a `predict` run.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictRow {
    pub n_min: usize,
    pub slice_rows: usize,
    pub measured_s: f64,
    pub slice_time_s: f64,
    pub predicted_s: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictReport {
    pub prec: PrecisionSpec,
    pub n: usize,
    pub threads: usize,
    pub rows: Vec<PredictRow>,
    /// Candidate chosen by prediction.
    pub predicted_best: usize,
    /// Candidate with the smallest measured time.
    pub measured_best: usize,
    pub strassen_s: Option<f64>,
}

impl PredictReport {
    pub fn row(&self, n_min: usize) -> Option<&PredictRow> {
        self.rows.iter().find(|r| r.n_min == n_min)
    }

    /// How much slower the predicted choice is than the measured best.
    pub fn choice_penalty(&self) -> f64 {
        let chosen = self
            .row(self.predicted_best)
            .map_or(f64::NAN, |r| r.measured_s);
        let best = self
            .row(self.measured_best)
            .map_or(f64::NAN, |r| r.measured_s);
        chosen / best - 1.0
    }
}

fn predict_generic<T: Scalar>(
    args: &PredictArgs,
    threads: usize,
    clock: &mut dyn Clock,
) -> CliResult<PredictReport> {
    let prec = args.prec;
    let (a, b) = generate_test_pair::<T>(args.dim, prec)?;
    let (predicted_best, records) =
        select_block_size(&a, &b, &args.nmin, threads, args.slice_mult, clock)?;
    let measured = measure_block_sizes(&a, &b, &args.nmin, threads, clock)?;
    let rows: Vec<PredictRow> = records
        .iter()
        .zip(&measured)
        .map(|(r, &(_, t))| PredictRow {
            n_min: r.n_min,
            slice_rows: r.slice_rows,
            measured_s: t,
            slice_time_s: r.slice_time_s,
            predicted_s: r.predicted_full_s,
            rel_diff: rel_diff(r.predicted_full_s, t),
        })
        .collect();
    let measured_best = rows
        .iter()
        .fold(None::<&PredictRow>, |acc, r| match acc {
            Some(b) if b.measured_s <= r.measured_s => Some(b),
            _ => Some(r),
        })
        .map(|r| r.n_min)
        .expect("candidates are nonempty");
    let strassen_s = if args.no_strassen {
        None
    } else {
        let choice = AlgorithmChoice::Strassen {
            cutoff: args.cutoff,
            leaf_n_min: predicted_best,
        }
        .validate()?;
        let mut failure = None;
        let t = clock.measure(
            Probe::Full(choice),
            &mut || match choice.multiply(&a, &b, threads) {
                Ok(c) => {
                    black_box(c);
                }
                Err(e) => failure = Some(e),
            },
        )?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        Some(t)
    };
    Ok(PredictReport {
        prec,
        n: args.dim,
        threads,
        rows,
        predicted_best,
        measured_best,
        strassen_s,
    })
}

/// Runs `predict` with an explicit clock.
pub fn predict_with(args: &PredictArgs, clock: &mut dyn Clock) -> CliResult<PredictReport> {
    if args.dim < 2 {
        return Err(CliError::Usage("dimension must be at least 2".into()));
    }
    if args.threads == 0 || args.slice_mult == 0 {
        return Err(CliError::Usage(
            "threads and slice multiplier must be positive".into(),
        ));
    }
    let threads = capped(args.threads)?;
    with_scalar!(args.prec, S => predict_generic::<S>(args, threads, clock))
}

/// `predict`: per candidate, (a) block size, (b) measured time, (c) slice
/// time, (d) predicted time and the relative difference, plus (e) the
/// Strassen time.
pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> CliResult<PredictReport> {
    let policy = args.timing.policy();
    policy.validate()?;
    let _lock = RunLock::acquire()?;
    let report = predict_with(args, &mut WallClock::new(policy))?;
    writeln!(
        out,
        "prec {}  n {}  threads {}  slice multiplier {}",
        report.prec.short_name(),
        report.n,
        report.threads,
        args.slice_mult
    )?;
    writeln!(
        out,
        "{:>6} {:>6} {:>12} {:>12} {:>12} {:>9}",
        "(a)", "rows", "(b)", "(c)", "(d)", "rel.diff"
    )?;
    for r in &report.rows {
        let mark = if r.n_min == report.predicted_best {
            " *"
        } else {
            ""
        };
        writeln!(
            out,
            "{:>6} {:>6} {:>12.5} {:>12.5} {:>12.5} {:>8.2}%{mark}",
            r.n_min,
            r.slice_rows,
            r.measured_s,
            r.slice_time_s,
            r.predicted_s,
            100.0 * r.rel_diff
        )?;
    }
    if let Some(t) = report.strassen_s {
        writeln!(out, "(e) strassen {t:.5}")?;
    }
    writeln!(
        out,
        "predicted best {}, measured best {}, penalty {:.2}%",
        report.predicted_best,
        report.measured_best,
        100.0 * report.choice_penalty()
    )?;
    Ok(report)
}

/// `report`: CSV of every row, or the winners grid.
pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> CliResult<()> {
    let table = load_table(&args.input).map_err(with_path(&args.input))?;
    match args.format {
        ReportFormat::Csv => write_csv(&report_rows(&table), out)?,
        ReportFormat::Winners => out.write_all(winners_grid(&table).as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            ExitStatus::Success,
            ExitStatus::Usage,
            ExitStatus::Io,
            ExitStatus::VerificationFailed,
            ExitStatus::Measurement,
            ExitStatus::LockBusy,
        ]
        .map(ExitStatus::code);
        let mut sorted = codes.to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
        assert_eq!(CliError::Usage("x".into()).status(), ExitStatus::Usage);
        assert_eq!(
            CliError::Verification(1).status(),
            ExitStatus::VerificationFailed
        );
        assert_eq!(
            CliError::Core(mpmm::Error::Measurement("zero".into())).status(),
            ExitStatus::Measurement
        );
        let missing = Path::new("/nonexistent/table.tbl");
        let err = load_table(missing).map_err(with_path(missing)).unwrap_err();
        assert_eq!(err.status(), ExitStatus::Io);
        assert!(err.to_string().contains("/nonexistent/table.tbl"));
    }
}
