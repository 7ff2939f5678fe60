//! The tuning pipeline: pick a block size (by slice prediction, or by
//! exhaustive measurement for comparison), time the three algorithms, and
//! keep the fastest. A sweep repeats this over a (precision, threads, n)
//! grid and derives the dimension above which Strassen always wins.

mod table;

use std::hint::black_box;
use std::path::PathBuf;
use std::time::Instant;

pub use table::{load_table, save_table, TABLE_MAGIC};

use crate::error::{Error, Result};
use crate::matcore::{generate_test_pair, DenseMatrix};
use crate::matmul::{block_view, AlgorithmChoice, DEFAULT_STRASSEN_CUTOFF};
use crate::mpscalar::{BigFloat, DoubleDouble, PrecisionKind, PrecisionSpec, QuadDouble, Scalar};
use crate::predictor::{
    check_candidates, select_block_size, PredictionRecord, DEFAULT_SLICE_MULTIPLIER,
};
use crate::timing::{Clock, Probe, TimingPolicy, WallClock};

/// Block size used when nothing better is known.
pub const DEFAULT_BLOCK_SIZE: usize = 64;
/// Simple multiplication is not timed above this dimension by default.
pub const DEFAULT_SIMPLE_MAX_N: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// Time a slice per candidate and extrapolate.
    #[default]
    Predict,
    /// Time the full blocked product for every candidate.
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct TuningConfig {
    pub precisions: Vec<PrecisionSpec>,
    pub dims: Vec<usize>,
    pub block_candidates: Vec<usize>,
    pub thread_counts: Vec<usize>,
    pub strassen_cutoff: usize,
    pub timing: TimingPolicy,
    pub mode: SelectionMode,
    pub slice_multiplier: usize,
    /// `None` times simple multiplication at every size.
    pub simple_max_n: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            precisions: vec![PrecisionSpec::DD],
            dims: vec![128, 256],
            block_candidates: vec![16, 32, 64],
            thread_counts: vec![1],
            strassen_cutoff: DEFAULT_STRASSEN_CUTOFF,
            timing: TimingPolicy::default(),
            mode: SelectionMode::Predict,
            slice_multiplier: DEFAULT_SLICE_MULTIPLIER,
            simple_max_n: Some(DEFAULT_SIMPLE_MAX_N),
            output: None,
        }
    }
}

impl TuningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.precisions.is_empty() || self.dims.is_empty() || self.thread_counts.is_empty() {
            return Err(Error::usage(
                "precisions, dims and thread counts must be nonempty",
            ));
        }
        if let Some(n) = self.dims.iter().find(|&&n| n < 2) {
            return Err(Error::usage(format!(
                "dimensions must be at least 2, got {n}"
            )));
        }
        if self.thread_counts.contains(&0) {
            return Err(Error::usage("thread counts must be positive"));
        }
        check_candidates(&self.block_candidates)?;
        if self.strassen_cutoff < 2 {
            return Err(Error::usage("Strassen cutoff must be at least 2"));
        }
        if self.slice_multiplier == 0 {
            return Err(Error::usage("slice multiplier must be positive"));
        }
        self.timing.validate()
    }

    fn times_simple(&self, n: usize) -> bool {
        self.simple_max_n.is_none_or(|max| n <= max)
    }

    /// Number of (precision, threads, n) grid points.
    pub fn grid_len(&self) -> usize {
        self.precisions.len() * self.thread_counts.len() * unique_sorted(&self.dims).len()
    }
}

fn unique_sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Parses a dimension list such as `128,256±1,512+-1`. A `±1` (or `+-1`)
/// suffix expands to `n-1, n, n+1`. The result is sorted and deduplicated.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (base, spread) = match tok.split_once('±').or_else(|| tok.split_once("+-")) {
            Some((b, "1")) => (b, true),
            Some(_) => {
                return Err(Error::usage(format!(
                    "only ±1 expansion is supported: {tok:?}"
                )))
            }
            None => (tok, false),
        };
        let n: usize = base
            .trim()
            .parse()
            .map_err(|_| Error::usage(format!("bad dimension {tok:?}")))?;
        if spread {
            out.extend([n.saturating_sub(1), n, n + 1]);
        } else {
            out.push(n);
        }
    }
    if out.is_empty() {
        return Err(Error::usage("empty dimension list"));
    }
    Ok(unique_sorted(&out))
}

/// One grid point of a tuning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub prec: PrecisionSpec,
    pub n: usize,
    pub threads: usize,
    pub best_n_min: usize,
    /// Measured blocked time at `best_n_min`.
    pub block_time_s: f64,
    /// Slice time that produced the prediction for `best_n_min`.
    pub prediction_time_s: f64,
    pub predicted_s: f64,
    pub rel_diff: f64,
    pub simple_time_s: Option<f64>,
    pub strassen_time_s: f64,
    pub winner: AlgorithmChoice,
}

impl TuningResult {
    pub fn strassen_choice(&self) -> Option<AlgorithmChoice> {
        match self.winner {
            AlgorithmChoice::Strassen { .. } => Some(self.winner),
            _ => None,
        }
    }

    /// Time recorded for the winning algorithm.
    pub fn winner_time_s(&self) -> Option<f64> {
        match self.winner {
            AlgorithmChoice::Simple => self.simple_time_s,
            AlgorithmChoice::Block { .. } => Some(self.block_time_s),
            AlgorithmChoice::Strassen { .. } => Some(self.strassen_time_s),
        }
    }

    /// Checks that `rel_diff` and the winner follow from the stored times.
    pub fn is_consistent(&self) -> bool {
        let rd = rel_diff(self.predicted_s, self.block_time_s);
        let rd_ok = (rd - self.rel_diff).abs() <= 1e-12 * rd.max(1e-300);
        let block_ok = matches!(self.winner, AlgorithmChoice::Block { n_min } if n_min == self.best_n_min)
            || !matches!(self.winner, AlgorithmChoice::Block { .. });
        let strassen = match self.winner {
            AlgorithmChoice::Strassen { cutoff, leaf_n_min } => (cutoff, leaf_n_min),
            _ => (DEFAULT_STRASSEN_CUTOFF, self.best_n_min),
        };
        let recomputed = pick_winner(
            self.simple_time_s,
            (self.block_time_s, self.best_n_min),
            (self.strassen_time_s, strassen.0, strassen.1),
        );
        rd_ok && block_ok && recomputed == self.winner
    }
}

/// `|predicted - actual| / actual`.
pub fn rel_diff(predicted_s: f64, actual_s: f64) -> f64 {
    debug_assert!(actual_s > 0.0, "actual time must be positive");
    (predicted_s - actual_s).abs() / actual_s
}

/// Fastest of the measured algorithms. Equal times prefer Block, then
/// Strassen, then Simple.
pub fn pick_winner(
    simple_s: Option<f64>,
    block: (f64, usize),
    strassen: (f64, usize, usize),
) -> AlgorithmChoice {
    let candidates = [
        (Some(block.0), AlgorithmChoice::Block { n_min: block.1 }),
        (
            Some(strassen.0),
            AlgorithmChoice::Strassen {
                cutoff: strassen.1,
                leaf_n_min: strassen.2,
            },
        ),
        (simple_s, AlgorithmChoice::Simple),
    ];
    let mut best: Option<(f64, AlgorithmChoice)> = None;
    for (t, choice) in candidates {
        if let Some(t) = t {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, choice));
            }
        }
    }
    best.expect("block time is always present").1
}

/// A tuned grid point with the data behind the block-size choice.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub result: TuningResult,
    /// Wall time of the block-size selection step.
    pub selection_phase_s: f64,
    /// Slice predictions (prediction mode only).
    pub records: Vec<PredictionRecord>,
    /// Full blocked time per candidate (exhaustive mode only).
    pub exhaustive: Vec<(usize, f64)>,
}

fn time_full<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    choice: AlgorithmChoice,
    threads: usize,
    clock: &mut dyn Clock,
) -> Result<f64> {
    // Surface usage errors before timing anything.
    choice.validate()?;
    let mut failure = None;
    let t = clock.measure(
        Probe::Full(choice),
        &mut || match choice.multiply(a, b, threads) {
            Ok(c) => {
                black_box(c);
            }
            Err(e) => failure = Some(e),
        },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Full blocked time for every candidate, in candidate order.
pub fn measure_block_sizes<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    candidates: &[usize],
    threads: usize,
    clock: &mut dyn Clock,
) -> Result<Vec<(usize, f64)>> {
    check_candidates(candidates)?;
    candidates
        .iter()
        .map(|&n_min| {
            Ok((
                n_min,
                time_full(a, b, AlgorithmChoice::Block { n_min }, threads, clock)?,
            ))
        })
        .collect()
}

fn tune_cell<T: Scalar>(
    prec: PrecisionSpec,
    n: usize,
    threads: usize,
    cfg: &TuningConfig,
    clock: &mut dyn Clock,
) -> Result<CellOutcome> {
    let (a, b) = generate_test_pair::<T>(n, prec)?;

    // Step 1: block size.
    let started = Instant::now();
    let (best_n_min, prediction_time_s, predicted_s, records, exhaustive, measured_block) =
        match cfg.mode {
            SelectionMode::Predict => {
                let (best, records) = select_block_size(
                    &a,
                    &b,
                    &cfg.block_candidates,
                    threads,
                    cfg.slice_multiplier,
                    clock,
                )?;
                let rec = records
                    .iter()
                    .find(|r| r.n_min == best)
                    .expect("best is a candidate");
                let (slice, predicted) = (rec.slice_time_s, rec.predicted_full_s);
                (best, slice, predicted, records, Vec::new(), None)
            }
            SelectionMode::Exhaustive => {
                let times = measure_block_sizes(&a, &b, &cfg.block_candidates, threads, clock)?;
                let &(best, t) = times
                    .iter()
                    .fold(None, |acc: Option<&(usize, f64)>, x| match acc {
                        Some(a) if a.1 <= x.1 => Some(a),
                        _ => Some(x),
                    })
                    .expect("candidates are nonempty");
                (best, t, t, Vec::new(), times, Some(t))
            }
        };
    let selection_phase_s = started.elapsed().as_secs_f64();

    // Step 2: time the three algorithms.
    let block_time_s = match measured_block {
        Some(t) => t,
        None => time_full(
            &a,
            &b,
            AlgorithmChoice::Block { n_min: best_n_min },
            threads,
            clock,
        )?,
    };
    let simple_time_s = if cfg.times_simple(n) {
        Some(time_full(&a, &b, AlgorithmChoice::Simple, threads, clock)?)
    } else {
        None
    };
    let strassen = AlgorithmChoice::Strassen {
        cutoff: cfg.strassen_cutoff,
        leaf_n_min: best_n_min,
    };
    let strassen_time_s = time_full(&a, &b, strassen, threads, clock)?;

    // Step 3: fastest wins.
    let winner = pick_winner(
        simple_time_s,
        (block_time_s, best_n_min),
        (strassen_time_s, cfg.strassen_cutoff, best_n_min),
    );
    Ok(CellOutcome {
        result: TuningResult {
            prec,
            n,
            threads,
            best_n_min,
            block_time_s,
            prediction_time_s,
            predicted_s,
            rel_diff: rel_diff(predicted_s, block_time_s),
            simple_time_s,
            strassen_time_s,
            winner,
        },
        selection_phase_s,
        records,
        exhaustive,
    })
}

/// Runs a closure with the scalar type matching `prec`.
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

/// Tunes a single grid point with an explicit clock.
pub fn tune_one_with(
    prec: PrecisionSpec,
    n: usize,
    threads: usize,
    cfg: &TuningConfig,
    clock: &mut dyn Clock,
) -> Result<CellOutcome> {
    cfg.validate()?;
    if n < 2 || threads == 0 {
        return Err(Error::usage(format!(
            "bad grid point n={n} threads={threads}"
        )));
    }
    with_scalar!(prec, S => tune_cell::<S>(prec, n, threads, cfg, clock))
}

/// Tunes a single grid point on the wall clock.
pub fn tune_one(
    prec: PrecisionSpec,
    n: usize,
    threads: usize,
    cfg: &TuningConfig,
) -> Result<TuningResult> {
    let mut clock = WallClock::new(cfg.timing);
    Ok(tune_one_with(prec, n, threads, cfg, &mut clock)?.result)
}

/// Smallest dimension at and above which Strassen is the winner, per
/// (precision, threads). Absent when the largest dimension is not won by
/// Strassen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    pub prec: PrecisionSpec,
    pub threads: usize,
    pub n: Option<usize>,
}

/// A grid point that failed to tune.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub prec: PrecisionSpec,
    pub n: usize,
    pub threads: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TuningTable {
    pub rows: Vec<TuningResult>,
    pub thresholds: Vec<Threshold>,
    pub gaps: Vec<Gap>,
    pub total_tuning_time_s: f64,
    /// Wall time spent choosing block sizes across the sweep.
    pub selection_phase_s: f64,
    /// Free-form `#` lines, e.g. host metadata.
    pub comments: Vec<String>,
}

/// Smallest grid `n` such that Strassen wins at every grid point `>= n`.
pub fn extract_threshold(
    rows: &[TuningResult],
    prec: PrecisionSpec,
    threads: usize,
) -> Option<usize> {
    let mut cell: Vec<&TuningResult> = rows
        .iter()
        .filter(|r| r.prec == prec && r.threads == threads)
        .collect();
    cell.sort_by_key(|r| r.n);
    let mut threshold = None;
    for r in cell.iter().rev() {
        if r.strassen_choice().is_some() {
            threshold = Some(r.n);
        } else {
            break;
        }
    }
    threshold
}

/// How [`TuningTable::lookup_best`] arrived at its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupSource {
    Exact,
    /// At or above the Strassen threshold `n*`.
    Threshold(usize),
    /// Winner of the nearest tuned dimension below.
    NearestBelow(usize),
    /// Nothing applicable in the table.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookup {
    pub choice: AlgorithmChoice,
    pub source: LookupSource,
}

impl Lookup {
    pub fn is_fallback(&self) -> bool {
        self.source == LookupSource::Fallback
    }
}

impl TuningTable {
    /// Recomputes every threshold from the rows.
    pub fn recompute_thresholds(&mut self) {
        let mut keys: Vec<(PrecisionSpec, usize)> =
            self.rows.iter().map(|r| (r.prec, r.threads)).collect();
        keys.sort();
        keys.dedup();
        self.thresholds = keys
            .into_iter()
            .map(|(prec, threads)| Threshold {
                prec,
                threads,
                n: extract_threshold(&self.rows, prec, threads),
            })
            .collect();
    }

    /// Stored thresholds agree with the rows.
    pub fn thresholds_consistent(&self) -> bool {
        let mut t = self.clone();
        t.recompute_thresholds();
        let mut a = t.thresholds;
        let mut b = self.thresholds.clone();
        a.sort_by_key(|t| (t.prec, t.threads));
        b.sort_by_key(|t| (t.prec, t.threads));
        a == b
    }

    pub fn threshold(&self, prec: PrecisionSpec, threads: usize) -> Option<usize> {
        self.thresholds
            .iter()
            .find(|t| t.prec == prec && t.threads == threads)
            .and_then(|t| t.n)
    }

    /// Sorts rows by (precision, n, threads).
    pub fn sort_rows(&mut self) {
        self.rows.sort_by_key(|r| (r.prec, r.n, r.threads));
    }

    /// Best algorithm for a problem: an exact row if there is one, Strassen
    /// at or above the threshold, else the winner at the nearest smaller
    /// tuned dimension, else `Block(DEFAULT_BLOCK_SIZE)` flagged as a
    /// fallback.
    pub fn lookup_best(&self, prec: PrecisionSpec, n: usize, threads: usize) -> Lookup {
        let same: Vec<&TuningResult> = self
            .rows
            .iter()
            .filter(|r| r.prec == prec && r.threads == threads)
            .collect();
        if let Some(r) = same.iter().find(|r| r.n == n) {
            return Lookup {
                choice: r.winner,
                source: LookupSource::Exact,
            };
        }
        if let Some(ns) = self.threshold(prec, threads).filter(|&ns| n >= ns) {
            let strassen = same
                .iter()
                .filter(|r| r.n >= ns)
                .max_by_key(|r| r.n)
                .and_then(|r| r.strassen_choice())
                .unwrap_or(AlgorithmChoice::Strassen {
                    cutoff: DEFAULT_STRASSEN_CUTOFF,
                    leaf_n_min: DEFAULT_BLOCK_SIZE,
                });
            return Lookup {
                choice: strassen,
                source: LookupSource::Threshold(ns),
            };
        }
        if let Some(r) = same.iter().filter(|r| r.n < n).max_by_key(|r| r.n) {
            return Lookup {
                choice: r.winner,
                source: LookupSource::NearestBelow(r.n),
            };
        }
        Lookup {
            choice: AlgorithmChoice::Block {
                n_min: DEFAULT_BLOCK_SIZE,
            },
            source: LookupSource::Fallback,
        }
    }
}

/// Progress notifications from a sweep.
pub enum SweepEvent<'a> {
    Cell(&'a CellOutcome),
    Gap(&'a Gap),
}

/// Untimed multiplies to settle caches and frequency before a group.
fn group_warmup(
    prec: PrecisionSpec,
    n: usize,
    n_min: usize,
    threads: usize,
    runs: usize,
) -> Result<()> {
    if runs == 0 {
        return Ok(());
    }
    with_scalar!(prec, S => {
        let (a, b) = generate_test_pair::<S>(n, prec)?;
        for _ in 0..runs {
            black_box(block_view(a.as_ref(), b.as_ref(), n_min, prec, threads));
        }
        Ok(())
    })
}

/// Runs the whole grid serially. A failing grid point becomes a [`Gap`] and
/// the sweep continues.
pub fn tune_sweep_with(
    cfg: &TuningConfig,
    clock: &mut dyn Clock,
    mut observer: impl FnMut(SweepEvent<'_>),
) -> Result<TuningTable> {
    cfg.validate()?;
    let started = Instant::now();
    let dims = unique_sorted(&cfg.dims);
    let mut table = TuningTable::default();
    for &prec in &cfg.precisions {
        for &threads in &cfg.thread_counts {
            group_warmup(
                prec,
                dims[0],
                cfg.block_candidates[0],
                threads,
                cfg.timing.group_warmups,
            )?;
            for &n in &dims {
                match tune_one_with(prec, n, threads, cfg, clock) {
                    Ok(cell) => {
                        observer(SweepEvent::Cell(&cell));
                        table.selection_phase_s += cell.selection_phase_s;
                        table.rows.push(cell.result);
                    }
                    Err(e) => {
                        let gap = Gap {
                            prec,
                            n,
                            threads,
                            reason: e.to_string(),
                        };
                        observer(SweepEvent::Gap(&gap));
                        table.gaps.push(gap);
                    }
                }
            }
        }
    }
    table.sort_rows();
    table.recompute_thresholds();
    table.total_tuning_time_s = started.elapsed().as_secs_f64();
    Ok(table)
}

/// Runs the sweep on the wall clock and writes the table to `cfg.output`
/// when set.
pub fn tune_sweep(cfg: &TuningConfig) -> Result<TuningTable> {
    let mut clock = WallClock::new(cfg.timing);
    let table = tune_sweep_with(cfg, &mut clock, |_| {})?;
    if let Some(path) = &cfg.output {
        save_table(&table, path)?;
    }
    Ok(table)
}
