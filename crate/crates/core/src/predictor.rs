//! Runtime prediction for the blocked algorithm.
//!
//! The blocked product of the leading `2 * n_min` rows of A with all of B
//! walks the same B blocks as the full product, so its cache behaviour is
//! representative. Its time scaled by `m / slice_rows` predicts the full
//! multiplication, and the block size with the smallest prediction wins.

use std::hint::black_box;

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;
use crate::matmul::block_view;
use crate::mpscalar::Scalar;
use crate::timing::{Clock, Probe};

/// Default slice height as a multiple of the block size.
pub const DEFAULT_SLICE_MULTIPLIER: usize = 2;

/// One block-size candidate: the slice measurement and its extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub n_min: usize,
    pub slice_rows: usize,
    /// Rows of the full product.
    pub m: usize,
    pub slice_time_s: f64,
    pub predicted_full_s: f64,
}

impl PredictionRecord {
    /// The extrapolation factor `m / slice_rows` as a (numerator,
    /// denominator) pair.
    pub fn scale_factor(&self) -> (usize, usize) {
        (self.m, self.slice_rows)
    }
}

/// Slice height for a candidate: `min(multiplier * n_min, m)`.
pub fn slice_rows_with(n_min: usize, m: usize, multiplier: usize) -> usize {
    n_min.saturating_mul(multiplier).min(m).max(1)
}

/// `min(2 * n_min, m)`.
pub fn slice_rows_for(n_min: usize, m: usize) -> usize {
    slice_rows_with(n_min, m, DEFAULT_SLICE_MULTIPLIER)
}

pub fn predict_full_time_with(slice_time_s: f64, m: usize, n_min: usize, multiplier: usize) -> f64 {
    let rows = slice_rows_with(n_min, m, multiplier);
    slice_time_s * m as f64 / rows as f64
}

/// Extrapolates a slice time to the full product: `t * m / slice_rows`.
pub fn predict_full_time(slice_time_s: f64, m: usize, n_min: usize) -> f64 {
    predict_full_time_with(slice_time_s, m, n_min, DEFAULT_SLICE_MULTIPLIER)
}

/// Times the blocked product of the leading slice of `a` with all of `b`.
///
/// The slice is a borrowed view, so nothing is copied before the clock
/// starts; allocation of the (discarded) product is inside the timed region,
/// exactly as it is for a full multiplication.
pub fn time_slice<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    n_min: usize,
    threads: usize,
    multiplier: usize,
    clock: &mut dyn Clock,
) -> Result<f64> {
    if a.cols() != b.rows() {
        return Err(Error::shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.prec() != b.prec() {
        return Err(Error::PrecisionMismatch(a.prec(), b.prec()));
    }
    if n_min == 0 || threads == 0 || multiplier == 0 {
        return Err(Error::usage(
            "block size, thread count and slice multiplier must be positive",
        ));
    }
    let rows = slice_rows_with(n_min, a.rows(), multiplier);
    let slice = a.row_slice(0..rows);
    let b_view = b.as_ref();
    let prec = a.prec();
    clock.measure(Probe::Slice { n_min, rows }, &mut || {
        black_box(block_view(slice, b_view, n_min, prec, threads));
    })
}

/// Index of the minimal predicted time; ties go to the earliest (smallest
/// block size when the records are in ascending order).
pub fn best_record(records: &[PredictionRecord]) -> Option<&PredictionRecord> {
    records
        .iter()
        .fold(None, |best: Option<&PredictionRecord>, r| match best {
            Some(b) if b.predicted_full_s <= r.predicted_full_s => Some(b),
            _ => Some(r),
        })
}

pub(crate) fn check_candidates(candidates: &[usize]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::usage("no block-size candidates"));
    }
    if candidates.contains(&0) {
        return Err(Error::usage("block-size candidates must be positive"));
    }
    if candidates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::usage(
            "block-size candidates must be strictly ascending",
        ));
    }
    Ok(())
}

/// Predicts the full blocked time for every candidate and returns the block
/// size with the smallest prediction along with all records.
pub fn select_block_size<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    candidates: &[usize],
    threads: usize,
    multiplier: usize,
    clock: &mut dyn Clock,
) -> Result<(usize, Vec<PredictionRecord>)> {
    check_candidates(candidates)?;
    let m = a.rows();
    let records = candidates
        .iter()
        .map(|&n_min| {
            let slice_time_s = time_slice(a, b, n_min, threads, multiplier, clock)?;
            Ok(PredictionRecord {
                n_min,
                slice_rows: slice_rows_with(n_min, m, multiplier),
                m,
                slice_time_s,
                predicted_full_s: predict_full_time_with(slice_time_s, m, n_min, multiplier),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_record(&records)
        .expect("candidates are nonempty")
        .n_min;
    Ok((best, records))
}
