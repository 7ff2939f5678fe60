//! Simple, blocked and Strassen multiplication.
//!
//! Every kernel is deterministic in the thread count: work is split only
//! over disjoint output regions (or independent Strassen products), and each
//! output element is accumulated in the same order whatever the split.

use std::fmt;
use std::str::FromStr;
use std::thread;

use crate::error::{Error, Result};
use crate::matcore::{make_partition, BlockPartition, DenseMatrix, MatRef};
use crate::mpscalar::{PrecisionSpec, Scalar};

pub const DEFAULT_STRASSEN_CUTOFF: usize = 64;

/// One of the three algorithms with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmChoice {
    Simple,
    Block {
        n_min: usize,
    },
    /// Recurses while the dimension exceeds `cutoff`, then multiplies with
    /// the blocked kernel at `leaf_n_min`.
    Strassen {
        cutoff: usize,
        leaf_n_min: usize,
    },
}

impl AlgorithmChoice {
    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Block { n_min: 0 } | Self::Strassen { leaf_n_min: 0, .. } => {
                Err(Error::usage("block size must be at least 1"))
            }
            Self::Strassen { cutoff, .. } if cutoff < 2 => Err(Error::usage(format!(
                "Strassen cutoff must be at least 2, got {cutoff}"
            ))),
            _ => Ok(self),
        }
    }

    pub fn multiply<T: Scalar>(
        self,
        a: &DenseMatrix<T>,
        b: &DenseMatrix<T>,
        threads: usize,
    ) -> Result<DenseMatrix<T>> {
        match self {
            Self::Simple => matmul_simple(a, b, threads),
            Self::Block { n_min } => matmul_block(a, b, n_min, threads),
            Self::Strassen { cutoff, leaf_n_min } => {
                matmul_strassen(a, b, cutoff, leaf_n_min, threads)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Block { .. } => "block",
            Self::Strassen { .. } => "strassen",
        }
    }
}

/// `simple`, `block:<n_min>` or `strassen:<cutoff>:<leaf_n_min>`.
impl fmt::Display for AlgorithmChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Simple => f.write_str("simple"),
            Self::Block { n_min } => write!(f, "block:{n_min}"),
            Self::Strassen { cutoff, leaf_n_min } => write!(f, "strassen:{cutoff}:{leaf_n_min}"),
        }
    }
}

impl FromStr for AlgorithmChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::usage(format!("bad number {p:?} in algorithm {s:?}")))
        };
        let choice = match parts[..] {
            ["simple"] => Self::Simple,
            ["block", n] => Self::Block { n_min: num(n)? },
            ["strassen", c, n] => Self::Strassen {
                cutoff: num(c)?,
                leaf_n_min: num(n)?,
            },
            _ => return Err(Error::usage(format!("unknown algorithm {s:?}"))),
        };
        choice.validate()
    }
}

fn check_operands<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, threads: usize) -> Result<()> {
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
    if threads == 0 {
        return Err(Error::usage("thread count must be at least 1"));
    }
    Ok(())
}

/// Splits `0..len` into at most `parts` contiguous, nearly equal ranges.
fn split_even(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let parts = parts.clamp(1, len.max(1));
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let n = base + usize::from(p < extra);
            let r = (start, start + n);
            start += n;
            r
        })
        .collect()
}

// --- simple -------------------------------------------------------------

fn simple_rows<T: Scalar>(
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    first_row: usize,
    out: &mut [T],
    prec: PrecisionSpec,
) {
    let n = b.cols();
    let mut scratch = T::zero(prec);
    for (r, out_row) in out.chunks_mut(n).enumerate() {
        let a_row = a.row(first_row + r);
        for (j, c) in out_row.iter_mut().enumerate() {
            c.set_zero();
            for (k, a_ik) in a_row.iter().enumerate() {
                c.mul_acc(a_ik, b.get(k, j), &mut scratch);
            }
        }
    }
}

pub(crate) fn simple_view<T: Scalar>(
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    prec: PrecisionSpec,
    threads: usize,
) -> DenseMatrix<T> {
    let (m, n) = (a.rows(), b.cols());
    let mut c = DenseMatrix::zeros_unchecked(m, n, prec);
    let ranges = split_even(m, threads);
    if ranges.len() == 1 {
        simple_rows(a, b, 0, c.data_mut(), prec);
        return c;
    }
    thread::scope(|s| {
        let mut rest = c.data_mut();
        for &(start, end) in &ranges {
            let (chunk, tail) = rest.split_at_mut((end - start) * n);
            rest = tail;
            s.spawn(move || simple_rows(a, b, start, chunk, prec));
        }
    });
    c
}

/// `c_ij = sum_k a_ik b_kj`, accumulated in increasing `k`. Rows of `C` are
/// split across `threads`.
pub fn matmul_simple<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    threads: usize,
) -> Result<DenseMatrix<T>> {
    check_operands(a, b, threads)?;
    Ok(simple_view(a.as_ref(), b.as_ref(), a.prec(), threads))
}

// --- blocked ------------------------------------------------------------

struct Tile<T> {
    row0: usize,
    col0: usize,
    cols: usize,
    data: Vec<T>,
}

fn compute_tile<T: Scalar>(
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    part: &BlockPartition,
    offsets: &[Vec<usize>; 3],
    bi: usize,
    bj: usize,
    prec: PrecisionSpec,
) -> Tile<T> {
    let (row0, rows) = (offsets[0][bi], part.row_extents[bi]);
    let (col0, cols) = (offsets[2][bj], part.col_extents[bj]);
    let mut data = vec![T::zero(prec); rows * cols];
    let mut scratch = T::zero(prec);
    // C_ij += A_ik B_kj over k blocks in order; within a block pair the
    // i-k-j loop keeps each element's k order ascending.
    for (kb, &k0) in offsets[1].iter().enumerate() {
        let depth = part.inner_extents[kb];
        for i in 0..rows {
            let a_row = &a.row(row0 + i)[k0..k0 + depth];
            let c_row = &mut data[i * cols..(i + 1) * cols];
            for (dk, a_ik) in a_row.iter().enumerate() {
                let b_row = &b.row(k0 + dk)[col0..col0 + cols];
                for (c, b_kj) in c_row.iter_mut().zip(b_row) {
                    c.mul_acc(a_ik, b_kj, &mut scratch);
                }
            }
        }
    }
    Tile {
        row0,
        col0,
        cols,
        data,
    }
}

pub(crate) fn block_view<T: Scalar>(
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    n_min: usize,
    prec: PrecisionSpec,
    threads: usize,
) -> DenseMatrix<T> {
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    let part = make_partition(m, l, n, n_min).expect("validated block size and dimensions");
    let offsets = [
        BlockPartition::offsets(&part.row_extents),
        BlockPartition::offsets(&part.inner_extents),
        BlockPartition::offsets(&part.col_extents),
    ];
    let grid = part.row_blocks() * part.col_blocks();
    let nb = part.col_blocks();

    let run = |tiles: std::ops::Range<usize>| -> Vec<Tile<T>> {
        tiles
            .map(|t| compute_tile(a, b, &part, &offsets, t / nb, t % nb, prec))
            .collect()
    };

    let ranges = split_even(grid, threads);
    let tiles: Vec<Tile<T>> = if ranges.len() == 1 {
        run(0..grid)
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|&(start, end)| {
                    let run = &run;
                    s.spawn(move || run(start..end))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("block worker panicked"))
                .collect()
        })
    };

    let mut c = DenseMatrix::zeros_unchecked(m, n, prec);
    let out = c.data_mut();
    for tile in tiles {
        for (i, row) in tile.data.chunks(tile.cols).enumerate() {
            let start = (tile.row0 + i) * n + tile.col0;
            out[start..start + tile.cols].clone_from_slice(row);
        }
    }
    c
}

/// Blocked multiplication `C_ij = sum_k A_ik B_kj` over an `n_min` block grid
/// with ragged final blocks. The (i, j) tiles are split across `threads`.
pub fn matmul_block<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    n_min: usize,
    threads: usize,
) -> Result<DenseMatrix<T>> {
    check_operands(a, b, threads)?;
    if n_min == 0 {
        return Err(Error::usage("block size must be at least 1"));
    }
    Ok(block_view(a.as_ref(), b.as_ref(), n_min, a.prec(), threads))
}

// --- Strassen -----------------------------------------------------------

/// Operation counts at one recursion depth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelCount {
    pub multiplications: usize,
    pub additions: usize,
}

/// Per-depth counts of sub-multiplications and matrix additions or
/// subtractions; index 0 is the top level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrassenStats {
    pub levels: Vec<LevelCount>,
    /// Number of zero-paddings of odd-dimensioned operands.
    pub paddings: usize,
}

impl StrassenStats {
    fn level(&mut self, depth: usize) -> &mut LevelCount {
        if self.levels.len() <= depth {
            self.levels.resize(depth + 1, LevelCount::default());
        }
        &mut self.levels[depth]
    }

    fn merge(&mut self, other: StrassenStats) {
        for (d, c) in other.levels.into_iter().enumerate() {
            let l = self.level(d);
            l.multiplications += c.multiplications;
            l.additions += c.additions;
        }
        self.paddings += other.paddings;
    }
}

/// Scratch for one recursion level: the ten quadrant sums feeding the seven
/// products.
pub struct StrassenWorkspace<T> {
    half: usize,
    sums: [DenseMatrix<T>; 10],
}

impl<T: Scalar> StrassenWorkspace<T> {
    fn new(a: MatRef<'_, T>, b: MatRef<'_, T>, prec: PrecisionSpec) -> Self {
        let h = a.rows() / 2;
        let a11 = a.sub(0, 0, h, h);
        let a12 = a.sub(0, h, h, h);
        let a21 = a.sub(h, 0, h, h);
        let a22 = a.sub(h, h, h, h);
        let b11 = b.sub(0, 0, h, h);
        let b12 = b.sub(0, h, h, h);
        let b21 = b.sub(h, 0, h, h);
        let b22 = b.sub(h, h, h, h);
        let add = |x: MatRef<'_, T>, y: MatRef<'_, T>| combine2(x, y, prec, false);
        let sub = |x: MatRef<'_, T>, y: MatRef<'_, T>| combine2(x, y, prec, true);
        Self {
            half: h,
            sums: [
                add(a11, a22),
                add(b11, b22),
                add(a21, a22),
                sub(b12, b22),
                sub(b21, b11),
                add(a11, a12),
                sub(a21, a11),
                add(b11, b12),
                sub(a12, a22),
                add(b21, b22),
            ],
        }
    }

    /// Operand pairs of P1..P7.
    fn operands<'a>(
        &'a self,
        a: MatRef<'a, T>,
        b: MatRef<'a, T>,
    ) -> [(MatRef<'a, T>, MatRef<'a, T>); 7] {
        let h = self.half;
        let s = |i: usize| self.sums[i].as_ref();
        [
            (s(0), s(1)),
            (s(2), b.sub(0, 0, h, h)),
            (a.sub(0, 0, h, h), s(3)),
            (a.sub(h, h, h, h), s(4)),
            (s(5), b.sub(h, h, h, h)),
            (s(6), s(7)),
            (s(8), s(9)),
        ]
    }
}

fn combine2<T: Scalar>(
    x: MatRef<'_, T>,
    y: MatRef<'_, T>,
    prec: PrecisionSpec,
    subtract: bool,
) -> DenseMatrix<T> {
    let mut out = DenseMatrix::<T>::zeros_unchecked(x.rows(), x.cols(), prec);
    let cols = x.cols();
    for (i, row) in out.data_mut().chunks_mut(cols).enumerate() {
        for ((o, xv), yv) in row.iter_mut().zip(x.row(i)).zip(y.row(i)) {
            if subtract {
                o.set_difference(xv, yv);
            } else {
                o.set_sum(xv, yv);
            }
        }
    }
    out
}

fn pad_to_even<T: Scalar>(x: MatRef<'_, T>, prec: PrecisionSpec) -> DenseMatrix<T> {
    let n = x.rows() + 1;
    let mut out = DenseMatrix::zeros_unchecked(n, n, prec);
    let data = out.data_mut();
    for i in 0..x.rows() {
        data[i * n..i * n + x.cols()].clone_from_slice(x.row(i));
    }
    out
}

#[derive(Clone, Copy)]
struct StrassenParams {
    cutoff: usize,
    leaf_n_min: usize,
    prec: PrecisionSpec,
}

/// The seven products of one Strassen level, each computed recursively.
fn seven_products<T: Scalar>(
    ws: &StrassenWorkspace<T>,
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    params: StrassenParams,
    threads: usize,
    depth: usize,
) -> (Vec<DenseMatrix<T>>, StrassenStats) {
    let operands = ws.operands(a, b);
    let workers = threads.min(operands.len());
    let mut stats = StrassenStats::default();
    if workers <= 1 {
        let products = operands
            .iter()
            .map(|&(x, y)| {
                let (p, s) = strassen_rec(x, y, params, 1, depth + 1);
                stats.merge(s);
                p
            })
            .collect();
        return (products, stats);
    }
    // Round-robin the products over the workers; the combination below
    // consumes them in fixed order.
    let mut slots: Vec<Option<(DenseMatrix<T>, StrassenStats)>> =
        (0..operands.len()).map(|_| None).collect();
    thread::scope(|s| {
        let operands = &operands;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..operands.len())
                        .step_by(workers)
                        .map(|p| {
                            let (x, y) = operands[p];
                            (p, strassen_rec(x, y, params, 1, depth + 1))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (p, r) in h.join().expect("Strassen worker panicked") {
                slots[p] = Some(r);
            }
        }
    });
    let products = slots
        .into_iter()
        .map(|slot| {
            let (p, s) = slot.expect("every product computed");
            stats.merge(s);
            p
        })
        .collect();
    (products, stats)
}

/// C11 = P1 + P4 - P5 + P7, C12 = P3 + P5, C21 = P2 + P4,
/// C22 = P1 + P3 - P2 + P6, each evaluated left to right.
fn assemble<T: Scalar>(p: &[DenseMatrix<T>], h: usize, prec: PrecisionSpec) -> DenseMatrix<T> {
    let n = 2 * h;
    let mut c = DenseMatrix::<T>::zeros_unchecked(n, n, prec);
    let out = c.data_mut();
    for i in 0..h {
        for j in 0..h {
            let (p1, p2, p3, p4) = (
                p[0].get(i, j),
                p[1].get(i, j),
                p[2].get(i, j),
                p[3].get(i, j),
            );
            let (p5, p6, p7) = (p[4].get(i, j), p[5].get(i, j), p[6].get(i, j));

            let c11 = &mut out[i * n + j];
            c11.set_sum(p1, p4);
            c11.sub_assign_ref(p5);
            c11.add_assign_ref(p7);

            out[i * n + h + j].set_sum(p3, p5);
            out[(h + i) * n + j].set_sum(p2, p4);

            let c22 = &mut out[(h + i) * n + h + j];
            c22.set_sum(p1, p3);
            c22.sub_assign_ref(p2);
            c22.add_assign_ref(p6);
        }
    }
    c
}

fn strassen_rec<T: Scalar>(
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    params: StrassenParams,
    threads: usize,
    depth: usize,
) -> (DenseMatrix<T>, StrassenStats) {
    let n = a.rows();
    if n <= params.cutoff {
        let c = block_view(a, b, params.leaf_n_min, params.prec, threads);
        return (c, StrassenStats::default());
    }
    if n % 2 == 1 {
        let ap = pad_to_even(a, params.prec);
        let bp = pad_to_even(b, params.prec);
        let (c, mut stats) = strassen_rec(ap.as_ref(), bp.as_ref(), params, threads, depth);
        stats.paddings += 1;
        return (c.as_ref().sub(0, 0, n, n).to_owned(params.prec), stats);
    }

    let ws = StrassenWorkspace::new(a, b, params.prec);
    let (products, mut stats) = seven_products(&ws, a, b, params, threads, depth);
    let c = assemble(&products, ws.half, params.prec);
    let level = stats.level(depth);
    level.multiplications += 7;
    level.additions += 10 + 8;
    (c, stats)
}

fn check_strassen<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    cutoff: usize,
    leaf_n_min: usize,
    threads: usize,
) -> Result<()> {
    check_operands(a, b, threads)?;
    if a.rows() != a.cols() || b.rows() != b.cols() {
        return Err(Error::shape(format!(
            "Strassen needs square operands, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    AlgorithmChoice::Strassen { cutoff, leaf_n_min }.validate()?;
    Ok(())
}

/// Strassen's seven-product recursion on square operands. Odd dimensions are
/// zero-padded to even at each level and the result cropped. At or below
/// `cutoff` the blocked kernel with `leaf_n_min` takes over. With several
/// threads the seven top-level products run concurrently; deeper levels are
/// serial.
pub fn matmul_strassen<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    cutoff: usize,
    leaf_n_min: usize,
    threads: usize,
) -> Result<DenseMatrix<T>> {
    Ok(matmul_strassen_counted(a, b, cutoff, leaf_n_min, threads)?.0)
}

/// [`matmul_strassen`] that also reports per-level operation counts.
pub fn matmul_strassen_counted<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    cutoff: usize,
    leaf_n_min: usize,
    threads: usize,
) -> Result<(DenseMatrix<T>, StrassenStats)> {
    check_strassen(a, b, cutoff, leaf_n_min, threads)?;
    let params = StrassenParams {
        cutoff,
        leaf_n_min,
        prec: a.prec(),
    };
    Ok(strassen_rec(a.as_ref(), b.as_ref(), params, threads, 0))
}
