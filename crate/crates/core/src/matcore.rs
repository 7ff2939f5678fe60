//! Dense row-major matrices of extended-precision scalars, the standard test
//! pair, block partitions and the Frobenius comparison metric.

use std::fmt::Write as _;
use std::ops::Range;

use rug::Float;

use crate::error::{Error, Result};
use crate::mpscalar::{PrecisionSpec, Scalar};

/// Row-major dense matrix. All elements share `prec`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    prec: PrecisionSpec,
    data: Vec<T>,
}

/// Borrowed, possibly strided, window into a [`DenseMatrix`].
pub struct MatRef<'a, T> {
    data: &'a [T],
    rows: usize,
    cols: usize,
    stride: usize,
}

impl<T> Clone for MatRef<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for MatRef<'_, T> {}

impl<'a, T> MatRef<'a, T> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> &'a T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.stride + j]
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &'a [T] {
        let start = i * self.stride;
        &self.data[start..start + self.cols]
    }

    /// The `rows x cols` window whose top-left element is `(r0, c0)`.
    pub fn sub(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatRef<'a, T> {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "window out of bounds"
        );
        let start = r0 * self.stride + c0;
        let end = if rows == 0 {
            start
        } else {
            start + (rows - 1) * self.stride + cols
        };
        MatRef {
            data: &self.data[start..end],
            rows,
            cols,
            stride: self.stride,
        }
    }
}

impl<T: Scalar> MatRef<'_, T> {
    pub fn to_owned(&self, prec: PrecisionSpec) -> DenseMatrix<T> {
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            prec,
            data,
        }
    }
}

impl<T> DenseMatrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> PrecisionSpec {
        self.prec
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_ref(&self) -> MatRef<'_, T> {
        MatRef {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            stride: self.cols,
        }
    }

    /// The given rows, all columns. Contiguous in memory.
    pub fn row_slice(&self, rows: Range<usize>) -> MatRef<'_, T> {
        assert!(
            rows.start <= rows.end && rows.end <= self.rows,
            "row range out of bounds"
        );
        MatRef {
            data: &self.data[rows.start * self.cols..rows.end * self.cols],
            rows: rows.end - rows.start,
            cols: self.cols,
            stride: self.cols,
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::shape(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize, prec: PrecisionSpec) -> Result<Self> {
        check_dims(rows, cols)?;
        check_kind::<T>(prec)?;
        Ok(Self::zeros_unchecked(rows, cols, prec))
    }

    pub(crate) fn zeros_unchecked(rows: usize, cols: usize, prec: PrecisionSpec) -> Self {
        Self {
            rows,
            cols,
            prec,
            data: vec![T::zero(prec); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, prec: PrecisionSpec, data: Vec<T>) -> Result<Self> {
        check_dims(rows, cols)?;
        check_kind::<T>(prec)?;
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| x.precision() != prec) {
            return Err(Error::PrecisionMismatch(prec, bad.precision()));
        }
        Ok(Self {
            rows,
            cols,
            prec,
            data,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        prec: PrecisionSpec,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, prec, data)
    }

    /// Convenience constructor from native doubles (exactly representable
    /// in every precision).
    pub fn from_f64_rows(rows: &[&[f64]], prec: PrecisionSpec) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Self::from_fn(rows.len(), cols, prec, |i, j| T::from_f64(rows[i][j], prec))
    }

    pub fn identity(n: usize, prec: PrecisionSpec) -> Result<Self> {
        Self::from_fn(n, n, prec, |i, j| {
            T::from_f64(if i == j { 1.0 } else { 0.0 }, prec)
        })
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::shape(format!("index ({i}, {j}) out of bounds")));
        }
        if value.precision() != self.prec {
            return Err(Error::PrecisionMismatch(self.prec, value.precision()));
        }
        self.data[i * self.cols + j] = value;
        Ok(())
    }

    /// Debug dump: a `rows cols precision` header, then one line per row of
    /// whitespace-separated hex-float elements.
    pub fn to_dump(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.prec);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(Scalar::to_hex).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::format(1, "empty matrix dump"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [rows, cols, prec] = fields[..] else {
            return Err(Error::format(hline, "header must be `rows cols precision`"));
        };
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::format(hline, format!("bad dimension {s:?}")))
        };
        let (rows, cols) = (parse_dim(rows)?, parse_dim(cols)?);
        let prec: PrecisionSpec = prec
            .parse()
            .map_err(|e: Error| Error::format(hline, e.to_string()))?;
        check_kind::<T>(prec).map_err(|e| Error::format(hline, e.to_string()))?;

        let mut data = Vec::with_capacity(rows * cols);
        let mut seen_rows = 0;
        for (lineno, line) in lines {
            if seen_rows == rows {
                return Err(Error::format(lineno, "more rows than the header declares"));
            }
            let before = data.len();
            for tok in line.split_whitespace() {
                let v = T::from_hex(tok, prec).map_err(|e| Error::format(lineno, e.to_string()))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(Error::format(
                    lineno,
                    format!("expected {cols} elements, found {}", data.len() - before),
                ));
            }
            seen_rows += 1;
        }
        if seen_rows != rows {
            return Err(Error::format(
                0,
                format!("expected {rows} rows, found {seen_rows}"),
            ));
        }
        Self::from_vec(rows, cols, prec, data)
    }
}

impl<T: Scalar> std::fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DenseMatrix[{}x{} {}]", self.rows, self.cols, self.prec)?;
        if self.rows * self.cols <= 64 {
            f.debug_list().entries(self.data.iter()).finish()?;
        }
        Ok(())
    }
}

pub(crate) fn check_kind<T: Scalar>(prec: PrecisionSpec) -> Result<()> {
    if prec.kind() != T::KIND {
        return Err(Error::usage(format!(
            "precision {prec} cannot be stored in a {:?} matrix",
            T::KIND
        )));
    }
    Ok(())
}

/// Correctly rounded `sqrt(radicand) * k`, computed as `sqrt(radicand * k^2)`
/// so MPFR rounds once.
fn scaled_sqrt<T: Scalar>(radicand: u64, k: u64, prec: PrecisionSpec) -> T {
    let square = Float::with_val(192, radicand) * (k * k);
    match prec.kind() {
        crate::mpscalar::PrecisionKind::Ap => {
            T::from_big(&Float::with_val(prec.bits(), square.sqrt_ref()), prec)
        }
        _ => T::from_big(&Float::with_val(prec.bits() + 64, square.sqrt_ref()), prec),
    }
}

/// The standard test pair `A = [sqrt(5) (i + j - 1)]`, `B = [sqrt(3) (n - i)]`
/// with 1-based `i, j`. Irrational entries fill the whole mantissa.
pub fn generate_test_pair<T: Scalar>(
    n: usize,
    prec: PrecisionSpec,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    check_dims(n, n)?;
    check_kind::<T>(prec)?;
    let a_values: Vec<T> = (0..2 * n - 1)
        .map(|s| scaled_sqrt::<T>(5, s as u64 + 1, prec))
        .collect();
    let b_values: Vec<T> = (0..n)
        .map(|i| scaled_sqrt::<T>(3, (n - 1 - i) as u64, prec))
        .collect();
    let a = DenseMatrix::from_fn(n, n, prec, |i, j| a_values[i + j].clone())?;
    let b = DenseMatrix::from_fn(n, n, prec, |i, _| b_values[i].clone())?;
    Ok((a, b))
}

/// Block grid of the blocked algorithm. Extents along each axis sum to the
/// axis length; only the last block of an axis may be shorter than `n_min`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub n_min: usize,
    pub row_extents: Vec<usize>,
    pub inner_extents: Vec<usize>,
    pub col_extents: Vec<usize>,
}

impl BlockPartition {
    /// `M`, the number of block rows of `A` and `C`.
    pub fn row_blocks(&self) -> usize {
        self.row_extents.len()
    }

    /// `L`, the number of blocks along the shared dimension.
    pub fn inner_blocks(&self) -> usize {
        self.inner_extents.len()
    }

    /// `N`, the number of block columns of `B` and `C`.
    pub fn col_blocks(&self) -> usize {
        self.col_extents.len()
    }

    pub(crate) fn offsets(extents: &[usize]) -> Vec<usize> {
        let mut acc = 0;
        extents
            .iter()
            .map(|e| {
                let start = acc;
                acc += e;
                start
            })
            .collect()
    }
}

fn extents(len: usize, n_min: usize) -> Vec<usize> {
    let full = len / n_min;
    let mut v = vec![n_min; full];
    if !len.is_multiple_of(n_min) {
        v.push(len % n_min);
    }
    v
}

/// Partitions an `m x l` by `l x n` product into blocks of at most `n_min`.
pub fn make_partition(m: usize, l: usize, n: usize, n_min: usize) -> Result<BlockPartition> {
    if n_min == 0 {
        return Err(Error::usage("block size must be at least 1"));
    }
    if m == 0 || l == 0 || n == 0 {
        return Err(Error::shape(format!(
            "dimensions must be positive, got ({m}, {l}, {n})"
        )));
    }
    Ok(BlockPartition {
        n_min,
        row_extents: extents(m, n_min),
        inner_extents: extents(l, n_min),
        col_extents: extents(n, n_min),
    })
}

/// `||X - Y||_F / ||Y||_F` evaluated in the working precision, or `||X||_F`
/// when `Y` is zero. Very small values underflow to zero in `f64` at wide
/// precisions; see [`frobenius_rel_diff_units`].
pub fn frobenius_rel_diff<T: Scalar>(x: &DenseMatrix<T>, y: &DenseMatrix<T>) -> Result<f64> {
    Ok(rel_diff_big(x, y)?.to_f64())
}

/// [`frobenius_rel_diff`] divided by the unit roundoff `2^-bits`, so the
/// result stays representable at any precision.
pub fn frobenius_rel_diff_units<T: Scalar>(x: &DenseMatrix<T>, y: &DenseMatrix<T>) -> Result<f64> {
    Ok((rel_diff_big(x, y)? << x.prec.bits()).to_f64())
}

fn rel_diff_big<T: Scalar>(x: &DenseMatrix<T>, y: &DenseMatrix<T>) -> Result<Float> {
    if x.rows != y.rows || x.cols != y.cols {
        return Err(Error::shape(format!(
            "cannot compare {}x{} with {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    if x.prec != y.prec {
        return Err(Error::PrecisionMismatch(x.prec, y.prec));
    }
    let prec = x.prec;
    let mut diff_sq = T::zero(prec);
    let mut ref_sq = T::zero(prec);
    let mut x_sq = T::zero(prec);
    let mut d = T::zero(prec);
    let mut scratch = T::zero(prec);
    for (xv, yv) in x.data.iter().zip(&y.data) {
        d.set_difference(xv, yv);
        diff_sq.mul_acc(&d, &d, &mut scratch);
        ref_sq.mul_acc(yv, yv, &mut scratch);
        x_sq.mul_acc(xv, xv, &mut scratch);
    }
    if ref_sq.to_big().is_zero() {
        return Ok(x_sq.sqrt_ref().to_big());
    }
    Ok(diff_sq.sqrt_ref().div_ref(&ref_sq.sqrt_ref()).to_big())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpscalar::{BigFloat, DoubleDouble, QuadDouble};

    type Dd = DenseMatrix<DoubleDouble>;

    #[test]
    fn test_pair_entries() {
        let (a, b) = generate_test_pair::<DoubleDouble>(4, PrecisionSpec::DD).unwrap();
        let sqrt5 = Float::with_val(256, 5).sqrt();
        let want = DoubleDouble::from_big(&sqrt5, PrecisionSpec::DD);
        assert_eq!(*a.get(0, 0), want);
        let two_sqrt5 = DoubleDouble::from_big(&(sqrt5 * 2u32), PrecisionSpec::DD);
        assert_eq!(*a.get(0, 1), two_sqrt5);
        // Constant along anti-diagonals.
        assert_eq!(a.get(1, 2), a.get(2, 1));
        for j in 0..4 {
            assert_eq!(*b.get(3, j), DoubleDouble::ZERO);
            assert_eq!(b.get(0, j), b.get(0, 0));
        }
        let three_sqrt3 =
            DoubleDouble::from_big(&(Float::with_val(256, 3).sqrt() * 3u32), PrecisionSpec::DD);
        assert_eq!(*b.get(0, 2), three_sqrt3);
    }

    #[test]
    fn test_pair_is_deterministic() {
        let p1 = generate_test_pair::<QuadDouble>(9, PrecisionSpec::QD).unwrap();
        let p2 = generate_test_pair::<QuadDouble>(9, PrecisionSpec::QD).unwrap();
        assert!(p1 == p2);
        let prec = PrecisionSpec::ap(128).unwrap();
        let (a, _) = generate_test_pair::<BigFloat>(3, prec).unwrap();
        let want = Float::with_val(128, 20).sqrt(); // sqrt(5) * 2
        assert_eq!(a.get(0, 1).as_float(), &want);
    }

    #[test]
    fn test_pair_rejects_wrong_kind() {
        assert!(generate_test_pair::<DoubleDouble>(4, PrecisionSpec::QD).is_err());
        assert!(generate_test_pair::<DoubleDouble>(0, PrecisionSpec::DD).is_err());
    }

    #[test]
    fn partitions() {
        let p = make_partition(1024, 1024, 1024, 64).unwrap();
        assert_eq!(
            (p.row_blocks(), p.col_blocks(), p.inner_blocks()),
            (16, 16, 16)
        );
        let p = make_partition(1025, 1025, 1025, 64).unwrap();
        assert_eq!(p.row_blocks(), 17);
        assert_eq!(*p.row_extents.last().unwrap(), 1);
        let p = make_partition(8, 8, 8, 512).unwrap();
        assert_eq!(p.row_extents, vec![8]);
        assert_eq!(BlockPartition::offsets(&[3, 3, 1]), vec![0, 3, 6]);
        assert!(make_partition(8, 8, 8, 0).is_err());
    }

    #[test]
    fn frobenius_cases() {
        let prec = PrecisionSpec::DD;
        let y = Dd::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]], prec).unwrap(); // ||Y|| = 5
        assert_eq!(frobenius_rel_diff(&y, &y).unwrap(), 0.0);
        let mut x = y.clone();
        x.set(1, 0, DoubleDouble::from_f64(2.5)).unwrap();
        assert_eq!(frobenius_rel_diff(&x, &y).unwrap(), 0.1);
        let z = Dd::zeros(2, 2, prec).unwrap();
        assert_eq!(frobenius_rel_diff(&y, &z).unwrap(), 5.0);
        let wide = Dd::zeros(2, 3, prec).unwrap();
        assert!(matches!(
            frobenius_rel_diff(&wide, &y),
            Err(Error::Shape(_))
        ));
        assert_eq!(
            frobenius_rel_diff_units(&x, &y).unwrap(),
            0.1 * 2f64.powi(106)
        );
    }

    #[test]
    fn frobenius_units_at_wide_precision() {
        let prec = PrecisionSpec::ap(2048).unwrap();
        let y = DenseMatrix::<BigFloat>::from_f64_rows(&[&[3.0, 4.0]], prec).unwrap();
        let mut bumped = Float::with_val(2048, 3);
        bumped += Float::with_val(2048, 1) >> 2040u32;
        let mut x = y.clone();
        x.set(0, 0, BigFloat::from_float(&bumped, 2048)).unwrap();
        // Relative difference 2^-2040 / 5.
        assert_eq!(frobenius_rel_diff(&x, &y).unwrap(), 0.0);
        assert_eq!(frobenius_rel_diff_units(&x, &y).unwrap(), 256.0 / 5.0);
    }

    #[test]
    fn views() {
        let m = Dd::from_fn(4, 5, PrecisionSpec::DD, |i, j| {
            DoubleDouble::from_f64((10 * i + j) as f64)
        })
        .unwrap();
        let v = m.as_ref().sub(1, 2, 2, 3);
        assert_eq!(v.get(1, 2).to_f64(), 24.0);
        assert_eq!(v.row(0).len(), 3);
        let top = m.row_slice(0..2);
        assert_eq!(top.rows(), 2);
        assert_eq!(top.get(1, 4).to_f64(), 14.0);
        assert_eq!(v.to_owned(PrecisionSpec::DD).data()[0].to_f64(), 12.0);
    }

    #[test]
    fn dump_round_trip() {
        let (a, _) = generate_test_pair::<DoubleDouble>(5, PrecisionSpec::DD).unwrap();
        let text = a.to_dump();
        assert!(text.starts_with("5 5 dd,106\n"));
        assert!(Dd::from_dump(&text).unwrap() == a);

        let prec = PrecisionSpec::ap(300).unwrap();
        let (_, b) = generate_test_pair::<BigFloat>(3, prec).unwrap();
        assert!(DenseMatrix::<BigFloat>::from_dump(&b.to_dump()).unwrap() == b);

        let (q, _) = generate_test_pair::<QuadDouble>(2, PrecisionSpec::QD).unwrap();
        assert!(DenseMatrix::<QuadDouble>::from_dump(&q.to_dump()).unwrap() == q);
    }

    #[test]
    fn dump_errors() {
        assert!(Dd::from_dump("").is_err());
        assert!(Dd::from_dump("2 2\n").is_err());
        assert!(Dd::from_dump("1 1 qd,212\n0x0p+0,0x0p+0,0x0p+0,0x0p+0\n").is_err());
        assert!(Dd::from_dump("1 2 dd,106\n0x1p+0,0x0p+0\n").is_err());
        assert!(Dd::from_dump("2 1 dd,106\n0x1p+0,0x0p+0\n").is_err());
        let e = Dd::from_dump("1 1 dd,106\nzz\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
