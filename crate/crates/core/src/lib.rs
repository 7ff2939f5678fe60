//! Multiple-precision dense real matrix multiplication.
//!
//! Three algorithms ([`matmul::matmul_simple`], [`matmul::matmul_block`],
//! [`matmul::matmul_strassen`]) over double-double, quad-double and MPFR
//! arbitrary-precision scalars, plus a tuner that picks the block size by
//! timing a slice of the product and extrapolating, then picks the fastest
//! algorithm per (precision, dimension, thread count).

pub mod error;
pub mod matcore;
pub mod matmul;
pub mod mpscalar;
pub mod predictor;
pub mod timing;
pub mod tuner;

pub use error::{Error, Result};
pub use matcore::{
    frobenius_rel_diff, frobenius_rel_diff_units, generate_test_pair, make_partition,
    BlockPartition, DenseMatrix, MatRef,
};
pub use matmul::{matmul_block, matmul_simple, matmul_strassen, AlgorithmChoice};
pub use mpscalar::{
    BigFloat, DoubleDouble, ExtendedScalar, PrecisionKind, PrecisionSpec, QuadDouble, Scalar,
};
