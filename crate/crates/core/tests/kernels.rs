//! Cross-algorithm agreement, thread invariance and oracle comparisons.

use mpmm::matmul::matmul_strassen_counted;
use mpmm::{
    frobenius_rel_diff, generate_test_pair, matmul_block, matmul_simple, matmul_strassen, BigFloat,
    DenseMatrix, DoubleDouble, PrecisionSpec, QuadDouble, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

fn integer_matrix<T: Scalar>(
    n: usize,
    prec: PrecisionSpec,
    rng: &mut ChaCha8Rng,
) -> DenseMatrix<T> {
    DenseMatrix::from_fn(n, n, prec, |_, _| {
        T::from_f64(rng.gen_range(-8..=8) as f64, prec)
    })
    .unwrap()
}

fn exact_agreement<T: Scalar>(prec: PrecisionSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in [2, 3, 8, 16, 17] {
        let a = integer_matrix::<T>(n, prec, &mut rng);
        let b = integer_matrix::<T>(n, prec, &mut rng);
        let simple = matmul_simple(&a, &b, 1).unwrap();
        for n_min in [2, 4, n] {
            assert_eq!(
                matmul_block(&a, &b, n_min, 1).unwrap(),
                simple,
                "block n={n} n_min={n_min}"
            );
        }
        assert_eq!(
            matmul_strassen(&a, &b, 2, 2, 1).unwrap(),
            simple,
            "strassen n={n}"
        );
        // Reference computed in native integers.
        for i in 0..n {
            for j in 0..n {
                let want: i64 = (0..n)
                    .map(|k| a.get(i, k).to_f64() as i64 * b.get(k, j).to_f64() as i64)
                    .sum();
                assert_eq!(simple.get(i, j).to_f64(), want as f64);
            }
        }
    }
}

#[test]
fn integer_products_agree_exactly() {
    exact_agreement::<DoubleDouble>(PrecisionSpec::DD);
    exact_agreement::<QuadDouble>(PrecisionSpec::QD);
    exact_agreement::<BigFloat>(PrecisionSpec::ap(128).unwrap());
}

#[test]
fn single_block_is_bit_identical_to_simple() {
    for n in [8, 64] {
        let (a, b) = generate_test_pair::<DoubleDouble>(n, PrecisionSpec::DD).unwrap();
        let simple = matmul_simple(&a, &b, 1).unwrap();
        for n_min in [n, n + 5] {
            assert_eq!(matmul_block(&a, &b, n_min, 1).unwrap(), simple);
        }
    }
}

#[test]
fn rounded_agreement_on_test_pair() {
    let u = 2f64.powi(-106);
    for n in [63, 64, 100, 257] {
        let (a, b) = generate_test_pair::<DoubleDouble>(n, PrecisionSpec::DD).unwrap();
        let simple = matmul_simple(&a, &b, 4).unwrap();
        let block = matmul_block(&a, &b, 32, 4).unwrap();
        let strassen = matmul_strassen(&a, &b, 32, 32, 4).unwrap();
        let rb = frobenius_rel_diff(&block, &simple).unwrap();
        let rs = frobenius_rel_diff(&strassen, &simple).unwrap();
        assert!(rb <= 4.0 * n as f64 * u, "block n={n}: {rb:e}");
        assert!(rs <= 100.0 * n as f64 * u, "strassen n={n}: {rs:e}");
    }
}

/// log2 of ‖C - exact‖_F / ‖exact‖_F, with the exact product of the
/// (already rounded) inputs computed at four times the working precision.
fn oracle_log2_error<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    bits: u32,
) -> f64 {
    let wide = 4 * bits;
    let n = a.rows();
    let mut err = Float::with_val(wide, 0);
    let mut norm = Float::with_val(wide, 0);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Float::with_val(wide, 0);
            for k in 0..n {
                acc += Float::with_val(wide, &a.get(i, k).to_big() * &b.get(k, j).to_big());
            }
            let d = Float::with_val(wide, &c.get(i, j).to_big() - &acc);
            err += Float::with_val(wide, &d * &d);
            norm += Float::with_val(wide, &acc * &acc);
        }
    }
    if err.is_zero() {
        return f64::NEG_INFINITY;
    }
    (err / norm).sqrt().log2().to_f64()
}

fn check_oracle<T: Scalar>(prec: PrecisionSpec, n: usize) {
    let (a, b) = generate_test_pair::<T>(n, prec).unwrap();
    let cases = [
        ("simple", matmul_simple(&a, &b, 2).unwrap(), 4.0),
        ("block", matmul_block(&a, &b, 8, 2).unwrap(), 4.0),
        ("strassen", matmul_strassen(&a, &b, 8, 8, 2).unwrap(), 100.0),
    ];
    for (name, c, factor) in cases {
        let e = oracle_log2_error(&a, &b, &c, prec.bits());
        let bound = (factor * n as f64).log2() - prec.bits() as f64;
        assert!(e <= bound, "{name} {prec} n={n}: 2^{e} > 2^{bound}");
    }
}

#[test]
fn products_match_high_precision_oracle() {
    check_oracle::<DoubleDouble>(PrecisionSpec::DD, 33);
    check_oracle::<QuadDouble>(PrecisionSpec::QD, 33);
    check_oracle::<BigFloat>(PrecisionSpec::ap(128).unwrap(), 33);
    check_oracle::<BigFloat>(PrecisionSpec::ap(1024).unwrap(), 20);
}

#[test]
fn thread_count_does_not_change_results() {
    let (a, b) = generate_test_pair::<DoubleDouble>(128, PrecisionSpec::DD).unwrap();
    let reference = (
        matmul_simple(&a, &b, 1).unwrap(),
        matmul_block(&a, &b, 32, 1).unwrap(),
        matmul_strassen(&a, &b, 32, 16, 1).unwrap(),
    );
    for threads in [2, 3, 4] {
        assert_eq!(matmul_simple(&a, &b, threads).unwrap(), reference.0);
        assert_eq!(matmul_block(&a, &b, 32, threads).unwrap(), reference.1);
        assert_eq!(
            matmul_strassen(&a, &b, 32, 16, threads).unwrap(),
            reference.2
        );
    }
}

#[test]
fn strassen_counts_for_odd_sizes() {
    let (a, b) = generate_test_pair::<DoubleDouble>(65, PrecisionSpec::DD).unwrap();
    let (c, stats) = matmul_strassen_counted(&a, &b, 16, 16, 2).unwrap();
    // 65 -> 66 -> 33 -> 34 -> 17 -> 18 -> 9: three levels, each padded.
    assert_eq!(stats.levels.len(), 3);
    assert_eq!(stats.levels[0].multiplications, 7);
    assert_eq!(stats.levels[2].multiplications, 343);
    assert_eq!(stats.levels[1].additions, 126);
    assert!(stats.paddings > 0);
    let simple = matmul_simple(&a, &b, 2).unwrap();
    assert!(frobenius_rel_diff(&c, &simple).unwrap() <= 100.0 * 65.0 * 2f64.powi(-106));
}
