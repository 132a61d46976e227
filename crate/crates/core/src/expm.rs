//! Matrix exponential by scaling and squaring.

use nalgebra::DMatrix;

/// Series terms are summed until their 1-norm drops below this value.
pub const TERM_TOLERANCE: f64 = 1e-13;

const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 64;

pub(crate) fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(m)` for a square matrix.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 0.5, the
/// Taylor series is summed to [`TERM_TOLERANCE`], and the result is squared
/// `s` times.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * 2f64.powi(-squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled / k as f64;
        sum += &term;
        if one_norm(&term) < TERM_TOLERANCE {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
