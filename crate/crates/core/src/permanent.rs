use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Permanent of a square matrix of size 1 to 3, by direct expansion.
pub fn permanent(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::UnsupportedSize(m.nrows().max(m.ncols())));
    }
    match m.nrows() {
        1 => Ok(m[(0, 0)]),
        2 => Ok(permanent2([m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]])),
        3 => Ok(permanent3(
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        )),
        n => Err(Error::UnsupportedSize(n)),
    }
}

#[inline]
pub(crate) fn permanent2(r0: [Complex64; 2], r1: [Complex64; 2]) -> Complex64 {
    r0[0] * r1[1] + r0[1] * r1[0]
}

#[inline]
pub(crate) fn permanent3(r0: [Complex64; 3], r1: [Complex64; 3], r2: [Complex64; 3]) -> Complex64 {
    r0[0] * (r1[1] * r2[2] + r1[2] * r2[1])
        + r0[1] * (r1[0] * r2[2] + r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] + r1[1] * r2[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn brute_force(m: &DMatrix<Complex64>) -> Complex64 {
        let n = m.nrows();
        let perms: Vec<Vec<usize>> = match n {
            1 => vec![vec![0]],
            2 => vec![vec![0, 1], vec![1, 0]],
            _ => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
        };
        perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| m[(i, j)]).product::<Complex64>())
            .sum()
    }

    #[test]
    fn small_cases() {
        assert_eq!(permanent(&DMatrix::identity(2, 2)).unwrap(), c(1.0, 0.0));
        assert_eq!(permanent(&DMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap(), c(2.0, 0.0));
        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(0.1, -1.0), c(2.0, 0.0));
        let m = DMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        assert_eq!(permanent(&m).unwrap(), a * d + b * cc);
        assert_eq!(permanent(&DMatrix::from_element(3, 3, c(1.0, 0.0))).unwrap(), c(6.0, 0.0));
    }

    #[test]
    fn unsupported_sizes() {
        assert!(matches!(permanent(&DMatrix::identity(4, 4)), Err(Error::UnsupportedSize(4))));
        assert!(permanent(&DMatrix::from_element(2, 3, c(1.0, 0.0))).is_err());
    }

    proptest! {
        #[test]
        fn matches_permutation_sum(vals in prop::collection::vec(-1.0f64..1.0, 18)) {
            let entries: Vec<Complex64> = vals.chunks(2).map(|p| c(p[0], p[1])).collect();
            let m = DMatrix::from_row_slice(3, 3, &entries);
            let diff = permanent(&m).unwrap() - brute_force(&m);
            prop_assert!(diff.norm() < 1e-12);
        }
    }
}
