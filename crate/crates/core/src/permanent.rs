//! Matrix permanents via the Balasubramanian-Bax-Franklin-Glynn formula walked in
//! Gray-code order, so each of the 2^(n-1) sign vectors costs O(n).

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::C64;

/// Permanent of a square complex matrix. The 0x0 permanent is 1.
pub fn glynn_permanent(a: &CMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(a[(i, j)]);
        }
    }
    Ok(permanent_row_major(n, &data))
}

/// Permanent of the `n`x`n` row-major matrix `a`.
pub fn permanent_row_major(n: usize, a: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => return C64::new(1.0, 0.0),
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    let mut sums = vec![C64::default(); n];
    for i in 0..n {
        for j in 0..n {
            sums[j] += a[i * n + j];
        }
    }
    let mut positive = vec![true; n];
    let mut sign = 1.0;
    let mut total: C64 = sums.iter().product();
    let steps: u64 = 1 << (n - 1);
    for k in 1..steps {
        // Row 0 keeps δ = +1; Gray code flips row `bit + 1`.
        let row = k.trailing_zeros() as usize + 1;
        let base = row * n;
        if positive[row] {
            for j in 0..n {
                sums[j] -= a[base + j] * 2.0;
            }
        } else {
            for j in 0..n {
                sums[j] += a[base + j] * 2.0;
            }
        }
        positive[row] = !positive[row];
        sign = -sign;
        let prod: C64 = sums.iter().product();
        total += prod * sign;
    }
    total / steps as f64
}

/// Permanent of a real matrix (row-major), same algorithm in real arithmetic.
pub fn permanent_real(n: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => return 1.0,
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            sums[j] += a[i * n + j];
        }
    }
    let mut positive = vec![true; n];
    let mut sign = 1.0;
    let mut total: f64 = sums.iter().product();
    let steps: u64 = 1 << (n - 1);
    for k in 1..steps {
        let row = k.trailing_zeros() as usize + 1;
        let base = row * n;
        let delta = if positive[row] { -2.0 } else { 2.0 };
        for j in 0..n {
            sums[j] += a[base + j] * delta;
        }
        positive[row] = !positive[row];
        sign = -sign;
        total += sign * sums.iter().product::<f64>();
    }
    total / steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Σ over all permutations of Π a[i, σ(i)] (Heap's algorithm).
    fn naive(n: usize, a: &[C64]) -> C64 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut c = vec![0usize; n];
        let term = |p: &[usize]| (0..n).map(|i| a[i * n + p[i]]).product::<C64>();
        let mut acc = if n == 0 { C64::new(1.0, 0.0) } else { term(&perm) };
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                acc += term(&perm);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        acc
    }

    #[test]
    fn identity_and_ones() {
        for n in 0..9 {
            let id = CMatrix::identity(n, n);
            assert!((glynn_permanent(&id).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
            let ones = CMatrix::from_element(n, n, C64::new(1.0, 0.0));
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((glynn_permanent(&ones).unwrap().re - fact).abs() < 1e-9 * fact);
        }
    }

    #[test]
    fn matches_permutation_sum_5x5() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<C64> = (0..25)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let expect = naive(5, &data);
        let got = permanent_row_major(5, &data);
        assert!((got - expect).norm() < 1e-12 * expect.norm().max(1.0));
    }

    #[test]
    fn invariant_under_row_and_column_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let data: Vec<C64> = (0..n * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let p = permanent_row_major(n, &data);
        let rows = [3, 0, 5, 1, 4, 2];
        let cols = [1, 4, 0, 2, 5, 3];
        let mut shuffled = vec![C64::default(); n * n];
        for i in 0..n {
            for j in 0..n {
                shuffled[i * n + j] = data[rows[i] * n + cols[j]];
            }
        }
        assert!((permanent_row_major(n, &shuffled) - p).norm() < 1e-12);
    }

    #[test]
    fn real_variant_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 0..7 {
            let data: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
            let cdata: Vec<C64> = data.iter().map(|&x| C64::new(x, 0.0)).collect();
            let r = permanent_real(n, &data);
            assert!((r - naive(n, &cdata).re).abs() < 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let m = CMatrix::zeros(2, 3);
        assert_eq!(
            glynn_permanent(&m),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
    }
}
