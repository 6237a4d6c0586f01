//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! the implicit-shift QL iteration (the classic EISPACK tred2/tql2 pair,
//! same lineage as the Jama port used across the Rust numerics ecosystem).
//!
//! Eigenvalues are returned ascending; eigenvectors are orthonormal and
//! returned as rows of the second output, aligned with the eigenvalues.

#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, hypot, sqrt};

const EPS: f64 = 2.220_446_049_250_313e-16;

/// Eigendecomposition of a real symmetric matrix. Panics if not square.
pub fn eigh(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = a.to_vec();
    for row in &v {
        assert_eq!(row.len(), n, "matrix must be square");
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, v);
    }
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    // v holds eigenvectors in columns; hand them back as rows
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (d, vectors)
}

/// Householder reduction to symmetric tridiagonal form, accumulating the
/// orthogonal transformation in `v`.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = v.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }

    for i in (1..n).rev() {
        // scale to avoid under/overflow
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            // generate the Householder vector
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }

            // apply the similarity transformation to the remaining rows
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate the transformations
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal form, updating the accumulated
/// eigenvector matrix, then sorting ascending.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = v.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n {
            if fabs(e[m]) <= EPS * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                // form the implicit shift
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                // the implicit QL sweep
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[k][i + 1];
                        v[k][i + 1] = s * v[k][i] + c * h;
                        v[k][i] = c * v[k][i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if fabs(e[l]) <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // sort eigenvalues ascending, permuting eigenvectors alongside
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v[j].swap(i, k);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(a: &[Vec<f64>]) {
        let n = a.len();
        let (d, vecs) = eigh(a);
        // ascending
        for w in d.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        let norm: f64 = a
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, x| acc.max(fabs(*x)))
            .max(1.0);
        for (lam, vec) in d.iter().zip(&vecs) {
            // residual ||A v - lambda v||
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i][j] * vec[j]).sum();
                assert!(fabs(av - lam * vec[i]) < 1e-10 * norm, "residual too large");
            }
        }
        // orthonormality
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(fabs(dot - expect) < 1e-10);
            }
        }
    }

    #[test]
    fn two_by_two() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (d, _) = eigh(&a);
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!((d[1] - 3.0).abs() < 1e-12);
        check_decomposition(&a);
    }

    #[test]
    fn diagonal_and_degenerate() {
        let a = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ];
        let (d, _) = eigh(&a);
        assert!((d[0] + 1.0).abs() < 1e-12);
        assert!((d[1] - 3.0).abs() < 1e-12);
        assert!((d[2] - 3.0).abs() < 1e-12);
        check_decomposition(&a);
    }

    #[test]
    fn path_laplacian_closed_form() {
        // unit path on 5 vertices: eigenvalues 2(1 - cos(k pi / 5)) of the
        // Dirichlet path would differ; here use the free path Laplacian whose
        // eigenvalues are 2(1 - cos(k pi / n)), k = 0..n-1
        let n = 5;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            a[i][i] += 1.0;
            a[i + 1][i + 1] += 1.0;
            a[i][i + 1] -= 1.0;
            a[i + 1][i] -= 1.0;
        }
        let (d, _) = eigh(&a);
        for (k, lam) in d.iter().enumerate() {
            let expected = 2.0 * (1.0 - (core::f64::consts::PI * k as f64 / n as f64).cos());
            assert!((lam - expected).abs() < 1e-10, "k={k}");
        }
        check_decomposition(&a);
    }

    #[test]
    fn pseudo_random_matrices() {
        // deterministic pseudo-random symmetric matrices of a few sizes
        for (n, seed) in [(1usize, 3u64), (4, 5), (17, 11), (40, 23)] {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    let x = next();
                    a[i][j] = x;
                    a[j][i] = x;
                }
            }
            check_decomposition(&a);
        }
    }

    #[test]
    fn empty_matrix() {
        let (d, v) = eigh(&[]);
        assert!(d.is_empty() && v.is_empty());
    }
}
