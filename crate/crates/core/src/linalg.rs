//! Small dense linear algebra over [`Real`] scalars, row-major `Vec<S>`.
//!
//! Dimensions here never exceed five, so plain Gauss-Jordan is the right tool.
//! Eigenvalue work on `f64` goes through nalgebra.

use crate::dual::Real;

/// Inverse of a row-major `n×n` matrix together with the smallest
/// row-scaled pivot ratio encountered (a cheap degeneracy indicator that is
/// insensitive to diagonal rescaling).
pub fn invert<S: Real>(a: &[S], n: usize) -> (Vec<S>, f64) {
    let mut m = a.to_vec();
    let mut inv = vec![S::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = S::one();
    }
    let mut scale: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[i * n + j].re().abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    for col in 0..n {
        let mut piv = col;
        let mut best = -1.0;
        for r in col..n {
            let s = if scale[r] > 0.0 { scale[r] } else { 1.0 };
            let v = m[r * n + col].re().abs() / s;
            if v > best {
                best = v;
                piv = r;
            }
        }
        min_ratio = min_ratio.min(best.max(0.0));
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
            scale.swap(col, piv);
        }
        let p = m[col * n + col];
        if p.re() == 0.0 {
            return (inv, 0.0);
        }
        let pinv = p.recip();
        for j in 0..n {
            m[col * n + j] *= pinv;
            inv[col * n + j] *= pinv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            for j in 0..n {
                let mj = m[col * n + j];
                let ij = inv[col * n + j];
                m[r * n + j] -= f * mj;
                inv[r * n + j] -= f * ij;
            }
        }
    }
    (inv, min_ratio)
}

/// Determinant by LU with partial pivoting.
pub fn det<S: Real>(a: &[S], n: usize) -> S {
    let mut m = a.to_vec();
    let mut d = S::one();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].re().abs() > m[piv * n + col].re().abs() {
                piv = r;
            }
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            d = -d;
        }
        let p = m[col * n + col];
        if p.re() == 0.0 {
            // exact singularity in the real part; product collapses
            d *= p;
            continue;
        }
        d *= p;
        let pinv = p.recip();
        for r in col + 1..n {
            let f = m[r * n + col] * pinv;
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= f * v;
            }
        }
    }
    d
}

/// `vᵀ G w` for a row-major `G`.
pub fn quad(g: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            r += g[i * n + j] * w[j];
        }
        s += v[i] * r;
    }
    s
}

/// `G v`.
pub fn mat_vec(g: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| g[i * n + j] * v[j]).sum())
        .collect()
}

/// Row-major `a · b` for square matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn trace(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let e = nalgebra::SymmetricEigen::new(m);
    e.eigenvalues.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{Dual, D1};

    #[test]
    fn inverse_of_off_diagonal_metric() {
        // Clifton-Pohl type: [[0, h], [h, 0]]
        let a = [0.0, 0.5, 0.5, 0.0];
        let (inv, ratio) = invert(&a, 2);
        assert!(ratio > 0.9);
        assert_eq!(inv, vec![0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn badly_scaled_diagonal_is_not_degenerate() {
        let a = [1e-12, 0.0, 0.0, -1e12];
        let (inv, ratio) = invert(&a, 2);
        assert_eq!(ratio, 1.0);
        assert!((inv[0] - 1e12).abs() < 1.0);
    }

    #[test]
    fn singular_matrix_reports_zero_ratio() {
        let a = [1.0, 2.0, 2.0, 4.0];
        let (_, ratio) = invert(&a, 2);
        assert!(ratio < 1e-12);
    }

    #[test]
    fn dual_determinant_matches_jacobi_formula() {
        // d/dt det(A + tB) at t=0 equals tr(adj(A) B)
        let a = [2.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, 1.0, 4.0];
        let b = [0.1, 0.0, 0.3, 0.0, -0.2, 0.0, 0.4, 0.0, 0.5];
        let ad: Vec<D1> = a.iter().zip(b.iter()).map(|(&x, &y)| Dual::new(x, y)).collect();
        let d = det(&ad, 3);
        let (inv, _) = invert(&a, 3);
        let tr: f64 = (0..3)
            .map(|i| (0..3).map(|k| inv[i * 3 + k] * b[k * 3 + i]).sum::<f64>())
            .sum();
        assert!((d.eps - d.re * tr).abs() < 1e-12);
    }
}
