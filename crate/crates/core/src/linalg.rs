//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Row-major dense matrix over a [`Scalar`] field.
pub type Matrix<S> = Vec<Vec<S>>;

pub fn zeros<S: Scalar>(rows: usize, cols: usize) -> Matrix<S> {
    vec![vec![S::zero(); cols]; rows]
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = zeros::<S>(n, m);
    for i in 0..n {
        for l in 0..k {
            if Scalar::is_zero(&a[i][l]) {
                continue;
            }
            for j in 0..m {
                out[i][j] = out[i][j].clone() + a[i][l].clone() * b[l][j].clone();
            }
        }
    }
    out
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, x: &[S]) -> Vec<S> {
    a.iter().map(|row| dot(row, x)).collect()
}

/// `x'A`.
pub fn vec_mat<S: Scalar>(x: &[S], a: &Matrix<S>) -> Vec<S> {
    let m = a.first().map_or(0, Vec::len);
    (0..m)
        .map(|j| {
            x.iter()
                .zip(a)
                .fold(S::zero(), |acc, (xi, row)| acc + xi.clone() * row[j].clone())
        })
        .collect()
}

pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter()
        .zip(y)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn to_dmatrix<S: Scalar>(a: &Matrix<S>) -> DMatrix<f64> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| a[i][j].to_f64())
}

pub fn to_dvector<S: Scalar>(x: &[S]) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().map(Scalar::to_f64))
}

/// Characteristic polynomial `det(xI − A)` by the Faddeev–LeVerrier
/// recursion, coefficients from `x^n` down to the constant term.
pub fn char_poly<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    let n = a.len();
    let mut coeffs = vec![S::one()];
    let mut m = zeros::<S>(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        let c_prev = coeffs[k - 1].clone();
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i].clone() + c_prev.clone();
        }
        let am = mat_mul(a, &next);
        let trace = (0..n).fold(S::zero(), |acc, i| acc + am[i][i].clone());
        coeffs.push(-trace / S::from_int(k as i64));
        m = next;
    }
    coeffs
}

/// Coefficients of `Π (x − rᵢ)`, highest degree first.
pub fn poly_from_roots<S: Scalar>(roots: &[S]) -> Vec<S> {
    let mut p = vec![S::one()];
    for r in roots {
        let mut next = vec![S::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i] = next[i].clone() + c.clone();
            next[i + 1] = next[i + 1].clone() - c.clone() * r.clone();
        }
        p = next;
    }
    p
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Unit vector spanning the (numerical) null space of `m`: the right singular
/// vector of the smallest singular value.
pub fn null_vector(m: &DMatrix<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, &smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    Some((v_t.row(idx).transpose(), smin))
}

/// 2-norm condition number.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Symmetric square root and its pseudo-inverse, dropping eigenvalues below
/// `floor`. Returns `(L⁺, rank)` with `L⁺ L⁺' = Σ⁺` on the retained subspace,
/// as the list of retained directions scaled by `1/√λ`.
pub fn whitening(sigma: &DMatrix<f64>, floor: f64) -> (DMatrix<f64>, usize) {
    let eig = symmetrize(sigma).symmetric_eigen();
    let n = sigma.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > floor).collect();
    let mut w = DMatrix::zeros(keep.len(), n);
    for (row, &i) in keep.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[i].sqrt();
        for j in 0..n {
            w[(row, j)] = eig.eigenvectors[(j, i)] * scale;
        }
    }
    (w, keep.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    #[test]
    fn char_poly_of_triangular_matrix() {
        let a = vec![
            vec![q(2), q(1), q(0)],
            vec![q(0), q(3), q(5)],
            vec![q(0), q(0), q(-1)],
        ];
        assert_eq!(char_poly(&a), poly_from_roots(&[q(2), q(3), q(-1)]));
    }

    #[test]
    fn char_poly_matches_roots_of_companion_matrix() {
        // companion matrix of (x-1)(x-2)(x+4) = x³ + x² − 10x + 8
        let a = vec![
            vec![q(0), q(0), q(-8)],
            vec![q(1), q(0), q(10)],
            vec![q(0), q(1), q(-1)],
        ];
        assert_eq!(char_poly(&a), vec![q(1), q(1), q(-10), q(8)]);
    }

    #[test]
    fn whitening_drops_null_directions() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (w, rank) = whitening(&s, 1e-10);
        assert_eq!(rank, 1);
        let white = &w * &s * w.transpose();
        assert!((white[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let (v, s) = null_vector(&m).unwrap();
        assert!(s < 1e-12);
        assert!((&m * v).norm() < 1e-12);
    }
}
