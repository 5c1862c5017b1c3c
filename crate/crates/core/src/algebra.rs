//! Pointwise algebra of square matrices: the symmetric/skew split, the
//! deviatoric/spherical split and their combination into the three-way
//! orthogonal decomposition used by every seminorm in this crate.
//!
//! Matrices are dense, row-major, with a runtime dimension `n >= 2` so that
//! one code path serves n = 2, 3, 4.

use crate::error::{Error, Result};

/// Dense square matrix with runtime dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "matrix dimension must be at least 2");
        Matrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from row-major data; length must be a perfect square.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(n >= 2 && rows.iter().all(|r| r.len() == n));
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix { n, entries }
    }

    /// Build from a flat row-major slice of length `n * n`.
    pub fn from_flat(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n);
        Matrix {
            n,
            entries: data.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            n: self.n,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Checks A + A^T = 0 exactly.
    pub fn is_skew(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if self[(i, j)] + self[(j, i)] != 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.n + j]
    }
}

/// Splits `m` into its symmetric part (M + M^T)/2 and skew part (M - M^T)/2.
/// The two parts sum to `m` and are Frobenius-orthogonal.
pub fn decompose_sym_skew(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.dim();
    let mut sym = Matrix::zeros(n);
    let mut skew = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
            skew[(i, j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
    }
    (sym, skew)
}

/// Splits `m` into its trace-free (deviatoric) part M - (tr M / n) Id and the
/// spherical remainder (tr M / n) Id.
pub fn decompose_dev_tr(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.dim();
    let mean = m.trace() / n as f64;
    let mut dev = m.clone();
    let mut sph = Matrix::zeros(n);
    for i in 0..n {
        dev[(i, i)] -= mean;
        sph[(i, i)] = mean;
    }
    (dev, sph)
}

/// Three-way orthogonal split into trace-free symmetric, skew-symmetric and
/// spherical parts. The parts sum to `m` and are pairwise orthogonal, so the
/// squared Frobenius norms satisfy the Pythagorean identity.
pub fn cartan_decompose(m: &Matrix) -> (Matrix, Matrix, Matrix) {
    let (sym, skew) = decompose_sym_skew(m);
    let (devsym, sph) = decompose_dev_tr(&sym);
    (devsym, skew, sph)
}

/// Frobenius inner product sum_ij M_ij N_ij.
pub fn frobenius_inner(m: &Matrix, n: &Matrix) -> Result<f64> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch(format!(
            "frobenius_inner: {} vs {}",
            m.dim(),
            n.dim()
        )));
    }
    Ok(m.as_slice()
        .iter()
        .zip(n.as_slice())
        .map(|(a, b)| a * b)
        .sum())
}

/// Deviatoric part of `m`, as a convenience wrapper.
pub fn dev(m: &Matrix) -> Matrix {
    decompose_dev_tr(m).0
}

/// Symmetric part of `m`.
pub fn sym(m: &Matrix) -> Matrix {
    decompose_sym_skew(m).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mat2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
        Matrix::from_flat(2, &[a, b, c, d])
    }

    #[test]
    fn sym_skew_of_reference_matrix() {
        let m = mat2(1.0, 2.0, 3.0, 4.0);
        let (s, k) = decompose_sym_skew(&m);
        assert_eq!(s.as_slice(), &[1.0, 2.5, 2.5, 4.0]);
        assert_eq!(k.as_slice(), &[0.0, -0.5, 0.5, 0.0]);
        assert_eq!(s.add(&k), m);
    }

    #[test]
    fn symmetric_input_has_zero_skew() {
        let m = mat2(2.0, -1.0, -1.0, 5.0);
        let (_, k) = decompose_sym_skew(&m);
        assert_eq!(k.norm(), 0.0);
    }

    #[test]
    fn skew_input_has_zero_sym() {
        let m = mat2(0.0, 3.0, -3.0, 0.0);
        let (s, _) = decompose_sym_skew(&m);
        assert_eq!(s.norm(), 0.0);
    }

    #[test]
    fn dev_tr_of_identity_and_diagonal() {
        let id = Matrix::identity(3);
        let (d, s) = decompose_dev_tr(&id);
        assert_eq!(d.norm(), 0.0);
        assert_eq!(s, id);

        let diag = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let (d, s) = decompose_dev_tr(&diag);
        assert_eq!(d[(0, 0)], -1.0);
        assert_eq!(d[(1, 1)], 0.0);
        assert_eq!(d[(2, 2)], 1.0);
        assert_eq!(s[(0, 0)], 2.0);
    }

    #[test]
    fn dev_tr_2d_reference() {
        let m = mat2(1.0, 2.0, 3.0, 4.0);
        let (d, s) = decompose_dev_tr(&m);
        assert_eq!(d.as_slice(), &[-1.5, 2.0, 3.0, 1.5]);
        assert_eq!(s.as_slice(), &[2.5, 0.0, 0.0, 2.5]);
    }

    #[test]
    fn cartan_reference_and_identity() {
        let m = mat2(1.0, 2.0, 3.0, 4.0);
        let (ds, k, s) = cartan_decompose(&m);
        assert_eq!(ds.as_slice(), &[-1.5, 2.5, 2.5, 1.5]);
        assert_eq!(k.as_slice(), &[0.0, -0.5, 0.5, 0.0]);
        assert_eq!(s.as_slice(), &[2.5, 0.0, 0.0, 2.5]);

        let id = Matrix::identity(4);
        let (ds, k, s) = cartan_decompose(&id);
        assert_eq!(ds.norm(), 0.0);
        assert_eq!(k.norm(), 0.0);
        assert_eq!(s, id);
    }

    #[test]
    fn frobenius_reference_values() {
        let id = Matrix::identity(3);
        assert_eq!(frobenius_inner(&id, &id).unwrap(), 3.0);

        let m = mat2(1.0, 2.0, 3.0, 4.0);
        assert_eq!(frobenius_inner(&m, &Matrix::identity(2)).unwrap(), 5.0);

        let (s, k) = decompose_sym_skew(&m);
        assert_relative_eq!(frobenius_inner(&s, &k).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn frobenius_dimension_mismatch_is_error() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        assert!(frobenius_inner(&a, &b).is_err());
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-1e3..1e3f64, n * n)
            .prop_map(move |v| Matrix::from_flat(n, &v))
    }

    proptest! {
        #[test]
        fn sym_skew_recompose_exactly(m in arb_matrix(3)) {
            let (s, k) = decompose_sym_skew(&m);
            let back = s.add(&k);
            let tol = 1e-15 * (1.0 + m.norm());
            for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
                prop_assert!((a - b).abs() <= tol);
            }
        }

        #[test]
        fn cartan_parts_orthogonal_and_pythagorean(m in arb_matrix(3)) {
            let (ds, k, s) = cartan_decompose(&m);
            let scale = m.norm() * m.norm() + 1.0;
            prop_assert!(frobenius_inner(&ds, &k).unwrap().abs() <= 1e-14 * scale);
            prop_assert!(frobenius_inner(&ds, &s).unwrap().abs() <= 1e-14 * scale);
            prop_assert!(frobenius_inner(&k, &s).unwrap().abs() <= 1e-14 * scale);
            prop_assert!(ds.trace().abs() <= 1e-14 * (1.0 + m.norm()));

            let total = m.norm().powi(2);
            let parts = ds.norm().powi(2) + k.norm().powi(2) + s.norm().powi(2);
            prop_assert!((total - parts).abs() <= 1e-13 * (1.0 + total));
        }
    }
}
