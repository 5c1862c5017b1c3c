//! Conformal Killing fields: the finite-dimensional kernel of the trace-free
//! symmetric gradient in dimension n >= 3, represented exactly by the
//! parameter quadruple (u_bar, v_bar, w_bar, A_bar). A kernel field and its
//! gradient evaluate to
//!
//! ```text
//! v(x)      = u(x) x - |x|^2 w_bar / 2 + A_bar x + v_bar,   u(x) = w_bar . x + u_bar
//! grad v(x) = u(x) Id + A(x),   A_ij(x) = w_bar_j x_i - w_bar_i x_j + A_bar_ij
//! ```
//!
//! so dev sym grad v vanishes identically and the parameter space has
//! dimension (n+1)(n+2)/2.

use nalgebra::DMatrix;

use crate::algebra::Matrix;
use crate::error::{Error, Result};

/// Parameters of a conformal Killing field.
#[derive(Debug, Clone)]
pub struct ConformalKillingParams {
    pub u_bar: f64,
    pub v_bar: Vec<f64>,
    pub w_bar: Vec<f64>,
    pub a_bar: Matrix,
}

impl ConformalKillingParams {
    pub fn new(u_bar: f64, v_bar: Vec<f64>, w_bar: Vec<f64>, a_bar: Matrix) -> Result<Self> {
        let n = v_bar.len();
        check_dim(n)?;
        if w_bar.len() != n || a_bar.dim() != n {
            return Err(Error::DimensionMismatch(
                "conformal Killing parameters must share one dimension".into(),
            ));
        }
        if !a_bar.is_skew() {
            return Err(Error::InvalidArgument(
                "A_bar must be skew-symmetric exactly".into(),
            ));
        }
        Ok(ConformalKillingParams {
            u_bar,
            v_bar,
            w_bar,
            a_bar,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(0.0, vec![0.0; n], vec![0.0; n], Matrix::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.v_bar.len()
    }

    /// Euclidean norm of the stacked parameter vector.
    pub fn norm(&self) -> f64 {
        (self.u_bar * self.u_bar
            + self.v_bar.iter().map(|x| x * x).sum::<f64>()
            + self.w_bar.iter().map(|x| x * x).sum::<f64>()
            + self.a_bar.norm().powi(2))
        .sqrt()
    }

    /// Stacks the parameters as (u_bar, v_bar, w_bar, upper triangle of A_bar).
    pub fn to_vec(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![self.u_bar];
        out.extend_from_slice(&self.v_bar);
        out.extend_from_slice(&self.w_bar);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.a_bar[(i, j)]);
            }
        }
        out
    }

    pub fn from_vec(n: usize, data: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if data.len() != kernel_dimension(n)? {
            return Err(Error::DimensionMismatch(
                "parameter vector length mismatch".into(),
            ));
        }
        let u_bar = data[0];
        let v_bar = data[1..1 + n].to_vec();
        let w_bar = data[1 + n..1 + 2 * n].to_vec();
        let mut a_bar = Matrix::zeros(n);
        let mut k = 1 + 2 * n;
        for i in 0..n {
            for j in (i + 1)..n {
                a_bar[(i, j)] = data[k];
                a_bar[(j, i)] = -data[k];
                k += 1;
            }
        }
        Self::new(u_bar, v_bar, w_bar, a_bar)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::UnsupportedDimension {
            n,
            reason: "the kernel is finite-dimensional only for n >= 3".into(),
        })
    } else {
        Ok(())
    }
}

/// Kernel field value at a point.
pub fn evaluate_kernel_field(p: &ConformalKillingParams, x: &[f64]) -> Result<Vec<f64>> {
    let n = p.dim();
    check_dim(n)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch("point dimension mismatch".into()));
    }
    let u = p.w_bar.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + p.u_bar;
    let x2: f64 = x.iter().map(|xi| xi * xi).sum();
    let ax = p.a_bar.mul_vec(x);
    Ok((0..n)
        .map(|i| u * x[i] - 0.5 * x2 * p.w_bar[i] + ax[i] + p.v_bar[i])
        .collect())
}

/// Gradient of the kernel field at a point: u(x) Id plus a skew part, so its
/// trace-free symmetric part vanishes identically.
pub fn evaluate_kernel_gradient(p: &ConformalKillingParams, x: &[f64]) -> Result<Matrix> {
    let n = p.dim();
    check_dim(n)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch("point dimension mismatch".into()));
    }
    let u = p.w_bar.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + p.u_bar;
    let mut g = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let a = p.w_bar[j] * x[i] - p.w_bar[i] * x[j] + p.a_bar[(i, j)];
            g[(i, j)] = a;
        }
        g[(i, i)] += u;
    }
    Ok(g)
}

/// Dimension of the kernel of the trace-free symmetric gradient.
pub fn kernel_dimension(n: usize) -> Result<usize> {
    check_dim(n)?;
    Ok((n + 1) * (n + 2) / 2)
}

/// Canonical parameter basis: the dilation, the n translations, the n special
/// conformal directions and the n(n-1)/2 elementary rotations.
pub fn kernel_basis(n: usize) -> Result<Vec<ConformalKillingParams>> {
    let dim = kernel_dimension(n)?;
    let mut basis = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut data = vec![0.0; dim];
        data[k] = 1.0;
        basis.push(ConformalKillingParams::from_vec(n, &data)?);
    }
    Ok(basis)
}

/// Nodal samples of each basis field stacked as rows of a matrix; full row
/// rank certifies that point evaluation separates the basis.
pub fn basis_sample_matrix(n: usize, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let basis = kernel_basis(n)?;
    let cols = points.len() * n;
    let mut m = DMatrix::zeros(basis.len(), cols);
    for (row, p) in basis.iter().enumerate() {
        for (pi, x) in points.iter().enumerate() {
            let v = evaluate_kernel_field(p, x)?;
            for c in 0..n {
                m[(row, pi * n + c)] = v[c];
            }
        }
    }
    Ok(m)
}

/// Numeric rank of the sampled basis via singular values.
pub fn basis_gram_rank(n: usize, points: &[Vec<f64>]) -> Result<usize> {
    let m = basis_sample_matrix(n, points)?;
    let sv = m.singular_values();
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(sv.iter().filter(|&&s| s > 1e-10 * max).count())
}

/// Uniform sample points of the unit cube [0,1]^n with `per_axis` points per
/// axis.
pub fn cube_sample_points(n: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let i = k % per_axis;
                    k /= per_axis;
                    i as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Rigidity of the kernel under the tangential boundary condition: project a
/// parameter vector onto the null space of the constraints
///
/// ```text
/// v(x) = 0  and  (grad v(x)) tau = 0   for tau in {e2, e3}, x on the face patch,
/// ```
///
/// the discrete mirror of "kernel field with vanishing tangential trace on a
/// boundary patch implies v = 0". With enough sample points the constraint
/// matrix has full column rank and the projection is zero.
pub fn rigidity_projection(
    p: &ConformalKillingParams,
    face_points: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = p.dim();
    let dim = kernel_dimension(n)?;
    if face_points.len() < dim {
        return Err(Error::InvalidArgument(format!(
            "need at least {dim} sample points"
        )));
    }
    // rows: for each point, n value conditions and 2n tangential-gradient
    // conditions; entries are linear in the parameters
    let tangents = [1usize, 2];
    let rows = face_points.len() * (n + tangents.len() * n);
    let mut m = DMatrix::zeros(rows, dim);
    let basis = kernel_basis(n)?;
    for (col, b) in basis.iter().enumerate() {
        let mut r = 0;
        for x in face_points {
            let v = evaluate_kernel_field(b, x)?;
            for c in 0..n {
                m[(r, col)] = v[c];
                r += 1;
            }
            let g = evaluate_kernel_gradient(b, x)?;
            for &t in &tangents {
                for i in 0..n {
                    m[(r, col)] = g[(i, t)];
                    r += 1;
                }
            }
        }
    }
    // orthogonal projection of the parameter vector onto null(M)
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd with V requested");
    let sv = &svd.singular_values;
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let p_vec = nalgebra::DVector::from_vec(p.to_vec());
    let mut proj = p_vec.clone();
    for (k, &s) in sv.iter().enumerate() {
        if s > 1e-12 * max {
            let row = vt.row(k).transpose();
            let coeff = row.dot(&p_vec);
            proj -= row * coeff;
        }
    }
    Ok(proj.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_params(n: usize, rng: &mut impl Rng) -> ConformalKillingParams {
        let dim = kernel_dimension(n).unwrap();
        let data: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        ConformalKillingParams::from_vec(n, &data).unwrap()
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(kernel_dimension(3).unwrap(), 10);
        assert_eq!(kernel_dimension(4).unwrap(), 15);
        assert_eq!(kernel_dimension(5).unwrap(), 21);
        assert!(kernel_dimension(2).is_err());
    }

    #[test]
    fn dilation_and_special_conformal_values() {
        let n = 3;
        let mut p = ConformalKillingParams::zeros(n).unwrap();
        p.u_bar = 1.0;
        let x = [0.3, -0.7, 1.1];
        let v = evaluate_kernel_field(&p, &x).unwrap();
        assert_eq!(v, x.to_vec());
        let g = evaluate_kernel_gradient(&p, &x).unwrap();
        assert_relative_eq!(g.sub(&Matrix::identity(n)).norm(), 0.0);

        let mut q = ConformalKillingParams::zeros(n).unwrap();
        q.w_bar[0] = 1.0;
        let e1 = [1.0, 0.0, 0.0];
        let v = evaluate_kernel_field(&q, &e1).unwrap();
        assert_eq!(v, vec![0.5, 0.0, 0.0]);

        let e2 = [0.0, 1.0, 0.0];
        let g = evaluate_kernel_gradient(&q, &e2).unwrap();
        let expect =
            Matrix::from_rows(&[&[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        assert_relative_eq!(g.sub(&expect).norm(), 0.0);
    }

    #[test]
    fn rotation_generator_has_skew_gradient() {
        let n = 3;
        let mut p = ConformalKillingParams::zeros(n).unwrap();
        p.a_bar[(0, 1)] = 1.0;
        p.a_bar[(1, 0)] = -1.0;
        let x = [0.2, 0.4, -0.9];
        let v = evaluate_kernel_field(&p, &x).unwrap();
        assert_eq!(v, p.a_bar.mul_vec(&x));
        let g = evaluate_kernel_gradient(&p, &x).unwrap();
        assert_relative_eq!(g.sub(&p.a_bar).norm(), 0.0);
    }

    #[test]
    fn gradient_annihilated_by_dev_sym() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 4, 5] {
            for _ in 0..10 {
                let p = random_params(n, &mut rng);
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let g = evaluate_kernel_gradient(&p, &x).unwrap();
                let ds = crate::algebra::cartan_decompose(&g).0;
                let x2: f64 = x.iter().map(|a| a * a).sum();
                assert!(ds.norm() <= 1e-13 * (1.0 + x2) * p.norm());
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = random_params(3, &mut rng);
        let x = [0.4, -0.2, 0.6];
        let g = evaluate_kernel_gradient(&p, &x).unwrap();
        let h = 0.5; // the field is quadratic: central differences are exact
        for j in 0..3 {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let vp = evaluate_kernel_field(&p, &xp).unwrap();
            let vm = evaluate_kernel_field(&p, &xm).unwrap();
            for i in 0..3 {
                assert_relative_eq!(
                    (vp[i] - vm[i]) / (2.0 * h),
                    g[(i, j)],
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn basis_has_full_rank_on_small_grids() {
        let pts3 = cube_sample_points(3, 3);
        assert_eq!(basis_gram_rank(3, &pts3).unwrap(), 10);
        let pts4 = cube_sample_points(4, 3);
        assert_eq!(basis_gram_rank(4, &pts4).unwrap(), 15);
    }

    #[test]
    fn basis_fields_are_annihilated() {
        let pts = cube_sample_points(3, 3);
        for b in kernel_basis(3).unwrap() {
            for x in &pts {
                let g = evaluate_kernel_gradient(&b, x).unwrap();
                let ds = crate::algebra::cartan_decompose(&g).0;
                assert!(ds.norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn rigidity_projects_to_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for n in [3usize, 4] {
            // sample patch on the face x_0 = 0
            let per_axis = 4;
            let dim = kernel_dimension(n).unwrap();
            let mut pts = Vec::new();
            let mut k = 0usize;
            while pts.len() < dim + 6 {
                let mut x = vec![0.0; n];
                let mut rem = k;
                for c in 1..n {
                    x[c] = (rem % per_axis) as f64 / (per_axis - 1) as f64;
                    rem /= per_axis;
                }
                pts.push(x);
                k += 1;
            }
            let p = random_params(n, &mut rng);
            let proj = rigidity_projection(&p, &pts).unwrap();
            let norm: f64 = proj.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(norm <= 1e-10 * p.norm(), "n = {n}: |proj| = {norm}");
        }
    }

    #[test]
    fn n2_is_rejected() {
        assert!(ConformalKillingParams::zeros(2).is_err());
        assert!(kernel_basis(2).is_err());
    }
}
