//! Iterative and dense solvers shared by the spectral estimators: a
//! preconditioner-free conjugate-gradient solve, inverse power iteration on
//! a symmetric positive pencil, and a dense generalized eigendecomposition
//! that serves as the oracle on small grids.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Worker cap for embarrassingly parallel loops; the TENSORINEQ_THREADS
/// environment variable lowers it. Results do not depend on the cap.
pub fn thread_limit() -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8);
    match std::env::var("TENSORINEQ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(t) if t >= 1 => hw.min(t),
        _ => hw,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Conjugate gradients for a symmetric positive definite operator, without a
/// preconditioner. Returns the solution and the iteration count.
pub fn conjugate_gradient(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    conjugate_gradient_scaled(apply, None, b, x0, rel_tol, max_iter)
}

/// Conjugate gradients with an optional diagonal rescaling of the unknowns
/// (a Jacobi congruence). Needed when the operator couples components with
/// wildly different quadrature weights, as on the polar grid.
pub fn conjugate_gradient_scaled(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    diag: Option<&[f64]>,
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let inv_diag: Option<Vec<f64>> = diag.map(|d| {
        d.iter()
            .map(|&v| if v > 0.0 { 1.0 / v } else { 1.0 })
            .collect()
    });
    let precond = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(inv) => r.iter().zip(inv).map(|(ri, di)| ri * di).collect(),
            None => r.to_vec(),
        }
    };
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = b.to_vec();
    if x0.is_some() {
        let ax = apply(&x);
        for (ri, ai) in r.iter_mut().zip(&ax) {
            *ri -= ai;
        }
    }
    let b_norm = norm2(b).max(f64::MIN_POSITIVE);
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    if norm2(&r) <= rel_tol * b_norm {
        return Ok((x, 0));
    }
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver(format!(
                "conjugate gradients hit a nonpositive curvature direction (p.Ap = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm2(&r) <= rel_tol * b_norm {
            return Ok((x, it));
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::Solver(format!(
        "conjugate gradients did not reach tolerance {rel_tol:e} in {max_iter} iterations \
         (residual {:e})",
        norm2(&r) / b_norm
    )))
}

/// Options of the shifted inverse power iteration.
#[derive(Debug, Clone)]
pub struct EigenIterOpts {
    /// Relative eigenresidual target.
    pub tol: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Absolute shift added to the operator in the inner solves.
    pub shift: f64,
    /// Optional diagonal rescaling of the inner solves.
    pub diag: Option<Vec<f64>>,
    /// Stagnation threshold: magnitude scale of the eigenvalue.
    pub lambda_scale: f64,
}

pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn pencil_residual(
    apply_a: &dyn Fn(&[f64]) -> Vec<f64>,
    apply_b: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    lambda: f64,
    shift: f64,
) -> f64 {
    let ax = apply_a(x);
    let bx = apply_b(x);
    let mut r = ax.clone();
    for (ri, bi) in r.iter_mut().zip(&bx) {
        *ri -= lambda * bi;
    }
    let denom = norm2(&ax) + (lambda.abs() + shift) * norm2(&bx) + f64::MIN_POSITIVE;
    norm2(&r) / denom
}

/// Smallest eigenvalue of the pencil A x = lambda B x (A PSD, B SPD) by
/// inverse power iteration on A + shift B, with warm-started inner
/// conjugate-gradient solves. `x0` must not be B-orthogonal to the minimal
/// eigenspace (a random vector is fine).
pub fn smallest_eigen_shifted_inverse(
    apply_a: &dyn Fn(&[f64]) -> Vec<f64>,
    apply_b: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: Vec<f64>,
    opts: &EigenIterOpts,
) -> Result<EigenPair> {
    let shift = opts.shift;
    let apply_shifted = |v: &[f64]| -> Vec<f64> {
        let mut out = apply_a(v);
        let bv = apply_b(v);
        for (o, b) in out.iter_mut().zip(&bv) {
            *o += shift * b;
        }
        out
    };
    let b_normalize = |v: &[f64]| -> Option<Vec<f64>> {
        let nb = dot(&apply_b(v), v).max(0.0).sqrt();
        (nb > 0.0).then(|| v.iter().map(|x| x / nb).collect())
    };
    let mut x = b_normalize(&x0)
        .ok_or_else(|| Error::Solver("start vector has zero mass norm".into()))?;
    let mut lambda = dot(&apply_a(&x), &x);
    let mut warm: Option<Vec<f64>> = None;
    let mut stagnant = 0usize;
    for outer in 1..=opts.max_outer {
        let rhs = apply_b(&x);
        let (y, _) = conjugate_gradient_scaled(
            &apply_shifted,
            opts.diag.as_deref(),
            &rhs,
            warm.as_deref(),
            opts.cg_tol,
            opts.cg_max_iter,
        )?;
        let xn = b_normalize(&y)
            .ok_or_else(|| Error::Solver("inverse iteration collapsed to zero".into()))?;
        let lam_new = dot(&apply_a(&xn), &xn);
        let res = pencil_residual(apply_a, apply_b, &xn, lam_new, shift);
        let moved = (lam_new - lambda).abs();
        x = xn;
        lambda = lam_new;
        warm = Some(y);
        if res <= opts.tol {
            return Ok(EigenPair {
                lambda,
                vector: x,
                iterations: outer,
                residual: res,
            });
        }
        if moved <= 1e-13 * (opts.lambda_scale + lambda.abs()) {
            stagnant += 1;
            if stagnant >= 3 && res <= 1e-5 {
                return Ok(EigenPair {
                    lambda,
                    vector: x,
                    iterations: outer,
                    residual: res,
                });
            }
        } else {
            stagnant = 0;
        }
    }
    let res = pencil_residual(apply_a, apply_b, &x, lambda, shift);
    if res <= 1e-5 {
        return Ok(EigenPair {
            lambda,
            vector: x,
            iterations: opts.max_outer,
            residual: res,
        });
    }
    Err(Error::Solver(format!(
        "inverse iteration stopped at residual {res:e} after {} steps (lambda = {lambda:e})",
        opts.max_outer
    )))
}

/// Densifies a linear operator by applying it to unit vectors, spread over
/// the worker cap; each column is independent, so the result is
/// deterministic.
pub fn dense_from_apply<F>(n: usize, apply: F) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let threads = thread_limit().min(n.max(1));
    let mut m = DMatrix::zeros(n, n);
    if threads <= 1 || n < 64 {
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = apply(&e);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        return m;
    }
    let chunk = n.div_ceil(threads);
    let cols: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let lo = t * chunk;
            let hi = ((t + 1) * chunk).min(n);
            let apply = &apply;
            handles.push(scope.spawn(move || {
                let mut out = Vec::with_capacity(hi.saturating_sub(lo));
                let mut e = vec![0.0; n];
                for j in lo..hi {
                    e[j] = 1.0;
                    out.push(apply(&e));
                    e[j] = 0.0;
                }
                out
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("assembly worker panicked"))
            .collect()
    });
    for (j, col) in cols.into_iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Smallest eigenvalue (and eigenvector) of the pencil A x = lambda B x with
/// A symmetric positive semidefinite and B symmetric positive definite, via
/// a Cholesky congruence and a dense symmetric eigendecomposition.
pub fn dense_smallest_generalized(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty pencil".into()));
    }
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solver("mass form is not positive definite".into()))?;
    let l = chol.l();
    // m = L^{-1} A L^{-T}, computed by two triangular solves
    let t1 = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let t2 = l
        .solve_lower_triangular(&t1.transpose())
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let m = (&t2 + t2.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let mut k_min = 0;
    for k in 1..n {
        if eig.eigenvalues[k] < eig.eigenvalues[k_min] {
            k_min = k;
        }
    }
    let z = eig.eigenvectors.column(k_min).into_owned();
    // back-transform: x = L^{-T} z
    let x = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    Ok((eig.eigenvalues[k_min], x))
}
