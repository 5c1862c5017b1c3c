//! Kernels and counterexamples for the inequality families: the half-disk
//! sequence u_n(x, y) = x Re/Im((x+iy)^n) with its closed-form norms, the
//! closed-form curls of spherical and skew tensor fields, witness fields that
//! are annihilated by a pair of seminorms while staying O(1) in L2, and the
//! identity chain characterizing the kernel of (dev sym, dev Curl).

use serde::Serialize;
use std::sync::Arc;

use crate::algebra::{decompose_dev_tr, decompose_sym_skew, Matrix};
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::grid::{Grid, GridKind};
use crate::ops::{
    curl_tensor, div_tensor, grad_scalar, grad_vector, l2_norm, laplacian_vector, tensor_dev,
    CurlOutput,
};

// --- the half-disk sequence ------------------------------------------------

/// Closed-form squared norms of the half-disk family member with index `n`.
#[derive(Debug, Clone, Serialize)]
pub struct PompeSequenceItem {
    pub index: u32,
    /// || Grad u_n ||^2 = pi (n^2 + n + 1) / (2n + 2)
    pub grad_norm_sq: f64,
    /// || dev2 sym Grad u_n ||^2 = pi / (4n + 4)
    pub dev2_norm_sq: f64,
    /// pi n^2 / (12 (n + 1)), a lower bound for the three-dimensional
    /// deviator norm, valid for n > 2
    pub dev3_lower_bound: Option<f64>,
}

/// Value of u_n at a Cartesian point of the closed half-disk.
pub fn pompe_field(n: u32, point: (f64, f64)) -> Result<[f64; 2]> {
    let (x, y) = point;
    let r2 = x * x + y * y;
    if r2 > 1.0 + 1e-12 || x < -1e-12 {
        return Err(Error::InvalidArgument(format!(
            "point ({x}, {y}) lies outside the closed half-disk"
        )));
    }
    // x * (x + i y)^n
    let (mut re, mut im) = (1.0f64, 0.0f64);
    for _ in 0..n {
        let nre = re * x - im * y;
        im = re * y + im * x;
        re = nre;
    }
    Ok([x * re, x * im])
}

/// Gradient of u_n in polar coordinates:
/// r^n [[cos nt, 0], [sin nt, 0]] + n r^n cos t R(nt - t)
/// with R the rotation matrix.
pub fn pompe_gradient(n: u32, polar: (f64, f64)) -> Result<Matrix> {
    let (r, t) = polar;
    if !(0.0..=1.0 + 1e-12).contains(&r) || t.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "polar point (r, t) = ({r}, {t}) outside the half-disk range"
        )));
    }
    let nf = n as f64;
    let rn = r.powi(n as i32);
    let (snt, cnt) = (nf * t).sin_cos();
    let (srot, crot) = (nf * t - t).sin_cos();
    let c = nf * rn * t.cos();
    Ok(Matrix::from_rows(&[
        &[rn * cnt + c * crot, -c * srot],
        &[rn * snt + c * srot, c * crot],
    ]))
}

/// The closed forms of the squared gradient norm, the two-dimensional
/// deviator norm and the three-dimensional lower bound.
pub fn pompe_closed_forms(n: u32) -> PompeSequenceItem {
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    PompeSequenceItem {
        index: n,
        grad_norm_sq: pi * (nf * nf + nf + 1.0) / (2.0 * nf + 2.0),
        dev2_norm_sq: pi / (4.0 * nf + 4.0),
        dev3_lower_bound: if n > 2 {
            Some(pi * nf * nf / (12.0 * (nf + 1.0)))
        } else {
            None
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PompeQuadratureReport {
    pub index: u32,
    pub resolution: usize,
    pub grad_norm_sq_num: f64,
    pub dev2_norm_sq_num: f64,
    pub dev3_norm_sq_num: f64,
}

/// Embeds a symmetric 2x2 matrix into 3x3 (zero third row and column) and
/// returns its three-dimensional deviator.
fn dev3_of_plane(sym2: &Matrix) -> Matrix {
    let mut m3 = Matrix::zeros(3);
    for i in 0..2 {
        for j in 0..2 {
            m3[(i, j)] = sym2[(i, j)];
        }
    }
    decompose_dev_tr(&m3).0
}

/// Polar quadrature of |grad u_n|^2, |dev2 sym grad u_n|^2 and
/// |dev3 sym grad u_n|^2 over the half-disk, from the closed-form gradient.
pub fn pompe_quadrature_check(n: u32, resolution: usize) -> Result<PompeQuadratureReport> {
    if resolution < 50 {
        return Err(Error::ResolutionTooSmall {
            min: 50,
            got: resolution,
        });
    }
    let grid = Grid::half_disk(resolution, resolution)?;
    let w = grid.quad_weights();
    let (mut s_grad, mut s_dev2, mut s_dev3) = (0.0, 0.0, 0.0);
    for node in 0..grid.node_count() {
        let p = grid.node_param(node);
        let g = pompe_gradient(n, (p[0], p[1]))?;
        let sym = decompose_sym_skew(&g).0;
        let dev2 = decompose_dev_tr(&sym).0;
        let dev3 = dev3_of_plane(&sym);
        s_grad += w[node] * g.norm().powi(2);
        s_dev2 += w[node] * dev2.norm().powi(2);
        s_dev3 += w[node] * dev3.norm().powi(2);
    }
    Ok(PompeQuadratureReport {
        index: n,
        resolution,
        grad_norm_sq_num: s_grad,
        dev2_norm_sq_num: s_dev2,
        dev3_norm_sq_num: s_dev3,
    })
}

/// Samples u_n as a nodal vector field on a half-disk grid.
pub fn pompe_vector_field(grid: &Arc<Grid>, n: u32) -> Result<VectorField> {
    if grid.kind() != GridKind::HalfDisk {
        return Err(Error::InvalidArgument(
            "the sequence lives on the half-disk".into(),
        ));
    }
    let mut v = VectorField::zeros(grid.clone());
    for node in 0..grid.node_count() {
        let c = grid.node_coord(node);
        let val = pompe_field(n, (c[0], c[1]))?;
        v.set(node, &val);
    }
    Ok(v)
}

// --- closed-form curls ------------------------------------------------------

/// Curl of the spherical field u Id on a 3D box: the skew matrix
/// [[0, d2 u, -d1 u], [-d2 u, 0, d0 u], [d1 u, -d0 u, 0]]
/// assembled from the discrete gradient of u.
pub fn curl_spherical(u: &ScalarField) -> Result<TensorField> {
    let grid = u.grid().clone();
    if grid.dim() != 3 || grid.kind() != GridKind::Box {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "curl of a spherical field needs a 3D box grid".into(),
        });
    }
    let g = grad_scalar(u)?;
    let mut out = TensorField::zeros(grid.clone());
    for node in 0..grid.node_count() {
        let gv = g.value(node);
        let m = Matrix::from_rows(&[
            &[0.0, gv[2], -gv[1]],
            &[-gv[2], 0.0, gv[0]],
            &[gv[1], -gv[0], 0.0],
        ]);
        out.set(node, &m);
    }
    Ok(out)
}

/// Skew embedding of a 3-vector field:
/// [[0, -a2, a1], [a2, 0, -a0], [-a1, a0, 0]].
pub fn skew_embed(a: &VectorField) -> Result<TensorField> {
    let grid = a.grid().clone();
    if grid.dim() != 3 {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "skew embedding needs n = 3".into(),
        });
    }
    let mut out = TensorField::zeros(grid.clone());
    for node in 0..grid.node_count() {
        let av = a.value(node);
        let m = Matrix::from_rows(&[
            &[0.0, -av[2], av[1]],
            &[av[2], 0.0, -av[0]],
            &[-av[1], av[0], 0.0],
        ]);
        out.set(node, &m);
    }
    Ok(out)
}

/// Curl of the skew embedding of `a`, assembled in closed form from the
/// Jacobian of `a`:
/// diagonal d1 a1 + d2 a2 etc., off-diagonal -dj ai patterns.
pub fn curl_skew(a: &VectorField) -> Result<TensorField> {
    let grid = a.grid().clone();
    if grid.dim() != 3 || grid.kind() != GridKind::Box {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "curl of a skew field needs a 3D box grid".into(),
        });
    }
    let jac = grad_vector(a)?;
    let mut out = TensorField::zeros(grid.clone());
    for node in 0..grid.node_count() {
        let j = jac.value(node);
        // j[(i, k)] = d_k a_i
        let m = Matrix::from_rows(&[
            &[j[(1, 1)] + j[(2, 2)], -j[(1, 0)], -j[(2, 0)]],
            &[-j[(0, 1)], j[(2, 2)] + j[(0, 0)], -j[(2, 1)]],
            &[-j[(0, 2)], -j[(1, 2)], j[(0, 0)] + j[(1, 1)]],
        ]);
        out.set(node, &m);
    }
    Ok(out)
}

// --- witnesses --------------------------------------------------------------

/// Checks that a scalar field vanishes (exactly) on the two node layers
/// nearest the boundary, so one-sided stencils never see nonzero data.
fn check_compact_support(u: &ScalarField) -> Result<()> {
    let grid = u.grid();
    let shape = grid.shape();
    for node in 0..grid.node_count() {
        let mi = grid.node_multi_index(node);
        let near = mi
            .iter()
            .zip(shape)
            .any(|(&i, &m)| i < 2 || i >= m - 2);
        if near && u.value(node) != 0.0 {
            return Err(Error::InvalidArgument(
                "field is not compactly supported: nonzero within two node layers of the boundary"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Smooth bump supported strictly inside the box, zero on the two node
/// layers nearest each face.
pub fn compact_bump(grid: &Arc<Grid>) -> ScalarField {
    let margin: Vec<f64> = grid.spacing().iter().map(|h| 2.5 * h).collect();
    ScalarField::from_fn(grid.clone(), move |x| {
        let mut val = 1.0;
        for (c, &m) in x.iter().zip(&margin) {
            let s = (c - m) / (1.0 - 2.0 * m);
            if !(0.0..=1.0).contains(&s) || s == 0.0 || s == 1.0 {
                return 0.0;
            }
            val *= (-1.0 / (s * (1.0 - s))).exp() * 54.598; // e^4 rescale to O(1)
        }
        val
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub name: String,
    pub resolution: usize,
    /// L2 norms of the two seminorms annihilating the witness.
    pub seminorm_a: f64,
    pub seminorm_b: f64,
    /// L2 norm of the witness field itself.
    pub field_norm: f64,
    /// Set when the seminorms vanish while the field does not.
    pub unbounded_ratio: bool,
}

/// Witness refuting a bound of ||T|| by dev sym T and sym Curl T: for
/// T = u Id both seminorms vanish identically while ||T|| = sqrt(3) ||u||.
pub fn witness_no_devsym_devsymcurl(u: &ScalarField) -> Result<WitnessReport> {
    check_compact_support(u)?;
    let grid = u.grid().clone();
    let t = TensorField::from_fn_scalar_id(u)?;
    let devsym = tensor_dev(&crate::ops::tensor_sym(&t));
    let curl = curl_spherical(u)?;
    let sym_curl = crate::ops::tensor_sym(&curl);
    let a = l2_norm(&devsym);
    let b = l2_norm(&sym_curl);
    let f = l2_norm(&t);
    Ok(WitnessReport {
        name: "no-devsym-devsymcurl".into(),
        resolution: grid.shape()[0],
        seminorm_a: a,
        seminorm_b: b,
        field_norm: f,
        unbounded_ratio: f > 0.0 && a + b < 1e-12 * (1.0 + f),
    })
}

/// Witness refuting a bound of ||A|| by sym A and Div A: for the skew
/// embedding of a gradient both seminorms vanish.
pub fn witness_no_sym_div(u: &ScalarField) -> Result<WitnessReport> {
    check_compact_support(u)?;
    let grid = u.grid().clone();
    if grid.dim() != 3 {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "the witness is three-dimensional".into(),
        });
    }
    let a_field = grad_scalar(u)?;
    let embedded = skew_embed(&a_field)?;
    let sym_part = crate::ops::tensor_sym(&embedded);
    let div = div_tensor(&embedded)?;
    let a = l2_norm(&sym_part);
    let b = l2_norm(&div);
    let f = l2_norm(&embedded);
    Ok(WitnessReport {
        name: "no-sym-div".into(),
        resolution: grid.shape()[0],
        seminorm_a: a,
        seminorm_b: b,
        field_norm: f,
        unbounded_ratio: f > 0.0 && a + b < 1e-12 * (1.0 + f),
    })
}

impl TensorField {
    /// u Id as a tensor field.
    pub fn from_fn_scalar_id(u: &ScalarField) -> Result<TensorField> {
        let grid = u.grid().clone();
        let n = grid.dim();
        let mut t = TensorField::zeros(grid.clone());
        for node in 0..grid.node_count() {
            for i in 0..n {
                t.set_entry(node, i, i, u.value(node));
            }
        }
        Ok(t)
    }
}

// --- the (dev sym, dev Curl) kernel chain -----------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub resolution: usize,
    /// Norm scale of the inputs against which residuals are judged.
    pub field_scale: f64,
    /// || dev Curl T ||.
    pub dev_curl_residual: f64,
    /// Symmetrized off-diagonal Jacobian combinations of `a`.
    pub anticommutator_residual: f64,
    /// d_i a_i - y/2 for the trace scalar y of Curl T.
    pub diagonal_residual: f64,
    /// || 2 div a - 3 y ||.
    pub two_div_minus_three_y: f64,
    /// grad u against the cross Jacobian entries of `a`.
    pub gradient_link_residual: f64,
    /// Laplacian of `a` against -grad y / 2.
    pub laplace_link_residual: f64,
}

/// Evaluates each link of the identity chain satisfied by fields
/// T = u Id + skew(a) with spherical curl. For inputs in the kernel all
/// residuals are at stencil level; generic inputs leave O(1) residuals.
pub fn devsym_devcurl_kernel_chain(u: &ScalarField, a: &VectorField) -> Result<ChainReport> {
    crate::field::same_grid(u, a)?;
    let grid = u.grid().clone();
    if grid.dim() != 3 || grid.kind() != GridKind::Box {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "the kernel chain needs a 3D box grid".into(),
        });
    }
    let nn = grid.node_count();

    let t = {
        let mut t = TensorField::from_fn_scalar_id(u)?;
        let sk = skew_embed(a)?;
        for (tv, sv) in t.values_mut().iter_mut().zip(sk.values()) {
            *tv += sv;
        }
        t
    };
    let CurlOutput::Tensor(curl_t) = curl_tensor(&t)? else {
        unreachable!("n = 3");
    };
    let mut y = ScalarField::zeros(grid.clone());
    for node in 0..nn {
        let m = curl_t.value(node);
        y.set(node, m.trace() / 3.0);
    }
    let dev_curl_residual = l2_norm(&tensor_dev(&curl_t));

    let jac = grad_vector(a)?;
    let grad_u = grad_scalar(u)?;
    let grad_y = grad_scalar(&y)?;

    let mut anti = VectorField::zeros(grid.clone());
    let mut diag = VectorField::zeros(grid.clone());
    let mut two_three = ScalarField::zeros(grid.clone());
    let mut grad_link = VectorField::zeros(grid.clone());
    for node in 0..nn {
        let j = jac.value(node);
        let yv = y.value(node);
        anti.set(
            node,
            &[
                j[(0, 1)] + j[(1, 0)],
                j[(1, 2)] + j[(2, 1)],
                j[(2, 0)] + j[(0, 2)],
            ],
        );
        diag.set(
            node,
            &[
                j[(0, 0)] - 0.5 * yv,
                j[(1, 1)] - 0.5 * yv,
                j[(2, 2)] - 0.5 * yv,
            ],
        );
        two_three.set(node, 2.0 * (j[(0, 0)] + j[(1, 1)] + j[(2, 2)]) - 3.0 * yv);
        let gu = grad_u.value(node);
        grad_link.set(
            node,
            &[
                gu[0] - j[(2, 1)],
                gu[1] - j[(0, 2)],
                gu[2] - j[(1, 0)],
            ],
        );
    }

    let lap = laplacian_vector(a)?;
    let mut laplace = VectorField::zeros(grid.clone());
    for node in 0..nn {
        let l = lap.value(node);
        let gy = grad_y.value(node);
        laplace.set(
            node,
            &[
                l[0] + 0.5 * gy[0],
                l[1] + 0.5 * gy[1],
                l[2] + 0.5 * gy[2],
            ],
        );
    }

    let field_scale = l2_norm(&jac) + l2_norm(&grad_u) + l2_norm(&y) + 1e-300;
    Ok(ChainReport {
        resolution: grid.shape()[0],
        field_scale,
        dev_curl_residual,
        anticommutator_residual: l2_norm(&anti),
        diagonal_residual: l2_norm(&diag),
        two_div_minus_three_y: l2_norm(&two_three),
        gradient_link_residual: l2_norm(&grad_link),
        laplace_link_residual: l2_norm(&laplace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn field_values_at_reference_points() {
        assert_eq!(pompe_field(1, (1.0, 0.0)).unwrap(), [1.0, 0.0]);
        assert_eq!(pompe_field(2, (1.0, 0.0)).unwrap(), [1.0, 0.0]);
        for n in [1u32, 3, 6] {
            let v = pompe_field(n, (0.0, 0.4)).unwrap();
            assert_eq!(v, [0.0, 0.0], "vanishes on the diameter");
        }
        assert!(pompe_field(1, (-0.5, 0.0)).is_err());
        assert!(pompe_field(1, (0.9, 0.9)).is_err());
    }

    #[test]
    fn gradient_reference_values() {
        let g = pompe_gradient(1, (1.0, 0.0)).unwrap();
        let expect = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        assert_relative_eq!(g.sub(&expect).norm(), 0.0, epsilon = 1e-14);

        let g = pompe_gradient(2, (1.0, 0.0)).unwrap();
        let expect = Matrix::from_rows(&[&[3.0, 0.0], &[0.0, 2.0]]);
        assert_relative_eq!(g.sub(&expect).norm(), 0.0, epsilon = 1e-14);

        let g = pompe_gradient(4, (0.0, 0.3)).unwrap();
        assert_eq!(g.norm(), 0.0, "zero at the origin");
    }

    #[test]
    fn gradient_squared_norm_identity() {
        // |grad u_n|^2 = r^{2n} (1 + 2 (n^2 + n) cos^2 t)
        for n in [1u32, 2, 5] {
            for (r, t) in [(0.3, 0.1), (0.8, -1.2), (1.0, 0.7)] {
                let g = pompe_gradient(n, (r, t)).unwrap();
                let nf = n as f64;
                let expect = r.powi(2 * n as i32)
                    * (1.0 + 2.0 * (nf * nf + nf) * t.cos().powi(2));
                assert_relative_eq!(g.norm().powi(2), expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_cartesian_difference_quotient() {
        // compare against finite differences of the Cartesian field
        let n = 3u32;
        let (x, y) = (0.4, 0.2);
        let h = 1e-6;
        let fxp = pompe_field(n, (x + h, y)).unwrap();
        let fxm = pompe_field(n, (x - h, y)).unwrap();
        let fyp = pompe_field(n, (x, y + h)).unwrap();
        let fym = pompe_field(n, (x, y - h)).unwrap();
        let r = (x * x + y * y).sqrt();
        let t = y.atan2(x);
        let g = pompe_gradient(n, (r, t)).unwrap();
        assert_relative_eq!((fxp[0] - fxm[0]) / (2.0 * h), g[(0, 0)], epsilon = 1e-8);
        assert_relative_eq!((fyp[0] - fym[0]) / (2.0 * h), g[(0, 1)], epsilon = 1e-8);
        assert_relative_eq!((fxp[1] - fxm[1]) / (2.0 * h), g[(1, 0)], epsilon = 1e-8);
        assert_relative_eq!((fyp[1] - fym[1]) / (2.0 * h), g[(1, 1)], epsilon = 1e-8);
    }

    #[test]
    fn closed_forms_reference_values() {
        let c1 = pompe_closed_forms(1);
        assert_relative_eq!(c1.grad_norm_sq, 3.0 * PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(c1.dev2_norm_sq, PI / 8.0, max_relative = 1e-15);
        assert!(c1.dev3_lower_bound.is_none());

        let c2 = pompe_closed_forms(2);
        assert_relative_eq!(c2.grad_norm_sq, 7.0 * PI / 6.0, max_relative = 1e-15);
        assert_relative_eq!(c2.dev2_norm_sq, PI / 12.0, max_relative = 1e-15);

        let c3 = pompe_closed_forms(3);
        assert_relative_eq!(
            c3.dev3_lower_bound.unwrap(),
            3.0 * PI / 16.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for n in [1u32, 4] {
            let rep = pompe_quadrature_check(n, 200).unwrap();
            let cf = pompe_closed_forms(n);
            assert_relative_eq!(
                rep.grad_norm_sq_num,
                cf.grad_norm_sq,
                max_relative = 1e-3
            );
            assert_relative_eq!(
                rep.dev2_norm_sq_num,
                cf.dev2_norm_sq,
                max_relative = 1e-3
            );
            if let Some(lb) = cf.dev3_lower_bound {
                assert!(rep.dev3_norm_sq_num >= lb);
            }
        }
        assert!(pompe_quadrature_check(1, 30).is_err());
    }

    #[test]
    fn curl_spherical_matches_generic_curl() {
        let g = Arc::new(Grid::unit_box(3, 6).unwrap());
        let u = ScalarField::from_fn(g.clone(), |x| x[0] * x[0] - 2.0 * x[1] * x[2]);
        let closed = curl_spherical(&u).unwrap();
        let t = TensorField::from_fn_scalar_id(&u).unwrap();
        let CurlOutput::Tensor(generic) = curl_tensor(&t).unwrap() else {
            panic!()
        };
        let mut diff = closed.clone();
        for (d, g) in diff.values_mut().iter_mut().zip(generic.values()) {
            *d -= g;
        }
        assert!(l2_norm(&diff) <= 1e-12);
        // skewness is structural
        assert_eq!(l2_norm(&crate::ops::tensor_sym(&closed)), 0.0);
    }

    #[test]
    fn curl_skew_matches_generic_curl() {
        let g = Arc::new(Grid::unit_box(3, 6).unwrap());
        let u = ScalarField::from_fn(g.clone(), |x| {
            x[0] * x[1] + 0.5 * x[2] * x[2] - x[0]
        });
        let a = grad_scalar(&u).unwrap();
        let closed = curl_skew(&a).unwrap();
        let CurlOutput::Tensor(generic) = curl_tensor(&skew_embed(&a).unwrap()).unwrap() else {
            panic!()
        };
        let mut diff = closed.clone();
        for (d, g) in diff.values_mut().iter_mut().zip(generic.values()) {
            *d -= g;
        }
        assert!(l2_norm(&diff) <= 1e-12);

        let c = VectorField::from_fn(g, |_| vec![1.0, -2.0, 0.5]);
        assert!(l2_norm(&curl_skew(&c).unwrap()) <= 1e-13);
    }

    #[test]
    fn witness_devsym_devsymcurl_structural_zeros() {
        let g = Arc::new(Grid::unit_box(3, 12).unwrap());
        let u = compact_bump(&g);
        assert!(l2_norm(&u) > 0.0);
        let rep = witness_no_devsym_devsymcurl(&u).unwrap();
        assert!(rep.seminorm_a <= 1e-14 * rep.field_norm);
        assert_eq!(rep.seminorm_b, 0.0);
        assert!(rep.field_norm > 0.0);
        assert!(rep.unbounded_ratio);
        assert_relative_eq!(
            rep.field_norm,
            3f64.sqrt() * l2_norm(&u),
            max_relative = 1e-12
        );

        let zero = ScalarField::zeros(g);
        let rep0 = witness_no_devsym_devsymcurl(&zero).unwrap();
        assert_eq!(rep0.field_norm, 0.0);
        assert!(!rep0.unbounded_ratio);
    }

    #[test]
    fn witness_rejects_non_compact_support() {
        let g = Arc::new(Grid::unit_box(3, 8).unwrap());
        let u = ScalarField::from_fn(g, |_| 1.0);
        assert!(witness_no_devsym_devsymcurl(&u).is_err());
    }

    #[test]
    fn witness_sym_div_structural_zeros() {
        for m in [9usize, 17] {
            let g = Arc::new(Grid::unit_box(3, m).unwrap());
            let u = compact_bump(&g);
            let rep = witness_no_sym_div(&u).unwrap();
            assert_eq!(rep.seminorm_a, 0.0, "skew embedding is exactly skew");
            // commuting one-dimensional stencils make Div(skew(grad u))
            // vanish to rounding, independent of resolution
            assert!(rep.seminorm_b <= 1e-12 * (1.0 + rep.field_norm));
            assert!(rep.field_norm > 0.0);
            assert!(rep.unbounded_ratio);
        }
    }

    #[test]
    fn chain_zero_inputs_and_kernel_member() {
        let g = Arc::new(Grid::unit_box(3, 7).unwrap());
        let u0 = ScalarField::zeros(g.clone());
        let a0 = VectorField::zeros(g.clone());
        let rep = devsym_devcurl_kernel_chain(&u0, &a0).unwrap();
        assert_eq!(rep.anticommutator_residual, 0.0);
        assert_eq!(rep.diagonal_residual, 0.0);
        assert_eq!(rep.laplace_link_residual, 0.0);

        // a = (y x0 / 2, y x1 / 2, y x2 / 2) with constant y solves the
        // diagonal link exactly
        let c = 1.8;
        let a = VectorField::from_fn(g.clone(), |x| {
            vec![0.5 * c * x[0], 0.5 * c * x[1], 0.5 * c * x[2]]
        });
        let rep = devsym_devcurl_kernel_chain(&u0, &a).unwrap();
        assert!(rep.diagonal_residual <= 1e-12 * rep.field_scale);
        assert!(rep.two_div_minus_three_y <= 1e-12 * rep.field_scale);
    }

    #[test]
    fn chain_generic_inputs_leave_o1_residuals() {
        let g = Arc::new(Grid::unit_box(3, 9).unwrap());
        let u = ScalarField::from_fn(g.clone(), |x| (x[0] - 0.4) * x[1]);
        let a = VectorField::from_fn(g, |x| {
            vec![x[1] * x[1], x[0] * x[2], x[0] * x[0] - x[1]]
        });
        let rep = devsym_devcurl_kernel_chain(&u, &a).unwrap();
        let worst = rep
            .anticommutator_residual
            .max(rep.diagonal_residual)
            .max(rep.gradient_link_residual)
            .max(rep.laplace_link_residual);
        assert!(
            worst > 0.1 * rep.field_scale,
            "worst = {worst}, scale = {}",
            rep.field_scale
        );
    }
}
