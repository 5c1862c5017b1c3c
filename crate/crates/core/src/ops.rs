//! Row-wise differential operators on nodal fields. All operators share one
//! stencil kernel: second-order central differences at interior nodes and
//! second-order one-sided differences at boundary nodes, which is exact on
//! polynomials of total degree <= 2. On the half-disk the Cartesian gradient
//! is assembled from the polar derivatives by the chain rule.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{
    same_grid, Field, RowCurlField, ScalarField, TensorField, VectorField,
};
use crate::grid::{BoundaryPartition, Grid, GridKind};

/// 1D second-order differentiation stencil with its transpose.
#[derive(Debug, Clone)]
pub(crate) struct Deriv1d {
    fwd: Vec<Vec<(usize, f64)>>,
    adj: Vec<Vec<(usize, f64)>>,
}

pub(crate) fn deriv1d(m: usize, h: f64) -> Deriv1d {
    assert!(m >= 3);
    let mut fwd: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let s = 1.0 / (2.0 * h);
    fwd.push(vec![(0, -3.0 * s), (1, 4.0 * s), (2, -s)]);
    for i in 1..m - 1 {
        fwd.push(vec![(i - 1, -s), (i + 1, s)]);
    }
    fwd.push(vec![(m - 1, 3.0 * s), (m - 2, -4.0 * s), (m - 3, s)]);

    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (i, taps) in fwd.iter().enumerate() {
        for &(j, c) in taps {
            adj[j].push((i, c));
        }
    }
    Deriv1d { fwd, adj }
}

#[derive(Debug, Clone)]
enum Coeff {
    Const(f64),
    /// Nodal coefficient applied after the derivative.
    Nodal(Vec<f64>),
}

#[derive(Debug, Clone)]
struct DerivTerm {
    axis: usize,
    comp_in: usize,
    comp_out: usize,
    coeff: Coeff,
}

/// A linear differential operator mapping a `nc_in`-component nodal field to
/// a `nc_out`-component one. Provides both the forward action and the plain
/// (unweighted) transpose, which the quadratic-form machinery needs.
#[derive(Debug, Clone)]
pub struct DiffOp {
    grid: Arc<Grid>,
    pub nc_in: usize,
    pub nc_out: usize,
    terms: Vec<DerivTerm>,
    derivs: Vec<Deriv1d>,
}

impl DiffOp {
    fn new(grid: Arc<Grid>, nc_in: usize, nc_out: usize, terms: Vec<DerivTerm>) -> Self {
        let derivs = (0..grid.shape().len())
            .map(|a| deriv1d(grid.shape()[a], grid.spacing()[a]))
            .collect();
        DiffOp {
            grid,
            nc_in,
            nc_out,
            terms,
            derivs,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.grid.node_count();
        assert_eq!(x.len(), nn * self.nc_in);
        let mut out = vec![0.0; nn * self.nc_out];
        let strides = self.grid.strides();
        let shape = self.grid.shape();
        for term in &self.terms {
            let d = &self.derivs[term.axis];
            let stride = strides[term.axis];
            let m = shape[term.axis];
            for node in 0..nn {
                let ia = (node / stride) % m;
                let base = node - ia * stride;
                let mut acc = 0.0;
                for &(pos, c) in &d.fwd[ia] {
                    acc += c * x[(base + pos * stride) * self.nc_in + term.comp_in];
                }
                let scale = match &term.coeff {
                    Coeff::Const(c) => *c,
                    Coeff::Nodal(v) => v[node],
                };
                out[node * self.nc_out + term.comp_out] += scale * acc;
            }
        }
        out
    }

    /// Plain transpose of [`Self::forward`]: `<forward(x), y> = <x, adjoint(y)>`
    /// in the unweighted Euclidean pairing.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let nn = self.grid.node_count();
        assert_eq!(y.len(), nn * self.nc_out);
        let mut out = vec![0.0; nn * self.nc_in];
        let strides = self.grid.strides();
        let shape = self.grid.shape();
        for term in &self.terms {
            let d = &self.derivs[term.axis];
            let stride = strides[term.axis];
            let m = shape[term.axis];
            for node in 0..nn {
                let ia = (node / stride) % m;
                let base = node - ia * stride;
                let mut acc = 0.0;
                for &(pos, c) in &d.adj[ia] {
                    let src = base + pos * stride;
                    let scale = match &term.coeff {
                        Coeff::Const(cc) => *cc,
                        Coeff::Nodal(v) => v[src],
                    };
                    acc += c * scale * y[src * self.nc_out + term.comp_out];
                }
                out[node * self.nc_in + term.comp_in] += acc;
            }
        }
        out
    }
}

/// Terms of the Cartesian partial derivative d/dx_k as (axis, coefficient)
/// pairs in grid parameter space.
fn cartesian_partial_terms(grid: &Grid, k: usize) -> Vec<(usize, Coeff)> {
    match grid.kind() {
        GridKind::Box => vec![(k, Coeff::Const(1.0))],
        GridKind::HalfDisk => {
            let nn = grid.node_count();
            let mut cr = vec![0.0; nn];
            let mut ct = vec![0.0; nn];
            for node in 0..nn {
                let p = grid.node_param(node);
                let (r, t) = (p[0], p[1]);
                if k == 0 {
                    cr[node] = t.cos();
                    ct[node] = -t.sin() / r;
                } else {
                    cr[node] = t.sin();
                    ct[node] = t.cos() / r;
                }
            }
            vec![(0, Coeff::Nodal(cr)), (1, Coeff::Nodal(ct))]
        }
    }
}

/// Gradient of a scalar field as a `DiffOp` (1 -> n components).
pub fn grad_scalar_op(grid: &Arc<Grid>) -> DiffOp {
    let n = grid.dim();
    let mut terms = Vec::new();
    for k in 0..n {
        for (axis, coeff) in cartesian_partial_terms(grid, k) {
            terms.push(DerivTerm {
                axis,
                comp_in: 0,
                comp_out: k,
                coeff,
            });
        }
    }
    DiffOp::new(grid.clone(), 1, n, terms)
}

/// Row-wise gradient (Jacobian) of a vector field (n -> n*n components).
pub fn grad_vector_op(grid: &Arc<Grid>) -> DiffOp {
    let n = grid.dim();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for (axis, coeff) in cartesian_partial_terms(grid, j) {
                terms.push(DerivTerm {
                    axis,
                    comp_in: i,
                    comp_out: i * n + j,
                    coeff,
                });
            }
        }
    }
    DiffOp::new(grid.clone(), n, n * n, terms)
}

/// Row-wise divergence of a tensor field (n*n -> n components). Box grids only.
pub fn div_tensor_op(grid: &Arc<Grid>) -> Result<DiffOp> {
    if grid.kind() != GridKind::Box {
        return Err(Error::InvalidArgument(
            "divergence is implemented on box grids only".into(),
        ));
    }
    let n = grid.dim();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(DerivTerm {
                axis: j,
                comp_in: i * n + j,
                comp_out: i,
                coeff: Coeff::Const(1.0),
            });
        }
    }
    Ok(DiffOp::new(grid.clone(), n * n, n, terms))
}

/// Row-wise rotation for n = 3 (n*n -> n*n components). Box grids only.
pub fn curl3_op(grid: &Arc<Grid>) -> Result<DiffOp> {
    if grid.kind() != GridKind::Box || grid.dim() != 3 {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "square-tensor curl requires a 3D box grid".into(),
        });
    }
    let n = 3;
    let mut terms = Vec::new();
    // curl of a row w: (d1 w2 - d2 w1, d2 w0 - d0 w2, d0 w1 - d1 w0)
    let spec: [[(usize, usize, f64); 2]; 3] = [
        [(1, 2, 1.0), (2, 1, -1.0)],
        [(2, 0, 1.0), (0, 2, -1.0)],
        [(0, 1, 1.0), (1, 0, -1.0)],
    ];
    for i in 0..n {
        for (k, pair) in spec.iter().enumerate() {
            for &(axis, j, sgn) in pair {
                terms.push(DerivTerm {
                    axis,
                    comp_in: i * n + j,
                    comp_out: i * n + k,
                    coeff: Coeff::Const(sgn),
                });
            }
        }
    }
    Ok(DiffOp::new(grid.clone(), n * n, n * n, terms))
}

/// Row-wise scalar rotation for n = 2 (4 -> 2 components): d0 T_i1 - d1 T_i0.
pub fn curl2_op(grid: &Arc<Grid>) -> Result<DiffOp> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            n: grid.dim(),
            reason: "row-curl output requires n = 2".into(),
        });
    }
    if grid.kind() != GridKind::Box {
        return Err(Error::InvalidArgument(
            "curl is implemented on box grids only".into(),
        ));
    }
    let n = 2;
    let mut terms = Vec::new();
    for i in 0..n {
        terms.push(DerivTerm {
            axis: 0,
            comp_in: i * n + 1,
            comp_out: i,
            coeff: Coeff::Const(1.0),
        });
        terms.push(DerivTerm {
            axis: 1,
            comp_in: i * n,
            comp_out: i,
            coeff: Coeff::Const(-1.0),
        });
    }
    Ok(DiffOp::new(grid.clone(), n * n, n, terms))
}

// --- field-level operations ----------------------------------------------

pub fn grad_scalar(f: &ScalarField) -> Result<VectorField> {
    let op = grad_scalar_op(f.grid());
    let mut out = VectorField::zeros(f.grid().clone());
    out.values_mut().copy_from_slice(&op.forward(f.values()));
    Ok(out)
}

pub fn grad_vector(v: &VectorField) -> Result<TensorField> {
    let op = grad_vector_op(v.grid());
    let mut out = TensorField::zeros(v.grid().clone());
    out.values_mut().copy_from_slice(&op.forward(v.values()));
    Ok(out)
}

pub fn div_tensor(t: &TensorField) -> Result<VectorField> {
    let op = div_tensor_op(t.grid())?;
    let mut out = VectorField::zeros(t.grid().clone());
    out.values_mut().copy_from_slice(&op.forward(t.values()));
    Ok(out)
}

/// Row-wise curl. For n = 3 the result is again a square tensor field; for
/// n = 2 each row contributes one scalar, giving a 2-component field.
pub enum CurlOutput {
    Tensor(TensorField),
    RowCurl(RowCurlField),
}

pub fn curl_tensor(t: &TensorField) -> Result<CurlOutput> {
    match t.grid().dim() {
        3 => {
            let op = curl3_op(t.grid())?;
            let mut out = TensorField::zeros(t.grid().clone());
            out.values_mut().copy_from_slice(&op.forward(t.values()));
            Ok(CurlOutput::Tensor(out))
        }
        2 => {
            let op = curl2_op(t.grid())?;
            let mut out = RowCurlField::zeros(t.grid().clone());
            out.values_mut().copy_from_slice(&op.forward(t.values()));
            Ok(CurlOutput::RowCurl(out))
        }
        n => Err(Error::UnsupportedDimension {
            n,
            reason: "curl is defined here for n = 2 and n = 3 only".into(),
        }),
    }
}

/// Componentwise Laplacian of a vector field, computed by applying the
/// first-derivative stencil twice per axis. Box grids only.
pub fn laplacian_vector(v: &VectorField) -> Result<VectorField> {
    if v.grid().kind() != GridKind::Box {
        return Err(Error::InvalidArgument(
            "laplacian is implemented on box grids only".into(),
        ));
    }
    let grid = v.grid().clone();
    let n = grid.dim();
    let nn = grid.node_count();
    let strides = grid.strides();
    let shape = grid.shape().to_vec();
    let mut out = VectorField::zeros(grid.clone());
    for axis in 0..n {
        let d = deriv1d(shape[axis], grid.spacing()[axis]);
        let apply = |x: &[f64], comp: usize| -> Vec<f64> {
            let mut y = vec![0.0; nn];
            for node in 0..nn {
                let ia = (node / strides[axis]) % shape[axis];
                let base = node - ia * strides[axis];
                let mut acc = 0.0;
                for &(pos, c) in &d.fwd[ia] {
                    acc += c * x[(base + pos * strides[axis]) * n + comp];
                }
                y[node] = acc;
            }
            y
        };
        for comp in 0..n {
            let first = apply(v.values(), comp);
            // widen to a vector layout so the closure can be reused
            let mut tmp = vec![0.0; nn * n];
            for node in 0..nn {
                tmp[node * n + comp] = first[node];
            }
            let second = apply(&tmp, comp);
            for node in 0..nn {
                out.values_mut()[node * n + comp] += second[node];
            }
        }
    }
    Ok(out)
}

// --- boundary-condition projection ---------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// T tau = 0 on Gamma_tau: on a face with normal axis k, all columns
    /// except k vanish.
    Tangential,
    /// T nu = 0 on Gamma_nu: on a face with normal axis k, column k vanishes.
    Normal,
}

/// Component mask of a tangential condition at a node lying on faces with
/// the given normal axes: column j survives only if every face has normal j.
pub(crate) fn tangential_zeroed_cols(n: usize, axes: &[usize]) -> Vec<usize> {
    (0..n)
        .filter(|&j| axes.iter().any(|&k| k != j))
        .collect()
}

/// Projects a tensor field onto the subspace satisfying the requested
/// boundary condition by zeroing the masked components. Idempotent and
/// norm-nonincreasing.
pub fn apply_bc(
    t: &TensorField,
    part: &BoundaryPartition,
    kind: BcKind,
) -> Result<TensorField> {
    let grid = t.grid().clone();
    let n = grid.dim();
    match kind {
        BcKind::Tangential if part.tau_is_empty() => {
            return Err(Error::InvalidArgument(
                "tangential projection requested but Gamma_tau is empty".into(),
            ))
        }
        BcKind::Normal if part.nu_is_empty() => {
            return Err(Error::InvalidArgument(
                "normal projection requested but Gamma_nu is empty".into(),
            ))
        }
        _ => {}
    }
    let mut out = t.clone();
    for node in 0..grid.node_count() {
        match kind {
            BcKind::Tangential => {
                if part.is_tau(node) {
                    let axes = part.tau_normal_axes(&grid, node);
                    for j in tangential_zeroed_cols(n, &axes) {
                        for i in 0..n {
                            out.set_entry(node, i, j, 0.0);
                        }
                    }
                }
            }
            BcKind::Normal => {
                if part.is_nu(node) {
                    for k in part.nu_normal_axes(&grid, node)? {
                        for i in 0..n {
                            out.set_entry(node, i, k, 0.0);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

// --- quadrature norms and inner products ---------------------------------

/// Lq norm by trapezoidal quadrature (polar-weighted on the half-disk).
pub fn lq_norm<F: Field>(field: &F, q: f64) -> Result<f64> {
    if q <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Lq norm requires q > 1, got {q}"
        )));
    }
    let w = field.grid().quad_weights();
    let sum: f64 = (0..field.node_count())
        .map(|k| w[k] * field.node_norm(k).powf(q))
        .sum();
    Ok(sum.powf(1.0 / q))
}

/// L2 norm, the workhorse case of [`lq_norm`].
pub fn l2_norm<F: Field>(field: &F) -> f64 {
    let w = field.grid().quad_weights();
    (0..field.node_count())
        .map(|k| w[k] * field.node_norm(k).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// L2 inner product of two fields of the same shape on the same grid.
pub fn l2_inner<F: Field>(a: &F, b: &F) -> Result<f64> {
    same_grid(a, b)?;
    if a.comps() != b.comps() {
        return Err(Error::DimensionMismatch(
            "l2_inner needs fields of equal component count".into(),
        ));
    }
    let w = a.grid().quad_weights();
    let nc = a.comps();
    let av = a.values();
    let bv = b.values();
    Ok((0..a.node_count())
        .map(|k| {
            let dot: f64 = (0..nc).map(|c| av[k * nc + c] * bv[k * nc + c]).sum();
            w[k] * dot
        })
        .sum())
}

// --- pointwise algebra on flat tensor-field value arrays ------------------

/// In-place pointwise symmetric part of tensor values.
pub fn pointwise_sym(n: usize, values: &mut [f64]) {
    let nc = n * n;
    for block in values.chunks_mut(nc) {
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (block[i * n + j] + block[j * n + i]);
                block[i * n + j] = s;
                block[j * n + i] = s;
            }
        }
    }
}

/// In-place pointwise deviatoric part of tensor values.
pub fn pointwise_dev(n: usize, values: &mut [f64]) {
    let nc = n * n;
    for block in values.chunks_mut(nc) {
        let mean: f64 = (0..n).map(|i| block[i * n + i]).sum::<f64>() / n as f64;
        for i in 0..n {
            block[i * n + i] -= mean;
        }
    }
}

/// Pointwise symmetric part of a tensor field.
pub fn tensor_sym(t: &TensorField) -> TensorField {
    let mut out = t.clone();
    pointwise_sym(t.grid().dim(), out.values_mut());
    out
}

/// Pointwise deviatoric part of a tensor field.
pub fn tensor_dev(t: &TensorField) -> TensorField {
    let mut out = t.clone();
    pointwise_dev(t.grid().dim(), out.values_mut());
    out
}
