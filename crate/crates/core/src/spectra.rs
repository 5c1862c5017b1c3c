//! Spectral estimation of the inequality constants: every estimate is the
//! smallest generalized eigenvalue of the pencil
//!
//! ```text
//! rhs_form(T)  = sum_i || seminorm_i(T) ||_L2^2     (quadratic, PSD)
//! mass_form(T) = || lhs(T) ||_L2^2                  (quadratic, PD on free dofs)
//! ```
//!
//! over the boundary-condition-projected nodal space, and the constant of
//! the inequality `|| lhs(T) || <= C sum_i || seminorm_i(T) ||` is
//! `lambda_min^{-1/2}`. A near-zero smallest eigenvalue means the right-hand
//! side does not control the field on the discrete space.

use serde::Serialize;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::grid::{BoundaryPartition, Face, Grid, GridKind};
use crate::linalg::{
    dense_from_apply, dense_smallest_generalized, dot, norm2, smallest_eigen_shifted_inverse,
    EigenIterOpts,
};
use crate::ops::{
    curl2_op, curl3_op, div_tensor_op, grad_vector_op, pointwise_dev, pointwise_sym,
    tangential_zeroed_cols, DiffOp,
};

// --- inequality specifications ---------------------------------------------

/// One step of a seminorm pipeline, applied left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeminormStep {
    Dev,
    Sym,
    Grad,
    Div,
    Curl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Tensor,
    Vector,
}

/// Which boundary condition the spec imposes on the unknown field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcRequirement {
    /// Column masking T nu = 0 at nodes of Gamma_nu faces.
    NormalOnNu,
    /// Column masking T tau = 0 at nodes of Gamma_tau faces.
    TangentialOnTau,
    /// Both of the above (the Maxwell-type setting).
    Both,
    /// Vector Dirichlet condition v = 0 at Gamma_tau nodes.
    DirichletOnTau,
}

/// Named inequality specs. The first seven carry positive statements; the
/// last two are refuted families kept for kernel-detection experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecName {
    DevDiv,
    SymCurl,
    DevSymCurl,
    DevSymDevCurl,
    SymDevCurl,
    Maxwell,
    DevSymGrad,
    SymDiv,
    DevSymDevSymCurl,
}

impl SpecName {
    pub const ALL: [SpecName; 9] = [
        SpecName::DevDiv,
        SpecName::SymCurl,
        SpecName::DevSymCurl,
        SpecName::DevSymDevCurl,
        SpecName::SymDevCurl,
        SpecName::Maxwell,
        SpecName::DevSymGrad,
        SpecName::SymDiv,
        SpecName::DevSymDevSymCurl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpecName::DevDiv => "dev-div",
            SpecName::SymCurl => "sym-curl",
            SpecName::DevSymCurl => "dev-sym-curl",
            SpecName::DevSymDevCurl => "dev-sym-dev-curl",
            SpecName::SymDevCurl => "sym-dev-curl",
            SpecName::Maxwell => "maxwell",
            SpecName::DevSymGrad => "dev-sym-grad",
            SpecName::SymDiv => "sym-div",
            SpecName::DevSymDevSymCurl => "dev-sym-dev-sym-curl",
        }
    }

    pub fn parse(s: &str) -> Option<SpecName> {
        SpecName::ALL.iter().copied().find(|n| n.as_str() == s)
    }
}

/// The seminorm combination, boundary condition and field kind of one
/// inequality.
#[derive(Debug, Clone)]
pub struct InequalitySpec {
    pub name: String,
    pub field_kind: FieldKind,
    /// Right-hand-side seminorm pipelines (nonempty).
    pub rhs: Vec<Vec<SeminormStep>>,
    /// Left-hand-side pipeline; empty means the plain L2 norm of the field.
    pub mass: Vec<SeminormStep>,
    pub bc: BcRequirement,
}

impl InequalitySpec {
    pub fn preset(name: SpecName) -> InequalitySpec {
        use SeminormStep::*;
        let (field_kind, rhs, mass, bc): (FieldKind, Vec<Vec<SeminormStep>>, Vec<SeminormStep>, _) =
            match name {
                SpecName::DevDiv => (
                    FieldKind::Tensor,
                    vec![vec![Dev], vec![Div]],
                    vec![],
                    BcRequirement::NormalOnNu,
                ),
                SpecName::SymCurl => (
                    FieldKind::Tensor,
                    vec![vec![Sym], vec![Curl]],
                    vec![],
                    BcRequirement::TangentialOnTau,
                ),
                SpecName::DevSymCurl => (
                    FieldKind::Tensor,
                    vec![vec![Sym, Dev], vec![Curl]],
                    vec![],
                    BcRequirement::TangentialOnTau,
                ),
                SpecName::DevSymDevCurl => (
                    FieldKind::Tensor,
                    vec![vec![Sym, Dev], vec![Curl, Dev]],
                    vec![],
                    BcRequirement::TangentialOnTau,
                ),
                SpecName::SymDevCurl => (
                    FieldKind::Tensor,
                    vec![vec![Sym], vec![Curl, Dev]],
                    vec![],
                    BcRequirement::TangentialOnTau,
                ),
                SpecName::Maxwell => (
                    FieldKind::Tensor,
                    vec![vec![Curl], vec![Div]],
                    vec![],
                    BcRequirement::Both,
                ),
                SpecName::DevSymGrad => (
                    FieldKind::Vector,
                    vec![vec![Grad, Sym, Dev]],
                    vec![Grad],
                    BcRequirement::DirichletOnTau,
                ),
                SpecName::SymDiv => (
                    FieldKind::Tensor,
                    vec![vec![Sym], vec![Div]],
                    vec![],
                    BcRequirement::NormalOnNu,
                ),
                SpecName::DevSymDevSymCurl => (
                    FieldKind::Tensor,
                    vec![vec![Sym, Dev], vec![Curl, Sym, Dev]],
                    vec![],
                    BcRequirement::TangentialOnTau,
                ),
            };
        InequalitySpec {
            name: name.as_str().to_string(),
            field_kind,
            rhs,
            mass,
            bc,
        }
    }

    /// Copy of the spec with one more seminorm on the right-hand side
    /// (the augmented form dominates the original one).
    pub fn with_extra_seminorm(&self, pipeline: Vec<SeminormStep>) -> InequalitySpec {
        let mut out = self.clone();
        out.rhs.push(pipeline);
        out.name = format!("{}+extra", self.name);
        out
    }
}

// --- compiled pipelines ------------------------------------------------------

enum CompiledStep {
    Dev(usize),
    Sym(usize),
    Diff(DiffOp),
}

pub struct CompiledPipeline {
    steps: Vec<CompiledStep>,
    nc_in: usize,
    nc_out: usize,
}

impl CompiledPipeline {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for step in &self.steps {
            match step {
                CompiledStep::Dev(n) => pointwise_dev(*n, &mut cur),
                CompiledStep::Sym(n) => pointwise_sym(*n, &mut cur),
                CompiledStep::Diff(op) => cur = op.forward(&cur),
            }
        }
        cur
    }

    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut cur = y.to_vec();
        for step in self.steps.iter().rev() {
            match step {
                // pointwise orthogonal projections are self-adjoint
                CompiledStep::Dev(n) => pointwise_dev(*n, &mut cur),
                CompiledStep::Sym(n) => pointwise_sym(*n, &mut cur),
                CompiledStep::Diff(op) => cur = op.adjoint(&cur),
            }
        }
        cur
    }

    pub fn out_comps(&self) -> usize {
        self.nc_out
    }
}

pub(crate) fn compile_pipeline(
    grid: &Arc<Grid>,
    field_kind: FieldKind,
    steps: &[SeminormStep],
) -> Result<CompiledPipeline> {
    let n = grid.dim();
    #[derive(PartialEq, Clone, Copy)]
    enum Shape {
        Vector,
        Tensor,
        RowCurl,
    }
    let mut shape = match field_kind {
        FieldKind::Tensor => Shape::Tensor,
        FieldKind::Vector => Shape::Vector,
    };
    let nc_of = |s: Shape| match s {
        Shape::Vector => n,
        Shape::Tensor => n * n,
        Shape::RowCurl => 2,
    };
    let nc_in = nc_of(shape);
    let mut compiled = Vec::new();
    for step in steps {
        match step {
            SeminormStep::Dev => {
                if shape != Shape::Tensor {
                    return Err(Error::InvalidArgument(
                        "dev applies to square tensors only".into(),
                    ));
                }
                compiled.push(CompiledStep::Dev(n));
            }
            SeminormStep::Sym => {
                if shape != Shape::Tensor {
                    return Err(Error::InvalidArgument(
                        "sym applies to square tensors only".into(),
                    ));
                }
                compiled.push(CompiledStep::Sym(n));
            }
            SeminormStep::Grad => {
                if shape != Shape::Vector {
                    return Err(Error::InvalidArgument(
                        "grad applies to vector fields only".into(),
                    ));
                }
                compiled.push(CompiledStep::Diff(grad_vector_op(grid)));
                shape = Shape::Tensor;
            }
            SeminormStep::Div => {
                if shape != Shape::Tensor {
                    return Err(Error::InvalidArgument(
                        "div applies to tensor fields only".into(),
                    ));
                }
                compiled.push(CompiledStep::Diff(div_tensor_op(grid)?));
                shape = Shape::Vector;
            }
            SeminormStep::Curl => {
                if shape != Shape::Tensor {
                    return Err(Error::InvalidArgument(
                        "curl applies to tensor fields only".into(),
                    ));
                }
                if n == 3 {
                    compiled.push(CompiledStep::Diff(curl3_op(grid)?));
                    shape = Shape::Tensor;
                } else {
                    compiled.push(CompiledStep::Diff(curl2_op(grid)?));
                    shape = Shape::RowCurl;
                }
            }
        }
    }
    Ok(CompiledPipeline {
        steps: compiled,
        nc_in,
        nc_out: nc_of(shape),
    })
}

/// Quadrature value of one seminorm pipeline on full nodal values.
pub fn seminorm_value(
    grid: &Arc<Grid>,
    field_kind: FieldKind,
    steps: &[SeminormStep],
    values: &[f64],
) -> Result<f64> {
    let pipe = compile_pipeline(grid, field_kind, steps)?;
    let y = pipe.forward(values);
    let w = grid.quad_weights();
    let nc = pipe.out_comps();
    let mut acc = 0.0;
    for node in 0..grid.node_count() {
        let s: f64 = y[node * nc..(node + 1) * nc].iter().map(|v| v * v).sum();
        acc += w[node] * s;
    }
    Ok(acc)
}

// --- degrees of freedom under boundary masking -------------------------------

/// Free nodal components after eliminating the boundary-masked ones.
pub struct DofMap {
    pub nc: usize,
    constrained: Vec<bool>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn free_len(&self) -> usize {
        self.free.len()
    }

    pub fn scatter(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.constrained.len()];
        for (k, &slot) in self.free.iter().enumerate() {
            full[slot] = free[k];
        }
        full
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&slot| full[slot]).collect()
    }
}

pub(crate) fn build_dof_map(
    grid: &Arc<Grid>,
    part: &BoundaryPartition,
    bc: BcRequirement,
    field_kind: FieldKind,
) -> Result<DofMap> {
    let n = grid.dim();
    let nc = match field_kind {
        FieldKind::Tensor => n * n,
        FieldKind::Vector => n,
    };
    let nn = grid.node_count();
    let mut constrained = vec![false; nn * nc];

    let tangential = |constrained: &mut Vec<bool>| -> Result<()> {
        if part.tau_is_empty() {
            return Err(Error::InvalidArgument(
                "spec requires a nonempty Gamma_tau".into(),
            ));
        }
        for node in 0..nn {
            let axes = part.tau_normal_axes(grid, node);
            if axes.is_empty() {
                continue;
            }
            for j in tangential_zeroed_cols(n, &axes) {
                for i in 0..n {
                    constrained[node * nc + i * n + j] = true;
                }
            }
        }
        Ok(())
    };
    let normal = |constrained: &mut Vec<bool>| -> Result<()> {
        if part.nu_is_empty() {
            return Err(Error::InvalidArgument(
                "spec requires a nonempty Gamma_nu".into(),
            ));
        }
        for node in 0..nn {
            if !grid.is_boundary(node) {
                continue;
            }
            for k in part.nu_normal_axes(grid, node)? {
                for i in 0..n {
                    constrained[node * nc + i * n + k] = true;
                }
            }
        }
        Ok(())
    };

    match (field_kind, bc) {
        (FieldKind::Tensor, BcRequirement::TangentialOnTau) => tangential(&mut constrained)?,
        (FieldKind::Tensor, BcRequirement::NormalOnNu) => normal(&mut constrained)?,
        (FieldKind::Tensor, BcRequirement::Both) => {
            tangential(&mut constrained)?;
            normal(&mut constrained)?;
        }
        (FieldKind::Vector, BcRequirement::DirichletOnTau) => {
            if part.tau_is_empty() {
                return Err(Error::InvalidArgument(
                    "spec requires a nonempty Gamma_tau".into(),
                ));
            }
            for node in 0..nn {
                if part.is_tau(node) {
                    for c in 0..n {
                        constrained[node * nc + c] = true;
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "boundary condition does not match the field kind".into(),
            ))
        }
    }

    let free = (0..nn * nc).filter(|&k| !constrained[k]).collect();
    Ok(DofMap {
        nc,
        constrained,
        free,
    })
}

// --- assembled quadratic forms ------------------------------------------------

/// The two discrete quadratic forms of one spec on one grid.
pub struct Forms {
    grid: Arc<Grid>,
    pub dof: DofMap,
    rhs: Vec<CompiledPipeline>,
    mass: Vec<CompiledPipeline>,
    node_w: Vec<f64>,
}

pub fn assemble_forms(
    spec: &InequalitySpec,
    grid: &Arc<Grid>,
    part: &BoundaryPartition,
) -> Result<Forms> {
    if spec.rhs.is_empty() {
        return Err(Error::InvalidArgument(
            "the seminorm list must be nonempty".into(),
        ));
    }
    let dof = build_dof_map(grid, part, spec.bc, spec.field_kind)?;
    let rhs = spec
        .rhs
        .iter()
        .map(|p| compile_pipeline(grid, spec.field_kind, p))
        .collect::<Result<Vec<_>>>()?;
    let mass = vec![compile_pipeline(grid, spec.field_kind, &spec.mass)?];
    Ok(Forms {
        grid: grid.clone(),
        dof,
        rhs,
        mass,
        node_w: grid.quad_weights(),
    })
}

impl Forms {
    pub fn free_len(&self) -> usize {
        self.dof.free_len()
    }

    fn weighted(&self, y: &mut [f64], nc: usize) {
        for node in 0..self.grid.node_count() {
            let w = self.node_w[node];
            for c in 0..nc {
                y[node * nc + c] *= w;
            }
        }
    }

    fn apply_pipes(&self, pipes: &[CompiledPipeline], x_free: &[f64]) -> Vec<f64> {
        let full = self.dof.scatter(x_free);
        let mut acc_full = vec![0.0; full.len()];
        for pipe in pipes {
            let mut y = pipe.forward(&full);
            self.weighted(&mut y, pipe.out_comps());
            let back = pipe.adjoint(&y);
            for (a, b) in acc_full.iter_mut().zip(&back) {
                *a += b;
            }
        }
        self.dof.gather(&acc_full)
    }

    fn value_pipes(&self, pipes: &[CompiledPipeline], x_free: &[f64]) -> f64 {
        let full = self.dof.scatter(x_free);
        let mut acc = 0.0;
        for pipe in pipes {
            let y = pipe.forward(&full);
            let nc = pipe.out_comps();
            for node in 0..self.grid.node_count() {
                let s: f64 = y[node * nc..(node + 1) * nc].iter().map(|v| v * v).sum();
                acc += self.node_w[node] * s;
            }
        }
        acc
    }

    pub fn apply_rhs(&self, x_free: &[f64]) -> Vec<f64> {
        self.apply_pipes(&self.rhs, x_free)
    }

    pub fn apply_mass(&self, x_free: &[f64]) -> Vec<f64> {
        self.apply_pipes(&self.mass, x_free)
    }

    pub fn rhs_value(&self, x_free: &[f64]) -> f64 {
        self.value_pipes(&self.rhs, x_free)
    }

    pub fn mass_value(&self, x_free: &[f64]) -> f64 {
        self.value_pipes(&self.mass, x_free)
    }

    /// Restriction of full nodal values to the free components.
    pub fn project(&self, full: &[f64]) -> Vec<f64> {
        self.dof.gather(full)
    }

    /// True when the mass form is the plain (diagonal) L2 norm.
    pub fn mass_is_identity(&self) -> bool {
        self.mass.iter().all(|p| p.steps.is_empty())
    }

    /// Exact diagonal of rhs + shift * mass, by unit-vector probes.
    fn shifted_diagonal(&self, shift: f64) -> Vec<f64> {
        let nf = self.free_len();
        let mut d = vec![0.0; nf];
        let mut e = vec![0.0; nf];
        for k in 0..nf {
            e[k] = 1.0;
            d[k] = self.rhs_value(&e) + shift * self.mass_value(&e);
            e[k] = 0.0;
        }
        d
    }
}

// --- eigenvalue estimation -----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct EstimateOpts {
    /// Relative eigenresidual target.
    pub tol: f64,
    /// lambda_min below kernel_tol times the form scale means the right-hand
    /// side fails to control the field on the discrete space.
    pub kernel_tol: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Shift of the inner solve, relative to the form scale.
    pub shift_factor: f64,
    pub seed: u64,
    pub method: SolveMethod,
}

impl Default for EstimateOpts {
    fn default() -> Self {
        EstimateOpts {
            tol: 1e-9,
            kernel_tol: 1e-8,
            max_outer: 600,
            cg_tol: 1e-10,
            cg_max_iter: 400_000,
            shift_factor: 1e-4,
            seed: 42,
            method: SolveMethod::Auto,
        }
    }
}

/// Dense solves stay affordable up to roughly this many free dofs.
const DENSE_DOF_LIMIT: usize = 1300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateVerdict {
    Positive,
    FailsOnDiscreteSpace,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    pub spec: String,
    pub resolution: usize,
    pub lambda_min: f64,
    /// lambda_min^{-1/2}; absent when the kernel test fires.
    pub constant: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub verdict: EstimateVerdict,
}

fn form_scale(forms: &Forms, seed: u64) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..forms.free_len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let m = forms.mass_value(&x);
    if m <= 0.0 {
        return 0.0;
    }
    forms.rhs_value(&x) / m
}

struct EigenResult {
    lambda: f64,
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn eigen_residual(forms: &Forms, x: &[f64], lambda: f64, shift: f64) -> f64 {
    let ax = forms.apply_rhs(x);
    let bx = forms.apply_mass(x);
    let mut r = ax.clone();
    for (ri, bi) in r.iter_mut().zip(&bx) {
        *ri -= lambda * bi;
    }
    let denom = norm2(&ax) + (lambda.abs() + shift) * norm2(&bx) + f64::MIN_POSITIVE;
    norm2(&r) / denom
}

fn smallest_eigen_dense(forms: &Forms, scale: f64) -> Result<EigenResult> {
    let nf = forms.free_len();
    let a = dense_from_apply(nf, |x: &[f64]| forms.apply_rhs(x));
    let b = dense_from_apply(nf, |x: &[f64]| forms.apply_mass(x));
    let (lambda, v) = dense_smallest_generalized(&a, &b)?;
    let x = v.as_slice().to_vec();
    let residual = eigen_residual(forms, &x, lambda, 1e-4 * scale.max(1.0));
    Ok(EigenResult {
        lambda,
        vector: x,
        iterations: 1,
        residual,
    })
}

fn smallest_eigen_iterative(
    forms: &Forms,
    opts: &EstimateOpts,
    scale: f64,
) -> Result<EigenResult> {
    let nf = forms.free_len();
    let shift = opts.shift_factor * scale.max(f64::MIN_POSITIVE);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let x0: Vec<f64> = (0..nf).map(|_| rng.random_range(-1.0..1.0)).collect();
    // a non-diagonal mass form (gradient graph norm on the polar grid) makes
    // the inner operator badly scaled in the Euclidean metric; rescale by
    // its exact diagonal in that case
    let diag = if forms.mass_is_identity() {
        None
    } else {
        Some(forms.shifted_diagonal(shift))
    };
    let pair = smallest_eigen_shifted_inverse(
        &|v| forms.apply_rhs(v),
        &|v| forms.apply_mass(v),
        x0,
        &EigenIterOpts {
            tol: opts.tol,
            max_outer: opts.max_outer,
            cg_tol: opts.cg_tol,
            cg_max_iter: opts.cg_max_iter,
            shift,
            diag,
            lambda_scale: scale,
        },
    )?;
    Ok(EigenResult {
        lambda: pair.lambda,
        vector: pair.vector,
        iterations: pair.iterations,
        residual: pair.residual,
    })
}

/// Smallest-eigenvalue estimate of a spec on a grid, with verdict.
pub fn estimate_constant(
    spec: &InequalitySpec,
    grid: &Arc<Grid>,
    part: &BoundaryPartition,
    opts: &EstimateOpts,
) -> Result<ConstantEstimate> {
    let forms = assemble_forms(spec, grid, part)?;
    estimate_constant_with_forms(spec, grid, &forms, opts)
}

/// As [`estimate_constant`] but reusing assembled forms.
pub fn estimate_constant_with_forms(
    spec: &InequalitySpec,
    grid: &Arc<Grid>,
    forms: &Forms,
    opts: &EstimateOpts,
) -> Result<ConstantEstimate> {
    if forms.free_len() == 0 {
        return Err(Error::InvalidArgument(
            "boundary conditions eliminate every degree of freedom".into(),
        ));
    }
    let scale = form_scale(forms, opts.seed);
    if scale == 0.0 {
        // the right-hand side annihilates a random field: degenerate spec
        return Ok(ConstantEstimate {
            spec: spec.name.clone(),
            resolution: grid.shape()[0],
            lambda_min: 0.0,
            constant: None,
            iterations: 0,
            residual: 0.0,
            verdict: EstimateVerdict::FailsOnDiscreteSpace,
        });
    }
    let use_dense = match opts.method {
        SolveMethod::Dense => true,
        SolveMethod::Iterative => false,
        SolveMethod::Auto => forms.free_len() <= DENSE_DOF_LIMIT,
    };
    let result = if use_dense {
        smallest_eigen_dense(forms, scale)?
    } else {
        smallest_eigen_iterative(forms, opts, scale)?
    };
    let fails = result.lambda < opts.kernel_tol * scale;
    Ok(ConstantEstimate {
        spec: spec.name.clone(),
        resolution: grid.shape()[0],
        lambda_min: result.lambda,
        constant: if fails {
            None
        } else {
            Some(result.lambda.powf(-0.5))
        },
        iterations: result.iterations,
        residual: result.residual,
        verdict: if fails {
            EstimateVerdict::FailsOnDiscreteSpace
        } else {
            EstimateVerdict::Positive
        },
    })
}

/// Dense-oracle eigenvalue of a spec on a grid (for cross-checks).
pub fn oracle_lambda_min(
    spec: &InequalitySpec,
    grid: &Arc<Grid>,
    part: &BoundaryPartition,
) -> Result<f64> {
    let forms = assemble_forms(spec, grid, part)?;
    let scale = form_scale(&forms, 0);
    Ok(smallest_eigen_dense(&forms, scale)?.lambda)
}

// --- refinement studies ---------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyVerdict {
    Stable,
    Diverging,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub spec: String,
    pub estimates: Vec<ConstantEstimate>,
    pub verdict: StudyVerdict,
    /// Largest relative drift of the constant between consecutive levels.
    pub max_drift: f64,
}

/// Default grid/partition pair: a box with the Gamma face at x = 0 (the
/// Gamma_nu face for normal-condition specs, the Gamma_tau face otherwise),
/// or the half-disk with the diameter as Gamma_tau.
pub fn standard_setup(
    kind: GridKind,
    n: usize,
    resolution: usize,
    bc: BcRequirement,
) -> Result<(Arc<Grid>, BoundaryPartition)> {
    match kind {
        GridKind::Box => {
            let grid = Arc::new(Grid::unit_box(n, resolution)?);
            let tau_faces: Vec<Face> = match bc {
                // one-face Gamma_nu: every other face is tangential
                BcRequirement::NormalOnNu => {
                    let mut faces = vec![Face::high(0)];
                    for a in 1..n {
                        faces.push(Face::low(a));
                        faces.push(Face::high(a));
                    }
                    faces
                }
                // one-face Gamma_tau
                _ => vec![Face::low(0)],
            };
            let part = BoundaryPartition::box_split(&grid, &tau_faces)?;
            Ok((grid, part))
        }
        GridKind::HalfDisk => {
            let grid = Arc::new(Grid::half_disk(resolution, resolution)?);
            let part = BoundaryPartition::half_disk_diameter_tau(&grid)?;
            Ok((grid, part))
        }
    }
}

/// Constant estimates across a resolution ladder. `stable` means every level
/// is positive and consecutive constants drift by less than 10 percent;
/// otherwise the study reports `diverging`.
pub fn refinement_study(
    spec: &InequalitySpec,
    setups: &[(Arc<Grid>, BoundaryPartition)],
    opts: &EstimateOpts,
) -> Result<RefinementReport> {
    if setups.len() < 2 {
        return Err(Error::InvalidArgument(
            "a refinement study needs at least two resolutions".into(),
        ));
    }
    let mut estimates = Vec::new();
    for (grid, part) in setups {
        estimates.push(estimate_constant(spec, grid, part, opts)?);
    }
    let mut max_drift: f64 = 0.0;
    let mut diverging = false;
    for pair in estimates.windows(2) {
        match (pair[0].constant, pair[1].constant) {
            (Some(c0), Some(c1)) => {
                let drift = (c1 - c0).abs() / c0;
                max_drift = max_drift.max(drift);
                if drift >= 0.10 {
                    diverging = true;
                }
            }
            _ => {
                diverging = true;
                max_drift = f64::INFINITY;
            }
        }
    }
    Ok(RefinementReport {
        spec: spec.name.clone(),
        estimates,
        verdict: if diverging {
            StudyVerdict::Diverging
        } else {
            StudyVerdict::Stable
        },
        max_drift,
    })
}
