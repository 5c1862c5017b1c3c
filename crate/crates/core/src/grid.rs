//! Structured discretization domains: an axis-aligned unit box in 2 or 3
//! dimensions and the polar half-disk { |z| <= 1, x >= 0 }, together with the
//! boundary partition into a tangential part and a normal part.

use crate::error::{Error, Result};

pub const MIN_RESOLUTION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Unit box [0,1]^n with a uniform nodal grid per axis.
    Box,
    /// Polar tensor grid on the half-disk: r in (0, 1], t in [-pi/2, pi/2].
    HalfDisk,
}

/// One axis-aligned boundary face of a box grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub high: bool,
}

impl Face {
    pub fn low(axis: usize) -> Self {
        Face { axis, high: false }
    }
    pub fn high(axis: usize) -> Self {
        Face { axis, high: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    shape: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    /// Uniform nodal grid on the unit box with `resolution` nodes per axis.
    pub fn unit_box(n: usize, resolution: usize) -> Result<Grid> {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension {
                n,
                reason: "box grids support n = 2 or 3".into(),
            });
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall {
                min: MIN_RESOLUTION,
                got: resolution,
            });
        }
        let h = 1.0 / (resolution - 1) as f64;
        Ok(Grid {
            kind: GridKind::Box,
            n,
            shape: vec![resolution; n],
            spacing: vec![h; n],
        })
    }

    /// Polar tensor grid on the half-disk; axis 0 is the radius with nodes
    /// r_i = (i+1) dr up to r = 1 (the singular center is excluded), axis 1
    /// is the angle with nodes from -pi/2 to pi/2 inclusive.
    pub fn half_disk(res_r: usize, res_t: usize) -> Result<Grid> {
        if res_r < MIN_RESOLUTION || res_t < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall {
                min: MIN_RESOLUTION,
                got: res_r.min(res_t),
            });
        }
        let dr = 1.0 / res_r as f64;
        let dt = std::f64::consts::PI / (res_t - 1) as f64;
        Ok(Grid {
            kind: GridKind::HalfDisk,
            n: 2,
            shape: vec![res_r, res_t],
            spacing: vec![dr, dt],
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Spatial dimension of the embedded fields.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Per-axis step (box: node spacing; half-disk: dr, dt).
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Stride of each axis in the lexicographic node numbering (axis 0 fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.shape.len()];
        for a in 1..self.shape.len() {
            s[a] = s[a - 1] * self.shape[a - 1];
        }
        s
    }

    pub fn node_multi_index(&self, node: usize) -> Vec<usize> {
        let mut rem = node;
        self.shape
            .iter()
            .map(|&m| {
                let i = rem % m;
                rem /= m;
                i
            })
            .collect()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        let strides = self.strides();
        multi.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    /// Grid coordinates of a node: box nodes in [0,1]^n, half-disk nodes as
    /// (r, t) in polar form.
    pub fn node_param(&self, node: usize) -> Vec<f64> {
        let mi = self.node_multi_index(node);
        match self.kind {
            GridKind::Box => mi
                .iter()
                .zip(&self.spacing)
                .map(|(&i, &h)| i as f64 * h)
                .collect(),
            GridKind::HalfDisk => {
                let r = (mi[0] + 1) as f64 * self.spacing[0];
                let t = -std::f64::consts::FRAC_PI_2 + mi[1] as f64 * self.spacing[1];
                vec![r, t]
            }
        }
    }

    /// Physical (Cartesian) position of a node.
    pub fn node_coord(&self, node: usize) -> Vec<f64> {
        match self.kind {
            GridKind::Box => self.node_param(node),
            GridKind::HalfDisk => {
                let p = self.node_param(node);
                vec![p[0] * p[1].cos(), p[0] * p[1].sin()]
            }
        }
    }

    /// Quadrature weight of a node (trapezoidal; the half-disk includes the
    /// polar Jacobian r and a correction for the uncovered center sliver).
    pub fn quad_weights(&self) -> Vec<f64> {
        let nn = self.node_count();
        let mut w = vec![0.0; nn];
        match self.kind {
            GridKind::Box => {
                for node in 0..nn {
                    let mi = self.node_multi_index(node);
                    let mut wk = 1.0;
                    for (a, &i) in mi.iter().enumerate() {
                        let m = self.shape[a];
                        let h = self.spacing[a];
                        wk *= if i == 0 || i == m - 1 { 0.5 * h } else { h };
                    }
                    w[node] = wk;
                }
            }
            GridKind::HalfDisk => {
                let (mr, mt) = (self.shape[0], self.shape[1]);
                let (dr, dt) = (self.spacing[0], self.spacing[1]);
                for node in 0..nn {
                    let mi = self.node_multi_index(node);
                    let (ir, it) = (mi[0], mi[1]);
                    let r = (ir + 1) as f64 * dr;
                    let wr = if ir == mr - 1 { 0.5 * dr } else if ir == 0 { 0.5 * dr } else { dr };
                    // The annulus [0, dr] is not covered by the trapezoid
                    // rule; lump its r-weighted measure onto the first ring.
                    let sliver = if ir == 0 { 0.5 * dr * dr } else { 0.0 };
                    let wt = if it == 0 || it == mt - 1 { 0.5 * dt } else { dt };
                    w[node] = (wr * r + sliver) * wt;
                }
            }
        }
        w
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        match self.kind {
            GridKind::Box => {
                let mi = self.node_multi_index(node);
                mi.iter()
                    .zip(&self.shape)
                    .any(|(&i, &m)| i == 0 || i == m - 1)
            }
            GridKind::HalfDisk => {
                let mi = self.node_multi_index(node);
                // boundary: outer arc (r = 1) or the diameter rows (t = +-pi/2)
                mi[0] == self.shape[0] - 1 || mi[1] == 0 || mi[1] == self.shape[1] - 1
            }
        }
    }

    /// Box faces through a node (empty for interior nodes).
    pub fn faces_at(&self, node: usize) -> Vec<Face> {
        assert_eq!(self.kind, GridKind::Box);
        let mi = self.node_multi_index(node);
        let mut faces = Vec::new();
        for (a, &i) in mi.iter().enumerate() {
            if i == 0 {
                faces.push(Face::low(a));
            }
            if i == self.shape[a] - 1 {
                faces.push(Face::high(a));
            }
        }
        faces
    }

    /// True if the node lies on the half-disk diameter segment { x = 0 }.
    pub fn on_half_disk_diameter(&self, node: usize) -> bool {
        assert_eq!(self.kind, GridKind::HalfDisk);
        let mi = self.node_multi_index(node);
        mi[1] == 0 || mi[1] == self.shape[1] - 1
    }

    /// Outward unit normals of the boundary pieces meeting at a node.
    pub fn normals_at(&self, node: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        match self.kind {
            GridKind::Box => {
                for f in self.faces_at(node) {
                    let mut nv = vec![0.0; self.n];
                    nv[f.axis] = if f.high { 1.0 } else { -1.0 };
                    out.push(nv);
                }
            }
            GridKind::HalfDisk => {
                if self.on_half_disk_diameter(node) {
                    out.push(vec![-1.0, 0.0]);
                }
                let mi = self.node_multi_index(node);
                if mi[0] == self.shape[0] - 1 {
                    let c = self.node_coord(node);
                    let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
                    out.push(vec![c[0] / r, c[1] / r]);
                }
            }
        }
        out
    }
}

/// Node masks splitting the boundary into the tangential part Gamma_tau and
/// the normal part Gamma_nu. The masks are disjoint and cover all boundary
/// nodes; nodes on the interface belong to the tangential side.
#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    tau: Vec<bool>,
    nu: Vec<bool>,
    tau_faces: Vec<Face>,
}

impl BoundaryPartition {
    /// Box partition: `tau_faces` make up Gamma_tau, every other boundary
    /// node belongs to Gamma_nu.
    pub fn box_split(grid: &Grid, tau_faces: &[Face]) -> Result<BoundaryPartition> {
        if grid.kind() != GridKind::Box {
            return Err(Error::InvalidArgument(
                "box_split requires a box grid".into(),
            ));
        }
        let nn = grid.node_count();
        let mut tau = vec![false; nn];
        let mut nu = vec![false; nn];
        for node in 0..nn {
            if !grid.is_boundary(node) {
                continue;
            }
            let on_tau = grid
                .faces_at(node)
                .iter()
                .any(|f| tau_faces.contains(f));
            tau[node] = on_tau;
            nu[node] = !on_tau;
        }
        Ok(BoundaryPartition {
            tau,
            nu,
            tau_faces: tau_faces.to_vec(),
        })
    }

    /// The half-disk configuration with the diameter segment { x = 0 } as
    /// Gamma_tau and the outer arc as Gamma_nu.
    pub fn half_disk_diameter_tau(grid: &Grid) -> Result<BoundaryPartition> {
        if grid.kind() != GridKind::HalfDisk {
            return Err(Error::InvalidArgument(
                "half_disk_diameter_tau requires a half-disk grid".into(),
            ));
        }
        let nn = grid.node_count();
        let mut tau = vec![false; nn];
        let mut nu = vec![false; nn];
        for node in 0..nn {
            if !grid.is_boundary(node) {
                continue;
            }
            if grid.on_half_disk_diameter(node) {
                tau[node] = true;
            } else {
                nu[node] = true;
            }
        }
        Ok(BoundaryPartition {
            tau,
            nu,
            tau_faces: Vec::new(),
        })
    }

    pub fn is_tau(&self, node: usize) -> bool {
        self.tau[node]
    }

    pub fn is_nu(&self, node: usize) -> bool {
        self.nu[node]
    }

    pub fn tau_is_empty(&self) -> bool {
        !self.tau.iter().any(|&b| b)
    }

    pub fn nu_is_empty(&self) -> bool {
        !self.nu.iter().any(|&b| b)
    }

    /// Faces of the box assigned to Gamma_tau.
    pub fn tau_faces(&self) -> &[Face] {
        &self.tau_faces
    }

    /// Normal axes of the tau faces through a tau node.
    pub fn tau_normal_axes(&self, grid: &Grid, node: usize) -> Vec<usize> {
        match grid.kind() {
            GridKind::Box => grid
                .faces_at(node)
                .iter()
                .filter(|f| self.tau_faces.contains(f))
                .map(|f| f.axis)
                .collect(),
            GridKind::HalfDisk => {
                if self.tau[node] {
                    vec![0]
                } else {
                    vec![]
                }
            }
        }
    }

    /// Normal axes of the nu faces through a nu node (box grids only; the
    /// half-disk arc normal is not axis-aligned).
    pub fn nu_normal_axes(&self, grid: &Grid, node: usize) -> Result<Vec<usize>> {
        match grid.kind() {
            GridKind::Box => Ok(grid
                .faces_at(node)
                .iter()
                .filter(|f| !self.tau_faces.contains(f))
                .map(|f| f.axis)
                .collect()),
            GridKind::HalfDisk => Err(Error::InvalidArgument(
                "normal masking on the half-disk arc is not axis-aligned".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn box_rejects_small_resolution() {
        assert!(Grid::unit_box(3, 2).is_err());
        assert!(Grid::unit_box(3, 3).is_ok());
    }

    #[test]
    fn box_weights_sum_to_volume() {
        for n in [2usize, 3] {
            let g = Grid::unit_box(n, 7).unwrap();
            let total: f64 = g.quad_weights().iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn half_disk_weights_sum_to_half_disk_area() {
        let g = Grid::half_disk(40, 41).unwrap();
        let total: f64 = g.quad_weights().iter().sum();
        assert_relative_eq!(total, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn box_partition_disjoint_and_covering() {
        let g = Grid::unit_box(3, 5).unwrap();
        let p = BoundaryPartition::box_split(&g, &[Face::low(0)]).unwrap();
        for node in 0..g.node_count() {
            if g.is_boundary(node) {
                assert!(p.is_tau(node) ^ p.is_nu(node));
            } else {
                assert!(!p.is_tau(node) && !p.is_nu(node));
            }
        }
        // the x=0 face is tau, including its edges
        let mi = vec![0usize, 2, 2];
        assert!(p.is_tau(g.node_index(&mi)));
        let corner = vec![0usize, 0, 0];
        assert!(p.is_tau(g.node_index(&corner)));
    }

    #[test]
    fn half_disk_diameter_nodes() {
        let g = Grid::half_disk(5, 7).unwrap();
        let p = BoundaryPartition::half_disk_diameter_tau(&g).unwrap();
        let mut tau_count = 0;
        for node in 0..g.node_count() {
            if p.is_tau(node) {
                tau_count += 1;
                let c = g.node_coord(node);
                assert!(c[0].abs() < 1e-12, "diameter nodes sit at x = 0");
            }
        }
        assert_eq!(tau_count, 2 * 5);
    }

    #[test]
    fn node_coord_roundtrip() {
        let g = Grid::unit_box(3, 4).unwrap();
        for node in 0..g.node_count() {
            let mi = g.node_multi_index(node);
            assert_eq!(g.node_index(&mi), node);
        }
    }
}
