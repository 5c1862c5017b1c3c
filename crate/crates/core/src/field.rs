//! Nodal fields over a [`Grid`]: scalars, n-vectors, n x n tensors and the
//! two-dimensional row-curl (one scalar curl per tensor row). Values are
//! stored node-major in lexicographic node order, which is also the layout
//! of the flat CSV / binary serialization used by the CLI cache.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use crate::algebra::Matrix;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridKind};

/// Common access to the grid and the flat value storage of a nodal field.
pub trait Field {
    /// Components per node.
    fn comps(&self) -> usize;
    fn grid(&self) -> &Arc<Grid>;
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];

    fn node_count(&self) -> usize {
        self.grid().node_count()
    }

    /// Euclidean norm of the per-node value block.
    fn node_norm(&self, node: usize) -> f64 {
        let nc = self.comps();
        self.values()[node * nc..(node + 1) * nc]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    fn max_node_norm(&self) -> f64 {
        (0..self.node_count())
            .map(|k| self.node_norm(k))
            .fold(0.0, f64::max)
    }
}

macro_rules! field_type {
    ($name:ident, $doc:expr) => {
        #[doc = $doc]
        #[derive(Debug, Clone)]
        pub struct $name {
            grid: Arc<Grid>,
            comps: usize,
            values: Vec<f64>,
        }

        impl Field for $name {
            fn comps(&self) -> usize {
                self.comps
            }
            fn grid(&self) -> &Arc<Grid> {
                &self.grid
            }
            fn values(&self) -> &[f64] {
                &self.values
            }
            fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }
        }
    };
}

field_type!(ScalarField, "Scalar values, one per node.");
field_type!(VectorField, "n-vector values, one per node.");
field_type!(TensorField, "n x n matrix values, one per node, row-major.");
field_type!(
    RowCurlField,
    "Two-dimensional row-curl values: one scalar per tensor row, so a 2-vector per node."
);

impl ScalarField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let nn = grid.node_count();
        ScalarField {
            grid,
            comps: 1,
            values: vec![0.0; nn],
        }
    }

    /// Sample a function of the physical (Cartesian) coordinates.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut s = ScalarField::zeros(grid);
        for node in 0..s.node_count() {
            let x = s.grid.node_coord(node);
            s.values[node] = f(&x);
        }
        s
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn set(&mut self, node: usize, v: f64) {
        self.values[node] = v;
    }
}

impl VectorField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let nn = grid.node_count();
        let n = grid.dim();
        VectorField {
            grid,
            comps: n,
            values: vec![0.0; nn * n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let mut v = VectorField::zeros(grid);
        let n = v.comps;
        for node in 0..v.node_count() {
            let x = v.grid.node_coord(node);
            let val = f(&x);
            assert_eq!(val.len(), n);
            v.values[node * n..(node + 1) * n].copy_from_slice(&val);
        }
        v
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.comps..(node + 1) * self.comps]
    }

    pub fn set(&mut self, node: usize, v: &[f64]) {
        self.values[node * self.comps..(node + 1) * self.comps].copy_from_slice(v);
    }
}

impl TensorField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let nn = grid.node_count();
        let n = grid.dim();
        TensorField {
            grid,
            comps: n * n,
            values: vec![0.0; nn * n * n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Matrix) -> Self {
        let mut t = TensorField::zeros(grid);
        let n = t.grid.dim();
        for node in 0..t.node_count() {
            let x = t.grid.node_coord(node);
            let m = f(&x);
            assert_eq!(m.dim(), n);
            t.values[node * n * n..(node + 1) * n * n].copy_from_slice(m.as_slice());
        }
        t
    }

    /// Matrix value at a node.
    pub fn value(&self, node: usize) -> Matrix {
        let n = self.grid.dim();
        Matrix::from_flat(n, &self.values[node * n * n..(node + 1) * n * n])
    }

    pub fn set(&mut self, node: usize, m: &Matrix) {
        let n = self.grid.dim();
        self.values[node * n * n..(node + 1) * n * n].copy_from_slice(m.as_slice());
    }

    pub fn entry(&self, node: usize, i: usize, j: usize) -> f64 {
        let n = self.grid.dim();
        self.values[node * n * n + i * n + j]
    }

    pub fn set_entry(&mut self, node: usize, i: usize, j: usize, v: f64) {
        let n = self.grid.dim();
        self.values[node * n * n + i * n + j] = v;
    }
}

impl RowCurlField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        assert_eq!(grid.dim(), 2, "row-curl fields exist only for n = 2");
        let nn = grid.node_count();
        RowCurlField {
            grid,
            comps: 2,
            values: vec![0.0; nn * 2],
        }
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * 2..(node + 1) * 2]
    }
}

pub(crate) fn same_grid<A: Field, B: Field>(a: &A, b: &B) -> Result<()> {
    if Arc::ptr_eq(a.grid(), b.grid()) || a.grid().as_ref() == b.grid().as_ref() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

// --- serialization -------------------------------------------------------

fn kind_tag(comps: usize, n: usize) -> &'static str {
    if comps == 1 {
        "scalar"
    } else if comps == n {
        "vector"
    } else if comps == n * n {
        "tensor"
    } else {
        "rowcurl"
    }
}

fn grid_header(grid: &Grid) -> String {
    let domain = match grid.kind() {
        GridKind::Box => "box",
        GridKind::HalfDisk => "half-disk",
    };
    let shape: Vec<String> = grid.shape().iter().map(|m| m.to_string()).collect();
    format!("{},{},{}", domain, grid.dim(), shape.join(","))
}

fn parse_grid_header(line: &str) -> Result<Grid> {
    let parts: Vec<&str> = line.trim().split(',').collect();
    let bad = || Error::InvalidArgument(format!("bad field header: {line}"));
    if parts.len() < 3 {
        return Err(bad());
    }
    let n: usize = parts[1].parse().map_err(|_| bad())?;
    let shape: Vec<usize> = parts[2..]
        .iter()
        .map(|s| s.parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts[0] {
        "box" => Grid::unit_box(n, shape[0]),
        "half-disk" => Grid::half_disk(shape[0], shape[1]),
        _ => Err(bad()),
    }
}

/// Writes `kind,domain,n,shape...` then one CSV row of components per node.
pub fn write_csv<F: Field>(field: &F, mut out: impl Write) -> std::io::Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "{},{}",
        kind_tag(field.comps(), g.dim()),
        grid_header(g)
    )?;
    let nc = field.comps();
    for node in 0..field.node_count() {
        let row: Vec<String> = field.values()[node * nc..(node + 1) * nc]
            .iter()
            .map(|v| format!("{v:?}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn read_csv_raw(input: impl Read) -> Result<(String, Grid, Vec<f64>)> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (tag, rest) = header
        .trim()
        .split_once(',')
        .ok_or_else(|| Error::InvalidArgument("empty field file".into()))?;
    let grid = parse_grid_header(rest)?;
    let mut values = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        for item in line.split(',') {
            values.push(
                item.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?,
            );
        }
    }
    Ok((tag.to_string(), grid, values))
}

macro_rules! impl_read_csv {
    ($fn_name:ident, $ty:ident, $tag:expr, $comps:expr) => {
        pub fn $fn_name(input: impl Read) -> Result<$ty> {
            let (tag, grid, values) = read_csv_raw(input)?;
            if tag != $tag {
                return Err(Error::InvalidArgument(format!(
                    "expected a {} field, found {tag}",
                    $tag
                )));
            }
            let grid = Arc::new(grid);
            let comps: usize = $comps(&grid);
            if values.len() != grid.node_count() * comps {
                return Err(Error::InvalidArgument("value count mismatch".into()));
            }
            Ok($ty {
                grid,
                comps,
                values,
            })
        }
    };
}

impl_read_csv!(read_scalar_csv, ScalarField, "scalar", |_g: &Arc<Grid>| 1);
impl_read_csv!(read_vector_csv, VectorField, "vector", |g: &Arc<Grid>| g
    .dim());
impl_read_csv!(read_tensor_csv, TensorField, "tensor", |g: &Arc<Grid>| g
    .dim()
    * g.dim());

/// Binary layout: the CSV header line, a newline, then node-major f64
/// little-endian values.
pub fn write_binary<F: Field>(field: &F, mut out: impl Write) -> std::io::Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "{},{}",
        kind_tag(field.comps(), g.dim()),
        grid_header(g)
    )?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor_binary(input: impl Read) -> Result<TensorField> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (tag, rest) = header
        .trim()
        .split_once(',')
        .ok_or_else(|| Error::InvalidArgument("empty field file".into()))?;
    if tag != "tensor" {
        return Err(Error::InvalidArgument(format!(
            "expected a tensor field, found {tag}"
        )));
    }
    let grid = Arc::new(parse_grid_header(rest)?);
    let n = grid.dim();
    let count = grid.node_count() * n * n;
    let mut values = vec![0.0; count];
    let mut buf = [0u8; 8];
    for v in values.iter_mut() {
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(TensorField {
        grid,
        comps: n * n,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_roundtrip_tensor() {
        let grid = Arc::new(Grid::unit_box(2, 3).unwrap());
        let t = TensorField::from_fn(grid, |x| {
            Matrix::from_rows(&[&[x[0], x[1]], &[x[0] * x[1], 1.0]])
        });
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let back = read_tensor_csv(buf.as_slice()).unwrap();
        assert_eq!(t.values(), back.values());
        assert_eq!(t.grid().as_ref(), back.grid().as_ref());
    }

    #[test]
    fn binary_roundtrip_tensor() {
        let grid = Arc::new(Grid::unit_box(3, 3).unwrap());
        let t = TensorField::from_fn(grid, |x| {
            let mut m = Matrix::zeros(3);
            m[(0, 1)] = x[0] - 0.3;
            m[(2, 2)] = x[2] * x[1];
            m
        });
        let mut buf = Vec::new();
        write_binary(&t, &mut buf).unwrap();
        let back = read_tensor_binary(buf.as_slice()).unwrap();
        assert_eq!(t.values(), back.values());
    }

    proptest! {
        // float values survive the text round trip bit-exactly thanks to
        // the shortest-roundtrip Debug formatting
        #[test]
        fn csv_roundtrip_scalar_bitexact(vals in proptest::collection::vec(-1e6..1e6f64, 9)) {
            let grid = Arc::new(Grid::unit_box(2, 3).unwrap());
            let mut s = ScalarField::zeros(grid);
            s.values_mut().copy_from_slice(&vals);
            let mut buf = Vec::new();
            write_csv(&s, &mut buf).unwrap();
            let back = read_scalar_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(s.values(), back.values());
        }
    }
}
