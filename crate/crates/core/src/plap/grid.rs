use std::collections::VecDeque;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rearrange::SimpleFunction;

/// A uniform grid on the unit interval or the unit square.
///
/// Values live on the `(cells + 1)^dimension` nodes. A node is an unknown
/// when it is off the boundary and inside the mask; every other node carries
/// `u = 0`. Cell `c` has its lower corner at node `c` and gradients are
/// forward differences along each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dimension: usize,
    cells: usize,
    mask: Vec<bool>,
    unknown_of: Vec<Option<usize>>,
    nodes_of: Vec<usize>,
    active_cells: Vec<usize>,
}

impl Grid {
    pub fn interval(cells: usize) -> Result<Self> {
        Grid::with_mask(1, cells, |_| true)
    }

    pub fn square(cells: usize) -> Result<Self> {
        Grid::with_mask(2, cells, |_| true)
    }

    /// Unit square restricted to the disk inscribed in it.
    pub fn disk(cells: usize) -> Result<Self> {
        Grid::with_mask(2, cells, |x| {
            let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
            dx * dx + dy * dy < 0.25
        })
    }

    /// Grid whose interior is the set of non-boundary nodes `x` with `inside(x)`.
    pub fn with_mask<F: Fn([f64; 2]) -> bool>(dimension: usize, cells: usize, inside: F) -> Result<Self> {
        if !(dimension == 1 || dimension == 2) {
            return Err(Error::Domain(format!("dimension {dimension} is not 1 or 2")));
        }
        if cells < 2 {
            return Err(Error::Domain(format!("need at least 2 cells per axis, got {cells}")));
        }
        let side = cells + 1;
        let n_nodes = side.pow(dimension as u32);
        let h = 1.0 / cells as f64;
        let mask = (0..n_nodes)
            .map(|k| {
                let (i, j) = (k % side, k / side);
                inside([i as f64 * h, j as f64 * h])
            })
            .collect();
        Grid::from_mask(dimension, cells, mask)
    }

    pub fn from_mask(dimension: usize, cells: usize, mask: Vec<bool>) -> Result<Self> {
        let side = cells + 1;
        if mask.len() != side.pow(dimension as u32) {
            return Err(Error::Input(format!("mask has {} entries, expected {}", mask.len(), side.pow(dimension as u32))));
        }
        let on_boundary = |k: usize| {
            let i = k % side;
            let j = k / side;
            i == 0 || i == cells || (dimension == 2 && (j == 0 || j == cells))
        };
        let mut unknown_of = vec![None; mask.len()];
        let mut nodes_of = Vec::new();
        for k in 0..mask.len() {
            if mask[k] && !on_boundary(k) {
                unknown_of[k] = Some(nodes_of.len());
                nodes_of.push(k);
            }
        }
        if nodes_of.is_empty() {
            return Err(Error::Input("grid has no interior nodes".into()));
        }
        let mut grid = Grid {
            dimension,
            cells,
            mask,
            unknown_of,
            nodes_of,
            active_cells: Vec::new(),
        };
        grid.check_connected()?;
        let n_cells = cells.pow(dimension as u32);
        grid.active_cells = (0..n_cells)
            .filter(|&c| grid.cell_stencil(c).iter().flatten().any(|&k| grid.unknown_of[k].is_some()))
            .collect();
        Ok(grid)
    }

    fn check_connected(&self) -> Result<()> {
        let side = self.cells + 1;
        let mut seen = vec![false; self.unknown_of.len()];
        let mut queue = VecDeque::from([self.nodes_of[0]]);
        seen[self.nodes_of[0]] = true;
        let mut count = 0;
        while let Some(k) = queue.pop_front() {
            count += 1;
            let mut nbrs = vec![k - 1, k + 1];
            if self.dimension == 2 {
                nbrs.extend([k - side, k + side]);
            }
            for m in nbrs {
                if self.unknown_of[m].is_some() && !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        if count == self.nodes_of.len() {
            Ok(())
        } else {
            Err(Error::Input("masked interior is not connected".into()))
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Physical measure of one cell, `h^dimension`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dimension as i32)
    }

    pub fn num_nodes(&self) -> usize {
        self.mask.len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.nodes_of.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn unknown_of(&self, node: usize) -> Option<usize> {
        self.unknown_of[node]
    }

    /// Node index of every unknown, in order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.nodes_of
    }

    /// Cells whose stencil touches an unknown.
    pub fn active_cells(&self) -> &[usize] {
        &self.active_cells
    }

    pub fn node_position(&self, node: usize) -> [f64; 2] {
        let side = self.cells + 1;
        let h = self.h();
        [(node % side) as f64 * h, (node / side) as f64 * h]
    }

    /// `[base, +x, +y]` nodes of cell `c` (the last is `None` in 1-D).
    pub fn cell_stencil(&self, c: usize) -> [Option<usize>; 3] {
        let side = self.cells + 1;
        if self.dimension == 1 {
            [Some(c), Some(c + 1), None]
        } else {
            let (i, j) = (c % self.cells, c / self.cells);
            let base = j * side + i;
            [Some(base), Some(base + 1), Some(base + side)]
        }
    }

    /// Largest index distance between two unknowns sharing a cell.
    pub fn bandwidth(&self) -> usize {
        let mut w = 0;
        for &c in &self.active_cells {
            let ids: Vec<usize> = self.cell_stencil(c).iter().flatten().filter_map(|&k| self.unknown_of[k]).collect();
            for &a in &ids {
                for &b in &ids {
                    w = w.max(a.abs_diff(b));
                }
            }
        }
        w
    }

    /// Forward-difference gradient of nodal values on cell `c`.
    pub fn cell_gradient(&self, values: &[f64], c: usize) -> [f64; 2] {
        let st = self.cell_stencil(c);
        let inv_h = self.cells as f64;
        let base = values[st[0].expect("base node")];
        let gx = (values[st[1].expect("x node")] - base) * inv_h;
        let gy = st[2].map_or(0.0, |k| (values[k] - base) * inv_h);
        [gx, gy]
    }

    fn mask_runs(&self) -> Vec<(bool, usize)> {
        let mut runs: Vec<(bool, usize)> = Vec::new();
        for &m in &self.mask {
            match runs.last_mut() {
                Some((v, n)) if *v == m => *n += 1,
                _ => runs.push((m, 1)),
            }
        }
        runs
    }
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    dimension: usize,
    cells: usize,
    h: f64,
    /// `(value, run length)` pairs over the nodes in lexicographic order.
    mask_rle: Vec<(bool, usize)>,
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridHeader {
            dimension: self.dimension,
            cells: self.cells,
            h: self.h(),
            mask_rle: self.mask_runs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let hdr = GridHeader::deserialize(d)?;
        let mask: Vec<bool> = hdr.mask_rle.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n)).collect();
        Grid::from_mask(hdr.dimension, hdr.cells, mask).map_err(serde::de::Error::custom)
    }
}

/// Nodal values on a grid, zero off the unknowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.num_nodes()],
        }
    }

    /// Samples `f` at the unknowns.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: &Grid, f: F) -> Self {
        let mut out = GridFunction::zeros(grid);
        for &k in grid.interior_nodes() {
            out.values[k] = f(grid.node_position(k));
        }
        out
    }

    /// Builds from a full nodal array; entries off the unknowns must be zero.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::Input(format!("{} values for {} nodes", values.len(), grid.num_nodes())));
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite value at node {k}")));
            }
            if grid.unknown_of(k).is_none() && v != 0.0 {
                return Err(Error::Input(format!("nonzero value at boundary node {k}")));
            }
        }
        Ok(GridFunction {
            grid: grid.clone(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, op: F) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Input("grid functions live on different grids".into()));
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn map<F: Fn(f64) -> f64>(&self, op: F) -> Self {
        let mut out = GridFunction::zeros(&self.grid);
        for &k in self.grid.interior_nodes() {
            out.values[k] = op(self.values[k]);
        }
        out
    }

    /// `Σ f g · cell volume` over the unknowns.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        let s: f64 = self
            .grid
            .interior_nodes()
            .iter()
            .map(|&k| self.values[k] * other.values[k])
            .sum();
        s * self.grid.cell_volume()
    }

    /// Values at the unknowns, each with measure `1 / #unknowns`.
    pub fn to_simple(&self) -> SimpleFunction {
        let m = 1.0 / self.grid.num_unknowns() as f64;
        SimpleFunction::new(self.grid.interior_nodes().iter().map(|&k| (self.values[k], m)).collect())
            .expect("unit total measure")
    }

    pub fn gradient(&self) -> GradientField {
        let g = &self.grid;
        GradientField {
            vectors: g.active_cells().iter().map(|&c| g.cell_gradient(&self.values, c)).collect(),
            grid: g.clone(),
        }
    }
}

/// Forward-difference gradients on the active cells of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientField {
    #[serde(skip)]
    pub grid: Grid,
    pub vectors: Vec<[f64; 2]>,
}

impl GradientField {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v[0].hypot(v[1])).collect()
    }

    /// `|∇u|` on each active cell, with the cells sharing a unit total measure.
    pub fn to_simple(&self) -> SimpleFunction {
        let n = self.vectors.len();
        let m = 1.0 / n as f64;
        SimpleFunction::new(self.magnitudes().into_iter().map(|v| (v, m)).collect()).expect("unit total measure")
    }

    pub fn sub(&self, other: &GradientField) -> Result<GradientField> {
        if self.grid != other.grid {
            return Err(Error::Input("gradient fields live on different grids".into()));
        }
        Ok(GradientField {
            grid: self.grid.clone(),
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                .collect(),
        })
    }

    /// `Σ |∇u|^p · cell volume`.
    pub fn power_sum(&self, p: f64) -> f64 {
        self.magnitudes().iter().map(|v| v.powf(p)).sum::<f64>() * self.grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_layout() {
        let g = Grid::square(4).unwrap();
        assert_eq!(g.num_nodes(), 25);
        assert_eq!(g.num_unknowns(), 9);
        assert_eq!(g.bandwidth(), 3);
        // Every cell but the one at the origin touches an interior node.
        assert_eq!(g.active_cells().len(), 15);
        let i = Grid::interval(8).unwrap();
        assert_eq!((i.num_unknowns(), i.bandwidth(), i.active_cells().len()), (7, 1, 8));
    }

    #[test]
    fn disk_mask_and_serde() {
        let g = Grid::disk(16).unwrap();
        assert!(g.num_unknowns() < 15 * 15);
        let js = serde_json::to_string(&g).unwrap();
        assert!(js.contains("mask_rle"));
        let back: Grid = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
        let f = GridFunction::from_fn(&g, |x| x[0] + x[1]);
        let js = serde_json::to_string(&f).unwrap();
        let back: GridFunction = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn disconnected_mask_rejected() {
        let r = Grid::with_mask(2, 8, |x| x[0] < 0.3 || x[0] > 0.7);
        assert!(matches!(r, Err(Error::Input(_))));
        assert!(Grid::with_mask(2, 8, |_| false).is_err());
        assert!(Grid::interval(1).is_err());
    }

    #[test]
    fn simple_views_have_unit_measure() {
        let g = Grid::square(6).unwrap();
        let f = GridFunction::from_fn(&g, |x| x[0] * x[1]);
        assert!((f.to_simple().covered_measure() - 1.0).abs() < 1e-12);
        assert!((f.gradient().to_simple().covered_measure() - 1.0).abs() < 1e-12);
        let bad = GridFunction::from_values(&g, vec![1.0; g.num_nodes()]);
        assert!(bad.is_err());
    }

    #[test]
    fn linear_gradient_is_exact() {
        let g = Grid::interval(10).unwrap();
        let f = GridFunction::from_fn(&g, |x| 3.0 * x[0]);
        // Interior nodes carry 3x; the boundary node at x = 1 is zero.
        let grad = f.gradient();
        assert!(grad.vectors[..9].iter().all(|v| (v[0] - 3.0).abs() < 1e-12));
    }
}
