use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Objective values tabulated on a full rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridTable {
    /// Sorted distinct node coordinates per axis.
    axes: Vec<Vec<f64>>,
    /// Values in row-major order over `axes` (last axis fastest).
    values: Vec<f64>,
}

impl GridTable {
    /// Build from axis coordinates and row-major values.
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.is_empty()) {
            return Err(Error::arg("grid needs at least one node on every axis"));
        }
        for a in &axes {
            if a.windows(2).any(|w| w[0] >= w[1]) || a.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg("grid axes must be finite and strictly increasing"));
            }
        }
        let n: usize = axes.iter().map(Vec::len).product();
        if values.len() != n {
            return Err(Error::arg(format!("grid has {} values for {n} nodes", values.len())));
        }
        Ok(GridTable { axes, values })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-axis `(min, max)` of the node coordinates.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a[0], a[a.len() - 1])).collect()
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (slot, a) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = k % a.len();
            k /= a.len();
        }
        idx
    }

    /// Physical coordinates of node `k` (row-major order).
    pub fn node(&self, k: usize) -> Vec<f64> {
        self.unflatten(k).iter().zip(&self.axes).map(|(&i, a)| a[i]).collect()
    }

    /// All nodes as rows, in the same order as [`GridTable::values`].
    pub fn nodes(&self) -> DMatrix<f64> {
        let d = self.dim();
        let flat: Vec<f64> = (0..self.len()).flat_map(|k| self.node(k)).collect();
        DMatrix::from_row_slice(self.len(), d, &flat)
    }

    /// Index of the node nearest to `x` (per-axis nearest; ties go to the lower node).
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!("grid is {}-dimensional, got {} settings", self.dim(), x.len())));
        }
        let idx: Vec<usize> = x
            .iter()
            .zip(&self.axes)
            .map(|(&v, a)| {
                let hi = a.partition_point(|&c| c < v);
                if hi == 0 {
                    0
                } else if hi == a.len() || v - a[hi - 1] <= a[hi] - v {
                    hi - 1
                } else {
                    hi
                }
            })
            .collect();
        Ok(self.flat_index(&idx))
    }

    pub fn lookup(&self, x: &[f64]) -> Result<f64> {
        Ok(self.values[self.nearest(x)?])
    }

    /// Smallest tabulated value and its node.
    pub fn minimum(&self) -> (f64, Vec<f64>) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
        (v, self.node(k))
    }

    /// Read a CSV with header `x1,...,xD,y`; every grid node must appear exactly once.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| Error::objective(format!("cannot open grid {}: {e}", path.display())))?;
        let header = rdr.headers()?.clone();
        let cols = header.len();
        if cols < 2 || header.get(cols - 1).map(str::trim) != Some("y") {
            return Err(Error::objective(format!("grid {}: header must be x1,...,xD,y", path.display())));
        }
        let d = cols - 1;
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            let nums = nums.map_err(|e| Error::objective(format!("grid row {}: {e}", line + 2)))?;
            if nums.len() != cols || nums.iter().any(|v| !v.is_finite()) {
                return Err(Error::objective(format!("grid row {}: expected {cols} finite numbers", line + 2)));
            }
            rows.push((nums[..d].to_vec(), nums[d]));
        }
        if rows.is_empty() {
            return Err(Error::objective(format!("grid {} has no rows", path.display())));
        }
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); d];
        for (x, _) in &rows {
            for (a, &v) in axes.iter_mut().zip(x) {
                a.push(v);
            }
        }
        for a in &mut axes {
            a.sort_by(f64::total_cmp);
            a.dedup();
        }
        let n: usize = axes.iter().map(Vec::len).product();
        if n != rows.len() {
            return Err(Error::objective(format!(
                "grid {} is not rectangular: {} rows for {n} axis combinations",
                path.display(),
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; n];
        let mut seen = vec![false; n];
        let table = GridTable { axes, values: vec![0.0; n] };
        for (x, y) in rows {
            let idx: Vec<usize> = x
                .iter()
                .zip(&table.axes)
                .map(|(v, a)| a.binary_search_by(|c| c.total_cmp(v)).expect("coordinate is on its axis"))
                .collect();
            let k = table.flat_index(&idx);
            if seen[k] {
                return Err(Error::objective(format!("grid {} repeats node {x:?}", path.display())));
            }
            seen[k] = true;
            values[k] = y;
        }
        GridTable::new(table.axes, values)
    }

    /// Write the table as CSV in row-major node order with round-trip exact numbers.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).chain(["y".to_string()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let fields: Vec<String> = self.node(k).iter().chain([&self.values[k]]).map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> GridTable {
        GridTable::new(vec![vec![0.0, 1.0, 2.0], vec![10.0, 20.0]], vec![5.0, 4.0, 3.0, 2.0, 1.0, 0.5]).unwrap()
    }

    #[test]
    fn row_major_layout() {
        let t = table();
        assert_eq!(t.node(1), vec![0.0, 20.0]);
        assert_eq!(t.node(4), vec![2.0, 10.0]);
        assert_eq!(t.lookup(&[1.0, 20.0]).unwrap(), 2.0);
        assert_eq!(t.minimum(), (0.5, vec![2.0, 20.0]));
    }

    #[test]
    fn nearest_node_lookup() {
        let t = table();
        assert_eq!(t.lookup(&[0.4, 14.0]).unwrap(), 5.0);
        assert_eq!(t.lookup(&[0.6, 16.0]).unwrap(), 2.0);
        assert_eq!(t.lookup(&[-3.0, 99.0]).unwrap(), 4.0);
        assert_eq!(t.lookup(&[0.5, 15.0]).unwrap(), 5.0);
        assert!(t.lookup(&[0.5]).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let t = GridTable::new(vec![vec![0.1, 0.7], vec![1.0 / 3.0]], vec![std::f64::consts::PI, 1e-300]).unwrap();
        t.save(&p).unwrap();
        assert_eq!(GridTable::load(&p).unwrap(), t);
    }

    #[test]
    fn rejects_incomplete_and_duplicate_grids() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "x1,x2,y\n0,0,1\n0,1,2\n1,0,3\n").unwrap();
        assert!(matches!(GridTable::load(&p), Err(Error::Objective(_))));
        std::fs::write(&p, "x1,x2,y\n0,0,1\n0,1,2\n1,0,3\n0,0,4\n").unwrap();
        assert!(matches!(GridTable::load(&p), Err(Error::Objective(_))));
        std::fs::write(&p, "x1,x2,z\n0,0,1\n").unwrap();
        assert!(matches!(GridTable::load(&p), Err(Error::Objective(_))));
        std::fs::write(&p, "x1,y\n0,abc\n").unwrap();
        assert!(matches!(GridTable::load(&p), Err(Error::Objective(_))));
        assert!(GridTable::load(&dir.path().join("missing.csv")).is_err());
    }
}
