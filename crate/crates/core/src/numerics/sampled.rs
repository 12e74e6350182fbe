use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{invalid, Result};

/// Values of a function on every point of a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    grid: Grid,
    encoding: String,
}

const ENCODING: &str = "complex128-le-interleaved";

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return invalid("sampled function has non-finite entries");
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut idx = vec![0; grid.dim];
        let mut x = vec![0.0; grid.dim];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (xa, &ia) in x.iter_mut().zip(&idx) {
                    *xa = grid.coord(ia);
                }
                f(&x)
            })
            .collect();
        SampledFunction { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return invalid("cannot add functions on different grids");
        }
        Ok(SampledFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol * (1.0 + v.re.abs()))
    }

    /// Largest modulus on the outermost layer of grid points.
    pub fn boundary_max(&self) -> f64 {
        let g = self.grid;
        let mut idx = vec![0; g.dim];
        let mut m: f64 = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            g.unravel(flat, &mut idx);
            if idx.iter().any(|&i| i == 0 || i == g.n - 1) {
                m = m.max(v.norm());
            }
        }
        m
    }

    pub fn write_binary(&self, stem: &Path) -> Result<()> {
        let header = Header { grid: self.grid, encoding: ENCODING.into() };
        fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&header)?)?;
        let mut bytes = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        fs::write(stem.with_extension("bin"), bytes)?;
        Ok(())
    }

    pub fn read_binary(stem: &Path) -> Result<Self> {
        let header: Header = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
        if header.encoding != ENCODING {
            return invalid(format!("unsupported encoding {}", header.encoding));
        }
        let bytes = fs::read(stem.with_extension("bin"))?;
        if bytes.len() != header.grid.len() * 16 {
            return invalid("binary payload length does not match header grid");
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::new(header.grid, values)
    }

    /// Columns `x0..x{d-1},re,im`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let g = self.grid;
        let mut out = String::new();
        for a in 0..g.dim {
            let _ = write!(out, "x{a},");
        }
        out.push_str("re,im\n");
        let mut idx = vec![0; g.dim];
        for (flat, v) in self.values.iter().enumerate() {
            g.unravel(flat, &mut idx);
            for &i in &idx {
                let _ = write!(out, "{:e},", g.coord(i));
            }
            let _ = writeln!(out, "{:e},{:e}", v.re, v.im);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    #[test]
    fn binary_roundtrip() {
        let g = make_grid(2, 1.0, 8).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x[0], x[1] * 3.0));
        let dir = std::env::temp_dir().join(format!("mwlab-sampled-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let stem = dir.join("f");
        f.write_binary(&stem).unwrap();
        assert_eq!(SampledFunction::read_binary(&stem).unwrap(), f);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let g = make_grid(1, 1.0, 4).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x[0]);
        let csv = f.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("x0,re,im\n"));
    }

    #[test]
    fn rejects_wrong_length() {
        let g = make_grid(1, 1.0, 4).unwrap();
        assert!(SampledFunction::new(g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}
