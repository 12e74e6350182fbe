use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_POINT_BUDGET: usize = 1 << 24;

/// Uniform grid on `[-L, L)^d` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
}

pub fn make_grid(dim: usize, half_width: f64, n: usize) -> Result<Grid> {
    make_grid_with_budget(dim, half_width, n, DEFAULT_POINT_BUDGET)
}

pub fn make_grid_with_budget(dim: usize, half_width: f64, n: usize, budget: usize) -> Result<Grid> {
    if dim == 0 {
        return invalid("grid dimension must be positive");
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return invalid(format!("grid half-width must be positive, got {half_width}"));
    }
    if n < 4 || !n.is_power_of_two() {
        return invalid(format!("points per axis must be a power of two >= 4, got {n}"));
    }
    let total = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::Resource {
            what: "grid points".into(),
            requested: total,
            limit: budget as u128,
        });
    }
    Ok(Grid { dim, half_width, n })
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> f64 {
        -self.half_width
    }

    /// Coordinate of index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Row-major multi-index of a flat index (last axis fastest).
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        self.unravel(flat, &mut idx);
        idx.iter().map(|&i| self.coord(i)).collect()
    }

    /// Nearest grid index along an axis, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.spacing()).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Cells are `[x_i - h/2, x_i + h/2]`; returns the union's bounds per axis.
    pub fn domain(&self) -> (f64, f64) {
        let h = self.spacing();
        (-self.half_width - 0.5 * h, self.half_width - 0.5 * h)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_width == other.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_points() {
        let g = make_grid(1, 1.0, 4).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.axis(), vec![-1.0, -0.5, 0.0, 0.5]);
    }

    #[test]
    fn planar_grid() {
        let g = make_grid(2, 8.0, 256).unwrap();
        assert_eq!(g.len(), 65536);
        assert_eq!(g.spacing(), 0.0625);
        assert_eq!(g.point(257), vec![-8.0 + 0.0625, -8.0 + 0.0625]);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(make_grid(1, 1.0, 3), Err(Error::Validation(_))));
    }

    #[test]
    fn budget_is_named() {
        match make_grid(3, 1.0, 1024) {
            Err(Error::Resource { limit, .. }) => assert_eq!(limit, 1 << 24),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn ravel_roundtrip() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let mut idx = [0; 3];
        for flat in [0, 7, 63, 200, 511] {
            g.unravel(flat, &mut idx);
            assert_eq!(g.ravel(&idx), flat);
        }
    }
}
