use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::bump;
use crate::numerics::{make_grid_with_budget, Grid, SampledFunction, DEFAULT_POINT_BUDGET};

/// How the grid is chosen for each epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPolicy {
    pub half_width: f64,
    /// Required grid points per epsilon, i.e. `h <= epsilon / cells_per_epsilon`.
    pub cells_per_epsilon: f64,
    pub max_points_per_axis: usize,
    /// Upper bound for the product lattice `(2N)^{nl}`.
    pub max_lattice: u128,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { half_width: 4.0, cells_per_epsilon: 8.0, max_points_per_axis: 1 << 22, max_lattice: 1 << 30 }
    }
}

/// The smallest power-of-two grid with `h <= epsilon / cells_per_epsilon`,
/// clamped by the budgets. The flag is false when clamping broke the resolution.
pub fn epsilon_grid(epsilon: f64, n: usize, l: usize, policy: &GridPolicy) -> Result<(Grid, bool)> {
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    let want = (2.0 * policy.half_width * policy.cells_per_epsilon / epsilon).ceil().max(4.0) as usize;
    let mut points = want.next_power_of_two().min(policy.max_points_per_axis.next_power_of_two());
    while points > 4
        && ((2 * points as u128).pow((n * l) as u32) > policy.max_lattice
            || (points as u128).pow(n as u32) > DEFAULT_POINT_BUDGET as u128)
    {
        points /= 2;
    }
    let grid = make_grid_with_budget(n, policy.half_width, points, DEFAULT_POINT_BUDGET)?;
    let resolved = grid.spacing() <= epsilon / policy.cells_per_epsilon * (1.0 + 1e-12);
    Ok((grid, resolved))
}

pub(crate) fn sample_bump(epsilon: f64, grid: Grid) -> SampledFunction {
    SampledFunction::from_fn(grid, |x| {
        let scaled: Vec<f64> = x.iter().map(|v| v / epsilon).collect();
        Complex64::new(bump(&scaled), 0.0)
    })
}

/// `phi(x / epsilon)` sampled on `grid`; requires `h <= epsilon / 8`.
pub fn bump_function(epsilon: f64, grid: Grid) -> Result<SampledFunction> {
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    if grid.spacing() > epsilon / 8.0 * (1.0 + 1e-12) {
        return invalid(format!("grid spacing {} exceeds epsilon/8 = {}", grid.spacing(), epsilon / 8.0));
    }
    Ok(sample_bump(epsilon, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    #[test]
    fn bump_values() {
        let eps = 1.0 / 16.0;
        let g = make_grid(1, 4.0, 1024).unwrap();
        let f = bump_function(eps, g).unwrap();
        for (i, v) in f.values.iter().enumerate() {
            let x = g.coord(i).abs();
            if x <= eps {
                assert_eq!(v.re, 1.0);
            }
            if x >= 2.0 * eps {
                assert_eq!(v.re, 0.0);
            }
            assert!((0.0..=1.0).contains(&v.re) && v.im == 0.0);
        }
        assert_eq!(f.max_abs(), 1.0);
        assert!(bump_function(eps, make_grid(1, 4.0, 256).unwrap()).is_err());
    }

    #[test]
    fn grid_choice() {
        let p = GridPolicy::default();
        let (g, ok) = epsilon_grid(1.0 / 16.0, 1, 1, &p).unwrap();
        assert!(ok && g.n == 1024);
        let (g, ok) = epsilon_grid(1.0 / 512.0, 1, 2, &p).unwrap();
        assert!(!ok && (2 * g.n as u128).pow(2) <= p.max_lattice);
    }
}
