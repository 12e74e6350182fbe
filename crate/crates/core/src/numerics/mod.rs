//! Grids, cubes, quadrature, transforms and slope fitting.

mod cube;
pub mod fft;
mod fit;
mod grid;
mod quad;
mod sampled;

pub use cube::{Cube, CubeFamily, FamilySpec};
pub use fit::{fit_loglog, LogLogFit};
pub use grid::{make_grid, make_grid_with_budget, Grid, DEFAULT_POINT_BUDGET};
pub use quad::{gauss_legendre, quad_cube, quad_cube_with, quad_interval, QuadOptions, Singularity};
pub use sampled::SampledFunction;
