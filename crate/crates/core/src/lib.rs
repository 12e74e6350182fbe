//! Numerical laboratory for multiple Muckenhoupt weights, multilinear Bessel
//! multipliers and the epsilon-sweep experiments built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod maximal;
pub mod numerics;
pub mod operators;
pub mod sharpness;
pub mod weights;

pub use error::{Error, Result};
pub use weights::{ExponentTuple, MultiWeight, WeightExpr};
pub use numerics::{
    fit_loglog, make_grid, quad_cube, Cube, CubeFamily, FamilySpec, Grid, LogLogFit,
    QuadOptions, SampledFunction, Singularity,
};
pub use num_complex::Complex64;

