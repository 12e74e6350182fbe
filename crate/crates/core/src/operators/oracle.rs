use num_complex::Complex64;
use rayon::prelude::*;

use super::symbol::{SymbolKind, SymbolSpec};
use crate::error::{invalid, Result};
use crate::kernels::BesselTable;
use crate::numerics::{quad_cube_with, Cube, Grid, QuadOptions, SampledFunction, Singularity};


/// Tensor Catmull–Rom interpolation of grid samples, zero outside the grid.
#[derive(Debug, Clone)]
pub struct CubicInterpolant<'a> {
    f: &'a SampledFunction,
}

fn catmull_rom(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

impl<'a> CubicInterpolant<'a> {
    pub fn new(f: &'a SampledFunction) -> Self {
        Self { f }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let g = &self.f.grid;
        let d = g.dim;
        let h = g.spacing();
        let mut base = [0i64; 3];
        let mut w = [[0.0; 4]; 3];
        for a in 0..d {
            let u = (x[a] - g.origin()) / h;
            if !(u > -2.0 && u < g.n as f64 + 1.0) {
                return Complex64::new(0.0, 0.0);
            }
            let i = u.floor();
            base[a] = i as i64 - 1;
            w[a] = catmull_rom(u - i);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = [0usize; 3];
        'outer: for t in 0..4usize.pow(d as u32) {
            let mut weight = 1.0;
            let mut rem = t;
            for a in 0..d {
                let o = rem % 4;
                rem /= 4;
                let j = base[a] + o as i64;
                if j < 0 || j >= g.n as i64 {
                    continue 'outer;
                }
                idx[a] = j as usize;
                weight *= w[a][o];
            }
            acc += self.f.values[g.ravel(&idx[..d])] * weight;
        }
        acc
    }
}

/// Per-axis bounding box of the samples with `|f| > 1e-14 max|f|`, padded by two cells.
fn support_box(f: &SampledFunction) -> Option<(Vec<f64>, Vec<f64>)> {
    let g: &Grid = &f.grid;
    let cut = 1e-14 * f.max_abs();
    let d = g.dim;
    let mut lo = vec![usize::MAX; d];
    let mut hi = vec![0usize; d];
    let mut idx = vec![0usize; d];
    let mut any = false;
    for (flat, v) in f.values.iter().enumerate() {
        if v.norm() > cut {
            any = true;
            g.unravel(flat, &mut idx);
            for a in 0..d {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
    }
    if !any {
        return None;
    }
    let h = g.spacing();
    let (dlo, dhi) = (g.origin(), g.coord(g.n - 1));
    Some((
        lo.iter().map(|&i| (g.coord(i) - 2.0 * h).max(dlo)).collect(),
        hi.iter().map(|&i| (g.coord(i) + 2.0 * h).min(dhi)).collect(),
    ))
}

/// `T_sigma(f)(x) = int G_mu(x - e - y_1, ..., x - e - y_l) prod f_j(y_j) dy` by
/// singular quadrature, for model symbols only.
pub fn apply_multiplier_oracle(sigma: &SymbolSpec, fs: &[SampledFunction], points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let SymbolKind::Model { mu, center } = &sigma.kind else {
        return invalid("the convolution oracle needs a model symbol");
    };
    let (n, l) = (sigma.n, sigma.l);
    if fs.len() != l || fs.iter().any(|f| f.grid.dim != n) {
        return invalid("oracle inputs must be l functions on R^n");
    }
    if points.iter().any(|p| p.len() != n) {
        return invalid("probe points must lie in R^n");
    }
    let d = n * l;
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for f in fs {
        match support_box(f) {
            Some((a, b)) => {
                lo.extend(a);
                hi.extend(b);
            }
            None => return Ok(vec![Complex64::new(0.0, 0.0); points.len()]),
        }
    }
    let pieces = tile_box(&lo, &hi);

    let table = BesselTable::new(*mu, d)?;
    let exponent = if *mu < d as f64 { Some(mu - d as f64) } else { None };
    let interps: Vec<CubicInterpolant> = fs.iter().map(CubicInterpolant::new).collect();
    let real_inputs = fs.iter().all(|f| f.is_real(0.0));
    let opts = QuadOptions { rel_tol: 1e-6, ..QuadOptions::default() };

    points
        .par_iter()
        .map(|x| {
            let shift: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
            let star: Vec<f64> = (0..d).map(|i| shift[i % n]).collect();
            let sing = [Singularity { point: star.clone(), exponent }];
            let product = |y: &[f64]| -> Complex64 {
                let mut p = Complex64::new(1.0, 0.0);
                for (j, it) in interps.iter().enumerate() {
                    p *= it.eval(&y[j * n..(j + 1) * n]);
                    if p == Complex64::new(0.0, 0.0) {
                        break;
                    }
                }
                p
            };
            let kernel = |y: &[f64]| -> f64 {
                let r2: f64 = y.iter().zip(&star).map(|(a, b)| (a - b) * (a - b)).sum();
                table.eval(r2.sqrt())
            };
            let re = |y: &[f64]| {
                let p = product(y);
                if p.re == 0.0 { 0.0 } else { kernel(y) * p.re }
            };
            let mut total = Complex64::new(0.0, 0.0);
            for q in &pieces {
                total.re += quad_cube_with(&re, q, &sing, opts)?;
            }
            if !real_inputs {
                let im = |y: &[f64]| {
                    let p = product(y);
                    if p.im == 0.0 { 0.0 } else { kernel(y) * p.im }
                };
                for q in &pieces {
                    total.im += quad_cube_with(&im, q, &sing, opts)?;
                }
            }
            Ok(total)
        })
        .collect()
}

/// Tiles `[lo, hi]` by equal cubes whose side is the shortest box extent;
/// the tiling may overhang the box where the integrand vanishes.
fn tile_box(lo: &[f64], hi: &[f64]) -> Vec<Cube> {
    let d = lo.len();
    let side = (0..d).map(|a| hi[a] - lo[a]).fold(f64::MAX, f64::min);
    let cells: Vec<usize> = (0..d).map(|a| (((hi[a] - lo[a]) / side - 1e-9).ceil() as usize).max(1)).collect();
    let total: usize = cells.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for t in 0..total {
        let mut rem = t;
        for a in (0..d).rev() {
            idx[a] = rem % cells[a];
            rem /= cells[a];
        }
        let corner: Vec<f64> = (0..d).map(|a| lo[a] + idx[a] as f64 * side).collect();
        out.push(Cube::from_corner(&corner, side));
    }
    out
}
