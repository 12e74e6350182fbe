//! Maximal operators on sampled functions, driven by a finite cube family.
//!
//! Cell `i` is `[x_i - h/2, x_i + h/2]`; boundary cells of a cube count with
//! their overlap fraction, and averages are taken over the part of the cube
//! inside the grid domain.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numerics::{Cube, CubeFamily, Grid, SampledFunction};

/// Cells meeting `[lo, hi]` along one axis with their overlap fractions.
pub fn axis_overlap(grid: &Grid, lo: f64, hi: f64) -> Vec<(usize, f64)> {
    let h = grid.spacing();
    let x0 = grid.origin();
    let first = (((lo - x0) / h - 0.5).floor() as i64).max(0);
    let last = (((hi - x0) / h + 0.5).ceil() as i64).min(grid.n as i64 - 1);
    let mut out = Vec::new();
    for i in first..=last {
        let c = x0 + i as f64 * h;
        let overlap = (hi.min(c + 0.5 * h) - lo.max(c - 0.5 * h)) / h;
        if overlap > 0.0 {
            out.push((i as usize, if overlap > 1.0 - 1e-12 { 1.0 } else { overlap }));
        }
    }
    out
}

/// Grid indices along one axis whose points lie in `[lo, hi]`.
fn axis_points(grid: &Grid, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let h = grid.spacing();
    let x0 = grid.origin();
    let mut a = ((lo - x0) / h).ceil().max(0.0) as usize;
    let mut b = (((hi - x0) / h).floor() + 1.0).clamp(0.0, grid.n as f64) as usize;
    while a > 0 && x0 + (a - 1) as f64 * h >= lo {
        a -= 1;
    }
    while a < grid.n && x0 + a as f64 * h < lo {
        a += 1;
    }
    while b < grid.n && x0 + b as f64 * h <= hi {
        b += 1;
    }
    while b > a && x0 + (b - 1) as f64 * h > hi {
        b -= 1;
    }
    a..b.max(a)
}

/// Row-major `(flat index, weight)` pairs of the cells meeting a cube.
pub fn cube_cells(grid: &Grid, q: &Cube) -> Vec<(usize, f64)> {
    let axes: Vec<Vec<(usize, f64)>> = (0..grid.dim).map(|a| axis_overlap(grid, q.lo(a), q.hi(a))).collect();
    if axes.iter().any(|v| v.is_empty()) {
        return vec![];
    }
    let total: usize = axes.iter().map(|v| v.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; grid.dim];
    for _ in 0..total {
        let mut flat = 0;
        let mut w = 1.0;
        for (a, ax) in axes.iter().enumerate() {
            let (i, f) = ax[idx[a]];
            flat = flat * grid.n + i;
            w *= f;
        }
        out.push((flat, w));
        for a in (0..grid.dim).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

fn cube_points(grid: &Grid, q: &Cube) -> Vec<usize> {
    let axes: Vec<std::ops::Range<usize>> = (0..grid.dim).map(|a| axis_points(grid, q.lo(a), q.hi(a))).collect();
    if axes.iter().any(|r| r.is_empty()) {
        return vec![];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = axes.iter().map(|r| r.start).collect();
    loop {
        out.push(grid.ravel(&idx));
        let mut a = grid.dim;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < axes[a].end {
                break;
            }
            idx[a] = axes[a].start;
        }
    }
}

fn weighted_average(cells: &[(usize, f64)], vals: &[f64]) -> f64 {
    let (mut s, mut ws) = (0.0, 0.0);
    for &(i, w) in cells {
        s += w * vals[i];
        ws += w;
    }
    s / ws
}

fn check_shared_grid(fs: &[SampledFunction]) -> Result<Grid> {
    let Some(first) = fs.first() else {
        return invalid("need at least one function");
    };
    if fs.iter().any(|f| !f.grid.same_as(&first.grid)) {
        return invalid("all functions must share one grid");
    }
    Ok(first.grid)
}

fn scatter_max(grid: &Grid, family: &CubeFamily, values: &[Option<f64>]) -> Result<Vec<f64>> {
    let mut out = vec![f64::NEG_INFINITY; grid.len()];
    for (q, v) in family.cubes.iter().zip(values) {
        if let Some(v) = v {
            for i in cube_points(grid, q) {
                if *v > out[i] {
                    out[i] = *v;
                }
            }
        }
    }
    if let Some(i) = out.iter().position(|v| *v == f64::NEG_INFINITY) {
        return invalid(format!("no cube of the family contains grid point {:?}", grid.point(i)));
    }
    Ok(out)
}

fn powered_abs(fs: &[SampledFunction], r: f64) -> Vec<Vec<f64>> {
    fs.iter().map(|f| f.values.iter().map(|v| v.norm().powf(r)).collect()).collect()
}

fn product_of_averages(grid: &Grid, q: &Cube, powered: &[Vec<f64>]) -> Option<f64> {
    let cells = cube_cells(grid, q);
    if cells.is_empty() {
        return None;
    }
    Some(powered.iter().map(|v| weighted_average(&cells, v)).product())
}

/// `(sup_{Q ∋ x} prod_j avg_Q |f_j|^r)^{1/r}` at every grid point.
pub fn multi_maximal_r(fs: &[SampledFunction], r: f64, family: &CubeFamily) -> Result<SampledFunction> {
    let grid = check_shared_grid(fs)?;
    if !(r > 0.0) {
        return invalid(format!("r must be positive, got {r}"));
    }
    let powered = powered_abs(fs, r);
    let per_cube: Vec<Option<f64>> = family.cubes.par_iter().map(|q| product_of_averages(&grid, q, &powered)).collect();
    let out = scatter_max(&grid, family, &per_cube)?;
    Ok(SampledFunction { grid, values: out.into_iter().map(|v| Complex64::new(v.powf(1.0 / r), 0.0)).collect() })
}

/// The same maximal function evaluated only at the given points.
pub fn multi_maximal_r_at(fs: &[SampledFunction], r: f64, family: &CubeFamily, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let grid = check_shared_grid(fs)?;
    let powered = powered_abs(fs, r);
    points
        .iter()
        .map(|x| {
            let best = family
                .containing(x)
                .filter_map(|q| product_of_averages(&grid, q, &powered))
                .fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                return invalid(format!("no cube of the family contains {x:?}"));
            }
            Ok(best.powf(1.0 / r))
        })
        .collect()
}

/// `min_c (avg_Q |g - c|^t)^{1/t}` for one cube.
pub fn oscillation(cells: &[(usize, f64)], g: &[Complex64], t: f64) -> f64 {
    let wsum: f64 = cells.iter().map(|c| c.1).sum();
    let obj = |c: Complex64| cells.iter().map(|&(i, w)| w * (g[i] - c).norm().powf(t)).sum::<f64>() / wsum;
    let real = cells.iter().all(|&(i, _)| g[i].im == 0.0);
    let (re_lo, re_hi, im_lo, im_hi) = cells.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(i, _)| (a.min(g[i].re), b.max(g[i].re), c.min(g[i].im), d.max(g[i].im)),
    );
    if t == 2.0 {
        let mean = cells.iter().map(|&(i, w)| g[i] * w).sum::<Complex64>() / wsum;
        return obj(mean).sqrt();
    }
    if real {
        let data: Vec<f64> = cells.iter().map(|&(i, _)| g[i].re).collect();
        let f = |c: f64| obj(Complex64::new(c, 0.0));
        let (_, v) = minimize_1d(&f, re_lo, re_hi, t, &data);
        return v.powf(1.0 / t);
    }
    let mut c = cells.iter().map(|&(i, w)| g[i] * w).sum::<Complex64>() / wsum;
    let mut best = obj(c);
    let re_data: Vec<f64> = cells.iter().map(|&(i, _)| g[i].re).collect();
    let im_data: Vec<f64> = cells.iter().map(|&(i, _)| g[i].im).collect();
    for _ in 0..12 {
        let before = best;
        let (re, _) = minimize_1d(&|x| obj(Complex64::new(x, c.im)), re_lo, re_hi, t, &re_data);
        let cand = Complex64::new(re, c.im);
        if obj(cand) <= best {
            c = cand;
            best = obj(c);
        }
        let (im, _) = minimize_1d(&|y| obj(Complex64::new(c.re, y)), im_lo, im_hi, t, &im_data);
        let cand = Complex64::new(c.re, im);
        if obj(cand) <= best {
            c = cand;
            best = obj(c);
        }
        if before - best <= 1e-14 * before {
            break;
        }
    }
    best.powf(1.0 / t)
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let tol = 1e-12 * (b - a).abs().max(a.abs().max(b.abs()) * 1e-3);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimizer of `f` over `[lo, hi]`; convex for `t >= 1`, otherwise a seeded
/// scan and local search, checked against the data values in the bracket.
fn minimize_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, t: f64, data: &[f64]) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    if t >= 1.0 {
        let (x, v) = golden(f, lo, hi);
        let (fl, fh) = (f(lo), f(hi));
        return [(x, v), (lo, fl), (hi, fh)].into_iter().fold((x, v), |b, c| if c.1 < b.1 { c } else { b });
    }
    if data.len() <= 256 {
        return data.iter().map(|&c| (c, f(c))).fold((lo, f(lo)), |b, c| if c.1 < b.1 { c } else { b });
    }
    let seeds = 64;
    let xs: Vec<f64> = (0..seeds).map(|i| lo + (hi - lo) * i as f64 / (seeds - 1) as f64).collect();
    let k = (0..seeds).min_by(|&i, &j| f(xs[i]).total_cmp(&f(xs[j]))).unwrap();
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(seeds - 1)];
    let mut best = golden(f, a, b);
    let seed_best = (xs[k], f(xs[k]));
    if seed_best.1 < best.1 {
        best = seed_best;
    }
    for &c in data.iter().filter(|&&c| a <= c && c <= b) {
        let v = f(c);
        if v < best.1 {
            best = (c, v);
        }
    }
    best
}

/// `M^#_t g` at every grid point.
pub fn sharp_maximal_t(g: &SampledFunction, t: f64, family: &CubeFamily) -> Result<SampledFunction> {
    if !(t > 0.0) {
        return invalid(format!("t must be positive, got {t}"));
    }
    let grid = g.grid;
    let per_cube: Vec<Option<f64>> = family
        .cubes
        .par_iter()
        .map(|q| {
            let cells = cube_cells(&grid, q);
            (!cells.is_empty()).then(|| oscillation(&cells, &g.values, t))
        })
        .collect();
    let out = scatter_max(&grid, family, &per_cube)?;
    Ok(SampledFunction { grid, values: out.into_iter().map(|v| Complex64::new(v, 0.0)).collect() })
}

/// `M^#_t g` at the given points only.
pub fn sharp_maximal_at(g: &SampledFunction, t: f64, family: &CubeFamily, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return invalid(format!("t must be positive, got {t}"));
    }
    points
        .iter()
        .map(|x| {
            let cubes: Vec<&Cube> = family.containing(x).collect();
            let best = cubes
                .par_iter()
                .map(|q| {
                    let cells = cube_cells(&g.grid, q);
                    if cells.is_empty() {
                        f64::NEG_INFINITY
                    } else {
                        oscillation(&cells, &g.values, t)
                    }
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                return invalid(format!("no cube of the family contains {x:?}"));
            }
            Ok(best)
        })
        .collect()
}
