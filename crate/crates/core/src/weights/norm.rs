use num_complex::Complex64;
use rayon::prelude::*;

use super::constants::power_integral_1d;
use super::expr::WeightExpr;
use crate::error::{invalid, Error, Result};
use crate::numerics::{gauss_legendre, quad_cube_with, Cube, QuadOptions, SampledFunction};

/// Integration region for a weighted norm.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Everywhere,
    /// `{ r_in < |x - center| < r_out }`.
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
}

/// `(int |f|^p w)^{1/p}` with `|f|^p` constant on each grid cell.
pub fn weighted_lp_norm(f: &SampledFunction, w: &WeightExpr, p: f64) -> Result<f64> {
    weighted_lp_norm_on(f, w, p, &Region::Everywhere)
}

pub fn weighted_lp_norm_on(f: &SampledFunction, w: &WeightExpr, p: f64, region: &Region) -> Result<f64> {
    let g = f.grid;
    if g.dim != w.dimension {
        return invalid("function and weight dimensions differ");
    }
    if !(p > 0.0) {
        return invalid(format!("exponent p must be positive, got {p}"));
    }
    let h = g.spacing();
    let sum: f64 = f
        .values
        .par_iter()
        .enumerate()
        .map(|(flat, v)| cell_term(g, flat, *v, w, p, h, region))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(sum.powf(1.0 / p))
}

fn cell_term(
    g: crate::numerics::Grid,
    flat: usize,
    v: Complex64,
    w: &WeightExpr,
    p: f64,
    h: f64,
    region: &Region,
) -> Result<f64> {
    let a = v.norm();
    if a == 0.0 {
        return Ok(0.0);
    }
    let center = g.point(flat);
    let cell = Cube { center, side: h };
    if let Some(fac) = w.non_integrable_factors().find(|fac| cell.contains(&fac.center)) {
        return Err(Error::Divergence(format!(
            "weight factor at {:?} with exponent {} is not integrable under the support of f",
            fac.center, fac.exponent
        )));
    }
    Ok(a.powf(p) * cell_weight_integral(w, &cell, region)?)
}

fn cell_weight_integral(w: &WeightExpr, cell: &Cube, region: &Region) -> Result<f64> {
    let n = cell.dim();
    if n == 1 {
        let (a, b) = (cell.lo(0), cell.hi(0));
        let mut total = 0.0;
        for (lo, hi) in clip_1d(a, b, region) {
            total += interval_weight_integral(w, lo, hi)?;
        }
        return Ok(total);
    }
    if let Region::Annulus { center, r_in, r_out } = region {
        let r: f64 = cell.center.iter().zip(center).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
        if !(r > *r_in && r < *r_out) {
            return Ok(0.0);
        }
    }
    let near = w.factors.iter().any(|f| cell.distance_to(&f.center) < 4.0 * cell.side);
    if near {
        let ev = |x: &[f64]| w.eval(x);
        quad_cube_with(&ev, cell, &w.singularities(), QuadOptions::default())
    } else {
        Ok(w.eval(&cell.center) * cell.volume())
    }
}

fn clip_1d(a: f64, b: f64, region: &Region) -> Vec<(f64, f64)> {
    match region {
        Region::Everywhere => vec![(a, b)],
        Region::Annulus { center, r_in, r_out } => {
            let c = center[0];
            [(c - r_out, c - r_in), (c + r_in, c + r_out)]
                .into_iter()
                .filter_map(|(lo, hi)| {
                    let (lo, hi) = (lo.max(a), hi.min(b));
                    (hi > lo).then_some((lo, hi))
                })
                .collect()
        }
    }
}

fn interval_weight_integral(w: &WeightExpr, a: f64, b: f64) -> Result<f64> {
    if w.is_constant() {
        return Ok(w.coefficient * (b - a));
    }
    if w.factors.len() == 1 {
        let f = &w.factors[0];
        return Ok(w.coefficient * power_integral_1d(a, b, f.center[0], f.exponent));
    }
    let near = w.factors.iter().any(|f| {
        let c = f.center[0];
        let d = if c < a { a - c } else if c > b { c - b } else { 0.0 };
        d < 4.0 * (b - a)
    });
    if near {
        let ev = |x: &[f64]| w.eval(x);
        return quad_cube_with(&ev, &Cube::interval(a, b), &w.singularities(), QuadOptions::default());
    }
    let (x, wts) = gauss_legendre(5);
    let (m, hh) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(hh * x.iter().zip(wts).map(|(t, wt)| wt * w.eval(&[m + hh * t])).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;
    use crate::weights::Factor;

    #[test]
    fn indicator_against_linear_weight() {
        let g = make_grid(1, 2.0, 1024).unwrap();
        let h = g.spacing();
        let f = SampledFunction::from_real_fn(g, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let v = weighted_lp_norm(&f, &WeightExpr::power(vec![0.0], 1.0), 1.0).unwrap();
        assert!((v - 0.5).abs() <= h, "{v}");
    }

    #[test]
    fn unit_weight_is_plain_norm() {
        let g = make_grid(2, 2.0, 64).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let h = g.spacing();
        let plain: f64 = f.values.iter().map(|v| v.norm().powi(3)).sum::<f64>() * h * h;
        let v = weighted_lp_norm(&f, &WeightExpr::one(2), 3.0).unwrap();
        assert!((v - plain.cbrt()).abs() < 1e-12 * v);
    }

    #[test]
    fn annulus_is_subset_of_full() {
        let g = make_grid(1, 4.0, 2048).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let w = WeightExpr::new(
            1,
            vec![Factor { center: vec![0.0], exponent: 0.5 }, Factor { center: vec![1.0], exponent: -0.5 }],
        )
        .unwrap();
        let full = weighted_lp_norm(&f, &w, 2.0).unwrap();
        let ann = weighted_lp_norm_on(&f, &w, 2.0, &Region::Annulus { center: vec![1.0], r_in: 0.1, r_out: 0.3 }).unwrap();
        assert!(ann > 0.0 && ann < full);
    }

    #[test]
    fn divergent_weight_under_support() {
        let g = make_grid(1, 1.0, 64).unwrap();
        let f = SampledFunction::from_real_fn(g, |_| 1.0);
        let r = weighted_lp_norm(&f, &WeightExpr::power(vec![0.0], -1.2), 1.0);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }
}
