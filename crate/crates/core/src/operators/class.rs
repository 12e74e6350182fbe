use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbol::SymbolSpec;
use crate::error::{invalid, Error, Result};

/// `m_rho(p) = (1 - rho) * (-n (sum_j max(1/p_j, 1/2) - min(1/p, 1/2)))`
/// with `1/p = sum_j 1/p_j`. `p_j = f64::INFINITY` is allowed.
pub fn critical_order(p_list: &[f64], rho: f64, n: usize) -> Result<f64> {
    if p_list.is_empty() || p_list.iter().any(|p| p.is_nan() || *p <= 0.0) {
        return invalid("exponents must satisfy 0 < p_j <= infinity");
    }
    if !(0.0..1.0).contains(&rho) {
        return invalid(format!("rho must lie in [0, 1), got {rho}"));
    }
    let inv: Vec<f64> = p_list.iter().map(|p| 1.0 / p).collect();
    let inv_p: f64 = inv.iter().sum();
    let m0 = -(n as f64) * (inv.iter().map(|v| v.max(0.5)).sum::<f64>() - inv_p.min(0.5));
    Ok((1.0 - rho) * m0)
}

/// Frequencies `r * u` for every radius `r` and unit direction `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFrequencies {
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl TestFrequencies {
    /// Radii `2^{j/per_octave}` in `[lo, hi]`, or linear spacing when `lo == 0`.
    pub fn annulus(dim: usize, lo: f64, hi: f64, per_octave: usize) -> Self {
        let radii = if lo <= 0.0 {
            let m = 8 * per_octave;
            (0..=m).map(|i| hi * i as f64 / m as f64).collect()
        } else {
            let m = ((hi / lo).log2() * per_octave as f64).ceil().max(1.0) as usize;
            (0..=m).map(|i| lo * (hi / lo).powf(i as f64 / m as f64)).collect()
        };
        Self { radii, directions: default_directions(dim) }
    }

    /// `|xi|` in `[1, 2^12]`.
    pub fn standard(dim: usize) -> Self {
        Self::annulus(dim, 1.0, 4096.0, 8)
    }

    pub fn points(&self) -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.radii.len() * self.directions.len());
        for u in &self.directions {
            for &r in &self.radii {
                out.push((r, u.iter().map(|v| v * r).collect()));
            }
        }
        out
    }
}

fn default_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for a in 0..dim {
        let mut e = vec![0.0; dim];
        e[a] = 1.0;
        dirs.push(e.clone());
        if dim > 1 {
            e[a] = -1.0;
            dirs.push(e);
        }
    }
    if dim > 1 {
        dirs.push(vec![1.0 / (dim as f64).sqrt(); dim]);
        for seed in 1..=3 {
            let raw: Vec<f64> = (0..dim).map(|a| ((seed * 7 + a * 3) as f64 * 1.3).sin()).collect();
            let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            dirs.push(raw.iter().map(|v| v / n).collect());
        }
    } else {
        dirs.push(vec![-1.0]);
    }
    dirs
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dim]];
    for order in 1..=max_order {
        let mut cur = vec![0usize; dim];
        fill(&mut out, &mut cur, 0, order);
    }
    out
}

fn fill(out: &mut Vec<Vec<usize>>, cur: &mut [usize], axis: usize, left: usize) {
    if axis + 1 == cur.len() {
        cur[axis] = left;
        out.push(cur.to_vec());
        return;
    }
    for v in (0..=left).rev() {
        cur[axis] = v;
        fill(out, cur, axis + 1, left - v);
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor central difference of order `beta` with step `h`.
fn central(sigma: &SymbolSpec, xi: &[f64], beta: &[usize], h: f64) -> num_complex::Complex64 {
    let axes: Vec<usize> = (0..beta.len()).filter(|&a| beta[a] > 0).collect();
    let sizes: Vec<usize> = axes.iter().map(|&a| beta[a] + 1).collect();
    let total: usize = sizes.iter().product();
    let mut point = xi.to_vec();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for t in 0..total {
        let mut rem = t;
        let mut coef = 1.0;
        point.copy_from_slice(xi);
        for (i, &a) in axes.iter().enumerate() {
            let j = rem % sizes[i];
            rem /= sizes[i];
            let b = beta[a];
            coef *= binom(b, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            point[a] += (b as f64 / 2.0 - j as f64) * h;
        }
        acc += sigma.eval(&point) * coef;
    }
    let order: usize = beta.iter().sum();
    acc / h.powi(order as i32)
}

fn derivative(sigma: &SymbolSpec, xi: &[f64], beta: &[usize], rho: f64) -> f64 {
    let order: usize = beta.iter().sum();
    if order == 0 {
        return sigma.eval(xi).norm();
    }
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 0.01 * order as f64 * (1.0 + r).powf(rho);
    let coarse = central(sigma, xi, beta, h);
    let fine = central(sigma, xi, beta, 0.5 * h);
    ((4.0 * fine - coarse) / 3.0).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConstant {
    pub beta: Vec<usize>,
    pub constant: f64,
    /// Constants on the two outermost dyadic radius blocks, outer last.
    pub previous_block: f64,
    pub last_block: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub m: f64,
    pub rho: f64,
    pub max_order: usize,
    pub constants: Vec<ClassConstant>,
    pub pass: bool,
}

impl ClassReport {
    pub fn constant(&self, beta: &[usize]) -> Option<f64> {
        self.constants.iter().find(|c| c.beta == beta).map(|c| c.constant)
    }
}

/// Smallest `C_beta` with `|d^beta sigma| <= C_beta (1 + |xi|)^{m - rho |beta|}`
/// on `|xi|` in `[1, 2^12]`.
pub fn symbol_class_check(sigma: &SymbolSpec, m: f64, rho: f64, max_order: usize) -> Result<ClassReport> {
    symbol_class_check_on(sigma, m, rho, max_order, &TestFrequencies::standard(sigma.dim()))
}

pub fn symbol_class_check_on(
    sigma: &SymbolSpec,
    m: f64,
    rho: f64,
    max_order: usize,
    freqs: &TestFrequencies,
) -> Result<ClassReport> {
    if max_order > 4 {
        return invalid(format!("derivative order {max_order} exceeds 4"));
    }
    if !(0.0..1.0).contains(&rho) {
        return invalid(format!("rho must lie in [0, 1), got {rho}"));
    }
    if freqs.directions.iter().any(|u| u.len() != sigma.dim()) {
        return invalid("test directions must have dimension nl");
    }
    let points = freqs.points();
    let betas = multi_indices(sigma.dim(), max_order);
    let mut constants = Vec::with_capacity(betas.len());
    for beta in betas {
        let order: usize = beta.iter().sum();
        let ratios: Vec<(f64, f64)> = points
            .par_iter()
            .map(|(r, xi)| {
                let d = derivative(sigma, xi, &beta, rho);
                (*r, d / (1.0 + r).powf(m - rho * order as f64))
            })
            .collect();
        if let Some((r, _)) = ratios.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Accuracy {
                context: format!("finite differences of order {beta:?} at |xi| = {r}"),
                previous: f64::NAN,
                last: f64::NAN,
            });
        }
        let constant = ratios.iter().map(|p| p.1).fold(0.0, f64::max);
        let block = |r: f64| if r > 0.0 { r.log2().floor() as i64 } else { i64::MIN };
        let top = ratios.iter().map(|p| block(p.0)).max().unwrap_or(0);
        // the outermost block may hold a single radius; merge it into its neighbour
        let outer = |b: i64| b >= top - 1 && b < top + 1;
        let last = ratios.iter().filter(|p| outer(block(p.0))).map(|p| p.1).fold(0.0, f64::max);
        let prev = ratios.iter().filter(|p| block(p.0) == top - 2).map(|p| p.1).fold(0.0, f64::max);
        constants.push(ClassConstant { beta, constant, previous_block: prev, last_block: last, stable: true });
    }
    let floor = 1e-9 * constants.iter().map(|c| c.constant).fold(0.0, f64::max).max(1e-300);
    for c in &mut constants {
        c.stable = c.last_block <= floor || c.last_block <= 1.25 * c.previous_block;
    }
    let pass = constants.iter().all(|c| c.constant.is_finite() && c.stable);
    Ok(ClassReport { m, rho, max_order, constants, pass })
}
