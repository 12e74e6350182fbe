use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::inhomogeneous_partition;
use crate::numerics::SampledFunction;

/// Claimed membership `S^m_{rho,0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolClass {
    pub m: f64,
    pub rho: f64,
}

pub type SymbolFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum SymbolKind {
    /// `(1 + 4 pi^2 |xi|^2)^{-mu/2} exp(-2 pi i <center, xi_1 + ... + xi_l>)`.
    Model { mu: f64, center: Vec<f64> },
    Constant(Complex64),
    /// `exp(-2 pi i <center, xi_1 + ... + xi_l>)`.
    Modulation { center: Vec<f64> },
    /// Multilinear interpolation of samples on an `nl`-dimensional grid, zero outside.
    Sampled(SampledFunction),
    /// `Phi_k_hat(xi) b(2^{-k rho} xi)`.
    Piece { base: Box<SymbolSpec>, k: i32, rho: f64 },
    Custom(SymbolFn),
}

impl fmt::Debug for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Model { mu, center } => write!(f, "Model {{ mu: {mu}, center: {center:?} }}"),
            SymbolKind::Constant(c) => write!(f, "Constant({c})"),
            SymbolKind::Modulation { center } => write!(f, "Modulation {{ center: {center:?} }}"),
            SymbolKind::Sampled(s) => write!(f, "Sampled({:?})", s.grid),
            SymbolKind::Piece { base, k, rho } => write!(f, "Piece {{ k: {k}, rho: {rho}, base: {base:?} }}"),
            SymbolKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// An `x`-independent symbol on `(R^n)^l`.
#[derive(Debug, Clone)]
pub struct SymbolSpec {
    pub n: usize,
    pub l: usize,
    pub kind: SymbolKind,
    pub class: SymbolClass,
}

pub fn model_symbol(mu: f64, n: usize, l: usize) -> Result<SymbolSpec> {
    let mut e = vec![0.0; n];
    if n > 0 {
        e[0] = 1.0;
    }
    model_symbol_centered(mu, n, l, e)
}

pub fn model_symbol_centered(mu: f64, n: usize, l: usize, center: Vec<f64>) -> Result<SymbolSpec> {
    if n == 0 || l == 0 {
        return invalid("n and l must be positive");
    }
    let d = (n * l) as f64;
    if !(mu > 0.0 && mu <= d) {
        return invalid(format!("model symbol order must satisfy 0 < mu <= nl = {d}, got {mu}"));
    }
    if center.len() != n || center.iter().any(|c| !c.is_finite()) {
        return invalid("modulation center must be a finite vector in R^n");
    }
    Ok(SymbolSpec { n, l, kind: SymbolKind::Model { mu, center }, class: SymbolClass { m: -mu, rho: 0.0 } })
}

fn dot_sum(center: &[f64], xi: &[f64], n: usize) -> f64 {
    // <center, xi_1 + ... + xi_l>
    xi.chunks(n).map(|blk| blk.iter().zip(center).map(|(a, b)| a * b).sum::<f64>()).sum()
}

impl SymbolSpec {
    pub fn constant(n: usize, l: usize, c: Complex64) -> Self {
        SymbolSpec { n, l, kind: SymbolKind::Constant(c), class: SymbolClass { m: 0.0, rho: 0.0 } }
    }

    pub fn modulation(n: usize, l: usize, center: Vec<f64>) -> Result<Self> {
        if center.len() != n {
            return invalid("modulation center must lie in R^n");
        }
        Ok(SymbolSpec { n, l, kind: SymbolKind::Modulation { center }, class: SymbolClass { m: 0.0, rho: 0.0 } })
    }

    pub fn sampled(n: usize, l: usize, samples: SampledFunction, class: SymbolClass) -> Result<Self> {
        if samples.grid.dim != n * l {
            return invalid(format!("sampled symbol grid has dimension {}, expected nl = {}", samples.grid.dim, n * l));
        }
        Ok(SymbolSpec { n, l, kind: SymbolKind::Sampled(samples), class })
    }

    pub fn custom(n: usize, l: usize, class: SymbolClass, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        SymbolSpec { n, l, kind: SymbolKind::Custom(Arc::new(f)), class }
    }

    /// `a_k(xi) = Phi_k_hat(xi) b(2^{-k rho} xi)`, claimed in `S^{m(1-rho)}_{rho,0}`.
    pub fn piece(base: &SymbolSpec, k: i32, rho: f64) -> Self {
        SymbolSpec {
            n: base.n,
            l: base.l,
            class: SymbolClass { m: base.class.m * (1.0 - rho), rho },
            kind: SymbolKind::Piece { base: Box::new(base.clone()), k, rho },
        }
    }

    pub fn dim(&self) -> usize {
        self.n * self.l
    }

    pub fn with_class(mut self, class: SymbolClass) -> Self {
        self.class = class;
        self
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let eta: Vec<f64> = self.eta(xi);
        self.joint(xi) * self.eta_factor(&eta)
    }

    fn eta(&self, xi: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n];
        for blk in xi.chunks(self.n) {
            for (e, v) in eta.iter_mut().zip(blk) {
                *e += v;
            }
        }
        eta
    }

    /// Factor depending on the whole frequency vector.
    pub fn joint(&self, xi: &[f64]) -> Complex64 {
        match &self.kind {
            SymbolKind::Model { mu, .. } => {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                Complex64::new((1.0 + 4.0 * PI * PI * r2).powf(-0.5 * mu), 0.0)
            }
            SymbolKind::Constant(c) => *c,
            SymbolKind::Modulation { .. } => Complex64::new(1.0, 0.0),
            SymbolKind::Sampled(s) => interpolate(s, xi),
            SymbolKind::Piece { base, k, rho } => {
                let part = inhomogeneous_partition(self.dim(), *rho, (*k).max(1));
                let phi = part.phi_hat(*k, xi);
                if phi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let s = 2f64.powf(-(*k as f64) * rho);
                let scaled: Vec<f64> = xi.iter().map(|v| v * s).collect();
                base.eval(&scaled) * phi
            }
            SymbolKind::Custom(f) => f(xi),
        }
    }

    /// Factor depending only on `eta = xi_1 + ... + xi_l`.
    pub fn eta_factor(&self, eta: &[f64]) -> Complex64 {
        match &self.kind {
            SymbolKind::Model { center, .. } | SymbolKind::Modulation { center } => {
                Complex64::from_polar(1.0, -2.0 * PI * dot_sum(center, eta, self.n))
            }
            _ => Complex64::new(1.0, 0.0),
        }
    }

    /// Modulation center when the symbol is a real even envelope times a modulation.
    pub fn modulation_center(&self) -> Option<&[f64]> {
        match &self.kind {
            SymbolKind::Model { center, .. } | SymbolKind::Modulation { center } => Some(center),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            SymbolKind::Model { mu, center } => format!("model mu={mu} center={center:?} n={} l={}", self.n, self.l),
            other => format!("{other:?} n={} l={}", self.n, self.l),
        }
    }
}

fn interpolate(s: &SampledFunction, xi: &[f64]) -> Complex64 {
    let g = &s.grid;
    let h = g.spacing();
    let d = g.dim;
    let mut base = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for a in 0..d {
        let u = (xi[a] - g.origin()) / h;
        if u < 0.0 || u > (g.n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (u.floor() as usize).min(g.n - 2);
        base[a] = i;
        frac[a] = u - i as f64;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        for a in 0..d {
            let bit = (corner >> a) & 1;
            idx[a] = base[a] + bit;
            w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
        }
        if w != 0.0 {
            acc += s.values[g.ravel(&idx)] * w;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    #[test]
    fn model_value_law() {
        let s = model_symbol(1.1, 1, 2).unwrap();
        assert_eq!(s.eval(&[0.0, 0.0]), Complex64::new(1.0, 0.0));
        for xi in [[0.3, -0.2], [5.0, 1.25], [-40.0, 3.0]] {
            let v = s.eval(&xi);
            let env = (1.0 + 4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1])).powf(-0.55);
            assert!((v.norm() - env).abs() < 1e-15);
            let want = Complex64::from_polar(env, -2.0 * PI * (xi[0] + xi[1]));
            assert!((v - want).norm() < 1e-15);
        }
    }

    #[test]
    fn model_order_range() {
        assert!(model_symbol(0.0, 1, 1).is_err());
        assert!(model_symbol(1.5, 1, 1).is_err());
        assert!(model_symbol(2.0, 1, 2).is_ok());
        assert_eq!(model_symbol(0.75, 1, 1).unwrap().class, SymbolClass { m: -0.75, rho: 0.0 });
    }

    #[test]
    fn sampled_interpolation_is_exact_on_bilinear() {
        let g = make_grid(2, 4.0, 16).unwrap();
        let f = |x: &[f64]| Complex64::new(1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1], x[1]);
        let s = SymbolSpec::sampled(1, 2, SampledFunction::from_fn(g, f), SymbolClass { m: 0.0, rho: 0.0 }).unwrap();
        for xi in [[0.1, 0.2], [-3.3, 2.7], [1.0, -1.0]] {
            assert!((s.eval(&xi) - f(&xi)).norm() < 1e-12);
        }
        assert_eq!(s.eval(&[10.0, 0.0]), Complex64::new(0.0, 0.0));
    }
}
