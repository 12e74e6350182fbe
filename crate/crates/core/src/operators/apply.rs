use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use super::symbol::SymbolSpec;
use crate::error::{invalid, Error, Result};
use crate::numerics::fft::{fft_nd, zero_pad};
use crate::numerics::{Grid, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApplyOptions {
    /// Largest admissible `n * l`.
    pub max_nl: usize,
    /// Largest admissible product lattice `(2N)^{nl}`.
    pub max_lattice: u128,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self { max_nl: 3, max_lattice: 1 << 30 }
    }
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `i^k`.
fn ipow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_inputs(sigma: &SymbolSpec, fs: &[SampledFunction], opts: &ApplyOptions) -> Result<Grid> {
    if fs.len() != sigma.l {
        return invalid(format!("symbol is {}-linear but {} inputs were given", sigma.l, fs.len()));
    }
    let grid = fs[0].grid;
    if grid.dim != sigma.n {
        return invalid(format!("inputs live in R^{} but the symbol acts on R^{}", grid.dim, sigma.n));
    }
    if fs.iter().any(|f| !f.grid.same_as(&grid)) {
        return invalid("all inputs must share one grid");
    }
    let nl = sigma.dim();
    if nl > opts.max_nl {
        return Err(Error::Resource { what: "n*l".into(), requested: nl as u128, limit: opts.max_nl as u128 });
    }
    let lattice = (2 * grid.n as u128).pow(nl as u32);
    if lattice > opts.max_lattice {
        return Err(Error::Resource { what: "product frequency lattice (2N)^(nl)".into(), requested: lattice, limit: opts.max_lattice });
    }
    Ok(grid)
}

/// `f_hat` on the padded lattice `xi_k = k / (2 N h)`, `k` in `[-N, N)^n`,
/// stored with index `k + N`.
fn transform(f: &SampledFunction) -> Vec<Complex64> {
    let g = f.grid;
    let (n, d) = (g.n, g.dim);
    let m = 2 * n;
    let mut data = zero_pad(&f.values, d, n);
    fft_nd(&mut data, d, m, FftDirection::Forward);
    let hn = g.spacing().powi(d as i32);
    let mut out = vec![ZERO; data.len()];
    let mut idx = vec![0usize; d];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..d).rev() {
            idx[a] = rem % m;
            rem /= m;
        }
        // shifted index -> signed k -> fft bin
        let mut src = 0usize;
        let mut ksum = 0i64;
        for &i in &idx {
            let k = i as i64 - n as i64;
            ksum += k;
            src = src * m + k.rem_euclid(m as i64) as usize;
        }
        // exp(-2 pi i x0 . xi_k) with x0 = -L and L * dxi = 1/4
        *o = data[src] * ipow(ksum) * hn;
    }
    out
}

/// `T_sigma(f_1, ..., f_l)` on the input grid by diagonal summation over
/// `eta = xi_1 + ... + xi_l`.
pub fn apply_multiplier(sigma: &SymbolSpec, fs: &[SampledFunction]) -> Result<SampledFunction> {
    apply_multiplier_with(sigma, fs, ApplyOptions::default())
}

pub fn apply_multiplier_with(sigma: &SymbolSpec, fs: &[SampledFunction], opts: ApplyOptions) -> Result<SampledFunction> {
    let grid = check_inputs(sigma, fs, &opts)?;
    let (n, l, d) = (grid.n as i64, sigma.l, sigma.n);
    let m = 2 * n;
    let dxi = 1.0 / (m as f64 * grid.spacing());
    let hats: Vec<Vec<Complex64>> = fs.par_iter().map(transform).collect();

    // eta bins per axis: s in [-l N, l (N - 1)]
    let s_lo = -(l as i64) * n;
    let side = (l as i64 * (m - 1) + 1) as usize;
    let bins = side.pow(d as u32);
    let ctx = Diag { sigma, hats: &hats, n, m, d, l, dxi };

    let h: Vec<Complex64> = (0..bins)
        .into_par_iter()
        .map(|b| {
            let mut s = vec![0i64; d];
            let mut rem = b;
            for a in (0..d).rev() {
                s[a] = (rem % side) as i64 + s_lo;
                rem /= side;
            }
            let eta: Vec<f64> = s.iter().map(|&v| v as f64 * dxi).collect();
            let mut xi = vec![0.0; d * l];
            let inner = ctx.sum(0, &mut s.clone(), &mut xi, Complex64::new(1.0, 0.0));
            let ssum: i64 = s.iter().sum();
            // exp(2 pi i x0 . eta) = (-i)^{sum s}
            inner * sigma.eta_factor(&eta) * ipow(-ssum)
        })
        .collect();

    let mu = m as usize;
    let mut folded = vec![ZERO; mu.pow(d as u32)];
    let mut s = vec![0usize; d];
    for (b, v) in h.iter().enumerate() {
        let mut rem = b;
        for a in (0..d).rev() {
            s[a] = ((rem % side) as i64 + s_lo).rem_euclid(m) as usize;
            rem /= side;
        }
        let target = s.iter().fold(0, |acc, &i| acc * mu + i);
        folded[target] += v;
    }
    fft_nd(&mut folded, d, mu, FftDirection::Inverse);
    let scale = dxi.powi((d * l) as i32);
    let nu = n as usize;
    let mut out = Vec::with_capacity(grid.len());
    let mut idx = vec![0usize; d];
    for flat in 0..grid.len() {
        grid.unravel(flat, &mut idx);
        let src = idx.iter().fold(0, |acc, &i| acc * mu + i);
        out.push(folded[src] * scale);
    }
    debug_assert_eq!(out.len(), nu.pow(d as u32));
    SampledFunction::new(grid, out)
}

struct Diag<'a> {
    sigma: &'a SymbolSpec,
    hats: &'a [Vec<Complex64>],
    n: i64,
    m: i64,
    d: usize,
    l: usize,
    dxi: f64,
}

impl Diag<'_> {
    fn index(&self, k: &[i64]) -> usize {
        k.iter().fold(0usize, |acc, &v| acc * self.m as usize + (v + self.n) as usize)
    }

    /// Sum over `k_j, ..., k_{l-1}` with `k_j + ... + k_{l-1} = rem`.
    fn sum(&self, j: usize, rem: &mut [i64], xi: &mut [f64], prod: Complex64) -> Complex64 {
        let d = self.d;
        if j + 1 == self.l {
            for a in 0..d {
                xi[j * d + a] = rem[a] as f64 * self.dxi;
            }
            let v = self.hats[j][self.index(rem)];
            return self.sigma.joint(xi) * prod * v;
        }
        let c = (self.l - j - 1) as i64;
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for a in 0..d {
            lo[a] = (-self.n).max(rem[a] - c * (self.n - 1));
            hi[a] = (self.n - 1).min(rem[a] + c * self.n);
            if lo[a] > hi[a] {
                return ZERO;
            }
        }
        let mut k = lo.clone();
        let mut acc = ZERO;
        loop {
            let v = self.hats[j][self.index(&k)];
            if v != ZERO {
                for a in 0..d {
                    xi[j * d + a] = k[a] as f64 * self.dxi;
                    rem[a] -= k[a];
                }
                acc += self.sum(j + 1, rem, xi, prod * v);
                for a in 0..d {
                    rem[a] += k[a];
                }
            }
            // odometer, last axis fastest
            let mut a = d;
            loop {
                if a == 0 {
                    return acc;
                }
                a -= 1;
                if k[a] < hi[a] {
                    k[a] += 1;
                    break;
                }
                k[a] = lo[a];
            }
        }
    }
}

/// Reference evaluation: direct transforms and a full sum over the product
/// lattice for every output point. Intended for grids with `N <= 16`.
pub fn apply_multiplier_naive(sigma: &SymbolSpec, fs: &[SampledFunction]) -> Result<SampledFunction> {
    let grid = check_inputs(sigma, fs, &ApplyOptions::default())?;
    let (n, d, l) = (grid.n, sigma.n, sigma.l);
    let m = 2 * n;
    let work = (grid.len() as u128) * (m as u128).pow((d * l) as u32);
    if work > 1 << 28 {
        return Err(Error::Resource { what: "naive multiplier work".into(), requested: work, limit: 1 << 28 });
    }
    let h = grid.spacing();
    let dxi = 1.0 / (m as f64 * h);
    let freq_count = m.pow(d as u32);
    let freq = |flat: usize| -> Vec<f64> {
        let mut out = vec![0.0; d];
        let mut rem = flat;
        for a in (0..d).rev() {
            out[a] = ((rem % m) as f64 - n as f64) * dxi;
            rem /= m;
        }
        out
    };
    let hats: Vec<Vec<Complex64>> = fs
        .iter()
        .map(|f| {
            (0..freq_count)
                .map(|kf| {
                    let xi = freq(kf);
                    let mut acc = ZERO;
                    for (i, v) in f.values.iter().enumerate() {
                        let x = grid.point(i);
                        let ph: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                        acc += v * Complex64::from_polar(1.0, -2.0 * PI * ph);
                    }
                    acc * h.powi(d as i32)
                })
                .collect()
        })
        .collect();
    let total = freq_count.pow(l as u32);
    let mut terms = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut ks = vec![0usize; l];
        for j in (0..l).rev() {
            ks[j] = rem % freq_count;
            rem /= freq_count;
        }
        let mut xi = Vec::with_capacity(d * l);
        let mut prod = Complex64::new(1.0, 0.0);
        for (j, &kf) in ks.iter().enumerate() {
            xi.extend(freq(kf));
            prod *= hats[j][kf];
        }
        let mut eta = vec![0.0; d];
        for blk in xi.chunks(d) {
            for (e, v) in eta.iter_mut().zip(blk) {
                *e += v;
            }
        }
        terms.push((eta, sigma.eval(&xi) * prod));
    }
    let scale = dxi.powi((d * l) as i32);
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let mut acc = ZERO;
            for (eta, t) in &terms {
                let ph: f64 = x.iter().zip(eta).map(|(a, b)| a * b).sum();
                acc += t * Complex64::from_polar(1.0, 2.0 * PI * ph);
            }
            acc * scale
        })
        .collect();
    SampledFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;
    use crate::operators::symbol::{model_symbol, SymbolClass};

    fn gauss(c: f64, w: f64) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| (-PI * x.iter().map(|v| (v - c) * (v - c)).sum::<f64>() / (w * w)).exp()
    }

    fn rel_err(a: &SampledFunction, b: &SampledFunction) -> f64 {
        let scale = b.max_abs().max(1e-300);
        a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn identity_symbol_gives_product() {
        let g = make_grid(1, 4.0, 128).unwrap();
        for l in 1..=3 {
            let fs: Vec<SampledFunction> =
                (0..l).map(|j| SampledFunction::from_real_fn(g, gauss(0.2 * j as f64, 0.6))).collect();
            let sigma = SymbolSpec::constant(1, l, Complex64::new(1.0, 0.0));
            let out = apply_multiplier(&sigma, &fs).unwrap();
            let want = SampledFunction::from_fn(g, |x| {
                Complex64::new((0..l).map(|j| gauss(0.2 * j as f64, 0.6)(x)).product(), 0.0)
            });
            assert!(rel_err(&out, &want) < 1e-8, "l={l}: {}", rel_err(&out, &want));
        }
    }

    #[test]
    fn modulation_translates() {
        for dim in [1, 2] {
            let g = make_grid(dim, 4.0, if dim == 1 { 128 } else { 32 }).unwrap();
            let f = SampledFunction::from_real_fn(g, gauss(-0.5, 0.7));
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            let sigma = SymbolSpec::modulation(dim, 1, e.clone()).unwrap();
            let out = apply_multiplier(&sigma, &[f]).unwrap();
            let want = SampledFunction::from_real_fn(g, |x| {
                let shifted: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a - b).collect();
                gauss(-0.5, 0.7)(&shifted)
            });
            assert!(rel_err(&out, &want) < 1e-8, "dim={dim}");
        }
    }

    #[test]
    fn agrees_with_naive_sum() {
        let cases: [(usize, usize, f64); 4] = [(1, 1, 0.75), (1, 2, 1.1), (2, 1, 1.5), (1, 3, 2.0)];
        for (n, l, mu) in cases {
            let g = make_grid(n, 2.0, if n * l == 3 { 8 } else { 16 }).unwrap();
            let fs: Vec<SampledFunction> = (0..l)
                .map(|j| {
                    SampledFunction::from_fn(g, |x| {
                        let r = gauss(0.1 * j as f64, 0.8)(x);
                        Complex64::new(r, 0.3 * r * x[0])
                    })
                })
                .collect();
            let sigma = model_symbol(mu, n, l).unwrap();
            let fast = apply_multiplier(&sigma, &fs).unwrap();
            let slow = apply_multiplier_naive(&sigma, &fs).unwrap();
            assert!(rel_err(&fast, &slow) < 1e-10, "n={n} l={l}: {}", rel_err(&fast, &slow));
        }
    }

    #[test]
    fn real_even_symbol_preserves_even_inputs() {
        let g = make_grid(1, 4.0, 64).unwrap();
        let sigma = SymbolSpec::custom(1, 1, SymbolClass { m: -1.0, rho: 0.0 }, |xi| {
            Complex64::new(1.0 / (1.0 + xi[0] * xi[0]), 0.0)
        });
        // grid points are -L + i h, so even symmetry is x_i <-> x_{N-i}
        let f = SampledFunction::from_real_fn(g, |x| (-4.0 * x[0] * x[0]).exp());
        let out = apply_multiplier(&sigma, &[f]).unwrap();
        let n = g.n;
        for i in 1..n {
            assert!(out.values[i].im.abs() < 1e-10 * out.max_abs());
            assert!((out.values[i] - out.values[n - i]).norm() < 1e-10 * out.max_abs());
        }
    }

    #[test]
    fn budgets_and_mismatch() {
        let g = make_grid(1, 4.0, 64).unwrap();
        let f = SampledFunction::from_real_fn(g, gauss(0.0, 1.0));
        let sigma = model_symbol(1.0, 1, 2).unwrap();
        assert!(matches!(apply_multiplier(&sigma, &[f.clone()]), Err(Error::Validation(_))));
        let tight = ApplyOptions { max_nl: 3, max_lattice: 1000 };
        assert!(matches!(apply_multiplier_with(&sigma, &[f.clone(), f.clone()], tight), Err(Error::Resource { .. })));
        let four = model_symbol(1.0, 1, 4).unwrap();
        assert!(matches!(apply_multiplier(&four, &vec![f.clone(); 4]), Err(Error::Resource { .. })));
        let g2 = make_grid(1, 4.0, 32).unwrap();
        let f2 = SampledFunction::from_real_fn(g2, gauss(0.0, 1.0));
        assert!(matches!(apply_multiplier(&sigma, &[f, f2]), Err(Error::Validation(_))));
    }
}
