use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::symbol::SymbolSpec;
use crate::error::{invalid, Result};
use crate::kernels::PartitionSpec;
use crate::numerics::fft::{fft_nd, signed_index, zero_pad};
use crate::numerics::{make_grid, SampledFunction};

/// `(int (1 + 4 pi^2 |x|^2)^s |f_hat(x)|^2 dx)^{1/2}`.
pub fn sobolev_norm(f: &SampledFunction, s: f64) -> Result<f64> {
    sobolev_norm_shifted(f, s, &vec![0.0; f.grid.dim])
}

/// Same with the weight centred at `shift`: `(1 + 4 pi^2 |x - shift|^2)^s`.
/// This is the norm of `f(xi) exp(-2 pi i <shift, xi>)`.
pub fn sobolev_norm_shifted(f: &SampledFunction, s: f64, shift: &[f64]) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return invalid(format!("Sobolev order must be a finite s >= 0, got {s}"));
    }
    let g = f.grid;
    if shift.len() != g.dim {
        return invalid("shift must have the grid dimension");
    }
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let edge = f.boundary_max();
    if edge > 1e-10 * peak {
        return invalid(format!("function does not decay at the grid boundary (|f| = {edge:e} vs max {peak:e})"));
    }
    let (n, d) = (g.n, g.dim);
    let m = 2 * n;
    let mut data = zero_pad(&f.values, d, n);
    fft_nd(&mut data, d, m, FftDirection::Forward);
    let h = g.spacing();
    let dxi = 1.0 / (m as f64 * h);
    let total: f64 = data
        .par_iter()
        .enumerate()
        .map(|(flat, v)| {
            let mut rem = flat;
            let mut r2 = 0.0;
            for a in (0..d).rev() {
                let x = signed_index(rem % m, m) as f64 * dxi - shift[a];
                r2 += x * x;
                rem /= m;
            }
            let w = if s == 0.0 { 1.0 } else { (1.0 + 4.0 * PI * PI * r2).powf(s) };
            w * v.norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((total * h.powi(2 * d as i32) * dxi.powi(d as i32)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderNorm {
    pub s: f64,
    pub ks: Vec<i32>,
    pub values: Vec<f64>,
    pub sup: f64,
    pub max_min_ratio: f64,
}

impl HormanderNorm {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value\n");
        for (k, v) in self.ks.iter().zip(&self.values) {
            out.push_str(&format!("{k},{v:e}\n"));
        }
        out
    }
}

/// `max_k || sigma(2^k .) Psi_hat ||_{L^2_s}` over `k_min..=k_max`.
///
/// A modulation factor of the symbol is moved into the Sobolev weight, so
/// large `k` need no extra resolution.
pub fn hormander_sup_norm(sigma: &SymbolSpec, s: f64, k_min: i32, k_max: i32) -> Result<HormanderNorm> {
    if k_min > k_max {
        return invalid("empty k range");
    }
    let d = sigma.dim();
    let points = match d {
        1 => 128,
        2 => 64,
        3 => 32,
        _ => return invalid(format!("Hörmander norm supports nl <= 3, got {d}")),
    };
    let grid = make_grid(d, 2.5, points)?;
    let center = sigma.modulation_center().map(|c| c.to_vec());
    let ks: Vec<i32> = (k_min..=k_max).collect();
    let values = ks
        .iter()
        .map(|&k| {
            let scale = 2f64.powi(k);
            let g = SampledFunction::from_fn(grid, |xi| {
                let psi = PartitionSpec::psi_hat(xi);
                if psi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let scaled: Vec<f64> = xi.iter().map(|v| v * scale).collect();
                let v = if center.is_some() { sigma.joint(&scaled) } else { sigma.eval(&scaled) };
                v * psi
            });
            let shift: Vec<f64> = match &center {
                Some(c) => (0..d).map(|i| scale * c[i % sigma.n]).collect(),
                None => vec![0.0; d],
            };
            sobolev_norm_shifted(&g, s, &shift)
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(HormanderNorm { s, ks, values, sup, max_min_ratio: sup / min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fit_loglog, quad_interval, QuadOptions};
    use crate::operators::model_symbol;

    #[test]
    fn gaussian_l2_and_h1() {
        let g = make_grid(1, 8.0, 512).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-PI * x[0] * x[0]).exp());
        let s0 = sobolev_norm(&f, 0.0).unwrap();
        assert!((s0 - 2f64.powf(-0.25)).abs() < 1e-4);
        let s1 = sobolev_norm(&f, 1.0).unwrap();
        assert!(s1 >= s0);
        let exact = quad_interval(
            |xi| (1.0 + 4.0 * PI * PI * xi * xi) * (-2.0 * PI * xi * xi).exp(),
            -10.0,
            10.0,
            &[],
            QuadOptions::default(),
        )
        .unwrap()
        .sqrt();
        assert!((s1 - exact).abs() < 1e-4 * exact);
    }

    #[test]
    fn shifted_weight_matches_modulated_input() {
        let g = make_grid(1, 8.0, 1024).unwrap();
        let a = 3.0;
        let f = SampledFunction::from_real_fn(g, |x| (-PI * x[0] * x[0]).exp());
        let fm = SampledFunction::from_fn(g, |x| Complex64::from_polar((-PI * x[0] * x[0]).exp(), -2.0 * PI * a * x[0]));
        let direct = sobolev_norm(&fm, 1.5).unwrap();
        let shifted = sobolev_norm_shifted(&f, 1.5, &[a]).unwrap();
        assert!((direct - shifted).abs() < 1e-8 * direct);
    }

    #[test]
    fn boundary_check() {
        let g = make_grid(1, 2.0, 64).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        assert!(sobolev_norm(&f, 0.0).is_err());
        assert!(sobolev_norm(&f, -1.0).is_err());
    }

    #[test]
    fn identity_symbol_gives_psi_norm() {
        let sigma = SymbolSpec::constant(1, 1, Complex64::new(1.0, 0.0));
        let h = hormander_sup_norm(&sigma, 0.0, -4, 4).unwrap();
        let psi2 = quad_interval(
            |x| PartitionSpec::psi_hat(&[x]).powi(2),
            -2.5,
            2.5,
            &[],
            QuadOptions::default(),
        )
        .unwrap()
        .sqrt();
        for v in &h.values {
            assert!((v - psi2).abs() < 1e-6 * psi2, "{v} vs {psi2}");
        }
    }

    #[test]
    fn model_symbol_uniform_and_decaying() {
        for (n, l, mu) in [(1, 1, 0.75), (1, 2, 1.1), (1, 1, 0.5)] {
            let sigma = model_symbol(mu, n, l).unwrap();
            let at_s = hormander_sup_norm(&sigma, mu, -8, 8).unwrap();
            assert!(at_s.max_min_ratio <= 3.0, "n={n} l={l}: ratio {}", at_s.max_min_ratio);
            for w in at_s.values.windows(2).skip(10) {
                assert!(w[1] / w[0] <= 2.0 && w[0] / w[1] <= 2.0);
            }
            let wide = hormander_sup_norm(&sigma, mu, -12, 12).unwrap();
            assert!((wide.sup / at_s.sup - 1.0).abs() <= 0.05);

            let flat = hormander_sup_norm(&sigma, 0.0, 4, 8).unwrap();
            let pairs: Vec<(f64, f64)> = flat.ks.iter().zip(&flat.values).map(|(k, v)| (2f64.powi(*k), *v)).collect();
            let fit = fit_loglog(&pairs).unwrap();
            assert!((fit.slope + mu).abs() <= 0.1 * mu, "n={n} l={l}: slope {}", fit.slope);
        }
    }
}
