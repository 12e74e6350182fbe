use serde::{Deserialize, Serialize};

use super::class::{symbol_class_check_on, TestFrequencies};
use super::symbol::{SymbolClass, SymbolSpec};
use crate::error::{invalid, Result};
use crate::kernels::inhomogeneous_partition;

const CLASS_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub rho: f64,
    pub k_max: i32,
    pub validity_radius: f64,
    pub supports_ok: bool,
    pub reconstruction_error: f64,
    pub reconstruction_ok: bool,
    /// Class claimed for every piece.
    pub piece_class: SymbolClass,
    pub betas: Vec<Vec<usize>>,
    /// `constants[k][b]` for piece `k` and multi-index `betas[b]`.
    pub constants: Vec<Vec<f64>>,
    /// Largest over `beta` of `max_k C / min_k C`.
    pub uniformity_ratio: f64,
    /// Largest over `beta` of `max_{k <= K} C / max_{k <= K/2} C`.
    pub growth_ratio: f64,
    /// Largest over `beta` of `C_K / C_{K-1}`.
    pub tail_ratio: f64,
    pub uniform_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub pieces: Vec<SymbolSpec>,
    pub report: DecompositionReport,
}

fn directions(dim: usize) -> Vec<Vec<f64>> {
    TestFrequencies::annulus(dim, 1.0, 2.0, 1).directions
}

/// `a_k(xi) = Phi_k_hat(xi) b(2^{-k rho} xi)` for `k = 0..=K`, with checks of
/// supports, reconstruction and uniform class constants.
pub fn decompose_symbol(b: &SymbolSpec, rho: f64, k_max: i32) -> Result<Decomposition> {
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("rho must lie in (0, 1), got {rho}"));
    }
    if k_max < 0 {
        return invalid("K must be non-negative");
    }
    let dim = b.dim();
    let part = inhomogeneous_partition(dim, rho, k_max.max(1));
    let pieces: Vec<SymbolSpec> = (0..=k_max).map(|k| SymbolSpec::piece(b, k, rho)).collect();
    let dirs = directions(dim);

    // supports: a_k vanishes off {2^{k-1} <= |xi| <= 2^{k+1}} ({|xi| <= 2} for k = 0)
    let mut supports_ok = true;
    for (k, a) in pieces.iter().enumerate() {
        let (lo, hi) = if k == 0 { (0.0, 2.0) } else { (2f64.powi(k as i32 - 1), 2f64.powi(k as i32 + 1)) };
        for u in &dirs {
            for i in 0..=400 {
                let r = 2f64.powf(k as f64 - 4.0 + 8.0 * i as f64 / 400.0);
                let xi: Vec<f64> = u.iter().map(|v| v * r).collect();
                if a.eval(&xi).norm() != 0.0 && !(lo * (1.0 - 1e-12) <= r && r <= hi * (1.0 + 1e-12)) {
                    supports_ok = false;
                }
            }
        }
    }

    // reconstruction on the validity ball
    let radius = part.validity().1.min(2f64.powf(k_max as f64 * (1.0 - rho) - 1.0));
    let mut reconstruction_error: f64 = 0.0;
    for u in &dirs {
        for i in 0..=300 {
            let r = radius * i as f64 / 300.0;
            let xi: Vec<f64> = u.iter().map(|v| v * r).collect();
            let sum = pieces.iter().enumerate().fold(num_complex::Complex64::new(0.0, 0.0), |acc, (k, a)| {
                let s = 2f64.powf(k as f64 * rho);
                let scaled: Vec<f64> = xi.iter().map(|v| v * s).collect();
                acc + a.eval(&scaled)
            });
            let want = b.eval(&xi);
            reconstruction_error = reconstruction_error.max((sum - want).norm() / want.norm().max(1.0));
        }
    }
    let reconstruction_ok = reconstruction_error <= 1e-10;

    // class constants per piece, measured on its support
    let piece_class = pieces[0].class;
    let mut betas = Vec::new();
    let mut constants = Vec::with_capacity(pieces.len());
    for (k, a) in pieces.iter().enumerate() {
        let freqs = if k == 0 {
            TestFrequencies::annulus(dim, 0.0, 2.0, 8)
        } else {
            TestFrequencies::annulus(dim, 2f64.powi(k as i32 - 1), 2f64.powi(k as i32 + 1), 16)
        };
        let rep = symbol_class_check_on(a, piece_class.m, piece_class.rho, CLASS_ORDER, &freqs)?;
        betas = rep.constants.iter().map(|c| c.beta.clone()).collect();
        constants.push(rep.constants.iter().map(|c| c.constant).collect::<Vec<f64>>());
    }
    let peak = constants.iter().flatten().cloned().fold(0.0, f64::max);
    let floor = 1e-9 * peak;
    let half = (k_max as usize).div_ceil(2);
    let (mut uniformity_ratio, mut growth_ratio, mut tail_ratio): (f64, f64, f64) = (1.0, 1.0, 1.0);
    for bi in 0..betas.len() {
        let col: Vec<f64> = constants.iter().map(|row| row[bi].max(floor)).collect();
        let hi = col.iter().cloned().fold(0.0, f64::max);
        if hi <= floor {
            continue;
        }
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        uniformity_ratio = uniformity_ratio.max(hi / lo);
        let early = col[..=half].iter().cloned().fold(0.0, f64::max);
        growth_ratio = growth_ratio.max(hi / early);
        if col.len() >= 2 {
            tail_ratio = tail_ratio.max(col[col.len() - 1] / col[col.len() - 2]);
        }
    }
    // bounded in k: no growth over the second half of the range and a settled tail
    let uniform_ok = growth_ratio <= 1.05 && tail_ratio <= 1.25;
    let report = DecompositionReport {
        rho,
        k_max,
        validity_radius: radius,
        supports_ok,
        reconstruction_error,
        reconstruction_ok,
        piece_class,
        betas,
        constants,
        uniformity_ratio,
        growth_ratio,
        tail_ratio,
        uniform_ok,
        pass: supports_ok && reconstruction_ok && uniform_ok,
    };
    Ok(Decomposition { pieces, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::model_symbol;
    use num_complex::Complex64;

    #[test]
    fn model_symbol_decomposes_uniformly() {
        // n = 1, l = 1, r = 2: b = sigma_{nl/r}, class (-1/2, 0); pieces in (-1/4, 1/2)
        let b = model_symbol(0.5, 1, 1).unwrap();
        let d = decompose_symbol(&b, 0.5, 10).unwrap();
        let r = &d.report;
        assert!((r.piece_class.m + 0.25).abs() < 1e-15 && r.piece_class.rho == 0.5);
        assert!(r.supports_ok && r.reconstruction_ok, "{r:?}");
        assert!(r.uniform_ok, "growth {} tail {}", r.growth_ratio, r.tail_ratio);
        assert!(r.pass);
        // constants settle: consecutive large-k pieces agree closely
        assert!(r.tail_ratio > 0.95);
    }

    #[test]
    fn misclassified_symbol_is_not_uniform() {
        // sigma_{1/4} claimed in order -1/2: pieces grow like 2^{k/8}
        let b = model_symbol(0.25, 1, 1).unwrap().with_class(SymbolClass { m: -0.5, rho: 0.0 });
        let d = decompose_symbol(&b, 0.5, 10).unwrap();
        assert!(d.report.supports_ok && d.report.reconstruction_ok);
        assert!(!d.report.uniform_ok);
        assert!(d.report.growth_ratio > 1.2);
    }

    #[test]
    fn constant_symbol_reconstructs_exactly() {
        let b = SymbolSpec::constant(1, 2, Complex64::new(1.0, 0.0));
        let d = decompose_symbol(&b, 0.3, 6).unwrap();
        assert!(d.report.reconstruction_error < 1e-12, "{}", d.report.reconstruction_error);
        assert!(d.report.supports_ok);
    }

    #[test]
    fn single_piece() {
        let b = model_symbol(0.5, 1, 1).unwrap();
        let d = decompose_symbol(&b, 0.5, 0).unwrap();
        assert_eq!(d.pieces.len(), 1);
        assert!(d.report.supports_ok);
        assert_eq!(d.pieces[0].eval(&[2.5]), Complex64::new(0.0, 0.0));
        assert!(decompose_symbol(&b, 0.0, 3).is_err());
    }
}
