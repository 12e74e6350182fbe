use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const STEP: f64 = 0.1;
const TAIL: f64 = 60.0;
const AGREE: f64 = 1e-11;

fn normalizer(t: f64) -> f64 {
    1.0 / ((4.0 * std::f64::consts::PI).powf(0.5 * t) * libm::tgamma(0.5 * t))
}

fn trapezoid(t: f64, dim: usize, r: f64, lo: f64, hi: f64, h: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let a = pi * r * r;
    let c = 0.5 * (t - dim as f64);
    let m = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let u = lo + i as f64 * h;
        let v = (-a * (-u).exp() - u.exp() / (4.0 * pi) + c * u).exp();
        sum += if i == 0 || i == m { 0.5 * v } else { v };
    }
    sum * h
}

/// `G_t(r)` by the subordinated integral
/// `G_t(r) = c_t * int exp(-pi r^2 e^{-u} - e^u/(4 pi) + u (t - D)/2) du`.
pub fn bessel_value(t: f64, dim: usize, r: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) || dim == 0 {
        return invalid(format!("bessel kernel needs t > 0 and D >= 1, got t={t}, D={dim}"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("bessel kernel radius must be positive and finite, got {r}"));
    }
    let pi = std::f64::consts::PI;
    let lo = (pi * r * r / TAIL).ln() - 0.5 * (dim as f64 - t).abs().max(1.0) * TAIL.ln();
    let hi = (4.0 * pi * TAIL).ln() + (0.5 * (t - dim as f64)).max(0.0) * 2.0;
    if hi <= lo {
        return Ok(0.0);
    }
    let coarse = trapezoid(t, dim, r, lo, hi, STEP);
    let fine = trapezoid(t, dim, r, lo, hi, 0.5 * STEP);
    if !(fine.is_finite() && (fine - coarse).abs() <= AGREE * fine.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Accuracy { context: format!("bessel kernel t={t} D={dim} r={r}"), previous: coarse, last: fine });
    }
    Ok(normalizer(t) * fine)
}

/// `G_t` at every radius, evaluated in parallel.
pub fn bessel_kernel(t: f64, dim: usize, radii: &[f64]) -> Result<Vec<f64>> {
    radii.par_iter().map(|&r| bessel_value(t, dim, r)).collect()
}

/// Leading small-radius behaviour of `G_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Leading {
    /// `coefficient * r^{-(D - t)}`.
    Power { coefficient: f64, exponent: f64 },
    /// `coefficient * ln(1/r)`.
    Log { coefficient: f64 },
    /// Bounded at the origin.
    Bounded,
}

pub fn bessel_leading(t: f64, dim: usize) -> Leading {
    let d = dim as f64;
    let pi = std::f64::consts::PI;
    if (t - d).abs() < 1e-12 {
        Leading::Log { coefficient: 2.0 * normalizer(d) }
    } else if t < d {
        Leading::Power {
            coefficient: normalizer(t) * pi.powf(0.5 * (t - d)) * libm::tgamma(0.5 * (d - t)),
            exponent: t - d,
        }
    } else {
        Leading::Bounded
    }
}

/// Parameters of the truncated lattice Fourier sum used as an independent check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumOptions {
    /// Frequency lattice spacing.
    pub spacing: f64,
    /// Gaussian window width in frequency.
    pub window: f64,
}

impl LatticeSumOptions {
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            1 => Self { spacing: 0.05, window: 3000.0 },
            _ => Self { spacing: 0.1, window: 50.0 },
        }
    }
}

/// `sum_k spacing^D (1 + 4 pi^2 |spacing k|^2)^{-t/2} exp(-|spacing k|^2 / W^2) cos(2 pi r spacing k_1)`.
///
/// Supported for D in {1, 2}. Cost grows like `(W / spacing)^D` per radius.
pub fn bessel_lattice_sum(t: f64, dim: usize, radii: &[f64], opts: LatticeSumOptions) -> Result<Vec<f64>> {
    if !(1..=2).contains(&dim) {
        return invalid(format!("lattice sum is implemented for D = 1, 2, got {dim}"));
    }
    let pi = std::f64::consts::PI;
    let d = opts.spacing;
    let kmax = (6.0 * opts.window / d).ceil() as i64;
    let weight = |k2: f64| {
        let s2 = d * d * k2;
        (1.0 + 4.0 * pi * pi * s2).powf(-0.5 * t) * (-s2 / (opts.window * opts.window)).exp()
    };
    // radial part over k_2 (D = 2) is independent of r
    let column: Vec<f64> = (0..=kmax)
        .into_par_iter()
        .map(|k1| {
            let k1 = k1 as f64;
            if dim == 1 {
                weight(k1 * k1)
            } else {
                let mut s = weight(k1 * k1);
                for k2 in 1..=kmax {
                    let k2 = k2 as f64;
                    s += 2.0 * weight(k1 * k1 + k2 * k2);
                }
                s
            }
        })
        .collect();
    Ok(radii
        .par_iter()
        .map(|&r| {
            let mut s = column[0];
            for (k1, c) in column.iter().enumerate().skip(1) {
                s += 2.0 * c * (2.0 * pi * r * d * k1 as f64).cos();
            }
            s * d.powi(dim as i32)
        })
        .collect())
}

/// Log–log cubic interpolant of `G_t` on `[r_min, r_max]` with the leading
/// term used below `r_min` and zero above `r_max`.
#[derive(Debug, Clone)]
pub struct BesselTable {
    t: f64,
    dim: usize,
    log_min: f64,
    step: f64,
    log_values: Vec<f64>,
    leading: Leading,
}

impl BesselTable {
    pub fn new(t: f64, dim: usize) -> Result<Self> {
        Self::with_range(t, dim, 1e-12, 40.0, 64)
    }

    pub fn with_range(t: f64, dim: usize, r_min: f64, r_max: f64, per_decade: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || per_decade < 4 {
            return invalid("bessel table needs 0 < r_min < r_max and at least 4 nodes per decade");
        }
        let log_min = r_min.ln();
        let decades = (r_max / r_min).log10();
        let m = (decades * per_decade as f64).ceil() as usize;
        let step = (r_max.ln() - log_min) / m as f64;
        let radii: Vec<f64> = (0..=m).map(|i| (log_min + i as f64 * step).exp()).collect();
        let values = bessel_kernel(t, dim, &radii)?;
        if let Some(bad) = values.iter().position(|v| *v <= 0.0) {
            return Err(Error::Accuracy {
                context: format!("bessel table t={t} D={dim} non-positive at r={}", radii[bad]),
                previous: 0.0,
                last: values[bad],
            });
        }
        Ok(Self { t, dim, log_min, step, log_values: values.iter().map(|v| v.ln()).collect(), leading: bessel_leading(t, dim) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_min(&self) -> f64 {
        self.log_min.exp()
    }

    pub fn r_max(&self) -> f64 {
        (self.log_min + self.step * (self.log_values.len() - 1) as f64).exp()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let m = self.log_values.len() - 1;
        if r <= 0.0 {
            return match self.leading {
                Leading::Bounded => self.log_values[0].exp(),
                _ => f64::INFINITY,
            };
        }
        let x = (r.ln() - self.log_min) / self.step;
        if x < 0.0 {
            let g0 = self.log_values[0].exp();
            let r0 = self.r_min();
            return match self.leading {
                Leading::Power { exponent, .. } => g0 * (r / r0).powf(exponent),
                Leading::Log { coefficient } => g0 + coefficient * (r0 / r).ln(),
                Leading::Bounded => g0,
            };
        }
        if x > m as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(m - 1);
        let s = x - i as f64;
        let y = |j: isize| {
            let j = j.clamp(0, m as isize) as usize;
            self.log_values[j]
        };
        let (p0, p1, p2, p3) = (y(i as isize - 1), y(i as isize), y(i as isize + 1), y(i as isize + 2));
        // Catmull-Rom
        let v = p1
            + 0.5
                * s
                * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)));
        v.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fit_loglog;
    use std::f64::consts::PI;

    fn logspace(a: f64, b: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| (a.ln() + (b / a).ln() * i as f64 / (m - 1) as f64).exp()).collect()
    }

    #[test]
    fn closed_forms() {
        let radii = logspace(1e-3, 2.0, 25);
        // D=1 t=2: e^{-r}/2; D=2 t=3: e^{-r}/(2 pi); D=3 t=2: e^{-r}/(4 pi r); D=3 t=4: e^{-r}/(8 pi)
        let cases: [(usize, f64, fn(f64) -> f64); 4] = [
            (1, 2.0, |r| 0.5 * (-r).exp()),
            (2, 3.0, |r| (-r).exp() / (2.0 * PI)),
            (3, 2.0, |r| (-r).exp() / (4.0 * PI * r)),
            (3, 4.0, |r| (-r).exp() / (8.0 * PI)),
        ];
        for (dim, t, exact) in cases {
            let got = bessel_kernel(t, dim, &radii).unwrap();
            for (r, g) in radii.iter().zip(&got) {
                let e = exact(*r);
                assert!((g - e).abs() <= 1e-9 * e, "D={dim} t={t} r={r}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn lattice_sum_agrees_1d() {
        let radii = logspace(1e-3, 1.0, 7);
        let opts = LatticeSumOptions::for_dim(1);
        for t in [0.5, 0.75, 1.0, 1.5] {
            let a = bessel_kernel(t, 1, &radii).unwrap();
            let b = bessel_lattice_sum(t, 1, &radii, opts).unwrap();
            for i in 0..radii.len() {
                assert!((a[i] - b[i]).abs() <= 0.01 * a[i], "t={t} r={}: {} vs {}", radii[i], a[i], b[i]);
            }
        }
    }

    #[test]
    fn lattice_sum_agrees_2d() {
        let radii = logspace(0.1, 1.0, 4);
        let opts = LatticeSumOptions::for_dim(2);
        for t in [1.1, 1.5, 2.0] {
            let a = bessel_kernel(t, 2, &radii).unwrap();
            let b = bessel_lattice_sum(t, 2, &radii, opts).unwrap();
            for i in 0..radii.len() {
                assert!((a[i] - b[i]).abs() <= 0.01 * a[i], "t={t} r={}: {} vs {}", radii[i], a[i], b[i]);
            }
        }
    }

    #[test]
    fn homogeneous_ratio_bounded() {
        let radii = logspace(1e-3, 1e-2, 20);
        for (dim, t) in [(2, 1.1), (2, 1.5), (3, 2.0)] {
            let g = bessel_kernel(t, dim, &radii).unwrap();
            let ratios: Vec<f64> = radii.iter().zip(&g).map(|(r, v)| v * r.powf(dim as f64 - t)).collect();
            let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            assert!(hi / lo < 1.1, "D={dim} t={t}: {lo}..{hi}");
        }
        for dim in [1, 2] {
            let g = bessel_kernel(dim as f64, dim, &radii).unwrap();
            let ratios: Vec<f64> = radii.iter().zip(&g).map(|(r, v)| v / (2.0 / r).ln()).collect();
            let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            assert!(hi / lo < 1.1, "D={dim}: {lo}..{hi}");
        }
    }

    #[test]
    fn remainder_after_leading_term_converges() {
        // G_t - A r^{t-D} tends to a finite limit when D - t < 1
        for (dim, t) in [(1, 0.75), (1, 0.9), (2, 1.5), (2, 1.8)] {
            let Leading::Power { coefficient, exponent } = bessel_leading(t, dim) else { panic!() };
            let rest = |r: f64| bessel_value(t, dim, r).unwrap() - coefficient * r.powf(exponent);
            let (a, b) = (rest(1e-8), rest(1e-10));
            assert!((a - b).abs() < 1e-4 * a.abs().max(1e-3), "D={dim} t={t}: {a} {b}");
        }
        for (dim, t) in [(2, 1.1), (3, 2.0), (3, 2.25)] {
            let Leading::Power { coefficient, exponent } = bessel_leading(t, dim) else { panic!() };
            let r = 1e-10;
            let g = bessel_value(t, dim, r).unwrap();
            assert!((g / (coefficient * r.powf(exponent)) - 1.0).abs() < 1e-3, "D={dim} t={t}");
        }
        for dim in [1, 2] {
            let Leading::Log { coefficient } = bessel_leading(dim as f64, dim) else { panic!() };
            let (r1, r2) = (1e-12, 1e-10);
            let g1 = bessel_value(dim as f64, dim, r1).unwrap();
            let g2 = bessel_value(dim as f64, dim, r2).unwrap();
            let c = (g1 - g2) / (r2 / r1).ln();
            assert!((c / coefficient - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn deep_window_slopes() {
        let radii = logspace(1e-12, 1e-8, 12);
        for (dim, t) in [(1, 0.6), (1, 0.75), (2, 1.1), (2, 1.2), (2, 1.5), (2, 1.8), (3, 1.8), (3, 2.25), (3, 2.7)] {
            let g = bessel_kernel(t, dim, &radii).unwrap();
            let pairs: Vec<(f64, f64)> = radii.iter().copied().zip(g).collect();
            let fit = fit_loglog(&pairs).unwrap();
            let want = -(dim as f64 - t);
            assert!((fit.slope - want).abs() <= 0.05 * want.abs(), "D={dim} t={t}: {}", fit.slope);
        }
    }

    #[test]
    fn table_matches_direct() {
        let table = BesselTable::new(0.75, 1).unwrap();
        for r in logspace(1e-6, 10.0, 37) {
            let direct = bessel_value(0.75, 1, r).unwrap();
            assert!((table.eval(r) / direct - 1.0).abs() < 1e-5, "r={r}");
        }
        let below = table.eval(1e-14);
        let lead = match bessel_leading(0.75, 1) {
            Leading::Power { coefficient, exponent } => coefficient * 1e-14f64.powf(exponent),
            _ => unreachable!(),
        };
        assert!((below / lead - 1.0).abs() < 1e-3);
        assert_eq!(table.eval(100.0), 0.0);
    }

    #[test]
    fn positivity_and_errors() {
        let g = bessel_kernel(1.1, 2, &logspace(1e-3, 2.0, 30)).unwrap();
        assert!(g.iter().all(|v| *v > 0.0));
        assert!(bessel_value(0.0, 1, 0.5).is_err());
        assert!(bessel_value(1.0, 1, 0.0).is_err());
        assert!(bessel_value(1.0, 0, 0.5).is_err());
    }
}
