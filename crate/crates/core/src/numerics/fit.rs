use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares line through `(ln eps, ln value)`.
pub fn fit_loglog(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    if pairs.len() < 3 {
        return invalid(format!("log-log fit needs at least 3 pairs, got {}", pairs.len()));
    }
    if let Some(p) = pairs.iter().find(|(e, v)| !(*e > 0.0 && *v > 0.0 && e.is_finite() && v.is_finite())) {
        return invalid(format!("log-log fit needs positive finite entries, got {p:?}"));
    }
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("log-log fit needs at least two distinct scales");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(LogLogFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pairs: Vec<_> = (3..=8).map(|k| (2f64.powi(-k), 2f64.powi(-2 * k))).collect();
        let fit = fit_loglog(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c: f64 = rng.gen_range(0.1..10.0);
            let pairs: Vec<_> = (3..=10)
                .map(|k| {
                    let e = 2f64.powi(-k);
                    (e, c * e.powf(0.8) * (1.0 + rng.gen_range(-0.01..0.01)))
                })
                .collect();
            let fit = fit_loglog(&pairs).unwrap();
            assert!((fit.slope - 0.8).abs() < 0.05, "{}", fit.slope);
        }
    }

    #[test]
    fn too_few_pairs() {
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }
}
