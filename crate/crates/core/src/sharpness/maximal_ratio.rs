use serde::{Deserialize, Serialize};

use super::bump::{epsilon_grid, sample_bump, GridPolicy};
use super::pointwise::e1;
use crate::error::{invalid, Result};
use crate::maximal::{multi_maximal_r_at, sharp_maximal_at};
use crate::numerics::{fit_loglog, FamilySpec, LogLogFit, SampledFunction};
use crate::operators::{apply_multiplier_with, model_symbol, ApplyOptions};

const REAL_TOL: f64 = 1e-10;

/// `M^#_{r/l}(T_{sigma_mu} f)(x) / M_q(f)(x)` at each probe, on an anchored
/// dyadic family with sides from `4h` up to half the grid half-width.
pub fn maximal_ratio_sample(
    mu: f64,
    n: usize,
    l: usize,
    r: f64,
    q: f64,
    fs: &[SampledFunction],
    probes: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if !(r > 1.0 && r <= 2.0) {
        return invalid(format!("r must satisfy 1 < r <= 2, got {r}"));
    }
    if !(q > 0.0) {
        return invalid(format!("q must be positive, got {q}"));
    }
    let nl = (n * l) as f64;
    if (mu - nl / r).abs() > 1e-12 * nl {
        return invalid(format!("mu must equal nl/r = {}, got {mu}", nl / r));
    }
    let Some(first) = fs.first() else { return invalid("need at least one input") };
    let grid = first.grid;
    let (lo, hi) = grid.domain();
    let margin = 4.0 * grid.spacing();
    if let Some(x) = probes.iter().find(|x| x.len() != n || x.iter().any(|&c| c < lo + margin || c > hi - margin)) {
        return invalid(format!("probe {x:?} is not inside the grid interior"));
    }
    let sigma = model_symbol(mu, n, l)?;
    let opts = ApplyOptions { max_lattice: GridPolicy::default().max_lattice, ..ApplyOptions::default() };
    let mut t = apply_multiplier_with(&sigma, fs, opts)?;
    let real_inputs = fs.iter().all(|f| f.values.iter().all(|v| v.im == 0.0));
    if real_inputs && t.is_real(REAL_TOL) {
        t.values.iter_mut().for_each(|v| v.im = 0.0);
    }
    let family = FamilySpec {
        dim: n,
        k_min: (4.0 * grid.spacing()).log2().ceil() as i32,
        k_max: grid.half_width.log2().floor() as i32 - 1,
        translations: 4,
        anchors: probes.to_vec(),
        random_per_scale: 0,
        seed: 0,
        scale_offset: 0,
    }
    .build()?;
    let num = sharp_maximal_at(&t, r / l as f64, &family, probes)?;
    let den = multi_maximal_r_at(fs, q, &family, probes)?;
    Ok(num
        .into_iter()
        .zip(den)
        .map(|(a, b)| if b == 0.0 { f64::INFINITY } else { a / b })
        .collect())
}

fn default_epsilons() -> Vec<f64> {
    vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
}

/// Sweep of [`maximal_ratio_sample`] over bump inputs `f^eps`, probed at `e_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalRatioConfig {
    pub n: usize,
    pub l: usize,
    pub r: f64,
    pub q: f64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub grid: GridPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalRatioRecord {
    pub epsilon: f64,
    pub grid_n: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalRatioReport {
    pub config: MaximalRatioConfig,
    pub mu: f64,
    pub records: Vec<MaximalRatioRecord>,
    pub fit: LogLogFit,
    pub max_min_ratio: f64,
}

impl MaximalRatioReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,grid_n,ratio\n");
        for r in &self.records {
            out.push_str(&format!("{:e},{},{:e}\n", r.epsilon, r.grid_n, r.ratio));
        }
        out
    }
}

pub fn maximal_ratio_sweep(config: &MaximalRatioConfig) -> Result<MaximalRatioReport> {
    let (n, l) = (config.n, config.l);
    if n == 0 || l == 0 {
        return invalid("n and l must be positive");
    }
    let bound = 1.0 / (4.0 * l as f64);
    if let Some(e) = config.epsilons.iter().find(|&&e| !(e > 0.0 && e < bound)) {
        return invalid(format!("epsilon {e} outside (0, 1/(4l) = {bound})"));
    }
    let mu = (n * l) as f64 / config.r;
    let probe = vec![e1(n)];
    let mut records = Vec::with_capacity(config.epsilons.len());
    for &eps in &config.epsilons {
        let (grid, resolved) = epsilon_grid(eps, n, l, &config.grid).map_err(|e| e.at_epsilon(eps))?;
        if !resolved {
            return invalid(format!("grid budget too small to resolve epsilon {eps}"));
        }
        let fs = vec![sample_bump(eps, grid); l];
        let ratio = maximal_ratio_sample(mu, n, l, config.r, config.q, &fs, &probe).map_err(|e| e.at_epsilon(eps))?[0];
        records.push(MaximalRatioRecord { epsilon: eps, grid_n: grid.n, ratio });
    }
    let fit = fit_loglog(&records.iter().map(|r| (r.epsilon, r.ratio)).collect::<Vec<_>>())?;
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.ratio), b.max(r.ratio)));
    Ok(MaximalRatioReport { config: config.clone(), mu, records, fit, max_min_ratio: hi / lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    #[test]
    fn constant_input_has_zero_ratio() {
        // only the truncation of the kernel tail at the grid edge survives
        let g = make_grid(1, 16.0, 512).unwrap();
        let f = SampledFunction::from_real_fn(g, |_| 1.0);
        let out = maximal_ratio_sample(0.5, 1, 1, 2.0, 2.0, &[f], &[vec![1.0], vec![0.0]]).unwrap();
        for v in out {
            assert!(v.abs() < 5e-3, "{v}");
        }
    }

    #[test]
    fn zero_denominator_is_infinite() {
        let g = make_grid(1, 4.0, 256).unwrap();
        let f = SampledFunction::zeros(g);
        let out = maximal_ratio_sample(0.5, 1, 1, 2.0, 2.0, &[f], &[vec![1.0]]).unwrap();
        assert!(out[0].is_infinite());
    }

    #[test]
    fn mu_must_match_r() {
        let g = make_grid(1, 4.0, 64).unwrap();
        let f = SampledFunction::from_real_fn(g, |_| 1.0);
        assert!(maximal_ratio_sample(0.75, 1, 1, 2.0, 2.0, &[f], &[vec![1.0]]).is_err());
    }

    #[test]
    fn q_equal_r_is_bounded() {
        let cfg = MaximalRatioConfig { n: 1, l: 1, r: 2.0, q: 2.0, epsilons: default_epsilons(), grid: GridPolicy::default() };
        let rep = maximal_ratio_sweep(&cfg).unwrap();
        assert!(rep.max_min_ratio <= 5.0, "{rep:?}");
    }
}
