use serde::{Deserialize, Serialize};

use super::bump::{epsilon_grid, sample_bump, GridPolicy};
use crate::error::{invalid, Error, Result};
use crate::numerics::{fit_loglog, LogLogFit, SampledFunction};
use crate::operators::{apply_multiplier_oracle, apply_multiplier_with, model_symbol, ApplyOptions};

/// Probe points are the grid points with `inner*eps <= |x - e_1| < outer*eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeRegion {
    pub inner: f64,
    pub outer: f64,
}

impl Default for ProbeRegion {
    fn default() -> Self {
        Self { inner: 0.0, outer: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseRecord {
    pub epsilon: f64,
    pub grid_n: usize,
    pub resolved: bool,
    pub probes: usize,
    pub min_abs: f64,
    pub oracle_rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub mu: f64,
    pub n: usize,
    pub l: usize,
    pub records: Vec<PointwiseRecord>,
    pub fit: LogLogFit,
    /// `|slope - mu| / mu`.
    pub relative_error: f64,
    pub oracle_ok: bool,
    pub pass: bool,
}

const ORACLE_TOL: f64 = 0.05;

pub(crate) fn e1(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

fn probe_points(f: &SampledFunction, eps: f64, region: &ProbeRegion) -> Vec<(usize, Vec<f64>)> {
    let c = e1(f.grid.dim);
    (0..f.grid.len())
        .filter_map(|i| {
            let x = f.grid.point(i);
            let r = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            (r >= region.inner * eps && r < region.outer * eps).then_some((i, x))
        })
        .collect()
}

/// Minimum of `|T_{sigma_mu}(f^eps, ..., f^eps)|` near `e_1` across `epsilons`,
/// with a log-log fit against `mu`.
pub fn pointwise_lower_check(
    mu: f64,
    n: usize,
    l: usize,
    epsilons: &[f64],
    region: ProbeRegion,
    policy: &GridPolicy,
) -> Result<PointwiseReport> {
    let sigma = model_symbol(mu, n, l)?;
    if epsilons.is_empty() {
        return invalid("need at least one epsilon");
    }
    if let Some(e) = epsilons.iter().find(|&&e| !(e > 0.0 && e < 1.0 / (4.0 * l as f64))) {
        return invalid(format!("epsilon {e} outside (0, 1/(4l))"));
    }
    let largest = epsilons.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let opts = ApplyOptions { max_lattice: policy.max_lattice, ..ApplyOptions::default() };
    let mut records = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let (grid, resolved) = epsilon_grid(eps, n, l, policy)?;
        let f = sample_bump(eps, grid);
        let fs = vec![f; l];
        let t = apply_multiplier_with(&sigma, &fs, opts)?;
        let probes = probe_points(&t, eps, &region);
        if probes.is_empty() {
            return invalid(format!("no grid point in the probe region at epsilon {eps}"));
        }
        let (imin, min_abs) = probes
            .iter()
            .map(|(i, _)| (*i, t.values[*i].norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if !(min_abs > 0.0) {
            return Err(Error::Validation(format!("operator output vanishes at a probe for epsilon {eps}")));
        }
        let oracle_rel_diff = if eps == largest {
            let x = t.grid.point(imin);
            let o = apply_multiplier_oracle(&sigma, &fs, std::slice::from_ref(&x))?[0];
            Some((o - t.values[imin]).norm() / o.norm())
        } else {
            None
        };
        records.push(PointwiseRecord { epsilon: eps, grid_n: grid.n, resolved, probes: probes.len(), min_abs, oracle_rel_diff });
    }
    let pairs: Vec<(f64, f64)> = records.iter().filter(|r| r.resolved).map(|r| (r.epsilon, r.min_abs)).collect();
    let fit = fit_loglog(&pairs)?;
    let oracle_ok = records.iter().filter_map(|r| r.oracle_rel_diff).all(|d| d <= ORACLE_TOL);
    let pass = fit.slope <= 1.1 * mu && records.iter().all(|r| r.min_abs > 0.0) && oracle_ok;
    Ok(PointwiseReport { mu, n, l, relative_error: (fit.slope - mu).abs() / mu, records, fit, oracle_ok, pass })
}
