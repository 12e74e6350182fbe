use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bump::{epsilon_grid, sample_bump, GridPolicy};
use super::pointwise::e1;
use crate::error::{invalid, Error, Result};
use crate::numerics::{fit_loglog, LogLogFit};
use crate::operators::{apply_multiplier_with, model_symbol, ApplyOptions};
use crate::weights::{counterexample_weights, v_weight, weighted_lp_norm, weighted_lp_norm_on, CounterexampleParams, ExponentTuple, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Multiplier,
    Pseudo,
}

/// Slope tolerance `max(absolute, relative * |predicted|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { absolute: 0.05, relative: 0.15 }
    }
}

impl Tolerance {
    pub fn around(&self, predicted: f64) -> f64 {
        self.absolute.max(self.relative * predicted.abs())
    }
}

fn default_epsilons() -> Vec<f64> {
    (4..=9).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub mode: Mode,
    pub n: usize,
    pub l: usize,
    pub p_list: Vec<f64>,
    pub q: f64,
    /// Multiplier order `mu = s` (multiplier mode).
    #[serde(default)]
    pub s: Option<f64>,
    /// Pseudo mode: `mu = nl / r`.
    #[serde(default)]
    pub r: Option<f64>,
    pub delta: f64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub tolerance: Tolerance,
}

impl SharpnessConfig {
    pub fn multiplier(n: usize, l: usize, p_list: Vec<f64>, q: f64, s: f64, delta: f64) -> Self {
        SharpnessConfig {
            mode: Mode::Multiplier,
            n,
            l,
            p_list,
            q,
            s: Some(s),
            r: None,
            delta,
            epsilons: default_epsilons(),
            grid: GridPolicy::default(),
            tolerance: Tolerance::default(),
        }
    }

    pub fn pseudo(n: usize, l: usize, p_list: Vec<f64>, q: f64, r: f64, delta: f64) -> Self {
        SharpnessConfig { mode: Mode::Pseudo, s: None, r: Some(r), ..Self::multiplier(n, l, p_list, q, 0.0, delta) }
    }

    pub fn with_epsilons(mut self, epsilons: Vec<f64>) -> Self {
        self.epsilons = epsilons;
        self
    }

    /// The operator order and whether it lies in the range `nl/2 < mu <= nl`.
    pub fn mu(&self) -> Result<(f64, bool)> {
        let nl = (self.n * self.l) as f64;
        match self.mode {
            Mode::Multiplier => {
                if self.r.is_some() {
                    return invalid("r is only used in pseudo mode");
                }
                let Some(s) = self.s else { return invalid("multiplier mode needs s") };
                if !(s > 0.0 && s <= nl) {
                    return invalid(format!("s must satisfy 0 < s <= nl = {nl}, got {s}"));
                }
                Ok((s, s > nl / 2.0))
            }
            Mode::Pseudo => {
                if self.s.is_some() {
                    return invalid("s is only used in multiplier mode");
                }
                let Some(r) = self.r else { return invalid("pseudo mode needs r") };
                if !(r > 1.0 && r <= 2.0) {
                    return invalid(format!("r must satisfy 1 < r <= 2, got {r}"));
                }
                Ok((nl / r, true))
            }
        }
    }

    pub fn validate(&self) -> Result<CounterexampleParams> {
        if self.n == 0 || self.l == 0 {
            return invalid("n and l must be positive");
        }
        self.mu()?;
        if self.epsilons.len() < 3 {
            return invalid("need at least three epsilons");
        }
        let bound = 1.0 / (4.0 * self.l as f64);
        if let Some(e) = self.epsilons.iter().find(|&&e| !(e > 0.0 && e < bound)) {
            return invalid(format!("epsilon {e} outside (0, 1/(4l) = {bound})"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("epsilons must be strictly decreasing");
        }
        CounterexampleParams::new(self.n, self.l, self.q, ExponentTuple::new(self.p_list.clone())?, self.delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub epsilon: f64,
    pub grid_n: usize,
    pub resolved: bool,
    pub lhs_annulus: f64,
    pub lhs_full: f64,
    pub rhs: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub fit: LogLogFit,
    pub predicted: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub ok: bool,
}

impl SlopeCheck {
    fn new(pairs: &[(f64, f64)], predicted: f64, bound: Bound, tol: &Tolerance) -> Result<Self> {
        let fit = fit_loglog(pairs)?;
        let tolerance = tol.around(predicted);
        let ok = match bound {
            Bound::Upper => fit.slope <= predicted + tolerance,
            Bound::Lower => fit.slope >= predicted - tolerance,
        };
        Ok(SlopeCheck { fit, predicted, bound, tolerance, ok })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `q < nl/mu`: the ratio must blow up.
    BlowUp,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    SharpnessWitnessed,
    NotWitnessed,
    NoBlowUp,
    UnexpectedDecay,
}

impl Witness {
    pub fn label(&self) -> &'static str {
        match self {
            Witness::SharpnessWitnessed => "sharpness witnessed",
            Witness::NotWitnessed => "sharpness not witnessed",
            Witness::NoBlowUp => "no blow-up",
            Witness::UnexpectedDecay => "unexpected decay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: SharpnessConfig,
    pub mu: f64,
    pub mu_in_range: bool,
    pub p: f64,
    pub gamma: f64,
    pub beta: Vec<f64>,
    pub beta_identity_residual: Option<f64>,
    pub regime: Regime,
    pub records: Vec<ExperimentRecord>,
    pub fitted_epsilons: usize,
    pub lhs: SlopeCheck,
    pub lhs_full: LogLogFit,
    pub rhs: SlopeCheck,
    pub ratio: SlopeCheck,
    /// `mu - nl/q + 2 delta/p`, the closed form of the ratio prediction when every `p_j > q`.
    pub ratio_closed_form: f64,
    pub annulus_within_full: bool,
    pub witness: Witness,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let l = self.config.l;
        let mut out = String::from("epsilon,lhs_annulus,lhs_full");
        for j in 1..=l {
            let _ = write!(out, ",rhs_{j}");
        }
        out.push_str(",ratio\n");
        for r in &self.records {
            let _ = write!(out, "{:e},{:e},{:e}", r.epsilon, r.lhs_annulus, r.lhs_full);
            for v in &r.rhs {
                let _ = write!(out, ",{v:e}");
            }
            let _ = writeln!(out, ",{:e}", r.ratio);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One epsilon sweep of `||T(f^eps,...)||_{L^p(v)} / prod_j ||f^eps||_{L^{p_j}(w_j)}`
/// with the counterexample weights.
pub fn run_sharpness_experiment(config: &SharpnessConfig) -> Result<ExperimentReport> {
    let params = config.validate()?;
    let (mu, mu_in_range) = config.mu()?;
    let (n, l) = (config.n, config.l);
    let nl = (n * l) as f64;
    let mw = counterexample_weights(&params);
    let v = v_weight(&mw);
    let p = params.exponents.p();
    let gamma = params.gamma();
    let beta = params.beta();
    let sigma = model_symbol(mu, n, l)?;
    let opts = ApplyOptions { max_lattice: config.grid.max_lattice, ..ApplyOptions::default() };
    let center = e1(n);

    let mut records = Vec::with_capacity(config.epsilons.len());
    for &eps in &config.epsilons {
        let at = |e: Error| e.at_epsilon(eps);
        let (grid, resolved) = epsilon_grid(eps, n, l, &config.grid).map_err(at)?;
        let f = sample_bump(eps, grid);
        let fs = vec![f.clone(); l];
        let t = apply_multiplier_with(&sigma, &fs, opts).map_err(at)?;
        let annulus = Region::Annulus { center: center.clone(), r_in: 2.0 * eps, r_out: 3.0 * eps };
        let lhs_annulus = weighted_lp_norm_on(&t, &v, p, &annulus).map_err(at)?;
        let lhs_full = weighted_lp_norm(&t, &v, p).map_err(at)?;
        let rhs = mw
            .weights
            .iter()
            .zip(&params.exponents.p_list)
            .map(|(w, &pj)| weighted_lp_norm(&f, w, pj))
            .collect::<Result<Vec<f64>>>()
            .map_err(at)?;
        let ratio = lhs_annulus / rhs.iter().product::<f64>();
        if !(lhs_annulus > 0.0 && ratio.is_finite()) {
            return Err(Error::Accuracy {
                context: format!("non-positive or non-finite record at epsilon {eps}"),
                previous: lhs_annulus,
                last: ratio,
            });
        }
        records.push(ExperimentRecord { epsilon: eps, grid_n: grid.n, resolved, lhs_annulus, lhs_full, rhs, ratio });
    }

    let used: Vec<&ExperimentRecord> = records.iter().filter(|r| r.resolved).collect();
    let mut notes = Vec::new();
    if used.len() < records.len() {
        notes.push(format!("{} epsilon(s) left out of the fits: grid clamped below 8 points per epsilon", records.len() - used.len()));
    }
    if !mu_in_range {
        notes.push(format!("mu = {mu} is outside nl/2 < mu <= nl"));
    }
    let pairs = |f: &dyn Fn(&ExperimentRecord) -> f64| used.iter().map(|r| (r.epsilon, f(r))).collect::<Vec<_>>();
    let tol = &config.tolerance;
    let beta_sum = params.beta_sum();
    let lhs = SlopeCheck::new(&pairs(&|r| r.lhs_annulus), mu - gamma / p + n as f64 / p, Bound::Upper, tol)?;
    let lhs_full = fit_loglog(&pairs(&|r| r.lhs_full))?;
    let rhs = SlopeCheck::new(&pairs(&|r| r.rhs.iter().product()), beta_sum + n as f64 / p, Bound::Lower, tol)?;
    let ratio = SlopeCheck::new(&pairs(&|r| r.ratio), mu - gamma / p - beta_sum, Bound::Upper, tol)?;
    let ratio_closed_form = mu - nl / config.q + 2.0 * config.delta / p;
    let beta_identity_residual = params.all_above_q().then(|| params.beta_identity_residual());
    if let Some(res) = beta_identity_residual {
        if res.abs() > 1e-12 {
            notes.push(format!("beta identity residual {res:e}"));
        }
    }
    let annulus_within_full = records.iter().all(|r| r.lhs_annulus <= r.lhs_full * (1.0 + 1e-12));

    let regime = if config.q < nl / mu { Regime::BlowUp } else { Regime::Control };
    let witness = match regime {
        Regime::BlowUp if ratio.fit.slope < -ratio.tolerance => Witness::SharpnessWitnessed,
        Regime::BlowUp => Witness::NotWitnessed,
        Regime::Control if ratio.fit.slope >= -tol.absolute => Witness::NoBlowUp,
        Regime::Control => Witness::UnexpectedDecay,
    };
    let identity_ok = beta_identity_residual.map_or(true, |r| r.abs() <= 1e-12);
    let shape_ok = match regime {
        Regime::BlowUp => lhs.ok && rhs.ok && ratio.ok,
        Regime::Control => true,
    };
    let pass = shape_ok
        && annulus_within_full
        && identity_ok
        && matches!(witness, Witness::SharpnessWitnessed | Witness::NoBlowUp);
    Ok(ExperimentReport {
        config: config.clone(),
        mu,
        mu_in_range,
        p,
        gamma,
        beta,
        beta_identity_residual,
        regime,
        fitted_epsilons: used.len(),
        records,
        lhs,
        lhs_full,
        rhs,
        ratio,
        ratio_closed_form,
        annulus_within_full,
        witness,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_blow_up_is_witnessed() {
        let cfg = SharpnessConfig::multiplier(1, 1, vec![2.0], 1.0, 0.75, 0.1);
        let r = run_sharpness_experiment(&cfg).unwrap();
        assert_eq!(r.regime, Regime::BlowUp);
        assert!((r.ratio.predicted - (-0.15)).abs() < 1e-12);
        assert!((r.ratio_closed_form - (-0.15)).abs() < 1e-12);
        assert!(r.ratio.fit.slope <= -0.10, "{:?}", r.ratio);
        assert_eq!(r.witness, Witness::SharpnessWitnessed);
        assert!(r.pass, "{r:#?}");
        assert!(r.records.iter().all(|x| x.lhs_annulus > 0.0 && x.rhs[0] > 0.0));
    }

    #[test]
    fn control_regime_stays_flat() {
        let cfg = SharpnessConfig::multiplier(1, 1, vec![2.0], 1.5, 0.75, 0.1);
        let r = run_sharpness_experiment(&cfg).unwrap();
        assert_eq!(r.regime, Regime::Control);
        assert!(r.ratio.fit.slope >= -0.05, "{:?}", r.ratio);
        assert_eq!(r.witness, Witness::NoBlowUp);
    }

    #[test]
    fn pseudo_mode_matches_multiplier_records() {
        let eps: Vec<f64> = (4..=7).map(|k| 2f64.powi(-k)).collect();
        let a = run_sharpness_experiment(&SharpnessConfig::pseudo(1, 1, vec![2.0], 1.0, 2.0, 0.1).with_epsilons(eps.clone())).unwrap();
        let b = run_sharpness_experiment(&SharpnessConfig::multiplier(1, 1, vec![2.0], 1.0, 0.5, 0.1).with_epsilons(eps)).unwrap();
        assert_eq!(a.records, b.records);
        assert!(!b.mu_in_range && a.mu_in_range);
    }

    #[test]
    fn config_validation() {
        let good = SharpnessConfig::multiplier(1, 1, vec![2.0], 1.0, 0.75, 0.1);
        assert!(good.validate().is_ok());
        let mut bad = good.clone();
        bad.epsilons = vec![0.3, 0.1, 0.05];
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.epsilons = vec![0.01, 0.02, 0.04];
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.s = Some(1.5);
        assert!(bad.validate().is_err());
        assert!(SharpnessConfig::pseudo(1, 1, vec![2.0], 1.0, 2.5, 0.1).validate().is_err());
        let json = r#"{"mode":"multiplier","n":1,"l":1,"p_list":[2.0],"q":1.0,"s":0.75,"delta":0.1}"#;
        let cfg: SharpnessConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg, good);
        assert!(serde_json::from_str::<SharpnessConfig>(r#"{"mode":"pseudo","n":1,"l":1,"p_list":[2],"q":1,"r":2,"delta":0.1,"extra":1}"#).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = SharpnessConfig::multiplier(1, 1, vec![2.0], 1.0, 0.75, 0.1).with_epsilons(vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
        let r = run_sharpness_experiment(&cfg).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("epsilon,lhs_annulus,lhs_full,rhs_1,ratio"));
        assert_eq!(lines.count(), 3);
        assert!(r.to_json().unwrap().contains("\"witness\""));
    }
}
