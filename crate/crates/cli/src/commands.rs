use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mwlab_core::kernels::{bessel_kernel, bessel_leading, Leading};
use mwlab_core::operators::{apply_multiplier, decompose_symbol, hormander_sup_norm, model_symbol, SymbolSpec};
use mwlab_core::sharpness::{bump_function, maximal_ratio_sweep, run_sharpness_experiment};
use mwlab_core::weights::{
    ap_constant, counterexample_weights, lemma_g_check, multi_ap_constant, power_membership, self_improvement_probe,
    CounterexampleParams, LemmaGReport, Verdict,
};
use mwlab_core::{fit_loglog, make_grid, Complex64, ExponentTuple, FamilySpec, MultiWeight, SampledFunction};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::error::{CliError, Result};
use crate::plot::{loglog_svg, Series};

/// Result of one command before it is written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub report: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

/// `sha256` of the canonical JSON of command, parameters and seed.
pub fn config_hash(command: Command, params: &Params, seed: u64) -> String {
    let doc = json!({ "command": command.name(), "params": params, "seed": seed });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

/// Runs the command under the configured thread budget and writes
/// `<out>/<command>.{csv,json,svg}`.
pub fn run_command(cfg: &RunConfig) -> Result<Outcome> {
    let outcome = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(|| dispatch(&cfg.params, cfg.seed))?,
        None => dispatch(&cfg.params, cfg.seed)?,
    };
    write_artifacts(cfg, &outcome)?;
    Ok(outcome)
}

pub fn dispatch(params: &Params, seed: u64) -> Result<Outcome> {
    match params {
        Params::ApConstant(p) => ap_constant_cmd(p, seed),
        Params::MultiWeightAudit(p) => audit_cmd(p, seed),
        Params::BesselAsymptotics(p) => bessel_cmd(p),
        Params::HormanderNorm(p) => hormander_cmd(p),
        Params::Apply(p) => apply_cmd(p),
        Params::DecomposeSymbol(p) => decompose_cmd(p),
        Params::SharpnessRun(c) => {
            let r = run_sharpness_experiment(c)?;
            let used: Vec<_> = r.records.iter().filter(|x| x.resolved).collect();
            let svg = loglog_svg(
                &format!("{} (mu = {})", r.witness.label(), r.mu),
                "epsilon",
                &[
                    Series {
                        label: "ratio",
                        points: used.iter().map(|x| (x.epsilon, x.ratio)).collect(),
                        fit: Some((r.ratio.fit.slope, r.ratio.fit.intercept)),
                    },
                    Series {
                        label: "lhs (annulus)",
                        points: used.iter().map(|x| (x.epsilon, x.lhs_annulus)).collect(),
                        fit: Some((r.lhs.fit.slope, r.lhs.fit.intercept)),
                    },
                    Series {
                        label: "rhs",
                        points: used.iter().map(|x| (x.epsilon, x.rhs.iter().product())).collect(),
                        fit: Some((r.rhs.fit.slope, r.rhs.fit.intercept)),
                    },
                ],
            );
            let mut report = serde_json::to_value(&r).map_err(mwlab_core::Error::from)?;
            report["verdict"] = json!(r.witness.label());
            Ok(Outcome { pass: r.pass, csv: Some(r.to_csv()), svg: Some(svg), report })
        }
        Params::MaximalRatio(p) => {
            let r = maximal_ratio_sweep(&p.sweep())?;
            let pass = if p.q >= p.r { r.max_min_ratio <= p.max_spread } else { r.fit.slope <= p.max_slope };
            let svg = loglog_svg(
                "sharp maximal ratio",
                "epsilon",
                &[Series {
                    label: "ratio at e1",
                    points: r.records.iter().map(|x| (x.epsilon, x.ratio)).collect(),
                    fit: Some((r.fit.slope, r.fit.intercept)),
                }],
            );
            let report = serde_json::to_value(&r).map_err(mwlab_core::Error::from)?;
            Ok(Outcome { pass, csv: Some(r.to_csv()), svg: Some(svg), report })
        }
    }
}

fn write_artifacts(cfg: &RunConfig, o: &Outcome) -> Result<()> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(&cfg.out).map_err(io(&cfg.out))?;
    let stem = cfg.out.join(cfg.command.name());
    let hash = config_hash(cfg.command, &cfg.params, cfg.seed);
    let doc = json!({
        "command": cfg.command.name(),
        "config_sha256": hash,
        "seed": cfg.seed,
        "params": cfg.params,
        "pass": o.pass,
        "report": o.report,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(mwlab_core::Error::from)? + "\n";
    let json_path = stem.with_extension("json");
    fs::write(&json_path, text).map_err(io(&json_path))?;
    if let Some(csv) = &o.csv {
        let p = stem.with_extension("csv");
        fs::write(&p, csv).map_err(io(&p))?;
    }
    if let Some(svg) = &o.svg {
        let p = stem.with_extension("svg");
        let body = svg.replacen('\n', &format!("\n<!-- config_sha256 {hash} -->\n"), 1);
        fs::write(&p, body).map_err(io(&p))?;
    }
    Ok(())
}

fn value_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn ap_constant_cmd(p: &ApConstantParams, seed: u64) -> Result<Outcome> {
    let w = p.weight.clone().normalized()?;
    let dim = w.dimension;
    let base = p.family.clone().unwrap_or_else(|| FamilySpec::default_for(dim).with_seed(seed));
    let mut csv = String::from("k_min,k_max,constant\n");
    let mut values = Vec::new();
    for &ext in &p.extensions {
        let spec = base.extended(ext);
        let c = ap_constant(&w, p.p, &spec.build()?)?;
        let _ = writeln!(csv, "{},{},{c:e}", spec.k_min, spec.k_max);
        values.push(c);
    }
    let growth = values.last().unwrap() / values[0];
    let stable = values.iter().all(|v| v.is_finite()) && growth <= 1.0 + p.growth_tolerance;
    let predicted = match w.factors.as_slice() {
        [] => Some(true),
        [f] if f.center.iter().all(|&c| c == 0.0) => Some(power_membership(f.exponent, dim, p.p)),
        _ => None,
    };
    let pass = predicted.map_or(stable, |m| m == stable);
    let report = json!({
        "constants": values.iter().map(|v| value_json(*v)).collect::<Vec<_>>(),
        "growth": value_json(growth),
        "stable": stable,
        "predicted_member": predicted,
        "family": base.describe(),
    });
    Ok(Outcome { pass, report, csv: Some(csv), svg: None })
}

fn audit_weights(p: &MultiWeightAuditParams) -> Result<MultiWeight> {
    if let Some(c) = &p.counterexample {
        let params = CounterexampleParams::new(c.n, c.l, p.q, ExponentTuple::new(c.p_list.clone())?, c.delta)?;
        return Ok(counterexample_weights(&params));
    }
    let (Some(ws), Some(pl)) = (&p.weights, &p.p_list) else {
        return Err(CliError::Config("give either `counterexample` or both `weights` and `p_list`".into()));
    };
    let ws = ws.iter().cloned().map(|w| w.normalized()).collect::<mwlab_core::Result<Vec<_>>>()?;
    Ok(MultiWeight::new(ws, ExponentTuple::new(pl.clone())?)?)
}

fn audit_cmd(p: &MultiWeightAuditParams, seed: u64) -> Result<Outcome> {
    let mw = audit_weights(p)?;
    let spec = p.family.clone().unwrap_or_else(|| FamilySpec::default_for(mw.dimension()).with_seed(seed));
    let ext_spec = spec.extended(p.extend_by);
    let (base, ext) = (spec.build()?, ext_spec.build()?);
    let lemma = lemma_g_check(&mw, p.q, &base)?;
    let lemma_ext = lemma_g_check(&mw, p.q, &ext)?;
    let multi = multi_ap_constant(&mw, p.q, &base)?;
    let multi_ext = multi_ap_constant(&mw, p.q, &ext)?;
    let improvement = self_improvement_probe(&mw, p.q, &spec, &p.eps_list)?;

    let pairs = |a: &LemmaGReport, b: &LemmaGReport| {
        a.components
            .iter()
            .chain([&a.combined])
            .zip(b.components.iter().chain([&b.combined]))
            .map(|(x, y)| (x.label.clone(), x.class_exponent, x.value, y.value))
            .collect::<Vec<_>>()
    };
    let mut rows = pairs(&lemma, &lemma_ext);
    rows.push(("multiple A constant".into(), f64::NAN, multi, multi_ext));
    let mut csv = String::from("component,class_exponent,value,extended_value,growth\n");
    let mut growth_ok = true;
    let mut components = Vec::new();
    for (label, cls, a, b) in &rows {
        let growth = b / a;
        let ok = a.is_finite() && b.is_finite() && growth <= 1.0 + p.growth_tolerance;
        growth_ok &= ok;
        let _ = writeln!(csv, "\"{label}\",{cls:e},{a:e},{b:e},{growth:e}");
        components.push(json!({
            "label": label, "class_exponent": value_json(*cls), "value": value_json(*a),
            "extended_value": value_json(*b), "growth": value_json(growth), "ok": ok,
        }));
    }
    let pass = lemma.verdict == Verdict::Consistent && growth_ok;
    let report = json!({
        "verdict": lemma.verdict,
        "components": components,
        "self_improvement_eps": improvement,
        "family": base.description,
        "extended_family": ext.description,
    });
    Ok(Outcome { pass, report, csv: Some(csv), svg: None })
}

fn logspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| (a.ln() + (b / a).ln() * i as f64 / (m - 1) as f64).exp()).collect()
}

fn bessel_cmd(p: &BesselParams) -> Result<Outcome> {
    let radii = logspace(p.r_min, p.r_max, p.points);
    let g = bessel_kernel(p.t, p.dim, &radii)?;
    let leading = bessel_leading(p.t, p.dim);
    let lead_at = |r: f64| match leading {
        Leading::Power { coefficient, exponent } => coefficient * r.powf(exponent),
        Leading::Log { coefficient } => coefficient * (1.0 / r).ln(),
        Leading::Bounded => f64::NAN,
    };
    let mut csv = String::from("radius,value,leading\n");
    for (r, v) in radii.iter().zip(&g) {
        let _ = writeln!(csv, "{r:e},{v:e},{:e}", lead_at(*r));
    }
    let positive = g.iter().all(|v| *v > 0.0 && v.is_finite());
    let (pass, report, fit) = match leading {
        Leading::Power { coefficient, exponent } => {
            let fit = fit_loglog(&radii.iter().cloned().zip(g.iter().cloned()).collect::<Vec<_>>())?;
            let rel = (fit.slope - exponent).abs() / exponent.abs();
            let report = json!({
                "leading": "power", "coefficient": coefficient, "predicted_slope": exponent,
                "slope": fit.slope, "r2": fit.r2, "relative_error": rel, "tolerance": p.slope_tolerance,
            });
            (positive && rel <= p.slope_tolerance, report, Some((fit.slope, fit.intercept)))
        }
        Leading::Log { coefficient } => {
            // least squares of G against ln(1/r)
            let xs: Vec<f64> = radii.iter().map(|r| (1.0 / r).ln()).collect();
            let m = xs.len() as f64;
            let (mx, my) = (xs.iter().sum::<f64>() / m, g.iter().sum::<f64>() / m);
            let sxy: f64 = xs.iter().zip(&g).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let c = sxy / sxx;
            let rel = (c - coefficient).abs() / coefficient;
            let report = json!({
                "leading": "log", "predicted_coefficient": coefficient, "coefficient": c,
                "relative_error": rel, "tolerance": p.log_tolerance,
            });
            (positive && rel <= p.log_tolerance, report, None)
        }
        Leading::Bounded => {
            let (lo, hi) = g.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            let report = json!({ "leading": "bounded", "min": lo, "max": hi });
            (positive && hi / lo <= 1.0 + p.slope_tolerance, report, None)
        }
    };
    let svg = loglog_svg(
        &format!("G_t, t = {}, D = {}", p.t, p.dim),
        "radius",
        &[Series { label: "G_t", points: radii.iter().cloned().zip(g.iter().cloned()).collect(), fit }],
    );
    Ok(Outcome { pass, report, csv: Some(csv), svg: Some(svg) })
}

fn hormander_cmd(p: &HormanderParams) -> Result<Outcome> {
    let sigma = model_symbol(p.mu, p.n, p.l)?;
    let s = p.s.unwrap_or(p.mu);
    let h = hormander_sup_norm(&sigma, s, p.k_min, p.k_max)?;
    let uniform_ok = h.max_min_ratio <= p.max_ratio;
    let mut report = json!({
        "s": s, "sup": h.sup, "max_min_ratio": h.max_min_ratio, "max_ratio": p.max_ratio,
        "uniform_ok": uniform_ok, "values": h.values,
    });
    let mut pass = uniform_ok;
    if let Some(d) = &p.decay {
        let flat = hormander_sup_norm(&sigma, 0.0, d.k_min, d.k_max)?;
        let pairs: Vec<(f64, f64)> = flat.ks.iter().zip(&flat.values).map(|(k, v)| (2f64.powi(*k), *v)).collect();
        let fit = fit_loglog(&pairs)?;
        let rel = (fit.slope + p.mu).abs() / p.mu;
        let ok = rel <= d.tolerance;
        pass &= ok;
        report["decay"] = json!({ "slope": fit.slope, "predicted": -p.mu, "relative_error": rel, "tolerance": d.tolerance, "ok": ok });
    }
    Ok(Outcome { pass, report, csv: Some(h.to_csv()), svg: None })
}

fn input_function(spec: &InputSpec, p: &ApplyParams) -> Result<SampledFunction> {
    let grid = make_grid(p.n, p.grid.half_width, p.grid.points)?;
    Ok(match spec {
        InputSpec::Gaussian { center, width } => {
            if center.len() != p.n || !(*width > 0.0) {
                return Err(CliError::Config("gaussian input needs an n-dimensional center and a positive width".into()));
            }
            SampledFunction::from_real_fn(grid, |x| {
                (-x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() / (width * width)).exp()
            })
        }
        InputSpec::Bump { epsilon } => bump_function(*epsilon, grid)?,
        InputSpec::File { stem } => {
            let f = SampledFunction::read_binary(stem)?;
            if !f.grid.same_as(&grid) {
                return Err(CliError::Config(format!("{} is not sampled on the configured grid", stem.display())));
            }
            f
        }
    })
}

fn apply_cmd(p: &ApplyParams) -> Result<Outcome> {
    let fs = p.inputs.iter().map(|s| input_function(s, p)).collect::<Result<Vec<_>>>()?;
    let l = fs.len();
    let sigma = match &p.symbol {
        SymbolParams::Model { mu } => model_symbol(*mu, p.n, l)?,
        SymbolParams::Constant { value } => SymbolSpec::constant(p.n, l, Complex64::new(*value, 0.0)),
        SymbolParams::Modulation { center } => SymbolSpec::modulation(p.n, l, center.clone())?,
    };
    let out = apply_multiplier(&sigma, &fs)?;
    let finite = out.values.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    let report = json!({ "symbol": sigma.describe(), "l": l, "max_abs": out.max_abs(), "finite": finite });
    Ok(Outcome { pass: finite, report, csv: Some(out.to_csv()), svg: None })
}

fn decompose_cmd(p: &DecomposeParams) -> Result<Outcome> {
    let nl = (p.n * p.l) as f64;
    let mu = match (p.mu, p.r) {
        (Some(mu), _) => mu,
        (None, Some(r)) => nl / r,
        (None, None) => return Err(CliError::Config("give exactly one of `r` and `mu`".into())),
    };
    let sigma = model_symbol(mu, p.n, p.l)?;
    let d = decompose_symbol(&sigma, p.rho, p.k_max)?;
    let r = &d.report;
    let mut csv = String::from("k");
    for b in &r.betas {
        let label: Vec<String> = b.iter().map(|x| x.to_string()).collect();
        let _ = write!(csv, ",beta_{}", label.join("_"));
    }
    csv.push('\n');
    for (k, row) in r.constants.iter().enumerate() {
        let _ = write!(csv, "{k}");
        for v in row {
            let _ = write!(csv, ",{v:e}");
        }
        csv.push('\n');
    }
    let report = serde_json::to_value(r).map_err(mwlab_core::Error::from)?;
    Ok(Outcome { pass: r.pass, report, csv: Some(csv), svg: None })
}
