use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::{conjugate, v_weight, MultiWeight, WeightExpr};
use crate::error::{invalid, Error, Result};
use crate::numerics::{gauss_legendre, quad_cube_with, Cube, CubeFamily, FamilySpec, QuadOptions};

/// `|Q|^{-1} int_Q w`.
pub fn cube_average(w: &WeightExpr, q: &Cube) -> Result<f64> {
    if q.dim() != w.dimension {
        return invalid("cube and weight dimensions differ");
    }
    if let Some(f) = w.non_integrable_factors().find(|f| q.contains(&f.center)) {
        return Err(Error::Divergence(format!(
            "factor |x - {:?}|^{} is not integrable on a cube containing its center",
            f.center, f.exponent
        )));
    }
    if w.is_constant() {
        return Ok(w.coefficient);
    }
    if w.dimension == 1 && w.factors.len() == 1 {
        let f = &w.factors[0];
        let (a, b) = (q.lo(0), q.hi(0));
        return Ok(w.coefficient * power_integral_1d(a, b, f.center[0], f.exponent) / (b - a));
    }
    let g = |x: &[f64]| w.eval(x);
    let integral = quad_cube_with(&g, q, &w.singularities(), QuadOptions::default())?;
    Ok(integral / q.volume())
}

/// `int_a^b |x - c|^alpha dx` for an integrable configuration.
pub(crate) fn power_integral_1d(a: f64, b: f64, c: f64, alpha: f64) -> f64 {
    let dist = if c < a {
        a - c
    } else if c > b {
        c - b
    } else {
        0.0
    };
    if dist > 0.0 && b - a <= 0.25 * dist {
        let (x, wts) = gauss_legendre(20);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        return h * x.iter().zip(wts).map(|(t, wt)| wt * (m + h * t - c).abs().powf(alpha)).sum::<f64>();
    }
    let anti = |u: f64| {
        if alpha == -1.0 {
            u.abs().ln()
        } else {
            u.signum() * u.abs().powf(alpha + 1.0) / (alpha + 1.0)
        }
    };
    anti(b - c) - anti(a - c)
}

/// Infimum of `w` over the closed cube. Exact for single-factor weights and
/// for every weight in one dimension; a sampled upper bound otherwise.
pub fn infimum_on_cube(w: &WeightExpr, q: &Cube) -> f64 {
    if w.factors.iter().any(|f| f.exponent > 0.0 && q.contains(&f.center)) {
        return 0.0;
    }
    if w.is_constant() {
        return w.coefficient;
    }
    let n = q.dim();
    if w.factors.len() == 1 {
        let f = &w.factors[0];
        let x: Vec<f64> = (0..n)
            .map(|a| {
                let c = f.center[a];
                if f.exponent < 0.0 {
                    if (c - q.lo(a)).abs() > (c - q.hi(a)).abs() {
                        q.lo(a)
                    } else {
                        q.hi(a)
                    }
                } else {
                    c.clamp(q.lo(a), q.hi(a))
                }
            })
            .collect();
        return w.eval(&x);
    }
    if n == 1 {
        return infimum_1d(w, q.lo(0), q.hi(0));
    }
    infimum_sampled(w, q)
}

fn infimum_1d(w: &WeightExpr, a: f64, b: f64) -> f64 {
    let eval = |x: f64| w.eval(&[x]);
    let dlog = |x: f64| w.factors.iter().map(|f| f.exponent / (x - f.center[0])).sum::<f64>();
    let mut best = eval(a).min(eval(b));
    let mut breaks = vec![a, b];
    breaks.extend(w.factors.iter().map(|f| f.center[0]).filter(|&c| a < c && c < b));
    breaks.sort_by(f64::total_cmp);
    for win in breaks.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let m = 64;
        let pts: Vec<f64> = (1..m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
        for pair in pts.windows(2) {
            let (mut x0, mut x1) = (pair[0], pair[1]);
            let (d0, d1) = (dlog(x0), dlog(x1));
            if d0 < 0.0 && d1 > 0.0 {
                for _ in 0..200 {
                    let xm = 0.5 * (x0 + x1);
                    if xm <= x0 || xm >= x1 {
                        break;
                    }
                    if dlog(xm) < 0.0 {
                        x0 = xm;
                    } else {
                        x1 = xm;
                    }
                }
                best = best.min(eval(0.5 * (x0 + x1)));
            }
            best = best.min(eval(pair[0]));
        }
    }
    best
}

fn infimum_sampled(w: &WeightExpr, q: &Cube) -> f64 {
    let n = q.dim();
    let mut best = q.corners().iter().map(|c| w.eval(c)).fold(f64::INFINITY, f64::min);
    for f in &w.factors {
        let p: Vec<f64> = (0..n).map(|a| f.center[a].clamp(q.lo(a), q.hi(a))).collect();
        best = best.min(w.eval(&p));
    }
    let m = 9usize;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for _ in 0..m.pow(n as u32) {
        for a in 0..n {
            x[a] = q.lo(a) + q.side * idx[a] as f64 / (m - 1) as f64;
        }
        best = best.min(w.eval(&x));
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
    best
}

fn divergent_to_inf(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Divergence(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

/// The `A_p` expression on a single cube (`+inf` when an average diverges).
pub fn ap_cube_value(w: &WeightExpr, p: f64, q: &Cube) -> Result<f64> {
    let avg = divergent_to_inf(cube_average(w, q))?;
    if p == 1.0 {
        let inf = infimum_on_cube(w, q);
        return Ok(if inf > 0.0 { avg / inf } else { f64::INFINITY });
    }
    let pc = conjugate(p);
    let dual = divergent_to_inf(cube_average(&w.powf(1.0 - pc), q))?;
    Ok(avg.powf(1.0 / p) * dual.powf(1.0 / pc))
}

fn max_over_family(family: &CubeFamily, value: impl Fn(&Cube) -> Result<f64> + Sync + Send) -> Result<f64> {
    if family.is_empty() {
        return invalid("cube family is empty");
    }
    let vals: Vec<f64> = family.cubes.par_iter().map(value).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Sampled `[w]_{A_p}` over a finite family: a lower bound for the true constant.
pub fn ap_constant(w: &WeightExpr, p: f64, family: &CubeFamily) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("A_p needs p >= 1, got {p}"));
    }
    max_over_family(family, |q| ap_cube_value(w, p, q))
}

/// The multiple-weight expression for exponents `p_j / q` on one cube.
pub fn multi_ap_cube_value(mw: &MultiWeight, v: &WeightExpr, q_scale: f64, q: &Cube) -> Result<f64> {
    let p = mw.exponents.p();
    let mut value = divergent_to_inf(cube_average(v, q))?.powf(q_scale / p);
    for (w, pj) in mw.weights.iter().zip(&mw.exponents.p_list) {
        let big = pj / q_scale;
        let factor = if (big - 1.0).abs() <= 1e-12 {
            let inf = infimum_on_cube(w, q);
            if inf > 0.0 {
                1.0 / inf
            } else {
                f64::INFINITY
            }
        } else {
            let pc = conjugate(big);
            divergent_to_inf(cube_average(&w.powf(1.0 - pc), q))?.powf(1.0 / pc)
        };
        value *= factor;
    }
    Ok(value)
}

/// Sampled `[w]_{A_{(p_1/q, ..., p_l/q)}}` over a finite family.
pub fn multi_ap_constant(mw: &MultiWeight, q_scale: f64, family: &CubeFamily) -> Result<f64> {
    if !(q_scale > 0.0 && q_scale <= mw.exponents.min() * (1.0 + 1e-12)) {
        return invalid(format!(
            "q must satisfy 0 < q <= min_j p_j = {}, got {q_scale}",
            mw.exponents.min()
        ));
    }
    let v = v_weight(mw);
    max_over_family(family, |q| multi_ap_cube_value(mw, &v, q_scale, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    NonMember,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentConstant {
    pub label: String,
    /// Index of the scalar class, with 1 meaning `A_1`.
    pub class_exponent: f64,
    /// Sampled constant; `+inf` flags non-membership.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaGReport {
    pub components: Vec<ComponentConstant>,
    pub combined: ComponentConstant,
    pub family: String,
    pub verdict: Verdict,
}

/// Structural audit: each dual power of `w_j` and the combined weight are
/// checked against their scalar classes.
pub fn lemma_g_check(mw: &MultiWeight, q_scale: f64, family: &CubeFamily) -> Result<LemmaGReport> {
    if !(q_scale > 0.0 && q_scale <= mw.exponents.min() * (1.0 + 1e-12)) {
        return invalid(format!("q must satisfy 0 < q <= min_j p_j, got {q_scale}"));
    }
    let l = mw.l() as f64;
    let mut components = Vec::new();
    for (j, (w, pj)) in mw.weights.iter().zip(&mw.exponents.p_list).enumerate() {
        let big = pj / q_scale;
        let (label, weight, class_exponent) = if (big - 1.0).abs() <= 1e-12 {
            (format!("w_{}^(1/l) in A_1", j + 1), w.powf(1.0 / l), 1.0)
        } else {
            let pc = conjugate(big);
            (format!("w_{}^(1-(p_{}/q)') in A_(l (p_{}/q)')", j + 1, j + 1, j + 1), w.powf(1.0 - pc), l * pc)
        };
        let value = ap_constant(&weight, class_exponent, family)?;
        components.push(ComponentConstant { label, class_exponent, value });
    }
    let lp = l * mw.exponents.p() / q_scale;
    let combined = ComponentConstant {
        label: "v in A_(l p/q)".into(),
        class_exponent: lp,
        value: ap_constant(&v_weight(mw), lp, family)?,
    };
    let all_finite = components.iter().chain([&combined]).all(|c| c.value.is_finite());
    Ok(LemmaGReport {
        components,
        combined,
        family: family.description.clone(),
        verdict: if all_finite { Verdict::Consistent } else { Verdict::NonMember },
    })
}

/// Largest `eps` in the list whose powered tuple `w^{1+eps}` has a finite
/// sampled constant growing by less than 5% under one family extension.
pub fn self_improvement_probe(
    mw: &MultiWeight,
    q_scale: f64,
    family: &FamilySpec,
    eps_list: &[f64],
) -> Result<Option<f64>> {
    if eps_list.windows(2).any(|w| w[0] > w[1]) {
        return invalid("eps list must be sorted ascending");
    }
    let base = family.build()?;
    let ext = family.extended(2).build()?;
    let mut best = None;
    for &eps in eps_list {
        let powered = mw.powf(1.0 + eps);
        let a = multi_ap_constant(&powered, q_scale, &base)?;
        if !a.is_finite() {
            continue;
        }
        let b = multi_ap_constant(&powered, q_scale, &ext)?;
        if b.is_finite() && b <= 1.05 * a {
            best = Some(eps);
        }
    }
    Ok(best)
}
