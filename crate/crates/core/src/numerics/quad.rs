use std::sync::OnceLock;

use super::Cube;
use crate::error::{Error, Result};

/// A declared integrable singularity. When `exponent` is known the integrand
/// behaves like `|x - point|^exponent` nearby and the tail is extrapolated
/// with the exact ratio; otherwise the ratio is estimated from the shells.
#[derive(Debug, Clone, PartialEq)]
pub struct Singularity {
    pub point: Vec<f64>,
    pub exponent: Option<f64>,
}

impl Singularity {
    pub fn at(point: Vec<f64>) -> Self {
        Singularity { point, exponent: None }
    }

    pub fn power(point: Vec<f64>, exponent: f64) -> Self {
        Singularity { point, exponent: Some(exponent) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
    pub max_far_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-6, abs_tol: 0.0, max_depth: 40, max_far_depth: 48 }
    }
}

const MAX_RULE: usize = 20;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    assert!((1..=MAX_RULE).contains(&m), "rule order {m} out of range");
    &RULES.get_or_init(|| (0..=MAX_RULE).map(legendre_rule).collect())[m]
}

fn legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 0 { 0.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
struct Boxed {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Boxed {
    fn from_cube(q: &Cube) -> Self {
        let n = q.dim();
        Boxed { lo: (0..n).map(|a| q.lo(a)).collect(), hi: (0..n).map(|a| q.hi(a)).collect() }
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn max_extent(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|a| self.lo[a] <= x[a] && x[a] <= self.hi[a])
    }

    fn corner_mask(&self, x: &[f64]) -> Option<usize> {
        let mut mask = 0;
        for a in 0..self.dim() {
            if x[a] == self.hi[a] {
                mask |= 1 << a;
            } else if x[a] != self.lo[a] {
                return None;
            }
        }
        Some(mask)
    }

    /// Children from halving the selected axes.
    fn split(&self, axes: &[usize]) -> Vec<Boxed> {
        let mut out = Vec::with_capacity(1 << axes.len());
        for mask in 0..1usize << axes.len() {
            let mut b = self.clone();
            for (bit, &a) in axes.iter().enumerate() {
                let mid = 0.5 * (self.lo[a] + self.hi[a]);
                if mask >> bit & 1 == 1 {
                    b.lo[a] = mid;
                } else {
                    b.hi[a] = mid;
                }
            }
            out.push(b);
        }
        out
    }

    fn long_axes(&self) -> Vec<usize> {
        let m = self.max_extent();
        (0..self.dim()).filter(|&a| self.hi[a] - self.lo[a] > 0.5 * m).collect()
    }
}

struct Ctx<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    opts: QuadOptions,
    order: usize,
    floor_density: f64,
}

impl Ctx<'_> {
    /// Tensor Gauss rule: (integral, integral of |f|).
    fn gauss(&self, b: &Boxed) -> (f64, f64) {
        let (nodes, weights) = gauss_legendre(self.order);
        let n = b.dim();
        let m = self.order;
        let half: Vec<f64> = (0..n).map(|a| 0.5 * (b.hi[a] - b.lo[a])).collect();
        let mid: Vec<f64> = (0..n).map(|a| 0.5 * (b.hi[a] + b.lo[a])).collect();
        let jac: f64 = half.iter().product();
        let mut x = vec![0.0; n];
        let mut idx = vec![0usize; n];
        let (mut s, mut sa) = (0.0, 0.0);
        for _ in 0..m.pow(n as u32) {
            let mut w = jac;
            for a in 0..n {
                x[a] = mid[a] + half[a] * nodes[idx[a]];
                w *= weights[idx[a]];
            }
            let v = (self.f)(&x);
            s += w * v;
            sa += w * v.abs();
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = 0;
            }
        }
        (s, sa)
    }

    /// Adaptive refinement-doubling integration of a box free of singularities.
    fn far(&self, b: &Boxed, est: (f64, f64), depth: usize) -> Result<f64> {
        let kids = b.split(&b.long_axes());
        let parts: Vec<(f64, f64)> = kids.iter().map(|k| self.gauss(k)).collect();
        let fine: f64 = parts.iter().map(|p| p.0).sum();
        let fine_abs: f64 = parts.iter().map(|p| p.1).sum();
        let tol = 0.1 * self.opts.rel_tol * fine_abs + self.floor_density * b.volume();
        if (fine - est.0).abs() <= tol {
            return Ok(fine);
        }
        if depth >= self.opts.max_far_depth {
            return Err(Error::Accuracy {
                context: "adaptive quadrature on a regular cell".into(),
                previous: est.0,
                last: fine,
            });
        }
        let mut s = 0.0;
        for (k, p) in kids.iter().zip(parts) {
            s += self.far(k, p, depth + 1)?;
        }
        Ok(s)
    }

    /// Dyadic refinement toward a corner singularity with geometric tail.
    fn corner(&self, b: &Boxed, sing: &Singularity) -> Result<f64> {
        let n = b.dim();
        let ratio_known = match sing.exponent {
            Some(e) if e + n as f64 <= 0.0 => {
                return Err(Error::Divergence(format!(
                    "exponent {e} at {:?} is not integrable in dimension {n}",
                    sing.point
                )))
            }
            Some(e) => Some(2f64.powf(-(e + n as f64))),
            None => None,
        };
        let all: Vec<usize> = (0..n).collect();
        let mut cell = b.clone();
        let mut acc = 0.0;
        let mut prev_shell: Option<f64> = None;
        let mut prev_est: Option<f64> = None;
        let mut last_ratio = 0.0;
        for depth in 1..=self.opts.max_depth {
            let kids = cell.split(&all);
            let mut shell = 0.0;
            let mut next = None;
            for k in kids {
                if k.corner_mask(&sing.point).is_some() {
                    next = Some(k);
                } else {
                    let g = self.gauss(&k);
                    shell += self.far(&k, g, 0)?;
                }
            }
            acc += shell;
            let ratio = match (ratio_known, prev_shell) {
                (Some(r), _) => Some(r),
                (None, Some(p)) if p != 0.0 => {
                    let r = shell / p;
                    last_ratio = r;
                    (r > 0.0 && r < 1.0).then_some(r)
                }
                _ => None,
            };
            let tail = ratio.map_or(0.0, |r| shell * r / (1.0 - r));
            let est = acc + tail;
            if let Some(pe) = prev_est {
                let tol = self.opts.rel_tol * est.abs() + self.floor_density * b.volume();
                if depth >= 3 && (est - pe).abs() <= tol && (ratio.is_some() || shell.abs() <= tol) {
                    return Ok(est);
                }
            }
            if depth == self.opts.max_depth {
                if ratio_known.is_none() && last_ratio >= 1.0 {
                    return Err(Error::Divergence(format!(
                        "shell sums toward {:?} stop decaying (ratio {last_ratio:.4})",
                        sing.point
                    )));
                }
                return Err(Error::Accuracy {
                    context: format!("singular quadrature toward {:?}", sing.point),
                    previous: prev_est.unwrap_or(f64::NAN),
                    last: est,
                });
            }
            prev_shell = Some(shell);
            prev_est = Some(est);
            cell = next.expect("corner child exists");
        }
        unreachable!("loop returns at max depth")
    }

    fn piece(&self, b: &Boxed, sings: &[Singularity]) -> Result<f64> {
        let corners: Vec<&Singularity> =
            sings.iter().filter(|s| b.corner_mask(&s.point).is_some()).collect();
        match corners.len() {
            0 => {
                let g = self.gauss(b);
                self.far(b, g, 0)
            }
            1 => self.corner(b, corners[0]),
            _ => {
                let all: Vec<usize> = (0..b.dim()).collect();
                let mut s = 0.0;
                for k in b.split(&all) {
                    s += self.piece(&k, sings)?;
                }
                Ok(s)
            }
        }
    }
}

fn rule_order(n: usize) -> usize {
    match n {
        1 => 10,
        2 => 8,
        3 => 6,
        _ => 4,
    }
}

/// Integral over a cube with declared point singularities, default options.
pub fn quad_cube(f: impl Fn(&[f64]) -> f64, q: &Cube, singular_points: &[Vec<f64>]) -> Result<f64> {
    let sings: Vec<Singularity> = singular_points.iter().cloned().map(Singularity::at).collect();
    quad_cube_with(&f, q, &sings, QuadOptions::default())
}

/// Integral over a cube. The cube is first cut along every coordinate of the
/// singular points it contains, so each point becomes a corner of the pieces;
/// each piece is refined dyadically toward its corner.
pub fn quad_cube_with(
    f: &dyn Fn(&[f64]) -> f64,
    q: &Cube,
    singular: &[Singularity],
    opts: QuadOptions,
) -> Result<f64> {
    let n = q.dim();
    let root = Boxed::from_cube(q);
    let inside: Vec<&Singularity> = singular
        .iter()
        .filter(|s| s.point.len() == n && root.contains(&s.point))
        .collect();

    let mut ctx = Ctx { f, opts, order: rule_order(n), floor_density: 0.0 };
    let scale = ctx.gauss(&root).1;
    ctx.floor_density = (1e-3 * opts.rel_tol * scale + opts.abs_tol) / root.volume();

    let mut cuts: Vec<Vec<f64>> = (0..n).map(|a| vec![root.lo[a], root.hi[a]]).collect();
    for s in &inside {
        for a in 0..n {
            cuts[a].push(s.point[a]);
        }
    }
    for c in &mut cuts {
        c.sort_by(f64::total_cmp);
        c.dedup();
    }
    let pieces_per_axis: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let total: usize = pieces_per_axis.iter().product();
    let sings: Vec<Singularity> = inside.into_iter().cloned().collect();
    let mut sum = 0.0;
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let b = Boxed {
            lo: (0..n).map(|a| cuts[a][idx[a]]).collect(),
            hi: (0..n).map(|a| cuts[a][idx[a] + 1]).collect(),
        };
        if b.volume() > 0.0 {
            sum += ctx.piece(&b, &sings)?;
        }
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < pieces_per_axis[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(sum)
}

/// One-dimensional convenience wrapper.
pub fn quad_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, singular: &[Singularity], opts: QuadOptions) -> Result<f64> {
    let g = |x: &[f64]| f(x[0]);
    quad_cube_with(&g, &Cube::interval(a, b), singular, opts)
}
