/// Degree-9 smoothstep: 0 at 0, 1 at 1, first four derivatives vanish at both ends.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let s2 = s * s;
    s2 * s2 * s * (126.0 - 420.0 * s + 540.0 * s2 - 315.0 * s2 * s + 70.0 * s2 * s2)
}

/// Radial cutoff: 1 on `r <= 1`, 0 on `r >= 2`.
pub fn cutoff(r: f64) -> f64 {
    smoothstep(2.0 - r)
}

/// `cutoff(|x|)`.
pub fn bump(x: &[f64]) -> f64 {
    cutoff(x.iter().map(|v| v * v).sum::<f64>().sqrt())
}
