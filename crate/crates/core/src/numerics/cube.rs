use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Closed axis-parallel cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return invalid(format!("cube side must be positive, got {side}"));
        }
        if center.is_empty() {
            return invalid("cube needs at least one coordinate");
        }
        Ok(Cube { center, side })
    }

    pub fn from_corner(lo: &[f64], side: f64) -> Self {
        Cube { center: lo.iter().map(|&a| a + 0.5 * side).collect(), side }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Cube { center: vec![0.5 * (a + b)], side: b - a }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|a| self.lo(a) <= x[a] && x[a] <= self.hi(a))
    }

    /// Euclidean distance from a point to the cube (zero inside).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|a| {
                let d = (self.lo(a) - x[a]).max(x[a] - self.hi(a)).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn dilate(&self, lambda: f64) -> Cube {
        Cube {
            center: self.center.iter().map(|c| c * lambda).collect(),
            side: self.side * lambda,
        }
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|a| if mask >> a & 1 == 1 { self.hi(a) } else { self.lo(a) })
                    .collect()
            })
            .collect()
    }

    /// The `2^n` dyadic children.
    pub fn children(&self) -> Vec<Cube> {
        let n = self.dim();
        let q = 0.25 * self.side;
        (0..1usize << n)
            .map(|mask| Cube {
                center: (0..n)
                    .map(|a| self.center[a] + if mask >> a & 1 == 1 { q } else { -q })
                    .collect(),
                side: 0.5 * self.side,
            })
            .collect()
    }

    fn key(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.center.iter().map(|c| c.to_bits()).collect();
        k.push(self.side.to_bits());
        k
    }
}

fn default_translations() -> usize {
    4
}
fn default_random() -> usize {
    8
}

/// Generator of a finite anchored dyadic family.
///
/// At each scale `2^k` the family holds the `T^n` lattice cubes of step
/// `2^k / T` that contain each anchor, plus `random_per_scale` seeded cubes
/// placed near the anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub dim: usize,
    pub k_min: i32,
    pub k_max: i32,
    #[serde(default = "default_translations")]
    pub translations: usize,
    pub anchors: Vec<Vec<f64>>,
    #[serde(default = "default_random")]
    pub random_per_scale: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale_offset: i32,
}

impl FamilySpec {
    /// Scales `2^-12..2^12`, anchors `{0, e_1}`.
    pub fn default_for(dim: usize) -> Self {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        FamilySpec {
            dim,
            k_min: -12,
            k_max: 12,
            translations: 4,
            anchors: vec![vec![0.0; dim], e1],
            random_per_scale: 8,
            seed: 0,
            scale_offset: 0,
        }
    }

    pub fn with_scales(mut self, k_min: i32, k_max: i32) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Widens the scale range by `by` on both ends; the result contains the
    /// original family.
    pub fn extended(&self, by: i32) -> Self {
        let mut s = self.clone();
        s.k_min -= by;
        s.k_max += by;
        s
    }

    /// Image of the family under `x -> 2^j x`.
    pub fn dilated(&self, j: i32) -> Self {
        let lambda = 2f64.powi(j);
        let mut s = self.clone();
        s.k_min += j;
        s.k_max += j;
        s.scale_offset += j;
        s.anchors = s.anchors.iter().map(|a| a.iter().map(|x| x * lambda).collect()).collect();
        s
    }

    pub fn describe(&self) -> String {
        format!(
            "anchored dyadic family: scales 2^{}..2^{}, {} translations, {} anchors, {} random/scale, seed {}",
            self.k_min,
            self.k_max,
            self.translations,
            self.anchors.len(),
            self.random_per_scale,
            self.seed
        )
    }

    pub fn build(&self) -> Result<CubeFamily> {
        if self.k_min > self.k_max {
            return invalid(format!("empty scale range {}..{}", self.k_min, self.k_max));
        }
        if !self.translations.is_power_of_two() {
            return invalid("translations per scale must be a power of two");
        }
        if self.anchors.is_empty() {
            return invalid("cube family needs at least one anchor");
        }
        if self.anchors.iter().any(|a| a.len() != self.dim) {
            return invalid("anchor dimension differs from family dimension");
        }
        let n = self.dim;
        let t = self.translations as i64;
        let mut seen = HashSet::new();
        let mut cubes = Vec::new();
        let mut push = |c: Cube| {
            if seen.insert(c.key()) {
                cubes.push(c);
            }
        };
        for k in self.k_min..=self.k_max {
            let side = 2f64.powi(k);
            let step = side / t as f64;
            for a in &self.anchors {
                let base: Vec<i64> = a.iter().map(|x| (x / step).floor() as i64).collect();
                for flat in 0..(t as usize).pow(n as u32) {
                    let mut rem = flat;
                    let lo: Vec<f64> = base
                        .iter()
                        .map(|&b| {
                            let m = b - (rem % t as usize) as i64;
                            rem /= t as usize;
                            m as f64 * step
                        })
                        .collect();
                    push(Cube::from_corner(&lo, side));
                }
            }
            for r in 0..self.random_per_scale {
                let a = &self.anchors[r % self.anchors.len()];
                let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, r as u64, (k - self.scale_offset) as i64));
                let lo: Vec<f64> = a.iter().map(|x| x + side * rng.gen_range(-2.0..1.0)).collect();
                push(Cube::from_corner(&lo, side));
            }
        }
        Ok(CubeFamily { cubes, description: self.describe() })
    }
}

fn mix(seed: u64, r: u64, k: i64) -> u64 {
    let mut z = seed ^ r.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (k as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A finite list of cubes standing in for "all cubes".
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFamily {
    pub cubes: Vec<Cube>,
    pub description: String,
}

impl CubeFamily {
    pub fn from_cubes(cubes: Vec<Cube>) -> Self {
        CubeFamily { description: format!("explicit family of {} cubes", cubes.len()), cubes }
    }

    /// Every lattice cube of side `2^k` and step `2^k / T` meeting `[lo, hi]^dim`.
    pub fn lattice(dim: usize, lo: f64, hi: f64, k_min: i32, k_max: i32, translations: usize) -> Result<Self> {
        if k_min > k_max || !(hi > lo) || translations == 0 {
            return invalid("lattice family needs k_min <= k_max, lo < hi, translations > 0");
        }
        let mut cubes = Vec::new();
        for k in k_min..=k_max {
            let side = 2f64.powi(k);
            let step = side / translations as f64;
            let m0 = ((lo - side) / step).floor() as i64;
            let m1 = (hi / step).ceil() as i64;
            let per_axis = (m1 - m0 + 1) as usize;
            if per_axis.checked_pow(dim as u32).map_or(true, |c| c > 1 << 26) {
                return invalid(format!("lattice family at scale 2^{k} is too large"));
            }
            for flat in 0..per_axis.pow(dim as u32) {
                let mut rem = flat;
                let corner: Vec<f64> = (0..dim)
                    .map(|_| {
                        let m = m0 + (rem % per_axis) as i64;
                        rem /= per_axis;
                        m as f64 * step
                    })
                    .collect();
                let c = Cube::from_corner(&corner, side);
                if (0..dim).all(|a| c.hi(a) >= lo && c.lo(a) <= hi) {
                    cubes.push(c);
                }
            }
        }
        Ok(CubeFamily {
            description: format!("lattice family: scales 2^{k_min}..2^{k_max}, {translations} translations on [{lo}, {hi}]^{dim}"),
            cubes,
        })
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn containing<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = &'a Cube> + 'a {
        self.cubes.iter().filter(move |c| c.contains(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_anchor_is_covered_at_every_scale() {
        let spec = FamilySpec::default_for(2);
        let fam = spec.build().unwrap();
        for k in spec.k_min..=spec.k_max {
            let side = 2f64.powi(k);
            for a in &spec.anchors {
                assert!(fam.cubes.iter().any(|c| c.side == side && c.contains(a)), "k={k}");
            }
        }
    }

    #[test]
    fn dilation_maps_family_onto_dilated_spec() {
        let spec = FamilySpec::default_for(1).with_scales(-4, 4);
        let fam = spec.build().unwrap();
        let dil = spec.dilated(3).build().unwrap();
        let mut a: Vec<_> = fam.cubes.iter().map(|c| c.dilate(8.0).key()).collect();
        let mut b: Vec<_> = dil.cubes.iter().map(|c| c.key()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn extension_is_a_superset() {
        let spec = FamilySpec::default_for(1).with_scales(-3, 3);
        let small = spec.build().unwrap();
        let big = spec.extended(2).build().unwrap();
        let keys: HashSet<_> = big.cubes.iter().map(|c| c.key()).collect();
        assert!(small.cubes.iter().all(|c| keys.contains(&c.key())));
    }

    #[test]
    fn centered_intervals_are_present() {
        let fam = FamilySpec::default_for(1).build().unwrap();
        for k in -10..=12 {
            let r = 2f64.powi(k - 1);
            assert!(fam.cubes.iter().any(|c| c.center[0] == 0.0 && c.side == 2.0 * r));
        }
    }

    #[test]
    fn lattice_family_covers_box() {
        let fam = CubeFamily::lattice(1, -1.0, 1.0, -2, 0, 2).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!(fam.containing(&[x]).count() >= 3);
        }
    }
}
