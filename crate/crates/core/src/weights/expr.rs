use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::Singularity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub center: Vec<f64>,
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

/// `coefficient * prod_i |x - c_i|^{alpha_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightExpr {
    pub dimension: usize,
    pub factors: Vec<Factor>,
    #[serde(default = "one")]
    pub coefficient: f64,
}

impl WeightExpr {
    /// Builds a weight, merging factors with equal centers by adding exponents.
    pub fn new(dimension: usize, factors: Vec<Factor>) -> Result<Self> {
        Self::with_coefficient(dimension, factors, 1.0)
    }

    pub fn with_coefficient(dimension: usize, factors: Vec<Factor>, coefficient: f64) -> Result<Self> {
        if dimension == 0 {
            return invalid("weight dimension must be positive");
        }
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return invalid("weight coefficient must be positive and finite");
        }
        let mut merged: Vec<Factor> = Vec::new();
        for f in factors {
            if f.center.len() != dimension {
                return invalid(format!(
                    "factor center {:?} does not have dimension {dimension}",
                    f.center
                ));
            }
            if !f.exponent.is_finite() || f.center.iter().any(|c| !c.is_finite()) {
                return invalid("weight factors must be finite");
            }
            match merged.iter_mut().find(|g| g.center == f.center) {
                Some(g) => g.exponent += f.exponent,
                None => merged.push(f),
            }
        }
        merged.retain(|f| f.exponent != 0.0);
        Ok(WeightExpr { dimension, factors: merged, coefficient })
    }

    /// Re-validates and merges a deserialized weight.
    pub fn normalized(self) -> Result<Self> {
        Self::with_coefficient(self.dimension, self.factors, self.coefficient)
    }

    pub fn one(dimension: usize) -> Self {
        WeightExpr { dimension, factors: vec![], coefficient: 1.0 }
    }

    pub fn power(center: Vec<f64>, exponent: f64) -> Self {
        let dimension = center.len();
        Self::new(dimension, vec![Factor { center, exponent }]).expect("valid power weight")
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coefficient;
        for f in &self.factors {
            let d2: f64 = f.center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
            if d2 == 0.0 {
                return if f.exponent < 0.0 { f64::INFINITY } else { 0.0 };
            }
            v *= d2.powf(0.5 * f.exponent);
        }
        v
    }

    /// `w^s`.
    pub fn powf(&self, s: f64) -> WeightExpr {
        let factors = if s == 0.0 {
            vec![]
        } else {
            self.factors
                .iter()
                .map(|f| Factor { center: f.center.clone(), exponent: f.exponent * s })
                .collect()
        };
        WeightExpr { dimension: self.dimension, factors, coefficient: self.coefficient.powf(s) }
    }

    pub fn mul(&self, other: &WeightExpr) -> Result<WeightExpr> {
        if other.dimension != self.dimension {
            return invalid("cannot multiply weights of different dimensions");
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::with_coefficient(self.dimension, factors, self.coefficient * other.coefficient)
    }

    /// `x -> w(lambda x)`.
    pub fn dilate(&self, lambda: f64) -> WeightExpr {
        let mut coefficient = self.coefficient;
        let factors = self
            .factors
            .iter()
            .map(|f| {
                coefficient *= lambda.powf(f.exponent);
                Factor { center: f.center.iter().map(|c| c / lambda).collect(), exponent: f.exponent }
            })
            .collect();
        WeightExpr { dimension: self.dimension, factors, coefficient }
    }

    pub fn singularities(&self) -> Vec<Singularity> {
        self.factors
            .iter()
            .map(|f| Singularity::power(f.center.clone(), f.exponent))
            .collect()
    }

    /// Factors that are not locally integrable near their center.
    pub fn non_integrable_factors(&self) -> impl Iterator<Item = &Factor> {
        let n = self.dimension as f64;
        self.factors.iter().filter(move |f| f.exponent <= -n)
    }
}

/// Exponents `(p_1, ..., p_l)` with `1/p = sum 1/p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentTuple {
    pub p_list: Vec<f64>,
}

impl ExponentTuple {
    pub fn new(p_list: Vec<f64>) -> Result<Self> {
        if p_list.is_empty() {
            return invalid("exponent tuple must be non-empty");
        }
        if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            return invalid(format!("every p_j must lie in [1, inf), got {p}"));
        }
        Ok(ExponentTuple { p_list })
    }

    pub fn len(&self) -> usize {
        self.p_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_list.is_empty()
    }

    pub fn p(&self) -> f64 {
        1.0 / self.p_list.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    /// `p_j'`, infinite for `p_j = 1`.
    pub fn conjugate(&self, j: usize) -> f64 {
        conjugate(self.p_list[j])
    }

    pub fn min(&self) -> f64 {
        self.p_list.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, q: f64) -> Vec<f64> {
        self.p_list.iter().map(|p| p / q).collect()
    }
}

pub(crate) fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiWeight {
    pub weights: Vec<WeightExpr>,
    pub exponents: ExponentTuple,
}

impl MultiWeight {
    pub fn new(weights: Vec<WeightExpr>, exponents: ExponentTuple) -> Result<Self> {
        if weights.len() != exponents.len() {
            return invalid(format!(
                "{} weights but {} exponents",
                weights.len(),
                exponents.len()
            ));
        }
        let n = weights[0].dimension;
        if weights.iter().any(|w| w.dimension != n) {
            return invalid("all weights of a tuple must share one dimension");
        }
        Ok(MultiWeight { weights, exponents })
    }

    pub fn dimension(&self) -> usize {
        self.weights[0].dimension
    }

    pub fn l(&self) -> usize {
        self.weights.len()
    }

    /// `(w_1^s, ..., w_l^s)`.
    pub fn powf(&self, s: f64) -> MultiWeight {
        MultiWeight {
            weights: self.weights.iter().map(|w| w.powf(s)).collect(),
            exponents: self.exponents.clone(),
        }
    }

    pub fn dilate(&self, lambda: f64) -> MultiWeight {
        MultiWeight {
            weights: self.weights.iter().map(|w| w.dilate(lambda)).collect(),
            exponents: self.exponents.clone(),
        }
    }
}

/// Combined weight `prod_j w_j^{p/p_j}`.
pub fn v_weight(mw: &MultiWeight) -> WeightExpr {
    let p = mw.exponents.p();
    let mut factors = Vec::new();
    let mut coefficient = 1.0;
    for (w, pj) in mw.weights.iter().zip(&mw.exponents.p_list) {
        let s = p / pj;
        coefficient *= w.coefficient.powf(s);
        factors.extend(w.factors.iter().map(|f| Factor { center: f.center.clone(), exponent: f.exponent * s }));
    }
    WeightExpr::with_coefficient(mw.dimension(), factors, coefficient).expect("factors share dimension")
}

/// Membership of `|x|^alpha` in `A_p(R^n)`.
pub fn power_membership(alpha: f64, n: usize, p: f64) -> bool {
    let n = n as f64;
    if p > 1.0 {
        -n < alpha && alpha < n * (p - 1.0)
    } else if p == 1.0 {
        -n < alpha && alpha <= 0.0
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_example() -> WeightExpr {
        WeightExpr::new(
            1,
            vec![
                Factor { center: vec![0.0], exponent: 1.0 },
                Factor { center: vec![1.0], exponent: -0.5 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let w = w_example();
        assert!((w.eval(&[2.0]) - 2.0).abs() < 1e-15);
        assert_eq!(w.eval(&[1.0]), f64::INFINITY);
        assert_eq!(w.eval(&[0.0]), 0.0);
    }

    #[test]
    fn like_centers_merge() {
        let w = WeightExpr::new(
            1,
            vec![
                Factor { center: vec![0.0], exponent: 0.5 },
                Factor { center: vec![0.0], exponent: 0.25 },
                Factor { center: vec![1.0], exponent: 0.3 },
                Factor { center: vec![1.0], exponent: -0.3 },
            ],
        )
        .unwrap();
        assert_eq!(w.factors, vec![Factor { center: vec![0.0], exponent: 0.75 }]);
    }

    #[test]
    fn membership_table() {
        assert!(power_membership(0.0, 1, 2.0));
        assert!(!power_membership(1.0, 1, 2.0));
        assert!(!power_membership(-1.0, 1, 1.0));
        assert!(power_membership(-0.5, 1, 1.0));
        assert!(!power_membership(0.1, 1, 1.0));
        assert!(power_membership(1.9, 2, 2.0));
    }

    #[test]
    fn combined_weight_of_equal_pair() {
        let w = w_example();
        let mw = MultiWeight::new(vec![w.clone(), w.clone()], ExponentTuple::new(vec![2.0, 2.0]).unwrap()).unwrap();
        let v = v_weight(&mw);
        assert_eq!(v.factors.len(), 2);
        for x in [0.3, 1.7, -2.0] {
            assert!((v.eval(&[x]) - w.eval(&[x])).abs() < 1e-14);
        }
    }

    #[test]
    fn combined_weight_of_ones() {
        let one = WeightExpr::one(2);
        let mw = MultiWeight::new(vec![one.clone(), one], ExponentTuple::new(vec![3.0, 1.5]).unwrap()).unwrap();
        assert!(v_weight(&mw).is_constant());
    }

    #[test]
    fn dilation_matches_pointwise() {
        let w = w_example();
        let d = w.dilate(4.0);
        for x in [0.1, 0.7, 3.0] {
            assert!((d.eval(&[x]) - w.eval(&[4.0 * x])).abs() < 1e-12 * w.eval(&[4.0 * x]));
        }
    }

    #[test]
    fn serde_shape() {
        let w: WeightExpr =
            serde_json::from_str(r#"{"dimension":1,"factors":[{"center":[0.0],"exponent":0.5}]}"#).unwrap();
        assert_eq!(w.coefficient, 1.0);
        assert!(serde_json::from_str::<WeightExpr>(r#"{"dimension":1,"factors":[],"extra":1}"#).is_err());
    }
}
