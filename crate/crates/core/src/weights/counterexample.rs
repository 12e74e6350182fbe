use serde::{Deserialize, Serialize};

use super::expr::{ExponentTuple, Factor, MultiWeight, WeightExpr};
use crate::error::{invalid, Result};

/// Parameters of the weights `|x|^{beta_j} |x - e_1|^{-gamma}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub n: usize,
    pub l: usize,
    pub q: f64,
    pub exponents: ExponentTuple,
    pub delta: f64,
}

const EQ_TOL: f64 = 1e-12;

impl CounterexampleParams {
    pub fn new(n: usize, l: usize, q: f64, exponents: ExponentTuple, delta: f64) -> Result<Self> {
        if n == 0 || l == 0 {
            return invalid("n and l must be positive");
        }
        if exponents.len() != l {
            return invalid(format!("expected {l} exponents, got {}", exponents.len()));
        }
        if !(q > 0.0) {
            return invalid(format!("q must be positive, got {q}"));
        }
        if q > exponents.min() * (1.0 + EQ_TOL) {
            return invalid(format!("q <= min_j p_j violated: q = {q}, min p_j = {}", exponents.min()));
        }
        let bound = Self::delta_bound(n, q, &exponents);
        if !(delta > 0.0 && delta < bound) {
            return invalid(format!(
                "delta must satisfy 0 < delta < n*min_j min(p_j/q - 1, 1) = {bound} (p_j = q contributes 1), got {delta}"
            ));
        }
        Ok(CounterexampleParams { n, l, q, exponents, delta })
    }

    fn delta_bound(n: usize, q: f64, exponents: &ExponentTuple) -> f64 {
        let m = exponents
            .p_list
            .iter()
            .map(|p| {
                let r = p / q - 1.0;
                if r.abs() <= EQ_TOL {
                    1.0
                } else {
                    r.min(1.0)
                }
            })
            .fold(f64::INFINITY, f64::min);
        n as f64 * m
    }

    pub fn gamma(&self) -> f64 {
        self.n as f64 - self.delta
    }

    pub fn beta(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.exponents
            .p_list
            .iter()
            .map(|p| {
                if (p / self.q - 1.0).abs() <= EQ_TOL {
                    0.0
                } else {
                    n * (p / self.q - 1.0) - self.delta
                }
            })
            .collect()
    }

    /// `sum_j beta_j / p_j`.
    pub fn beta_sum(&self) -> f64 {
        self.beta().iter().zip(&self.exponents.p_list).map(|(b, p)| b / p).sum()
    }

    /// `sum_j beta_j/p_j - (n l/q - n/p - delta/p)`; zero when every `p_j > q`.
    pub fn beta_identity_residual(&self) -> f64 {
        let (n, l, p) = (self.n as f64, self.l as f64, self.exponents.p());
        self.beta_sum() - (n * l / self.q - n / p - self.delta / p)
    }

    pub fn all_above_q(&self) -> bool {
        self.exponents.p_list.iter().all(|p| (p / self.q - 1.0) > EQ_TOL)
    }
}

/// `(w_{beta_1,gamma}, ..., w_{beta_l,gamma})`.
pub fn counterexample_weights(params: &CounterexampleParams) -> MultiWeight {
    let n = params.n;
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let gamma = params.gamma();
    let weights = params
        .beta()
        .into_iter()
        .map(|b| {
            WeightExpr::new(
                n,
                vec![Factor { center: vec![0.0; n], exponent: b }, Factor { center: e1.clone(), exponent: -gamma }],
            )
            .expect("valid factors")
        })
        .collect();
    MultiWeight::new(weights, params.exponents.clone()).expect("matching lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::v_weight;

    fn tuple(p: &[f64]) -> ExponentTuple {
        ExponentTuple::new(p.to_vec()).unwrap()
    }

    #[test]
    fn scalar_instance() {
        let params = CounterexampleParams::new(1, 1, 1.0, tuple(&[2.0]), 0.1).unwrap();
        let mw = counterexample_weights(&params);
        let f = &mw.weights[0].factors;
        assert_eq!(f[0].center, vec![0.0]);
        assert!((f[0].exponent - 0.9).abs() < 1e-15);
        assert_eq!(f[1].center, vec![1.0]);
        assert!((f[1].exponent + 0.9).abs() < 1e-15);
    }

    #[test]
    fn equal_exponents_give_pure_e1_factor() {
        let params = CounterexampleParams::new(2, 2, 2.0, tuple(&[2.0, 2.0]), 0.5).unwrap();
        for w in counterexample_weights(&params).weights {
            assert_eq!(w.factors.len(), 1);
            assert_eq!(w.factors[0].center, vec![1.0, 0.0]);
        }
    }

    #[test]
    fn delta_out_of_range_names_constraint() {
        let err = CounterexampleParams::new(1, 1, 1.0, tuple(&[2.0]), 1.5).unwrap_err();
        assert!(err.to_string().contains("delta < n*min_j"), "{err}");
    }

    #[test]
    fn bilinear_combined_weight() {
        let params = CounterexampleParams::new(1, 2, 1.0, tuple(&[2.0, 2.0]), 0.25).unwrap();
        let v = v_weight(&counterexample_weights(&params));
        for x in [0.3, 2.5, -1.0] {
            let expect = f64::abs(x).powf(0.75) / f64::abs(x - 1.0).powf(0.75);
            assert!((v.eval(&[x]) - expect).abs() < 1e-14 * expect);
        }
    }

    #[test]
    fn beta_identity_holds() {
        for (p, q, d) in [(vec![2.0, 3.0], 1.0, 0.3), (vec![4.0], 1.5, 0.2), (vec![2.0, 2.5, 3.0], 1.2, 0.1)] {
            let params = CounterexampleParams::new(1, p.len(), q, tuple(&p), d).unwrap();
            assert!(params.beta_identity_residual().abs() < 1e-12);
        }
    }
}
