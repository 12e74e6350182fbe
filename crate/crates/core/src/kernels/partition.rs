use serde::{Deserialize, Serialize};

use super::profile::cutoff;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    Homogeneous,
    Inhomogeneous { rho: f64 },
}

/// A finite family of smooth radial pieces summing to one on a declared region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub dim: usize,
    pub kind: PartitionKind,
    pub k_min: i32,
    pub k_max: i32,
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `Psi_hat(xi) = theta(xi) - theta(2 xi)`, pieces `Psi_hat(2^j xi)` for `|j| <= 20`.
pub fn dyadic_annulus_partition(dim: usize) -> PartitionSpec {
    PartitionSpec { dim, kind: PartitionKind::Homogeneous, k_min: -20, k_max: 20 }
}

/// `lambda_k(xi) = Phi_k_hat(2^{k rho} xi)` for `k = 0..=K`.
pub fn inhomogeneous_partition(dim: usize, rho: f64, k_max: i32) -> PartitionSpec {
    assert!((0.0..1.0).contains(&rho), "rho must lie in [0, 1)");
    assert!(k_max >= 0, "K must be non-negative");
    PartitionSpec { dim, kind: PartitionKind::Inhomogeneous { rho }, k_min: 0, k_max }
}

impl PartitionSpec {
    /// The generating annulus function `theta(xi) - theta(2 xi)`.
    pub fn psi_hat(xi: &[f64]) -> f64 {
        let r = norm(xi);
        cutoff(r) - cutoff(2.0 * r)
    }

    /// `Phi_k_hat` evaluated at `zeta` (inhomogeneous only).
    pub fn phi_hat(&self, k: i32, zeta: &[f64]) -> f64 {
        let PartitionKind::Inhomogeneous { rho } = self.kind else {
            panic!("phi_hat is defined for the inhomogeneous partition");
        };
        let r = norm(zeta);
        if k == 0 {
            return cutoff(r);
        }
        let s = r * 2f64.powi(-k);
        cutoff(s) - cutoff(2f64.powf(1.0 - rho) * s)
    }

    /// Piece `k` at `xi`: `Psi_hat(2^k xi)` or `lambda_k(xi)`.
    pub fn piece(&self, k: i32, xi: &[f64]) -> f64 {
        let r = norm(xi);
        match self.kind {
            PartitionKind::Homogeneous => {
                let s = 2f64.powi(k) * r;
                cutoff(s) - cutoff(2.0 * s)
            }
            PartitionKind::Inhomogeneous { rho } => {
                if k == 0 {
                    return cutoff(r);
                }
                let a = 2f64.powf(-(k as f64) * (1.0 - rho)) * r;
                let b = 2f64.powf(-((k - 1) as f64) * (1.0 - rho)) * r;
                cutoff(a) - cutoff(b)
            }
        }
    }

    pub fn sum(&self, xi: &[f64]) -> f64 {
        (self.k_min..=self.k_max).map(|k| self.piece(k, xi)).sum()
    }

    /// Radii `[r_lo, r_hi]` on which the pieces sum to one.
    pub fn validity(&self) -> (f64, f64) {
        match self.kind {
            PartitionKind::Homogeneous => (2f64.powi(-self.k_max), 2f64.powi(-self.k_min)),
            PartitionKind::Inhomogeneous { rho } => (0.0, 2f64.powf(self.k_max as f64 * (1.0 - rho) - 1.0)),
        }
    }

    /// Radial support `[lo, hi]` of piece `k`.
    pub fn support(&self, k: i32) -> (f64, f64) {
        match self.kind {
            PartitionKind::Homogeneous => (2f64.powi(-k - 1), 2f64.powi(-k + 1)),
            PartitionKind::Inhomogeneous { rho } => {
                if k == 0 {
                    (0.0, 2.0)
                } else {
                    let c = k as f64 * (1.0 - rho);
                    (2f64.powf(c - 1.0), 2f64.powf(c + 1.0))
                }
            }
        }
    }

    /// Radial profile of every piece as CSV, `radius,piece_k...`.
    pub fn to_csv(&self, radii: &[f64]) -> String {
        let mut out = String::from("radius");
        for k in self.k_min..=self.k_max {
            out.push_str(&format!(",piece_{k}"));
        }
        out.push('\n');
        for &r in radii {
            let mut xi = vec![0.0; self.dim];
            xi[0] = r;
            out.push_str(&format!("{r:e}"));
            for k in self.k_min..=self.k_max {
                out.push_str(&format!(",{:e}", self.piece(k, &xi)));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direction(dim: usize, r: f64, seed: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..dim).map(|a| ((seed * 7 + a * 13) as f64).sin() + 0.1).collect();
        let n = norm(&raw);
        raw.iter().map(|v| v * r / n).collect()
    }

    #[test]
    fn annulus_support() {
        let p = dyadic_annulus_partition(2);
        assert_eq!(PartitionSpec::psi_hat(&[0.25, 0.0]), 0.0);
        assert_eq!(PartitionSpec::psi_hat(&[0.0, 4.0]), 0.0);
        assert_eq!(p.piece(0, &[0.0, 4.0]), 0.0);
    }

    #[test]
    fn homogeneous_telescopes() {
        for dim in [1, 2] {
            let p = dyadic_annulus_partition(dim);
            for i in 0..400 {
                let r = 2f64.powf(-18.0 + 36.0 * i as f64 / 399.0);
                let xi = direction(dim, r, i);
                assert!((p.sum(&xi) - 1.0).abs() < 1e-12);
                let nonzero = (p.k_min..=p.k_max).filter(|&k| p.piece(k, &xi) != 0.0).count();
                assert!(nonzero <= 2);
                for k in p.k_min..=p.k_max {
                    let v = p.piece(k, &xi);
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn inhomogeneous_telescopes() {
        for (rho, k) in [(0.0, 10), (0.5, 10), (0.5, 3)] {
            let p = inhomogeneous_partition(2, rho, k);
            let (_, r_max) = p.validity();
            for i in 0..300 {
                let xi = direction(2, r_max * i as f64 / 299.0, i);
                assert!((p.sum(&xi) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(inhomogeneous_partition(1, 0.5, 10).validity().1, 16.0);
    }

    #[test]
    fn inhomogeneous_supports() {
        let p = inhomogeneous_partition(1, 0.5, 10);
        for k in 0..=10 {
            let (lo, hi) = p.support(k);
            for i in 0..2000 {
                let r = 2f64.powf(-3.0 + 12.0 * i as f64 / 1999.0);
                if p.piece(k, &[r]) != 0.0 {
                    assert!(lo <= r && r <= hi, "k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn rescaled_pieces_agree() {
        let p = inhomogeneous_partition(1, 0.5, 8);
        for k in 0..=8 {
            for i in 0..50 {
                let xi = 0.1 + 30.0 * i as f64 / 49.0;
                let scaled = 2f64.powf(k as f64 * 0.5) * xi;
                assert!((p.piece(k, &[xi]) - p.phi_hat(k, &[scaled])).abs() < 1e-12);
            }
        }
    }
}
