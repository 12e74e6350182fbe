//! Multidimensional complex transforms on row-major arrays.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized transform along every axis of a cube array with
/// `n` points per axis.
pub fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[base..base + n], &mut scratch);
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of FFT bin `k` for a transform of length `n`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Embeds a cube array of side `n` into the low corner of a zero array of side `2n`.
pub fn zero_pad(values: &[Complex64], dim: usize, n: usize) -> Vec<Complex64> {
    let m = 2 * n;
    let mut out = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
    let mut idx = vec![0usize; dim];
    for (flat, v) in values.iter().enumerate() {
        let mut rem = flat;
        for a in (0..dim).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        let target = idx.iter().fold(0, |acc, &i| acc * m + i);
        out[target] = *v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_dft_in_two_dimensions() {
        let n = 8;
        let data: Vec<Complex64> = (0..n * n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos())).collect();
        let mut fast = data.clone();
        fft_nd(&mut fast, 2, n, FftDirection::Forward);
        for k0 in 0..n {
            for k1 in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * j0 + k1 * j1) as f64) / n as f64;
                        s += data[j0 * n + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - fast[k0 * n + k1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn padding_keeps_values() {
        let v: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let p = zero_pad(&v, 2, 2);
        assert_eq!(p.len(), 16);
        assert_eq!(p[0].re, 0.0);
        assert_eq!(p[1].re, 1.0);
        assert_eq!(p[4].re, 2.0);
        assert_eq!(p[5].re, 3.0);
    }
}
