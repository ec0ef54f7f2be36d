//! n-dimensional complex FFT on row-major cubic grids.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized forward (e^{−i}) and inverse (e^{+i}) transforms over
/// `n^dim` points.
#[derive(Clone)]
pub struct NdFft {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("dim", &self.dim).field("n", &self.n).finish()
    }
}

impl NdFft {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&self.inverse, data);
    }

    /// Inverse transform divided by the number of points.
    pub fn inverse_normalized(&self, data: &mut [Complex64]) {
        self.inverse(data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn apply(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT grid");
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Last axis is contiguous.
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Signed frequency index of position `j` on an `n`-point axis.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(dim: usize, n: usize, data: &[Complex64]) -> Vec<Complex64> {
        let total = n.pow(dim as u32);
        let idx = |mut f: usize| {
            let mut v = vec![0usize; dim];
            for a in (0..dim).rev() {
                v[a] = f % n;
                f /= n;
            }
            v
        };
        (0..total)
            .map(|k| {
                let kv = idx(k);
                (0..total)
                    .map(|x| {
                        let xv = idx(x);
                        let phase: f64 = kv.iter().zip(&xv).map(|(a, b)| (a * b) as f64).sum::<f64>();
                        data[x] * Complex64::from_polar(1.0, -std::f64::consts::TAU * phase / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_two_and_three_dimensions() {
        for (dim, n) in [(1usize, 8usize), (2, 4), (3, 4)] {
            let total = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..total)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut fast = data.clone();
            NdFft::new(dim, n).forward(&mut fast);
            let slow = naive_dft(dim, n, &data);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10);
            }
            NdFft::new(dim, n).inverse_normalized(&mut fast);
            for (a, b) in fast.iter().zip(&data) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
