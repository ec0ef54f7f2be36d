//! Gaussian random fields with covariance V₀²g(x − x′), white or colored in
//! time, sampled spectrally on periodic grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{signed_index, NdFft};
use crate::model::{sampled_spectrum, CorrelationSpec, ModelParams, SpaceKind};
use crate::rng::{CounterRng, Purpose, SeedInfo};

/// Periodic grid of `points_per_side^dim` sites, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub dim: usize,
    pub points_per_side: usize,
    pub side_length: f64,
    pub space: SpaceKind,
}

impl FieldGrid {
    pub fn continuum(dim: usize, points_per_side: usize, side_length: f64) -> Result<Self> {
        let g = Self {
            dim,
            points_per_side,
            side_length,
            space: SpaceKind::Continuum,
        };
        g.validate()?;
        Ok(g)
    }

    /// Lattice box with unit spacing.
    pub fn lattice(dim: usize, points_per_side: usize) -> Result<Self> {
        let g = Self {
            dim,
            points_per_side,
            side_length: points_per_side as f64,
            space: SpaceKind::Lattice,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Input("grid dimension must be at least 1".into()));
        }
        if self.points_per_side < 2 || !self.points_per_side.is_power_of_two() {
            return Err(Error::Input(format!(
                "points_per_side must be a power of two, got {}",
                self.points_per_side
            )));
        }
        if !(self.side_length > 0.0 && self.side_length.is_finite()) {
            return Err(Error::Input("side_length must be positive".into()));
        }
        if self.space == SpaceKind::Lattice && self.side_length != self.points_per_side as f64 {
            return Err(Error::Input("lattice grids have unit spacing".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.points_per_side.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        match self.space {
            SpaceKind::Continuum => self.side_length / self.points_per_side as f64,
            SpaceKind::Lattice => 1.0,
        }
    }

    /// Per-axis indices of a flat site index.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points_per_side;
        for axis in (0..self.dim).rev() {
            out[axis] = flat % n;
            flat /= n;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points_per_side + i)
    }

    /// Minimum-image coordinate of each site along one axis.
    pub fn axis_positions(&self) -> Vec<f64> {
        let n = self.points_per_side;
        (0..n).map(|j| signed_index(j, n) as f64 * self.spacing()).collect()
    }

    /// Angular wavenumbers 2πj/L along one axis in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let n = self.points_per_side;
        (0..n)
            .map(|j| std::f64::consts::TAU * signed_index(j, n) as f64 / self.side_length)
            .collect()
    }

    /// Flat index of the mode −k.
    pub fn conjugate_mode(&self, flat: usize) -> usize {
        let n = self.points_per_side;
        let mut idx = vec![0; self.dim];
        self.unflatten(flat, &mut idx);
        for i in idx.iter_mut() {
            *i = (n - *i) % n;
        }
        self.flatten(&idx)
    }
}

/// One white-in-time increment ΔW(x) over a step of length `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub values: Vec<f64>,
    pub dt: f64,
    pub seed_info: SeedInfo,
}

/// Relative tolerance on negative spectral weights.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Precomputed spectral sampler for a grid and correlation.
#[derive(Debug, Clone)]
pub struct WhiteNoiseSampler {
    grid: FieldGrid,
    /// √(λ_k / N) per mode, λ_k the DFT of V₀²g on the grid.
    amplitude: Vec<f64>,
    /// Index of −k, and whether k is the representative of its pair.
    partner: Vec<usize>,
    fft: NdFft,
}

impl WhiteNoiseSampler {
    pub fn new(grid: FieldGrid, g: &CorrelationSpec, p: &ModelParams) -> Result<Self> {
        grid.validate()?;
        if g.dim() != grid.dim || p.dim != grid.dim {
            return Err(Error::Input("grid, correlation and model dimensions differ".into()));
        }
        let spectrum = sampled_spectrum(g, grid.dim, grid.space, grid.points_per_side, grid.side_length)?;
        let v2 = p.v0 * p.v0;
        let max = spectrum.iter().cloned().fold(0.0f64, f64::max);
        let total = grid.total();
        let mut amplitude = Vec::with_capacity(total);
        for (flat, &lam) in spectrum.iter().enumerate() {
            if lam < -SPECTRAL_TOL * max {
                let mut idx = vec![0; grid.dim];
                grid.unflatten(flat, &mut idx);
                return Err(Error::Covariance {
                    mode: idx.iter().map(|&j| signed_index(j, grid.points_per_side)).collect(),
                    value: lam,
                    max,
                });
            }
            amplitude.push((v2 * lam.max(0.0) / total as f64).sqrt());
        }
        let partner = (0..total).map(|f| grid.conjugate_mode(f)).collect();
        Ok(Self {
            grid,
            amplitude,
            partner,
            fft: NdFft::new(grid.dim, grid.points_per_side),
        })
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    /// Hermitian-symmetric Fourier coefficients c_k of ΔW, so that
    /// ΔW(x) = Σ_k c_k e^{ik·x}.
    pub fn coefficients_into(&self, dt: f64, seed: SeedInfo, out: &mut [Complex64]) {
        let mut rng = CounterRng::new(seed, Purpose::Field);
        let sdt = dt.sqrt();
        for flat in 0..out.len() {
            let partner = self.partner[flat];
            if partner < flat {
                out[flat] = out[partner].conj();
                continue;
            }
            let (a, b) = rng.normal_pair_at(flat as u64);
            let amp = self.amplitude[flat] * sdt;
            out[flat] = if partner == flat {
                Complex64::new(amp * a, 0.0)
            } else {
                Complex64::new(amp * a, amp * b) * std::f64::consts::FRAC_1_SQRT_2
            };
        }
    }

    pub fn coefficients(&self, dt: f64, seed: SeedInfo) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.total()];
        self.coefficients_into(dt, seed, &mut out);
        out
    }

    /// Writes ΔW on the grid into `out`, using `scratch` for the transform.
    pub fn sample_into(&self, dt: f64, seed: SeedInfo, out: &mut [f64], scratch: &mut [Complex64]) {
        self.coefficients_into(dt, seed, scratch);
        self.fft.inverse(scratch);
        for (o, c) in out.iter_mut().zip(scratch.iter()) {
            *o = c.re;
        }
    }

    pub fn sample(&self, dt: f64, seed: SeedInfo) -> Result<NoiseIncrement> {
        if !(dt > 0.0) {
            return Err(Error::Input(format!("dt must be positive, got {dt}")));
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.grid.total()];
        let mut values = vec![0.0; self.grid.total()];
        self.sample_into(dt, seed, &mut values, &mut scratch);
        Ok(NoiseIncrement {
            values,
            dt,
            seed_info: seed,
        })
    }

    /// Largest |Im| of the synthesized field relative to its ℓ² norm.
    pub fn imaginary_residue(&self, dt: f64, seed: SeedInfo) -> f64 {
        let mut c = self.coefficients(dt, seed);
        self.fft.inverse(&mut c);
        let norm = c.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
        c.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / norm.max(f64::MIN_POSITIVE)
    }
}

/// One white increment. Builds the sampler on every call; reuse a
/// [`WhiteNoiseSampler`] inside loops.
pub fn sample_white_increment(
    grid: &FieldGrid,
    g: &CorrelationSpec,
    p: &ModelParams,
    dt: f64,
    seed: SeedInfo,
) -> Result<NoiseIncrement> {
    WhiteNoiseSampler::new(*grid, g, p)?.sample(dt, seed)
}

/// Triangular temporal correlation h_ν(t) = (1/ν)(1 − |t|/ν)₊, realized as
/// the autocorrelation of a causal box filter of width ν over white increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredKernel {
    pub nu: f64,
    pub dt: f64,
    /// Filter width ν/dt in steps.
    pub width: usize,
}

impl ColoredKernel {
    pub fn new(nu: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Input(format!("dt must be positive, got {dt}")));
        }
        if nu < dt * (1.0 - 1e-12) {
            return Err(Error::Resolution(format!("colored kernel width {nu} is below dt = {dt}")));
        }
        let ratio = nu / dt;
        let width = ratio.round() as usize;
        if (ratio - width as f64).abs() > 1e-9 * ratio {
            return Err(Error::Input(format!("kernel width {nu} must be a multiple of dt = {dt}")));
        }
        Ok(Self { nu, dt, width })
    }

    pub fn h(&self, t: f64) -> f64 {
        let u = 1.0 - t.abs() / self.nu;
        if u > 0.0 {
            u / self.nu
        } else {
            0.0
        }
    }

    /// h_ν at lags −(w−1)..=(w−1) steps.
    pub fn samples(&self) -> Vec<f64> {
        let w = self.width as i64;
        (-(w - 1)..w).map(|j| self.h(j as f64 * self.dt)).collect()
    }
}

/// Streams V^{(ν)}(x, t_n) = (1/ν) Σ_{j<w} ΔW_{n−j}(x), with prehistory
/// increments at negative step indices.
pub struct ColoredSampler<'a> {
    white: &'a WhiteNoiseSampler,
    kernel: ColoredKernel,
    seed: SeedInfo,
    ring: Vec<Vec<f64>>,
    next_step: i64,
    scratch: Vec<Complex64>,
}

impl<'a> ColoredSampler<'a> {
    pub fn new(white: &'a WhiteNoiseSampler, kernel: ColoredKernel, seed: SeedInfo) -> Self {
        let n = white.grid().total();
        let w = kernel.width;
        let mut s = Self {
            white,
            kernel,
            seed,
            ring: vec![vec![0.0; n]; w],
            next_step: 0,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        };
        for step in -(w as i64 - 1)..0 {
            s.push_increment(step);
        }
        s
    }

    fn slot(&self, step: i64) -> usize {
        step.rem_euclid(self.kernel.width as i64) as usize
    }

    fn push_increment(&mut self, step: i64) {
        let slot = self.slot(step);
        let seed = self.seed.at_step(step);
        let mut buf = std::mem::take(&mut self.ring[slot]);
        self.white.sample_into(self.kernel.dt, seed, &mut buf, &mut self.scratch);
        self.ring[slot] = buf;
    }

    /// The white increment ΔW_n entering this step.
    pub fn current_increment(&self) -> &[f64] {
        &self.ring[self.slot(self.next_step - 1)]
    }

    /// Advances to the next step and writes V(t_n) into `out`.
    pub fn next_into(&mut self, out: &mut [f64]) {
        let step = self.next_step;
        self.push_increment(step);
        self.next_step += 1;
        let inv_nu = 1.0 / self.kernel.nu;
        out.iter_mut().for_each(|v| *v = 0.0);
        // Oldest to newest, a fixed order independent of the ring position.
        for lag in (0..self.kernel.width as i64).rev() {
            let src = &self.ring[self.slot(step - lag)];
            for (o, v) in out.iter_mut().zip(src) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v *= inv_nu);
    }
}

/// Potential snapshots V^{(ν)}(x, t_n) for n = 0..n_steps.
pub fn sample_colored_path(
    grid: &FieldGrid,
    g: &CorrelationSpec,
    p: &ModelParams,
    kernel: &ColoredKernel,
    n_steps: usize,
    dt: f64,
    seed: SeedInfo,
) -> Result<Vec<Vec<f64>>> {
    if (kernel.dt - dt).abs() > 1e-15 * dt {
        return Err(Error::Input("kernel dt does not match the path dt".into()));
    }
    if kernel.nu < dt {
        return Err(Error::Resolution(format!("kernel width {} is below dt = {dt}", kernel.nu)));
    }
    let white = WhiteNoiseSampler::new(*grid, g, p)?;
    let mut sampler = ColoredSampler::new(&white, *kernel, seed);
    let mut out = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let mut v = vec![0.0; grid.total()];
        sampler.next_into(&mut v);
        out.push(v);
    }
    Ok(out)
}
