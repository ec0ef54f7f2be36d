//! Split-step Monte Carlo on periodic continuum grids.

use num_complex::Complex64;

use super::split::{normalize, KernelProbe, NoiseSource, Propagator};
use super::{EnsembleResult, McOptions, WavePacket};
use crate::error::{Error, Result};
use crate::model::{CorrelationSpec, ModelParams, SpaceKind};
use crate::noise::{ColoredKernel, FieldGrid, WhiteNoiseSampler};

/// Grid points per packet width below which the initial state is rejected.
pub const MIN_POINTS_PER_SIGMA: f64 = 4.0;

pub(crate) fn check_continuum(grid: &FieldGrid, p: &ModelParams) -> Result<()> {
    if grid.space != SpaceKind::Continuum || p.space != SpaceKind::Continuum {
        return Err(Error::Input("continuum simulation needs a continuum grid and model".into()));
    }
    if grid.dim != p.dim {
        return Err(Error::Input("grid and model dimensions differ".into()));
    }
    Ok(())
}

/// Sampled ψ₀ with unit ℓ² norm on the grid.
pub(crate) fn continuum_packet(grid: &FieldGrid, init: &WavePacket) -> Result<Vec<Complex64>> {
    let WavePacket::Gaussian { sigma } = init else {
        return Err(Error::Input("continuum runs need a Gaussian packet".into()));
    };
    if sigma.len() != grid.dim || sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Input("one positive width per axis is required".into()));
    }
    let dx = grid.spacing();
    if let Some(s) = sigma.iter().find(|s| **s < MIN_POINTS_PER_SIGMA * dx) {
        return Err(Error::Resolution(format!(
            "packet width {s} spans fewer than {MIN_POINTS_PER_SIGMA} grid spacings ({dx})"
        )));
    }
    let axis = grid.axis_positions();
    let mut idx = vec![0; grid.dim];
    let mut psi: Vec<Complex64> = (0..grid.total())
        .map(|flat| {
            grid.unflatten(flat, &mut idx);
            let e: f64 = idx.iter().zip(sigma).map(|(&i, s)| axis[i] * axis[i] / (4.0 * s * s)).sum();
            Complex64::new((-e).exp(), 0.0)
        })
        .collect();
    normalize(&mut psi)?;
    Ok(psi)
}

pub(crate) fn continuum_energies(grid: &FieldGrid, p: &ModelParams) -> Vec<f64> {
    let k = grid.axis_wavenumbers();
    let mut idx = vec![0; grid.dim];
    (0..grid.total())
        .map(|flat| {
            grid.unflatten(flat, &mut idx);
            let k2: f64 = idx.iter().map(|&i| k[i] * k[i]).sum();
            p.hbar * p.hbar * k2 / (2.0 * p.mass)
        })
        .collect()
}

pub(crate) fn continuum_propagator<'a>(
    noise: NoiseSource<'a>,
    init: &WavePacket,
    p: &ModelParams,
    dt: f64,
) -> Result<Propagator<'a>> {
    let grid = match noise {
        NoiseSource::White(w) | NoiseSource::Colored(w, _) => *w.grid(),
    };
    let psi0 = continuum_packet(&grid, init)?;
    let prefactor = 2f64.powi(grid.dim as i32);
    Propagator::new(noise, continuum_energies(&grid, p), psi0, p.hbar, dt, prefactor)
}

/// Ensemble of white-noise trajectories from a Gaussian packet. Kernel probes
/// estimate R̂(k, Y₀, t) = 2^d Σ_x e^{ik·(2x−Y₀)} ψ̄(x)ψ(x−Y₀).
pub fn run_continuum(
    grid: &FieldGrid,
    init: &WavePacket,
    g: &CorrelationSpec,
    p: &ModelParams,
    opts: &McOptions,
    probes: &[KernelProbe],
) -> Result<EnsembleResult> {
    check_continuum(grid, p)?;
    let white = WhiteNoiseSampler::new(*grid, g, p)?;
    continuum_propagator(NoiseSource::White(&white), init, p, opts.dt)?.run(opts, probes)
}

/// As [`run_continuum`] with the potential replaced by colored noise of width ν.
pub(crate) fn run_continuum_colored(
    grid: &FieldGrid,
    init: &WavePacket,
    g: &CorrelationSpec,
    p: &ModelParams,
    kernel: ColoredKernel,
    opts: &McOptions,
) -> Result<EnsembleResult> {
    check_continuum(grid, p)?;
    if (kernel.dt - opts.dt).abs() > 1e-12 * opts.dt {
        return Err(Error::Input("colored kernel dt differs from the run dt".into()));
    }
    let white = WhiteNoiseSampler::new(*grid, g, p)?;
    continuum_propagator(NoiseSource::Colored(&white, kernel), init, p, opts.dt)?.run(opts, &[])
}
