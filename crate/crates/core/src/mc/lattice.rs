//! Split-step Monte Carlo on Z^d with periodic boxes.

use num_complex::Complex64;

use super::split::{normalize, NoiseSource, Propagator};
use super::{EnsembleResult, McOptions, WavePacket};
use crate::error::{Error, Result};
use crate::model::{CorrelationSpec, ModelParams, SpaceKind};
use crate::noise::{FieldGrid, WhiteNoiseSampler};

fn lattice_packet(grid: &FieldGrid, init: &WavePacket) -> Result<Vec<Complex64>> {
    let n = grid.total();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    match init {
        WavePacket::PointLocalized => psi[0] = Complex64::new(1.0, 0.0),
        WavePacket::Gaussian { sigma } => {
            if sigma.len() != grid.dim || sigma.iter().any(|s| !(*s > 0.0)) {
                return Err(Error::Input("one positive width per axis is required".into()));
            }
            let axis = grid.axis_positions();
            let mut idx = vec![0; grid.dim];
            for (flat, v) in psi.iter_mut().enumerate() {
                grid.unflatten(flat, &mut idx);
                let e: f64 = idx.iter().zip(sigma).map(|(&i, s)| axis[i] * axis[i] / (4.0 * s * s)).sum();
                *v = Complex64::new((-e).exp(), 0.0);
            }
        }
    }
    normalize(&mut psi)?;
    Ok(psi)
}

/// Band energies E(q) = −(ħ²/m) Σⱼ cos qⱼ of H₀ = −(ħ²/2m)·(neighbour sum).
fn lattice_energies(grid: &FieldGrid, p: &ModelParams) -> Vec<f64> {
    let q = grid.axis_wavenumbers();
    let mut idx = vec![0; grid.dim];
    (0..grid.total())
        .map(|flat| {
            grid.unflatten(flat, &mut idx);
            -p.hbar * p.hbar / p.mass * idx.iter().map(|&i| q[i].cos()).sum::<f64>()
        })
        .collect()
}

/// Ensemble of lattice trajectories; MSD is Σ_x ‖x‖²|ψ(x)|² with minimum-image x.
pub fn run_lattice(
    grid: &FieldGrid,
    init: &WavePacket,
    g: &CorrelationSpec,
    p: &ModelParams,
    opts: &McOptions,
) -> Result<EnsembleResult> {
    if grid.space != SpaceKind::Lattice || p.space != SpaceKind::Lattice || grid.dim != p.dim {
        return Err(Error::Input("lattice simulation needs a lattice grid and model of equal dimension".into()));
    }
    let white = WhiteNoiseSampler::new(*grid, g, p)?;
    let psi0 = lattice_packet(grid, init)?;
    Propagator::new(NoiseSource::White(&white), lattice_energies(grid, p), psi0, p.hbar, opts.dt, 1.0)?.run(opts, &[])
}
