//! Strang split step shared by the continuum and lattice simulators:
//! half kinetic step in Fourier space, multiplicative noise in real space,
//! half kinetic step. Consecutive half steps are fused between records.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EnsembleResult, McOptions, Scheme, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::noise::{ColoredKernel, ColoredSampler, FieldGrid, WhiteNoiseSampler};
use crate::rng::SeedInfo;

/// One wavefunction sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub psi: Vec<Complex64>,
    pub t: f64,
    pub seed_info: SeedInfo,
}

/// Request for a per-trajectory estimate of R̂(k, Y₀, t); Y₀ is given in
/// grid steps and t must be a multiple of dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProbe {
    pub k: Vec<f64>,
    pub y0_steps: Vec<i64>,
    pub t: f64,
}

impl KernelProbe {
    pub fn at_origin(k: Vec<f64>, t: f64) -> Self {
        let d = k.len();
        Self {
            k,
            y0_steps: vec![0; d],
            t,
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum NoiseSource<'a> {
    White(&'a WhiteNoiseSampler),
    Colored(&'a WhiteNoiseSampler, ColoredKernel),
}

impl NoiseSource<'_> {
    fn sampler(&self) -> &WhiteNoiseSampler {
        match self {
            Self::White(w) | Self::Colored(w, _) => w,
        }
    }
}

/// Outer fraction of the box (per side) treated as the boundary shell.
pub const BOUNDARY_SHELL: f64 = 1.0 / 16.0;

pub(crate) struct Propagator<'a> {
    grid: FieldGrid,
    fft: NdFft,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    /// Kinetic energy of each Fourier mode.
    energy: Vec<f64>,
    radius_sq: Vec<f64>,
    shell: Vec<usize>,
    /// Minimum-image coordinates, site-major.
    coords: Vec<f64>,
    psi0: Vec<Complex64>,
    noise: NoiseSource<'a>,
    hbar: f64,
    /// R̂ = prefactor · Σ_x e^{ik·(2x−Y₀)} ψ̄(x)ψ(x−Y₀).
    probe_prefactor: f64,
}

impl<'a> Propagator<'a> {
    /// `mode_energy[f]` is the kinetic energy of Fourier mode f (FFT order).
    pub(crate) fn new(
        noise: NoiseSource<'a>,
        mode_energy: Vec<f64>,
        psi0: Vec<Complex64>,
        hbar: f64,
        dt: f64,
        probe_prefactor: f64,
    ) -> Result<Self> {
        let grid = *noise.sampler().grid();
        let n = grid.total();
        if mode_energy.len() != n || psi0.len() != n {
            return Err(Error::Input("propagator arrays do not match the grid".into()));
        }
        let phase = |f: f64| mode_energy.iter().map(|e| Complex64::from_polar(1.0, -e * f * dt / hbar)).collect();
        let axis = grid.axis_positions();
        let half_box = 0.5 * grid.side_length;
        let mut idx = vec![0; grid.dim];
        let mut coords = Vec::with_capacity(n * grid.dim);
        let mut radius_sq = Vec::with_capacity(n);
        let mut shell = Vec::new();
        for flat in 0..n {
            grid.unflatten(flat, &mut idx);
            let x: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
            radius_sq.push(x.iter().map(|v| v * v).sum());
            if x.iter().any(|v| v.abs() >= (1.0 - 2.0 * BOUNDARY_SHELL) * half_box) {
                shell.push(flat);
            }
            coords.extend(x);
        }
        Ok(Self {
            grid,
            fft: NdFft::new(grid.dim, grid.points_per_side),
            half: phase(0.5),
            full: phase(1.0),
            energy: mode_energy,
            radius_sq,
            shell,
            coords,
            psi0,
            noise,
            hbar,
            probe_prefactor,
        })
    }

    fn probe(&self, psi: &[Complex64], probe: &KernelProbe) -> Complex64 {
        let g = &self.grid;
        let n = g.points_per_side as i64;
        let d = g.dim;
        let mut idx = vec![0usize; d];
        let mut shifted = vec![0usize; d];
        let dx = g.spacing();
        let mut acc = Complex64::new(0.0, 0.0);
        for (flat, a) in psi.iter().enumerate() {
            g.unflatten(flat, &mut idx);
            for j in 0..d {
                shifted[j] = (idx[j] as i64 - probe.y0_steps[j]).rem_euclid(n) as usize;
            }
            let b = psi[g.flatten(&shifted)];
            let arg: f64 = (0..d)
                .map(|j| probe.k[j] * (2.0 * self.coords[flat * d + j] - probe.y0_steps[j] as f64 * dx))
                .sum();
            acc += a.conj() * b * Complex64::from_polar(1.0, arg);
        }
        acc * self.probe_prefactor
    }

    pub(crate) fn run_trajectory(
        &self,
        trajectory: u64,
        opts: &McOptions,
        steps: usize,
        probes: &[KernelProbe],
    ) -> Result<TrajectoryRecord> {
        let n = self.grid.total();
        let seed = SeedInfo::new(opts.global_seed, trajectory, 0);
        let mut traj = Trajectory {
            psi: self.psi0.clone(),
            t: 0.0,
            seed_info: seed,
        };
        let mut done = vec![Complex64::new(0.0, 0.0); n];
        let mut dw = vec![0.0; n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let mut colored = match self.noise {
            NoiseSource::Colored(w, kernel) => Some(ColoredSampler::new(w, kernel, seed)),
            NoiseSource::White(_) => None,
        };
        let probe_steps: Vec<usize> = probes.iter().map(|p| (p.t / opts.dt).round() as usize).collect();
        let mut record = TrajectoryRecord {
            trajectory,
            msd: Vec::new(),
            energy: Vec::new(),
            norm_drift: 0.0,
            boundary_mass: 0.0,
            probes: vec![Complex64::new(0.0, 0.0); probes.len()],
        };
        let mut pending_half = false;

        for step in 0..=steps {
            if step > 0 {
                self.fft.forward(&mut traj.psi);
                let k = if pending_half { &self.full } else { &self.half };
                traj.psi.iter_mut().zip(k).for_each(|(v, m)| *v *= m);
                self.fft.inverse_normalized(&mut traj.psi);
                match &mut colored {
                    Some(c) => {
                        c.next_into(&mut dw);
                        dw.iter_mut().for_each(|v| *v *= opts.dt);
                    }
                    None => self
                        .noise
                        .sampler()
                        .sample_into(opts.dt, seed.at_step(step as i64 - 1), &mut dw, &mut scratch),
                }
                match opts.scheme {
                    Scheme::Stratonovich => traj
                        .psi
                        .iter_mut()
                        .zip(&dw)
                        .for_each(|(v, w)| *v *= Complex64::from_polar(1.0, -w / self.hbar)),
                    Scheme::ItoControl => traj
                        .psi
                        .iter_mut()
                        .zip(&dw)
                        .for_each(|(v, w)| *v *= Complex64::new(1.0, -w / self.hbar)),
                }
                pending_half = true;
                traj.t = step as f64 * opts.dt;
                traj.seed_info = seed.at_step(step as i64);
            }
            let is_record = step % opts.record_every == 0 || step == steps;
            let is_probe = probe_steps.contains(&step);
            if !(is_record || is_probe) {
                continue;
            }
            // Complete the pending half kinetic step on a copy.
            done.copy_from_slice(&traj.psi);
            self.fft.forward(&mut done);
            if pending_half {
                done.iter_mut().zip(&self.half).for_each(|(v, m)| *v *= m);
            }
            let spectral_norm: f64 = done.iter().map(|v| v.norm_sqr()).sum();
            let energy = done.iter().zip(&self.energy).map(|(v, e)| v.norm_sqr() * e).sum::<f64>() / spectral_norm;
            self.fft.inverse_normalized(&mut done);
            let norm: f64 = done.iter().map(|v| v.norm_sqr()).sum();
            if !norm.is_finite() || !energy.is_finite() {
                return Err(Error::Instability(traj.t));
            }
            if is_record {
                let msd: f64 = done.iter().zip(&self.radius_sq).map(|(v, r)| v.norm_sqr() * r).sum();
                let shell: f64 = self.shell.iter().map(|&f| done[f].norm_sqr()).sum::<f64>() / norm;
                if shell > opts.boundary_threshold {
                    return Err(Error::Boundary {
                        mass: shell,
                        threshold: opts.boundary_threshold,
                        t: traj.t,
                    });
                }
                record.boundary_mass = record.boundary_mass.max(shell);
                record.norm_drift = record.norm_drift.max((norm - 1.0).abs());
                record.msd.push(msd);
                record.energy.push(energy);
            }
            for (i, &s) in probe_steps.iter().enumerate() {
                if s == step {
                    record.probes[i] = self.probe(&done, &probes[i]);
                }
            }
        }
        Ok(record)
    }

    pub(crate) fn run(&self, opts: &McOptions, probes: &[KernelProbe]) -> Result<EnsembleResult> {
        let steps = opts.steps()?;
        for p in probes {
            let s = p.t / opts.dt;
            if p.k.len() != self.grid.dim || p.y0_steps.len() != self.grid.dim {
                return Err(Error::Input("probe dimension does not match the grid".into()));
            }
            if (s - s.round()).abs() > 1e-9 * s.max(1.0) || s.round() as usize > steps || p.t < 0.0 {
                return Err(Error::Input(format!("probe time {} is not a step of the run", p.t)));
            }
        }
        let records: Vec<Result<TrajectoryRecord>> = (0..opts.n_traj as u64)
            .into_par_iter()
            .map(|i| self.run_trajectory(opts.first_trajectory + i, opts, steps, probes))
            .collect();
        let records = records.into_iter().collect::<Result<Vec<_>>>()?;
        let times = opts.record_times(steps).into_iter().map(|(_, t)| t).collect();
        EnsembleResult::from_records(times, records)
    }
}

/// Normalizes ψ to unit ℓ² norm.
pub(crate) fn normalize(psi: &mut [Complex64]) -> Result<()> {
    let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Input("initial wavefunction vanishes on the grid".into()));
    }
    psi.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}
