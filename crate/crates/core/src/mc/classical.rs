//! Classical particle in the same white-in-time random field:
//! symplectic Euler for dv = −∇ΔW(q)/m, dq = v dt.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mean_stderr;
use crate::error::{Error, Result};
use crate::model::{laplacian_g_at_zero, CorrelationSpec, ModelParams, SpaceKind};
use crate::noise::{FieldGrid, WhiteNoiseSampler};
use crate::rng::SeedInfo;
use crate::series::{MomentSeries, Provenance};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub seed_info: SeedInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOptions {
    pub t_max: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub record_every: usize,
    pub global_seed: u64,
    /// Periodic grid carrying the field; the particle position is unwrapped.
    pub field_grid: FieldGrid,
}

impl ClassicalOptions {
    pub fn new(dim: usize, t_max: f64, dt: f64, n_traj: usize, global_seed: u64) -> Result<Self> {
        Ok(Self {
            t_max,
            dt,
            n_traj,
            record_every: 1,
            global_seed,
            field_grid: FieldGrid::continuum(dim, 128, 32.0)?,
        })
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResult {
    /// ⟨‖q‖²⟩ with its standard error.
    pub msd: MomentSeries,
    pub velocity_variance: Vec<f64>,
    pub velocity_stderr: Vec<f64>,
    /// −(V₀/m)²(Δg)(0): the velocity-variance growth rate of the white-noise limit.
    pub oracle_slope: f64,
    /// ½V₀²(Δg)(0), the rate as printed in the source heuristic.
    pub printed_slope: f64,
}

struct ForceField {
    /// Wave vectors per mode, mode-major.
    k: Vec<f64>,
    dim: usize,
}

impl ForceField {
    fn new(grid: &FieldGrid) -> Self {
        let axis = grid.axis_wavenumbers();
        let mut idx = vec![0; grid.dim];
        let mut k = Vec::with_capacity(grid.total() * grid.dim);
        for flat in 0..grid.total() {
            grid.unflatten(flat, &mut idx);
            k.extend(idx.iter().map(|&i| axis[i]));
        }
        Self { k, dim: grid.dim }
    }

    /// ∇ΔW(q) = Re Σ_k i k c_k e^{ik·q}.
    fn gradient(&self, coeffs: &[Complex64], q: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (m, c) in coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let kv = &self.k[m * self.dim..(m + 1) * self.dim];
            let arg: f64 = kv.iter().zip(q).map(|(a, b)| a * b).sum();
            let w = (Complex64::new(0.0, 1.0) * c * Complex64::from_polar(1.0, arg)).re;
            for (o, kj) in out.iter_mut().zip(kv) {
                *o += kj * w;
            }
        }
    }
}

pub fn run_classical(
    g: &CorrelationSpec,
    p: &ModelParams,
    v_init: &[f64],
    opts: &ClassicalOptions,
) -> Result<ClassicalResult> {
    let d = p.dim;
    if p.space != SpaceKind::Continuum || opts.field_grid.dim != d || v_init.len() != d {
        return Err(Error::Input("classical runs need a continuum model and matching dimensions".into()));
    }
    if !(opts.dt > 0.0 && opts.t_max > 0.0) || opts.n_traj < 2 {
        return Err(Error::Input("t_max and dt must be positive with at least 2 trajectories".into()));
    }
    let steps = (opts.t_max / opts.dt).round() as usize;
    if (steps as f64 * opts.dt - opts.t_max).abs() > 1e-9 * opts.t_max {
        return Err(Error::Input(format!("t_max {} is not a multiple of dt {}", opts.t_max, opts.dt)));
    }
    let sampler = WhiteNoiseSampler::new(opts.field_grid, g, p)?;
    let field = ForceField::new(&opts.field_grid);
    let records: Vec<usize> = (0..=steps).filter(|s| s % opts.record_every == 0 || *s == steps).collect();

    let runs: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..opts.n_traj as u64)
        .into_par_iter()
        .map(|traj| {
            let seed = SeedInfo::new(opts.global_seed, traj, 0);
            let mut s = ClassicalState {
                q: vec![0.0; d],
                v: v_init.to_vec(),
                t: 0.0,
                seed_info: seed,
            };
            let mut coeffs = vec![Complex64::new(0.0, 0.0); opts.field_grid.total()];
            let mut grad = vec![0.0; d];
            let (mut q2, mut v2) = (Vec::with_capacity(records.len()), Vec::with_capacity(records.len()));
            let mut next = 0;
            for step in 0..=steps {
                if step > 0 {
                    sampler.coefficients_into(opts.dt, seed.at_step(step as i64 - 1), &mut coeffs);
                    field.gradient(&coeffs, &s.q, &mut grad);
                    for ((v, q), g) in s.v.iter_mut().zip(s.q.iter_mut()).zip(&grad) {
                        *v -= g / p.mass;
                        *q += *v * opts.dt;
                    }
                    s.t = step as f64 * opts.dt;
                    s.seed_info = seed.at_step(step as i64);
                }
                if records.get(next) == Some(&step) {
                    let a: f64 = s.q.iter().map(|v| v * v).sum();
                    let b: f64 = s.v.iter().map(|v| v * v).sum();
                    if !(a.is_finite() && b.is_finite()) {
                        return Err(Error::Instability(s.t));
                    }
                    q2.push(a);
                    v2.push(b);
                    next += 1;
                }
            }
            Ok((q2, v2))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = records.iter().map(|&s| s as f64 * opts.dt).collect();
    let (mut msd, mut msd_err, mut vv, mut vv_err) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..times.len() {
        let (m, e) = mean_stderr(&runs.iter().map(|r| r.0[i]).collect::<Vec<_>>());
        msd.push(m);
        msd_err.push(e);
        let (m, e) = mean_stderr(&runs.iter().map(|r| r.1[i]).collect::<Vec<_>>());
        vv.push(m);
        vv_err.push(e);
    }
    let lap = laplacian_g_at_zero(g)?;
    Ok(ClassicalResult {
        msd: MomentSeries::new(times, msd, Provenance::MonteCarlo)?.with_stderr(msd_err)?,
        velocity_variance: vv,
        velocity_stderr: vv_err,
        oracle_slope: -(p.v0 / p.mass).powi(2) * lap,
        printed_slope: 0.5 * p.v0 * p.v0 * lap,
    })
}
