//! Monte Carlo integration of the stochastic Schrödinger equation with a
//! unitary Stratonovich split step, and the classical stochastic-acceleration
//! analog.
//!
//! Trajectories draw every random number from a counter-based generator keyed
//! by (seed, trajectory, step), run in parallel, and are reduced in trajectory
//! order, so ensemble results do not depend on the thread count.

mod classical;
mod colored;
mod continuum;
mod lattice;
mod split;

pub use classical::{run_classical, ClassicalOptions, ClassicalResult, ClassicalState};
pub use colored::{colored_noise_convergence_study, ColoredRow, ColoredStudy};
pub use continuum::run_continuum;
pub use lattice::run_lattice;
pub use split::{KernelProbe, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MomentSeries, Provenance};
use crate::transforms::polynomial_weights;

/// How the noise enters each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// ψ ← e^{−iΔW/ħ}ψ between kinetic half steps (norm preserving).
    #[default]
    Stratonovich,
    /// ψ ← (1 − iΔW/ħ)ψ, not renormalized. Negative control only.
    ItoControl,
}

/// Initial wavefunctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WavePacket {
    /// ψ(x) ∝ Πⱼ exp(−xⱼ²/(4σⱼ²)), centred at the origin.
    Gaussian { sigma: Vec<f64> },
    /// ψ = δ_{x,0} (lattice only).
    PointLocalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub t_max: f64,
    pub dt: f64,
    pub n_traj: usize,
    /// Observables every this many steps (t = 0 included).
    pub record_every: usize,
    pub global_seed: u64,
    /// Index of the first trajectory; ensembles with disjoint ranges are independent.
    pub first_trajectory: u64,
    /// Abort when the outer shell of the box holds more probability than this.
    pub boundary_threshold: f64,
    pub scheme: Scheme,
}

impl McOptions {
    pub fn new(t_max: f64, dt: f64, n_traj: usize, global_seed: u64) -> Self {
        Self {
            t_max,
            dt,
            n_traj,
            record_every: 1,
            global_seed,
            first_trajectory: 0,
            boundary_threshold: 1e-6,
            scheme: Scheme::Stratonovich,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn with_boundary_threshold(mut self, threshold: f64) -> Self {
        self.boundary_threshold = threshold;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub(crate) fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.t_max > 0.0) {
            return Err(Error::Input("t_max and dt must be positive".into()));
        }
        if self.n_traj < 2 {
            return Err(Error::Input("an ensemble needs at least 2 trajectories".into()));
        }
        let n = (self.t_max / self.dt).round();
        if (n * self.dt - self.t_max).abs() > 1e-9 * self.t_max {
            return Err(Error::Input(format!("t_max {} is not a multiple of dt {}", self.t_max, self.dt)));
        }
        Ok(n as usize)
    }

    pub(crate) fn record_times(&self, steps: usize) -> Vec<(usize, f64)> {
        (0..=steps)
            .filter(|s| s % self.record_every == 0 || *s == steps)
            .map(|s| (s, s as f64 * self.dt))
            .collect()
    }
}

/// Compensated (Neumaier) sum in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let (value, stderr) = mean_stderr(values);
        Self { value, stderr }
    }

    /// |value − reference| in units of stderr.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.stderr
    }

    pub fn interval95(&self) -> [f64; 2] {
        [self.value - 1.96 * self.stderr, self.value + 1.96 * self.stderr]
    }
}

/// Per-trajectory observables at the recorded times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub trajectory: u64,
    pub msd: Vec<f64>,
    pub energy: Vec<f64>,
    /// max |‖ψ‖² − 1| over recorded times.
    pub norm_drift: f64,
    pub boundary_mass: f64,
    /// Kernel estimates, one per requested probe.
    pub probes: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_traj: usize,
    pub times: Vec<f64>,
    pub msd_mean: Vec<f64>,
    pub msd_stderr: Vec<f64>,
    /// Kinetic ⟨H₀⟩.
    pub energy_mean: Vec<f64>,
    pub energy_stderr: Vec<f64>,
    pub norm_drift_max: f64,
    pub boundary_mass_max: f64,
    pub provenance: Provenance,
    pub trajectories: Vec<TrajectoryRecord>,
}

impl EnsembleResult {
    pub fn from_records(times: Vec<f64>, trajectories: Vec<TrajectoryRecord>) -> Result<Self> {
        let n = trajectories.len();
        if n < 2 {
            return Err(Error::Input("an ensemble needs at least 2 trajectories".into()));
        }
        let column = |i: usize, f: fn(&TrajectoryRecord) -> &Vec<f64>| -> Vec<f64> {
            trajectories.iter().map(|r| f(r)[i]).collect()
        };
        let mut msd_mean = Vec::with_capacity(times.len());
        let mut msd_stderr = Vec::with_capacity(times.len());
        let mut energy_mean = Vec::with_capacity(times.len());
        let mut energy_stderr = Vec::with_capacity(times.len());
        for i in 0..times.len() {
            let (m, s) = mean_stderr(&column(i, |r| &r.msd));
            msd_mean.push(m);
            msd_stderr.push(s);
            let (m, s) = mean_stderr(&column(i, |r| &r.energy));
            energy_mean.push(m);
            energy_stderr.push(s);
        }
        Ok(Self {
            n_traj: n,
            norm_drift_max: trajectories.iter().map(|r| r.norm_drift).fold(0.0, f64::max),
            boundary_mass_max: trajectories.iter().map(|r| r.boundary_mass).fold(0.0, f64::max),
            times,
            msd_mean,
            msd_stderr,
            energy_mean,
            energy_stderr,
            provenance: Provenance::MonteCarlo,
            trajectories,
        })
    }

    pub fn series(&self) -> Result<MomentSeries> {
        MomentSeries::new(self.times.clone(), self.msd_mean.clone(), Provenance::MonteCarlo)?
            .with_stderr(self.msd_stderr.clone())?
            .with_energy(self.energy_mean.clone())
    }

    /// Coefficient of t^{power} in a least-squares fit of each trajectory's
    /// MSD by Σ c_p t^p over the window, averaged across trajectories.
    pub fn polynomial_coefficient(&self, window: (f64, f64), powers: &[i32], power: i32) -> Result<Estimate> {
        let row = powers
            .iter()
            .position(|&p| p == power)
            .ok_or_else(|| Error::Input(format!("power {power} is not among the fitted powers")))?;
        let idx: Vec<usize> = (0..self.times.len())
            .filter(|&i| self.times[i] >= window.0 && self.times[i] <= window.1)
            .collect();
        let t: Vec<f64> = idx.iter().map(|&i| self.times[i]).collect();
        let w = polynomial_weights(&t, powers)?;
        let per: Vec<f64> = self
            .trajectories
            .iter()
            .map(|r| neumaier_sum(idx.iter().zip(&w[row]).map(|(&i, wi)| wi * r.msd[i])))
            .collect();
        Ok(Estimate::from_samples(&per))
    }

    /// The t³ coefficient of MSD ≈ c₀ + c₂t² + c₃t³.
    pub fn t3_coefficient(&self, window: (f64, f64)) -> Result<Estimate> {
        self.polynomial_coefficient(window, &[0, 2, 3], 3)
    }

    /// Mean and stderr of the real part of probe `i`.
    pub fn probe(&self, i: usize) -> Result<(Estimate, Estimate)> {
        if self.trajectories.iter().any(|r| r.probes.len() <= i) {
            return Err(Error::Input(format!("probe {i} was not recorded")));
        }
        let re: Vec<f64> = self.trajectories.iter().map(|r| r.probes[i].re).collect();
        let im: Vec<f64> = self.trajectories.iter().map(|r| r.probes[i].im).collect();
        Ok((Estimate::from_samples(&re), Estimate::from_samples(&im)))
    }

    /// Index of the recorded time closest to t.
    pub fn time_index(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn record_times_include_end() {
        let o = McOptions::new(1.0, 0.1, 4, 0).with_record_every(3);
        let steps = o.steps().unwrap();
        let r: Vec<usize> = o.record_times(steps).iter().map(|x| x.0).collect();
        assert_eq!(r, vec![0, 3, 6, 9, 10]);
        assert!(McOptions::new(1.0, 0.3, 4, 0).steps().is_err());
    }
}
