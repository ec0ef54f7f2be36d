//! Deterministic evolution of the disorder-averaged lattice equation.
//!
//! The Y-space of relative coordinates is a periodic box of odd side L with
//! minimum-image indexing. Two evolutions are provided: the closed k = 0
//! moment hierarchy {m₀, m₁ⱼ, m₂ⱼⱼ}, which yields the MSD with no
//! truncation in k, and the full kernel R̂(k, Y, t) for a batch of k.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationSpec, ModelParams, SpaceKind};
use crate::series::{MomentSeries, Provenance};

/// Periodic box of relative coordinates Y ∈ [−(L−1)/2, (L−1)/2]^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub dim: usize,
    pub side: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("box dimension must be at least 1".into()));
        }
        if side < 5 || side.is_multiple_of(2) {
            return Err(Error::Input(format!("box side must be odd and at least 5, got {side}")));
        }
        Ok(Self { dim, side })
    }

    pub fn total(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn half(&self) -> i64 {
        (self.side as i64 - 1) / 2
    }

    pub fn coords(&self, mut flat: usize) -> Vec<i64> {
        let mut y = vec![0i64; self.dim];
        for axis in (0..self.dim).rev() {
            y[axis] = (flat % self.side) as i64 - self.half();
            flat /= self.side;
        }
        y
    }

    pub fn index(&self, y: &[i64]) -> usize {
        let l = self.side as i64;
        y.iter()
            .fold(0usize, |acc, &v| acc * self.side + (v + self.half()).rem_euclid(l) as usize)
    }

    pub fn origin(&self) -> usize {
        self.index(&vec![0; self.dim])
    }

    /// Flat index of Y + s·ê_axis (periodic).
    fn shifted(&self, flat: usize, axis: usize, s: i64) -> usize {
        let mut y = self.coords(flat);
        y[axis] += s;
        self.index(&y)
    }

    fn on_boundary(&self, flat: usize) -> bool {
        self.coords(flat).iter().any(|v| v.abs() == self.half())
    }
}

/// Product initial states ψ(x) = Πⱼ φⱼ(xⱼ) on Z^d, scaled to a given trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LatticeInitialState {
    PointLocalized,
    /// φ(x) ∝ exp(−x²/(4σ²)) along each axis.
    Gaussian { sigma: Vec<f64> },
}

impl LatticeInitialState {
    /// Amplitudes φ on x ∈ [−r, r] for one axis.
    fn axis_amplitudes(&self, axis: usize) -> (i64, Vec<f64>) {
        match self {
            Self::PointLocalized => (0, vec![1.0]),
            Self::Gaussian { sigma } => {
                let s = sigma[axis];
                // Amplitudes below 1e-8 are dropped (norm error below 1e-16).
                let r = (s * (4.0 * 1e8f64.ln()).sqrt()).floor() as i64;
                let mut v: Vec<f64> = (-r..=r).map(|x| (-(x * x) as f64 / (4.0 * s * s)).exp()).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= norm);
                (r, v)
            }
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if let Self::Gaussian { sigma } = self {
            if sigma.len() != dim || sigma.iter().any(|s| !(*s > 0.0)) {
                return Err(Error::Input("lattice Gaussian needs one positive width per axis".into()));
            }
        }
        Ok(())
    }

    /// Σ_x e^{ik(2x−y)} φ̄(x)φ(x−y) times (2x − y)^power, for one axis.
    fn axis_kernel(&self, axis: usize, k: f64, y: i64, power: i32) -> Complex64 {
        let (r, phi) = self.axis_amplitudes(axis);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in phi.iter().enumerate() {
            let x = i as i64 - r;
            let xp = x - y;
            if xp < -r || xp > r {
                continue;
            }
            let b = phi[(xp + r) as usize];
            let lever = (2 * x - y) as f64;
            acc += Complex64::from_polar(a * b * lever.powi(power), k * lever);
        }
        acc
    }

    /// Largest |Y| along any axis with nonzero R̂(·, Y, 0).
    pub fn extent(&self, dim: usize) -> i64 {
        (0..dim).map(|a| 2 * self.axis_amplitudes(a).0).max().unwrap_or(0)
    }
}

/// R̂(k, Y, 0) over the box for one k.
pub fn initial_kernel(state: &LatticeInitialState, trace: f64, bx: &LatticeBox, k: &[f64]) -> Result<Vec<Complex64>> {
    state.check_dim(bx.dim)?;
    check_extent(state, bx)?;
    Ok((0..bx.total())
        .map(|flat| {
            let y = bx.coords(flat);
            (0..bx.dim)
                .map(|a| state.axis_kernel(a, k[a], y[a], 0))
                .fold(Complex64::new(trace, 0.0), |p, v| p * v)
        })
        .collect())
}

fn check_extent(state: &LatticeInitialState, bx: &LatticeBox) -> Result<()> {
    let need = state.extent(bx.dim);
    if need > bx.half() {
        return Err(Error::Input(format!(
            "box side {} cannot hold the initial state (needs half-width {need})",
            bx.side
        )));
    }
    Ok(())
}

/// Initial hierarchy {m₀, m₁ⱼ, m₂ⱼⱼ} at k = 0.
fn initial_moments(state: &LatticeInitialState, trace: f64, bx: &LatticeBox) -> Vec<Complex64> {
    let n = bx.total();
    let d = bx.dim;
    let mut out = vec![Complex64::new(0.0, 0.0); (1 + 2 * d) * n];
    for flat in 0..n {
        let y = bx.coords(flat);
        let a: Vec<Complex64> = (0..d).map(|j| state.axis_kernel(j, 0.0, y[j], 0)).collect();
        let b: Vec<Complex64> = (0..d).map(|j| state.axis_kernel(j, 0.0, y[j], 1)).collect();
        let c: Vec<Complex64> = (0..d).map(|j| state.axis_kernel(j, 0.0, y[j], 2)).collect();
        let others = |j: usize| -> Complex64 {
            (0..d)
                .filter(|&i| i != j)
                .fold(Complex64::new(trace, 0.0), |p, i| p * a[i])
        };
        out[flat] = others(usize::MAX);
        for j in 0..d {
            // ∂_k brings down i(2x − y); ∂²_k brings down −(2x − y)².
            out[(1 + j) * n + flat] = Complex64::new(0.0, 1.0) * b[j] * others(j);
            out[(1 + d + j) * n + flat] = -c[j] * others(j);
        }
    }
    out
}

/// Γ(Y) = (V₀/ħ)²[g(0) − g(Y)] over the box.
fn decay_rates(g: &CorrelationSpec, p: &ModelParams, bx: &LatticeBox) -> Result<Vec<f64>> {
    let scale = p.dephasing_scale();
    (0..bx.total())
        .map(|flat| {
            let y: Vec<f64> = bx.coords(flat).iter().map(|&v| v as f64).collect();
            Ok(scale * g.deficit(&y)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub dt: f64,
    /// Record every this many steps (t = 0 is always recorded).
    pub record_every: usize,
    /// Abort when the boundary shell carries more than this.
    pub boundary_threshold: f64,
}

impl EvolveOptions {
    pub fn new(t_max: f64, dt: f64, record_every: usize) -> Self {
        Self {
            t_max,
            dt,
            record_every: record_every.max(1),
            boundary_threshold: 1e-8,
        }
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.t_max > 0.0) {
            return Err(Error::Input("t_max and dt must be positive".into()));
        }
        let n = (self.t_max / self.dt).round();
        if (n * self.dt - self.t_max).abs() > 1e-9 * self.t_max {
            return Err(Error::Input(format!("t_max {} is not a multiple of dt {}", self.t_max, self.dt)));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyResult {
    /// Physical MSD Σ_x ‖x‖²ρ(x,x,t) = −(1/4) Σⱼ Re m₂ⱼⱼ(0, t).
    pub series: MomentSeries,
    /// −Σⱼ Re m₂ⱼⱼ(0, t) = −Δ_k R̂(0, 0, t).
    pub minus_laplacian: Vec<f64>,
    /// m₀(0, t) at recorded times.
    pub trace: Vec<Complex64>,
    /// Max over recorded times of |m₀(−Y) − conj m₀(Y)|.
    pub hermiticity_error: f64,
    pub boundary_mass: f64,
}

/// Recorded convention: MSD = −(1/4)·(−Δ_k R̂) on Z^d.
pub const LATTICE_MSD_FACTOR: f64 = 0.25;

/// Stability guard: dt ≤ 0.1·min(m/ħ, 1/max Γ).
fn check_dt(p: &ModelParams, dt: f64, gamma_max: f64) -> Result<()> {
    let mut bound = p.mass / p.hbar;
    if gamma_max > 0.0 {
        bound = bound.min(1.0 / gamma_max);
    }
    bound *= 0.1;
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, bound });
    }
    Ok(())
}

struct Neighbours {
    plus: Vec<Vec<usize>>,
    minus: Vec<Vec<usize>>,
}

impl Neighbours {
    fn new(bx: &LatticeBox) -> Self {
        let n = bx.total();
        Self {
            plus: (0..bx.dim).map(|a| (0..n).map(|f| bx.shifted(f, a, 1)).collect()).collect(),
            minus: (0..bx.dim).map(|a| (0..n).map(|f| bx.shifted(f, a, -1)).collect()).collect(),
        }
    }
}

fn rk4_step<F: Fn(&[Complex64], &mut [Complex64])>(
    rhs: &F,
    state: &mut [Complex64],
    dt: f64,
    k: &mut [Vec<Complex64>; 4],
    tmp: &mut [Complex64],
) {
    rhs(state, &mut k[0]);
    for (t, (s, a)) in tmp.iter_mut().zip(state.iter().zip(&k[0])) {
        *t = s + a * (0.5 * dt);
    }
    rhs(tmp, &mut k[1]);
    for (t, (s, a)) in tmp.iter_mut().zip(state.iter().zip(&k[1])) {
        *t = s + a * (0.5 * dt);
    }
    rhs(tmp, &mut k[2]);
    for (t, (s, a)) in tmp.iter_mut().zip(state.iter().zip(&k[2])) {
        *t = s + a * dt;
    }
    rhs(tmp, &mut k[3]);
    for (i, s) in state.iter_mut().enumerate() {
        *s += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (dt / 6.0);
    }
}

/// Integrates the k = 0 hierarchy with classical RK4.
pub fn evolve_hierarchy(
    init: &LatticeInitialState,
    trace: f64,
    g: &CorrelationSpec,
    p: &ModelParams,
    bx: &LatticeBox,
    opts: &EvolveOptions,
) -> Result<HierarchyResult> {
    if p.space != SpaceKind::Lattice || p.dim != bx.dim {
        return Err(Error::Input("evolve_hierarchy needs lattice parameters matching the box".into()));
    }
    init.check_dim(bx.dim)?;
    check_extent(init, bx)?;
    let steps = opts.steps()?;
    let gamma = decay_rates(g, p, bx)?;
    let gamma_max = gamma.iter().cloned().fold(0.0, f64::max);
    check_dt(p, opts.dt, gamma_max)?;

    let n = bx.total();
    let d = bx.dim;
    let c1 = p.c1();
    let nb = Neighbours::new(bx);
    let rhs = |s: &[Complex64], out: &mut [Complex64]| {
        for f in 0..n {
            out[f] = -gamma[f] * s[f];
        }
        for j in 0..d {
            let (m0, m1) = (&s[..n], &s[(1 + j) * n..(2 + j) * n]);
            let m2 = &s[(1 + d + j) * n..(2 + d + j) * n];
            for f in 0..n {
                let (up, dn) = (nb.plus[j][f], nb.minus[j][f]);
                out[(1 + j) * n + f] = -c1 * (m0[up] - m0[dn]) - gamma[f] * m1[f];
                out[(1 + d + j) * n + f] = -2.0 * c1 * (m1[up] - m1[dn]) - gamma[f] * m2[f];
            }
        }
    };

    let mut state = initial_moments(init, trace, bx);
    let len = state.len();
    let mut k = [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]];
    let mut tmp = vec![Complex64::new(0.0, 0.0); len];
    let origin = bx.origin();
    let boundary: Vec<usize> = (0..n).filter(|&f| bx.on_boundary(f)).collect();
    let mirror: Vec<usize> = (0..n)
        .map(|f| {
            let y: Vec<i64> = bx.coords(f).iter().map(|v| -v).collect();
            bx.index(&y)
        })
        .collect();

    let mut times = Vec::new();
    let mut raw = Vec::new();
    let mut traces = Vec::new();
    let mut herm: f64 = 0.0;
    let mut boundary_mass: f64 = 0.0;
    let mut record = |step: usize, s: &[Complex64]| -> Result<()> {
        let t = step as f64 * opts.dt;
        let lap: f64 = (0..d).map(|j| s[(1 + d + j) * n + origin].re).sum();
        if !lap.is_finite() {
            return Err(Error::Instability(t));
        }
        let mass = boundary
            .iter()
            .map(|&f| (0..1 + 2 * d).map(|c| s[c * n + f].norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        boundary_mass = boundary_mass.max(mass);
        if mass > opts.boundary_threshold {
            return Err(Error::Boundary {
                mass,
                threshold: opts.boundary_threshold,
                t,
            });
        }
        for f in 0..n {
            herm = herm.max((s[mirror[f]] - s[f].conj()).norm());
        }
        times.push(t);
        raw.push(-lap);
        traces.push(s[origin]);
        Ok(())
    };
    record(0, &state)?;
    for step in 1..=steps {
        rk4_step(&rhs, &mut state, opts.dt, &mut k, &mut tmp);
        if step % opts.record_every == 0 || step == steps {
            record(step, &state)?;
        }
    }
    let msd: Vec<f64> = raw.iter().map(|v| LATTICE_MSD_FACTOR * v).collect();
    Ok(HierarchyResult {
        series: MomentSeries::new(times, msd, Provenance::DeterministicEvolution)?,
        minus_laplacian: raw,
        trace: traces,
        hermiticity_error: herm,
        boundary_mass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSnapshot {
    pub t: f64,
    /// R̂(k, ·, t) for each k of the batch, over the box.
    pub kernels: Vec<Vec<Complex64>>,
}

/// RK4 stability bound on dt·(2c₁Σ|sin kⱼ| + max Γ).
pub const RK4_CFL: f64 = 2.5;

/// Recorded (t, R̂(k, ·, t)) frames for one k.
type Frames = Vec<(f64, Vec<Complex64>)>;

/// Evolves R̂(k, Y, t) for each k of the batch from the given initial state.
pub fn evolve_full_kernel(
    k_batch: &[Vec<f64>],
    init: &LatticeInitialState,
    trace: f64,
    g: &CorrelationSpec,
    p: &ModelParams,
    bx: &LatticeBox,
    opts: &EvolveOptions,
) -> Result<Vec<KernelSnapshot>> {
    if p.space != SpaceKind::Lattice || p.dim != bx.dim {
        return Err(Error::Input("evolve_full_kernel needs lattice parameters matching the box".into()));
    }
    if k_batch.iter().any(|k| k.len() != bx.dim) {
        return Err(Error::Input("every k must have the box dimension".into()));
    }
    let steps = opts.steps()?;
    let gamma = decay_rates(g, p, bx)?;
    let gamma_max = gamma.iter().cloned().fold(0.0, f64::max);
    let c1 = p.c1();
    for k in k_batch {
        let rate = 2.0 * c1 * k.iter().map(|v| v.sin().abs()).sum::<f64>() + gamma_max;
        if opts.dt * rate > RK4_CFL {
            return Err(Error::Stability {
                dt: opts.dt,
                bound: RK4_CFL / rate,
            });
        }
    }
    let nb = Neighbours::new(bx);
    let n = bx.total();
    let d = bx.dim;

    let runs: Vec<Frames> = k_batch
        .par_iter()
        .map(|k| {
            let sines: Vec<f64> = k.iter().map(|v| v.sin()).collect();
            let rhs = |s: &[Complex64], out: &mut [Complex64]| {
                for f in 0..n {
                    let mut acc = -gamma[f] * s[f];
                    for j in 0..d {
                        acc -= c1 * sines[j] * (s[nb.plus[j][f]] - s[nb.minus[j][f]]);
                    }
                    out[f] = acc;
                }
            };
            let mut state = initial_kernel(init, trace, bx, k)?;
            let mut kb = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
            let mut tmp = vec![Complex64::new(0.0, 0.0); n];
            let mut out = vec![(0.0, state.clone())];
            for step in 1..=steps {
                rk4_step(&rhs, &mut state, opts.dt, &mut kb, &mut tmp);
                if step % opts.record_every == 0 || step == steps {
                    let t = step as f64 * opts.dt;
                    if state.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                        return Err(Error::Instability(t));
                    }
                    out.push((t, state.clone()));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let frames = runs.first().map(|r| r.len()).unwrap_or(0);
    Ok((0..frames)
        .map(|i| KernelSnapshot {
            t: runs[0][i].0,
            kernels: runs.iter().map(|r| r[i].1.clone()).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{msd_inverse_laplace_closed_form, LatticeMsdLaw};
    use crate::transforms::fit_power_law;

    fn onsite() -> (CorrelationSpec, ModelParams) {
        (CorrelationSpec::lattice_onsite(1), ModelParams::lattice(1))
    }

    #[test]
    fn free_point_state_is_ballistic() {
        let (g, p) = onsite();
        let p = p.with_v0(0.0);
        let bx = LatticeBox::new(1, 9).unwrap();
        let r = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(20.0, 0.05, 4))
            .unwrap();
        for (t, m) in r.series.times.iter().zip(&r.series.msd) {
            // Group velocity c₁ sin q, uniform in q from a site: ⟨x²⟩ = c₁²t²/2.
            assert!((m - t * t / 2.0).abs() < 1e-10 * (1.0 + t * t), "t={t}: {m}");
        }
        let f = fit_power_law(&r.series, (1.0, 20.0)).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6);
    }

    #[test]
    fn matches_law_with_quarter_normalization() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 9).unwrap();
        let r = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(50.0, 0.01, 10))
            .unwrap();
        let law = LatticeMsdLaw::new(4.0, vec![1.0], 1.0);
        for (t, m) in r.series.times.iter().zip(&r.series.msd).skip(1) {
            let expected = LATTICE_MSD_FACTOR * msd_inverse_laplace_closed_form(*t, &law).unwrap();
            assert!(((m - expected) / expected).abs() <= 1e-8, "t={t}");
        }
    }

    #[test]
    fn trace_and_hermiticity() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 81).unwrap();
        let init = LatticeInitialState::Gaussian { sigma: vec![2.0] };
        let r = evolve_hierarchy(&init, 1.0, &g, &p, &bx, &EvolveOptions::new(5.0, 0.05, 10)).unwrap();
        let t0 = r.trace[0];
        assert!((t0.re - 1.0).abs() < 1e-12);
        for t in &r.trace {
            assert!((t - t0).norm() < 1e-12);
        }
        assert!(r.hermiticity_error < 1e-12);
        assert!((r.series.msd[0] - 4.0).abs() < 1e-9, "{}", r.series.msd[0]);
    }

    #[test]
    fn trace_drift_over_long_run() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 9).unwrap();
        let r = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(1000.0, 0.01, 10_000))
            .unwrap();
        assert!(r.trace.iter().all(|t| (t - r.trace[0]).norm() < 1e-10));
    }

    #[test]
    fn two_dimensional_point_state() {
        let g = CorrelationSpec::lattice_onsite(2);
        let p = ModelParams::lattice(2);
        let bx = LatticeBox::new(2, 7).unwrap();
        let r = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(10.0, 0.01, 100))
            .unwrap();
        let law = LatticeMsdLaw::new(4.0, vec![1.0, 1.0], 1.0);
        for (t, m) in r.series.times.iter().zip(&r.series.msd).skip(1) {
            let expected = LATTICE_MSD_FACTOR * law.eval(*t).unwrap();
            assert!(((m - expected) / expected).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 9).unwrap();
        let law = LatticeMsdLaw::new(4.0, vec![1.0], 1.0);
        let exact = LATTICE_MSD_FACTOR * law.eval(2.0).unwrap();
        let run = |dt: f64| {
            let r = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(2.0, dt, 1000))
                .unwrap();
            *r.series.msd.last().unwrap()
        };
        let (a, b, c) = (run(0.1), run(0.05), run(0.025));
        assert!(((b - a) / b).abs() <= 1e-6);
        let ratio = (a - exact) / (b - exact);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
        assert!((c - exact).abs() < (b - exact).abs());
    }

    #[test]
    fn rejects_large_steps_and_small_boxes() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 9).unwrap();
        let e = evolve_hierarchy(&LatticeInitialState::PointLocalized, 1.0, &g, &p, &bx, &EvolveOptions::new(1.0, 0.5, 1));
        assert!(matches!(e, Err(Error::Stability { .. })));
        let init = LatticeInitialState::Gaussian { sigma: vec![3.0] };
        assert!(evolve_hierarchy(&init, 1.0, &g, &p, &bx, &EvolveOptions::new(1.0, 0.01, 1)).is_err());
        assert!(LatticeBox::new(1, 8).is_err());
    }

    #[test]
    fn boundary_monitor_trips() {
        let (g, p) = onsite();
        let p = p.with_v0(0.0);
        // m₁ reaches one site past the initial support (half-width 16).
        let bx = LatticeBox::new(1, 35).unwrap();
        let init = LatticeInitialState::Gaussian { sigma: vec![1.0] };
        let mut opts = EvolveOptions::new(1.0, 0.01, 10);
        opts.boundary_threshold = 1e-30;
        let e = evolve_hierarchy(&init, 1.0, &g, &p, &bx, &opts);
        assert!(matches!(e, Err(Error::Boundary { .. })));
    }

    #[test]
    fn full_kernel_at_zero_matches_m0() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 61).unwrap();
        let init = LatticeInitialState::Gaussian { sigma: vec![1.5] };
        let opts = EvolveOptions::new(2.0, 0.01, 50);
        let snaps = evolve_full_kernel(&[vec![0.0]], &init, 1.0, &g, &p, &bx, &opts).unwrap();
        let m0_0 = initial_kernel(&init, 1.0, &bx, &[0.0]).unwrap();
        let gamma = decay_rates(&g, &p, &bx).unwrap();
        for s in &snaps {
            for (f, v) in s.kernels[0].iter().enumerate() {
                let expected = m0_0[f] * (-gamma[f] * s.t).exp();
                assert!((v - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn free_kernel_is_unitary() {
        let (g, p) = onsite();
        let p = p.with_v0(0.0);
        let bx = LatticeBox::new(1, 81).unwrap();
        let init = LatticeInitialState::Gaussian { sigma: vec![2.0] };
        let snaps = evolve_full_kernel(&[vec![std::f64::consts::PI / 8.0]], &init, 1.0, &g, &p, &bx, &EvolveOptions::new(10.0, 0.01, 100))
            .unwrap();
        let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let n0 = norm(&snaps[0].kernels[0]);
        for s in &snaps {
            assert!((norm(&s.kernels[0]) - n0).abs() < 1e-8 * n0);
        }
    }

    #[test]
    fn kernel_differences_match_hierarchy() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 41).unwrap();
        let init = LatticeInitialState::Gaussian { sigma: vec![1.0] };
        let opts = EvolveOptions::new(5.0, 0.01, 500);
        let o = bx.origin();
        let second = |h: f64| {
            let ks = vec![vec![-h], vec![0.0], vec![h]];
            let snaps = evolve_full_kernel(&ks, &init, 1.0, &g, &p, &bx, &opts).unwrap();
            let last = snaps.last().unwrap();
            ((last.kernels[0][o] - 2.0 * last.kernels[1][o] + last.kernels[2][o]) / (h * h)).re
        };
        let h = std::f64::consts::PI / 64.0;
        let lap = (4.0 * second(h / 2.0) - second(h)) / 3.0;
        let hier = evolve_hierarchy(&init, 1.0, &g, &p, &bx, &opts).unwrap();
        let minus_lap = *hier.minus_laplacian.last().unwrap();
        assert!(((-lap - minus_lap) / minus_lap).abs() < 1e-3, "{} vs {minus_lap}", -lap);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let (g, p) = onsite();
        let bx = LatticeBox::new(1, 9).unwrap();
        let r = evolve_full_kernel(&[vec![1.5]], &LatticeInitialState::PointLocalized, 1.0, &g, &p.with_v0(0.0), &bx, &EvolveOptions::new(3.0, 1.5, 1));
        assert!(matches!(r, Err(Error::Stability { .. })));
    }
}
