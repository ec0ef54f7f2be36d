//! Closed-form disorder-averaged kernel on R^d.
//!
//! Conventions: R(X, Y, t) = ⟨ψ̄(x)ψ(x′)⟩ = ρ(x′, x, t) with X = x + x′,
//! Y = x − x′, and
//! R̂(k, Y, t) = ∫ e^{ik·X} R(X, Y, t) dX. The averaged kernel is transported
//! along Y(s) = Y₀ − (2ħ/m) s k and damped by (V₀/ħ)²[g(0) − g(Y)], so
//! R̂(k, Y₀, t) = R̂(k, Y₀ − 2ħtk/m, 0) · e^{Φ(k, t; Y₀)}. On the diagonal
//! R̂(0, 0, t) = 2^d Tr ρ and ⟨‖x‖²⟩ = −2^{−(d+2)} Δ_k R̂(k, 0, t)|_{k=0}.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{laplacian_g_at_zero, CorrelationSpec, ModelParams};
use crate::quad::{integrate, Tolerance};
use crate::series::{MomentSeries, Provenance};
use crate::transforms::{richardson_first_derivative, richardson_second_derivative};

/// Φ(k, t) with characteristic offset k₀ (the Y₀ of the kernel).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseQuery {
    pub k: Vec<f64>,
    pub k0: Vec<f64>,
    pub t: f64,
}

impl PhaseQuery {
    pub fn new(k: Vec<f64>, t: f64) -> Self {
        let k0 = vec![0.0; k.len()];
        Self { k, k0, t }
    }

    pub fn with_offset(mut self, k0: Vec<f64>) -> Self {
        self.k0 = k0;
        self
    }
}

/// Absolute tolerance of the phase quadrature.
pub const PHASE_TOL: f64 = 1e-10;

/// Φ(k, t) = −(V₀/ħ)² ∫₀ᵗ [g(0) − g(k₀ − (2ħs/m) k)] ds.
pub fn phase(q: &PhaseQuery, g: &CorrelationSpec, p: &ModelParams) -> Result<f64> {
    let d = p.dim;
    if q.k.len() != d || q.k0.len() != d || g.dim() != d {
        return Err(Error::Input("phase query dimension mismatch".into()));
    }
    if !(q.t >= 0.0) {
        return Err(Error::Input(format!("phase needs t >= 0, got {}", q.t)));
    }
    if p.v0 == 0.0 || q.t == 0.0 {
        return Ok(0.0);
    }
    let c = p.characteristic_speed();
    let knorm = q.k.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = p.dephasing_scale();
    if knorm == 0.0 {
        return Ok(-scale * g.deficit(&q.k0)? * q.t);
    }
    // One panel per correlation length travelled along the characteristic.
    let travelled = c * knorm * q.t;
    let panels = ((travelled / g.correlation_length().max(1e-300)).ceil() as usize * 4).clamp(1, 400);
    let y = std::cell::RefCell::new(vec![0.0; d]);
    let failure = std::cell::Cell::new(None);
    let r = integrate(
        |s: f64| {
            let mut y = y.borrow_mut();
            for j in 0..d {
                y[j] = q.k0[j] - c * s * q.k[j];
            }
            match g.deficit(&y) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        0.0,
        q.t,
        Tolerance::new(PHASE_TOL / scale.max(1.0), 1e-13),
        panels,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let v = -scale * r?.value;
    // The deficit is nonnegative for valid g; rounding may leave a tiny positive value.
    Ok(v.min(0.0))
}

pub type KernelSampler = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum InitialForm {
    /// Product of centred Gaussians ψ(x) ∝ exp(−x_j²/(4σ_j²)), so ⟨x_j²⟩ = σ_j².
    GaussianPureState { sigma: Vec<f64> },
    /// R̂(k, Y, 0) for a unit-trace state; must decay in Y.
    Sampler(KernelSampler),
}

impl std::fmt::Debug for InitialForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::GaussianPureState { sigma } => f.debug_struct("GaussianPureState").field("sigma", sigma).finish(),
            Self::Sampler(_) => f.write_str("Sampler(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialKernelSpec {
    pub form: InitialForm,
    pub trace: f64,
}

impl InitialKernelSpec {
    pub fn gaussian(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Input("Gaussian widths must be positive".into()));
        }
        Ok(Self {
            form: InitialForm::GaussianPureState { sigma },
            trace: 1.0,
        })
    }

    pub fn isotropic_gaussian(dim: usize, sigma: f64) -> Result<Self> {
        Self::gaussian(vec![sigma; dim])
    }

    pub fn sampler(f: KernelSampler) -> Self {
        Self {
            form: InitialForm::Sampler(f),
            trace: 1.0,
        }
    }

    pub fn with_trace(mut self, trace: f64) -> Self {
        self.trace = trace;
        self
    }

    /// R̂(k, Y, 0).
    pub fn eval(&self, k: &[f64], y: &[f64]) -> Complex64 {
        match &self.form {
            InitialForm::GaussianPureState { sigma } => {
                let d = sigma.len() as i32;
                let expo: f64 = sigma
                    .iter()
                    .zip(k.iter().zip(y))
                    .map(|(s, (kj, yj))| -yj * yj / (8.0 * s * s) - 2.0 * s * s * kj * kj)
                    .sum();
                Complex64::new(self.trace * 2f64.powi(d) * expo.exp(), 0.0)
            }
            InitialForm::Sampler(f) => f(k, y) * self.trace,
        }
    }

    /// Exact free-space second moment ⟨‖x‖²⟩ at t = 0, when known.
    pub fn second_moment(&self) -> Option<f64> {
        match &self.form {
            InitialForm::GaussianPureState { sigma } => Some(self.trace * sigma.iter().map(|s| s * s).sum::<f64>()),
            InitialForm::Sampler(_) => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.form {
            InitialForm::GaussianPureState { sigma } => Some(sigma.len()),
            InitialForm::Sampler(_) => None,
        }
    }
}

/// R̂(k, Y₀, t) = R̂(k, Y₀ − 2ħtk/m, 0) · e^{Φ(k, t; Y₀)}.
pub fn kernel_hat(
    k: &[f64],
    y0: &[f64],
    t: f64,
    init: &InitialKernelSpec,
    g: &CorrelationSpec,
    p: &ModelParams,
) -> Result<Complex64> {
    let c = p.characteristic_speed();
    let shifted: Vec<f64> = y0.iter().zip(k).map(|(y, kj)| y - c * t * kj).collect();
    let phi = phase(&PhaseQuery::new(k.to_vec(), t).with_offset(y0.to_vec()), g, p)?;
    Ok(init.eval(k, &shifted) * phi.exp())
}

/// Closed-form MSD with the separately reported t³ coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumMsd {
    pub series: MomentSeries,
    /// −2^{−(d+2)} (V₀/ħ)² (2ħ/m)² (Δg)(0) R̂(0,0,0) / 3, composed from the kernel.
    pub t3_coefficient: f64,
    /// The printed general-d form: −(Δg)(0)(V₀/m)² Tr/(3·2^d).
    pub printed_general_coefficient: f64,
    /// The one-dimensional form −(1/6)(V₀/m)² g″(0) Tr (d = 1 only).
    pub printed_one_dim_coefficient: Option<f64>,
    pub trace: f64,
    pub laplacian_g0: f64,
}

/// Base k-step at time t; the characteristic shift 2ħtk/m stays below 1e-2.
fn k_step(p: &ModelParams, t: f64) -> f64 {
    1e-2 * p.mass / (2.0 * p.hbar * t.max(1.0))
}

/// ⟨‖x‖²⟩(t) by differentiating the phase analytically at k = 0 and the
/// initial-kernel factor F(k) = R̂(k, −2ħtk/m, 0) by Richardson-extrapolated
/// central differences.
pub fn msd_closed_form(
    times: &[f64],
    init: &InitialKernelSpec,
    g: &CorrelationSpec,
    p: &ModelParams,
) -> Result<ContinuumMsd> {
    let d = p.dim;
    check_init_dim(init, d)?;
    let c = p.characteristic_speed();
    let scale = p.dephasing_scale();
    let zero = vec![0.0; d];
    let grad_g = g.gradient(&zero)?;
    let hess_g = g.hessian(&zero)?;
    let lap_g = laplacian_g_at_zero(g)?;
    let r000 = init.eval(&zero, &zero).re;
    if !(r000 > 0.0) {
        return Err(Error::Input("initial kernel must have positive trace".into()));
    }
    let norm = 0.5f64.powi(d as i32 + 2);

    let mut msd = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0) {
            return Err(Error::Input(format!("negative time {t}")));
        }
        let h = k_step(p, t);
        let f_axis = |j: usize, kj: f64| -> Result<Complex64> {
            let mut k = zero.clone();
            k[j] = kj;
            let y: Vec<f64> = k.iter().map(|v| -c * t * v).collect();
            Ok(init.eval(&k, &y))
        };
        let f0 = init.eval(&zero, &zero);
        let mut lap_f = Complex64::new(0.0, 0.0);
        let mut grad_f = vec![Complex64::new(0.0, 0.0); d];
        for (j, gj) in grad_f.iter_mut().enumerate() {
            lap_f += richardson_second_derivative(|kj| f_axis(j, kj), 0.0, h)?;
            *gj = richardson_first_derivative(|kj| f_axis(j, kj), 0.0, h)?;
        }
        if !(lap_f.re.is_finite() && lap_f.im.is_finite()) {
            return Err(Error::Input("initial kernel has no finite second moment".into()));
        }
        // ∂ᵢΦ(0) = −(V₀/ħ)² c ∂ᵢg(0) t²/2, ∂ᵢⱼΦ(0) = (V₀/ħ)² c² ∂ᵢⱼg(0) t³/3.
        let grad_phi: Vec<f64> = grad_g.iter().map(|gi| -scale * c * gi * t * t / 2.0).collect();
        let lap_phi: f64 = (0..d).map(|i| hess_g[i * d + i]).sum::<f64>() * scale * c * c * t.powi(3) / 3.0;
        let grad_phi_sq: f64 = grad_phi.iter().map(|v| v * v).sum();
        let cross: Complex64 = grad_phi.iter().zip(&grad_f).map(|(a, b)| b * (2.0 * a)).sum();
        let lap = lap_f + cross + f0 * (lap_phi + grad_phi_sq);
        msd.push(-norm * lap.re);
    }
    let trace = r000 / 2f64.powi(d as i32);
    let t3_coefficient = -norm * scale * c * c * lap_g * r000 / 3.0;
    let v_over_m = p.v0 / p.mass;
    let printed_general_coefficient = -lap_g * v_over_m * v_over_m * trace / (3.0 * 2f64.powi(d as i32));
    let printed_one_dim_coefficient = (d == 1).then(|| -v_over_m * v_over_m * hess_g[0] * trace / 6.0);
    Ok(ContinuumMsd {
        series: MomentSeries::new(times.to_vec(), msd, Provenance::ClosedForm)?,
        t3_coefficient,
        printed_general_coefficient,
        printed_one_dim_coefficient,
        trace,
        laplacian_g0: lap_g,
    })
}

/// ⟨‖x‖²⟩(t) from Richardson differences of the full kernel in k.
pub fn msd_finite_difference(
    times: &[f64],
    init: &InitialKernelSpec,
    g: &CorrelationSpec,
    p: &ModelParams,
) -> Result<MomentSeries> {
    let d = p.dim;
    check_init_dim(init, d)?;
    let zero = vec![0.0; d];
    let norm = 0.5f64.powi(d as i32 + 2);
    let mut msd = Vec::with_capacity(times.len());
    for &t in times {
        let h = 4.0 * k_step(p, t);
        let mut lap = Complex64::new(0.0, 0.0);
        for j in 0..d {
            lap += richardson_second_derivative(
                |kj| {
                    let mut k = zero.clone();
                    k[j] = kj;
                    kernel_hat(&k, &zero, t, init, g, p)
                },
                0.0,
                h,
            )?;
        }
        msd.push(-norm * lap.re);
    }
    MomentSeries::new(times.to_vec(), msd, Provenance::FiniteDifferenceOfKernel)
}

fn check_init_dim(init: &InitialKernelSpec, d: usize) -> Result<()> {
    match init.dim() {
        Some(n) if n != d => Err(Error::Input(format!("initial state has dimension {n}, model has {d}"))),
        _ => Ok(()),
    }
}

/// Exact MSD for a centred Gaussian pure state (σ per axis) and any even g:
/// Σⱼ σⱼ² + Σⱼ (ħt/(2mσⱼ))² − (1/3)(V₀/m)²(Δg)(0) Tr t³.
pub fn gaussian_msd_exact(sigma: &[f64], trace: f64, lap_g0: f64, p: &ModelParams, t: f64) -> f64 {
    let free: f64 = sigma
        .iter()
        .map(|s| s * s + (p.hbar * t / (2.0 * p.mass * s)).powi(2))
        .sum();
    trace * free - (p.v0 / p.mass).powi(2) * lap_g0 * trace * t.powi(3) / 3.0
}

/// ∫₀^∞ e^{−sz} e^{Φ(k, z)} R̂(k, −2ħkz/m, 0) dz in one dimension.
pub fn laplace_kernel_1d(
    k: f64,
    s: Complex64,
    init: &InitialKernelSpec,
    g: &CorrelationSpec,
    p: &ModelParams,
) -> Result<Complex64> {
    if p.dim != 1 {
        return Err(Error::Input("laplace_kernel_1d needs d = 1".into()));
    }
    if !(s.re > 0.0) {
        return Err(Error::Domain(format!("the Laplace integral diverges for Re s <= 0 (s = {s})")));
    }
    check_init_dim(init, 1)?;
    let c = p.characteristic_speed();
    // |e^Φ R̂(k, Y, 0)| ≤ R̂(0, 0, 0) for a positive state; the tail past Z is
    // at most R̂(0,0,0) e^{−Re s Z}/Re s.
    let bound = init.eval(&[0.0], &[0.0]).norm().max(1e-300);
    let target = 1e-14 * bound / s.norm();
    let horizon = ((bound / (s.re * target)).ln() / s.re).max(1.0 / s.re);
    let panels = ((horizon * s.norm() / 2.0).ceil() as usize).clamp(8, 2000);
    let failure = std::cell::Cell::new(None);
    let r = integrate(
        |z: f64| -> Complex64 {
            let phi = match phase(&PhaseQuery::new(vec![k], z), g, p) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            };
            (-s * z).exp() * phi.exp() * init.eval(&[k], &[-c * k * z])
        },
        0.0,
        horizon,
        Tolerance::new(target, 1e-12),
        panels,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(r?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::fit_power_law;

    fn gauss1() -> (CorrelationSpec, ModelParams, InitialKernelSpec) {
        (
            CorrelationSpec::isotropic_gaussian(1),
            ModelParams::continuum(1),
            InitialKernelSpec::isotropic_gaussian(1, 1.0).unwrap(),
        )
    }

    /// Fixed 64-point Gauss–Legendre rule on [a, b] (Golub–Welsch free:
    /// nodes by Newton iteration on P₆₄).
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            sum += w * f(0.5 * (b - a) * x + 0.5 * (a + b));
        }
        0.5 * (b - a) * sum
    }

    #[test]
    fn phase_trivial_cases() {
        let (g, p, _) = gauss1();
        for t in [0.0, 1.0, 10.0] {
            assert_eq!(phase(&PhaseQuery::new(vec![0.0], t), &g, &p).unwrap(), 0.0);
        }
        let free = ModelParams::continuum(1).with_v0(0.0);
        assert_eq!(phase(&PhaseQuery::new(vec![0.7], 3.0), &g, &free).unwrap(), 0.0);
    }

    #[test]
    fn phase_matches_gauss_legendre() {
        let (g, p, _) = gauss1();
        let got = phase(&PhaseQuery::new(vec![0.3], 2.0), &g, &p).unwrap();
        let oracle = -gauss_legendre(|s| 1.0 - (-(0.6 * s).powi(2)).exp(), 0.0, 2.0, 64);
        assert!(((got - oracle) / oracle).abs() <= 1e-8, "{got} vs {oracle}");
        assert!(got < 0.0);
    }

    #[test]
    fn phase_gradient_vanishes_at_zero() {
        let (g, p, _) = gauss1();
        for t in [0.5, 2.0, 10.0] {
            let h = 1e-5;
            let up = phase(&PhaseQuery::new(vec![h], t), &g, &p).unwrap();
            let dn = phase(&PhaseQuery::new(vec![-h], t), &g, &p).unwrap();
            assert!(((up - dn) / (2.0 * h)).abs() <= 1e-9);
        }
    }

    #[test]
    fn trace_is_conserved() {
        let (g, p, init) = gauss1();
        let r0 = kernel_hat(&[0.0], &[0.0], 0.0, &init, &g, &p).unwrap();
        assert!((r0.re - 2.0).abs() < 1e-15);
        for t in [0.0, 1.0, 10.0] {
            let v = kernel_hat(&[0.0], &[0.0], t, &init, &g, &p).unwrap();
            assert!((v - r0).norm() < 1e-12 * r0.norm());
        }
    }

    #[test]
    fn free_kernel_is_pure_transport() {
        let (g, _, init) = gauss1();
        let p = ModelParams::continuum(1).with_v0(0.0);
        let v = kernel_hat(&[0.4], &[0.0], 3.0, &init, &g, &p).unwrap();
        assert_eq!(v, init.eval(&[0.4], &[-2.0 * 3.0 * 0.4]));
    }

    #[test]
    fn ballistic_without_disorder() {
        let (g, _, init) = gauss1();
        let p = ModelParams::continuum(1).with_v0(0.0);
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let r = msd_closed_form(&times, &init, &g, &p).unwrap();
        for (t, m) in times.iter().zip(&r.series.msd) {
            assert!((m - (1.0 + t * t / 4.0)).abs() < 1e-8, "t={t}: {m}");
        }
        assert_eq!(r.t3_coefficient, 0.0);
    }

    #[test]
    fn closed_form_matches_exact_gaussian_law() {
        let (g, p, init) = gauss1();
        let times: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let r = msd_closed_form(&times, &init, &g, &p).unwrap();
        for (t, m) in times.iter().zip(&r.series.msd) {
            let exact = 1.0 + t * t / 4.0 + 2.0 / 3.0 * t.powi(3);
            assert!(((m - exact) / exact).abs() < 1e-9, "t={t}: {m} vs {exact}");
        }
        assert!((r.series.msd[0] - 1.0).abs() < 1e-8);
        assert!((r.t3_coefficient - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.printed_general_coefficient - 1.0 / 3.0).abs() < 1e-14);
        assert!((r.printed_one_dim_coefficient.unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_units_and_dimension() {
        let g = CorrelationSpec::diagonal_gaussian(&[1.0, 2.0]).unwrap();
        let p = ModelParams::new(0.7, 1.9, 1.3, 2, crate::SpaceKind::Continuum).unwrap();
        let init = InitialKernelSpec::gaussian(vec![0.8, 1.5]).unwrap();
        let times = [0.0, 1.0, 4.0];
        let r = msd_closed_form(&times, &init, &g, &p).unwrap();
        for (t, m) in times.iter().zip(&r.series.msd) {
            let exact = gaussian_msd_exact(&[0.8, 1.5], 1.0, -6.0, &p, *t);
            assert!(((m - exact) / exact).abs() < 1e-8);
        }
    }

    #[test]
    fn phase_differentiation_agrees_with_kernel_differences() {
        let (g, p, init) = gauss1();
        let times = [0.5, 2.0, 5.0];
        let a = msd_closed_form(&times, &init, &g, &p).unwrap().series;
        let b = msd_finite_difference(&times, &init, &g, &p).unwrap();
        for (x, y) in a.msd.iter().zip(&b.msd) {
            assert!(((x - y) / x).abs() <= 1e-5, "{x} vs {y}");
        }
    }

    #[test]
    fn exponent_windows() {
        let (g, p, init) = gauss1();
        let times: Vec<f64> = (0..=40).map(|i| 10f64 * 10f64.powf(i as f64 / 40.0)).collect();
        let r = msd_closed_form(&times, &init, &g, &p).unwrap();
        let f = fit_power_law(&r.series, (10.0, 100.0)).unwrap();
        assert!((2.9..=3.1).contains(&f.exponent), "{f:?}");
        // A narrower packet keeps the initial width from biasing the window.
        let free = ModelParams::continuum(1).with_v0(0.0);
        let narrow = InitialKernelSpec::isotropic_gaussian(1, 0.5).unwrap();
        let r = msd_closed_form(&times, &narrow, &g, &free).unwrap();
        let f = fit_power_law(&r.series, (10.0, 100.0)).unwrap();
        assert!((1.99..=2.01).contains(&f.exponent), "{f:?}");
    }

    #[test]
    fn laplace_at_zero_wavenumber() {
        let (g, p, init) = gauss1();
        let s = Complex64::new(1.5, 0.3);
        let v = laplace_kernel_1d(0.0, s, &init, &g, &p).unwrap();
        let expected = 2.0 / s;
        assert!(((v - expected) / expected).norm() <= 1e-10);
    }

    #[test]
    fn laplace_free_matches_direct_quadrature() {
        let (g, _, init) = gauss1();
        let p = ModelParams::continuum(1).with_v0(0.0);
        let v = laplace_kernel_1d(0.2, Complex64::new(1.0, 0.0), &init, &g, &p).unwrap();
        // Oracle: t ↦ e^{−t} R̂(0.2, −0.4t, 0) on [0, 60] by Gauss–Legendre panels.
        let integrand = |t: f64| (-t).exp() * 2.0 * (-(0.4 * t).powi(2) / 8.0 - 2.0 * 0.04).exp();
        let oracle: f64 = (0..30).map(|i| gauss_legendre(integrand, 2.0 * i as f64, 2.0 * (i + 1) as f64, 32)).sum();
        assert!(((v.re - oracle) / oracle).abs() <= 1e-8);
    }

    #[test]
    fn laplace_matches_numeric_transform() {
        use crate::transforms::{laplace_transform_numeric, LaplaceInput, LaplaceOptions};
        let (g, p, init) = gauss1();
        let s = Complex64::new(2.0, 0.0);
        let v = laplace_kernel_1d(0.3, s, &init, &g, &p).unwrap();
        let f = |t: f64| kernel_hat(&[0.3], &[0.0], t, &init, &g, &p).unwrap().re;
        let o = LaplaceOptions {
            horizon: Some(40.0),
            ..LaplaceOptions::default()
        };
        let w = laplace_transform_numeric(LaplaceInput::Real(&f), s, &o).unwrap();
        assert!(((v - w) / w).norm() <= 1e-6);
        assert!(laplace_kernel_1d(0.3, Complex64::new(0.0, 1.0), &init, &g, &p).is_err());
    }
}
