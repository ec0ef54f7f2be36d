//! Power-law and polynomial fits, finite-difference stencils, and the
//! numerical Laplace transform and its Talbot-contour inverse.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadValue, Tolerance};
use crate::series::MomentSeries;

// ---------------------------------------------------------------- fitting

/// Values below this are dropped from log-log fits.
pub const LOG_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub coefficient: f64,
    pub window: [f64; 2],
    #[serde(rename = "r2")]
    pub r_squared: f64,
    #[serde(rename = "stderr")]
    pub stderr_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub stderr_slope: f64,
    pub n_points: usize,
}

/// Ordinary least squares y = intercept + slope·x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::Input(format!("linear fit needs at least 3 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("linear fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    let stderr_slope = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        stderr_slope,
        n_points: n,
    })
}

/// Least squares fit of log y against log t on `window` (inclusive).
///
/// Points with t ≤ 0 or y < 1e-12 are excluded; negative or non-finite y in
/// the window is a domain error.
pub fn fit_power_law_xy(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Input(format!("fit window [{lo}, {hi}] is empty")));
    }
    if t.len() != y.len() {
        return Err(Error::Input("fit columns have different lengths".into()));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&ti, &yi) in t.iter().zip(y) {
        if ti < lo || ti > hi || ti <= 0.0 {
            continue;
        }
        if !yi.is_finite() || yi < 0.0 {
            return Err(Error::Domain(format!("value {yi} at t={ti} cannot be log-fitted")));
        }
        if yi < LOG_FLOOR {
            continue;
        }
        lx.push(ti.ln());
        ly.push(yi.ln());
    }
    if lx.len() < MIN_FIT_POINTS {
        return Err(Error::Input(format!(
            "fit window [{lo}, {hi}] holds {} usable points, need {MIN_FIT_POINTS}",
            lx.len()
        )));
    }
    let f = linear_fit(&lx, &ly)?;
    Ok(FitResult {
        exponent: f.slope,
        coefficient: f.intercept.exp(),
        window: [lo, hi],
        r_squared: f.r_squared,
        stderr_exponent: f.stderr_slope,
    })
}

pub fn fit_power_law(series: &MomentSeries, window: (f64, f64)) -> Result<FitResult> {
    fit_power_law_xy(&series.times, &series.msd, window)
}

/// Rows of the least-squares solution operator for y ≈ Σ_j c_j t^{p_j}:
/// `c_j = Σ_i w[j][i] y_i`. Linear weights let callers propagate per-sample
/// errors (e.g. across Monte Carlo trajectories).
pub fn polynomial_weights(t: &[f64], powers: &[i32]) -> Result<Vec<Vec<f64>>> {
    let n = t.len();
    let k = powers.len();
    if n < k || k == 0 {
        return Err(Error::Input(format!("{n} points cannot determine {k} coefficients")));
    }
    let tmax = t.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(n, k, |i, j| (t[i] / tmax).powi(powers[j]));
    let pinv = a
        .svd(true, true)
        .pseudo_inverse(1e-13)
        .map_err(|e| Error::Input(format!("polynomial fit is singular: {e}")))?;
    Ok((0..k)
        .map(|j| {
            let scale = tmax.powi(powers[j]);
            (0..n).map(|i| pinv[(j, i)] / scale).collect()
        })
        .collect())
}

pub fn polynomial_fit(t: &[f64], y: &[f64], powers: &[i32]) -> Result<Vec<f64>> {
    if t.len() != y.len() {
        return Err(Error::Input("fit columns have different lengths".into()));
    }
    let w = polynomial_weights(t, powers)?;
    let yv = DVector::from_column_slice(y);
    Ok(w.iter().map(|row| DVector::from_column_slice(row).dot(&yv)).collect())
}

// ------------------------------------------------------- finite differences

/// Second derivative by central differences at h, h/2, h/4 combined with
/// two Richardson levels (error O(h⁶)).
pub fn richardson_second_derivative<T, F>(f: F, x: f64, h: f64) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> Result<T>,
{
    let f0 = f(x)?;
    let d = |h: f64| -> Result<T> { Ok((f(x + h)? - f0 * 2.0 + f(x - h)?) * (1.0 / (h * h))) };
    richardson(d(h)?, d(0.5 * h)?, d(0.25 * h)?)
}

/// First derivative by central differences with two Richardson levels.
pub fn richardson_first_derivative<T, F>(f: F, x: f64, h: f64) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> Result<T>,
{
    let d = |h: f64| -> Result<T> { Ok((f(x + h)? - f(x - h)?) * (0.5 / h)) };
    richardson(d(h)?, d(0.5 * h)?, d(0.25 * h)?)
}

fn richardson<T: QuadValue>(d1: T, d2: T, d4: T) -> Result<T> {
    let a = (d2 * 4.0 - d1) * (1.0 / 3.0);
    let b = (d4 * 4.0 - d2) * (1.0 / 3.0);
    Ok((b * 16.0 - a) * (1.0 / 15.0))
}

// ------------------------------------------------------ Laplace transforms

/// Input to [`laplace_transform_numeric`].
pub enum LaplaceInput<'a> {
    /// Samples from t = 0, integrated as a piecewise-linear interpolant;
    /// the function is taken as zero past the last sample.
    Samples { times: &'a [f64], values: &'a [f64] },
    /// A real function of t ≥ 0.
    Real(&'a dyn Fn(f64) -> f64),
    /// A function analytic in the right half-plane, given on complex t. The
    /// integral follows the ray on which s·t is real, which also makes
    /// points with Re s ≤ 0 reachable for functions analytic there.
    Analytic(&'a dyn Fn(Complex64) -> Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceOptions {
    /// Upper bound on the neglected tail ∫_T^∞.
    pub tail_tolerance: f64,
    pub quadrature: Tolerance,
    /// Fixed truncation point; chosen adaptively when `None`.
    pub horizon: Option<f64>,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-10,
            quadrature: Tolerance::new(1e-13, 1e-12),
            horizon: None,
        }
    }
}

/// ∫₀^∞ e^{−st} f(t) dt by quadrature on [0, T] with an exponential tail bound.
pub fn laplace_transform_numeric(f: LaplaceInput<'_>, s: Complex64, opts: &LaplaceOptions) -> Result<Complex64> {
    match f {
        LaplaceInput::Samples { times, values } => laplace_of_samples(times, values, s, opts),
        LaplaceInput::Real(func) => {
            if !(s.re > 0.0) {
                return Err(Error::Domain(format!("Laplace transform needs Re s > 0, got {s}")));
            }
            let probe = |t: f64| func(t).abs();
            let horizon = choose_horizon(&probe, s.re, opts)?;
            let panels = panel_count(horizon, s.norm());
            let r = integrate(
                |t: f64| Complex64::from_polar(1.0, -s.im * t) * ((-s.re * t).exp() * func(t)),
                0.0,
                horizon,
                opts.quadrature,
                panels,
            )?;
            Ok(r.value)
        }
        LaplaceInput::Analytic(func) => {
            let rho = s.norm();
            if rho == 0.0 {
                return Err(Error::Domain("Laplace transform at s = 0".into()));
            }
            let dir = Complex64::from_polar(1.0, -s.arg());
            let probe = |r: f64| func(dir * r).norm();
            let horizon = choose_horizon(&probe, rho, opts)?;
            let panels = panel_count(horizon, rho);
            let r = integrate(|r: f64| func(dir * r) * (-rho * r).exp(), 0.0, horizon, opts.quadrature, panels)?;
            Ok(r.value * dir)
        }
    }
}

fn panel_count(horizon: f64, rate: f64) -> usize {
    ((horizon * rate / 4.0).ceil() as usize).clamp(4, 2000)
}

/// Picks T so that |f(T)| e^{−σT}/(σ − λ) is below tolerance, λ being the
/// local growth rate of log|f| at T.
fn choose_horizon(abs_f: &dyn Fn(f64) -> f64, sigma: f64, opts: &LaplaceOptions) -> Result<f64> {
    let tail = |t: f64| -> f64 {
        let a = abs_f(t);
        let b = abs_f(1.1 * t);
        if !(a.is_finite() && b.is_finite()) {
            return f64::INFINITY;
        }
        if a == 0.0 && b == 0.0 {
            return 0.0;
        }
        let lambda = if a > 0.0 && b > 0.0 { (b / a).ln() / (0.1 * t) } else { 0.0 };
        let rate = sigma - lambda.max(0.0);
        if rate <= 0.1 * sigma {
            return f64::INFINITY;
        }
        a.max(b) * (-sigma * t).exp() / rate
    };
    if let Some(t) = opts.horizon {
        let bound = tail(t);
        if bound > opts.tail_tolerance {
            return Err(Error::Truncation {
                tail: bound,
                tolerance: opts.tail_tolerance,
            });
        }
        return Ok(t);
    }
    let mut t = 36.0 / sigma;
    let limit = 4096.0 * 36.0 / sigma;
    loop {
        let bound = tail(t);
        if bound <= opts.tail_tolerance {
            return Ok(t);
        }
        if t >= limit {
            return Err(Error::Truncation {
                tail: bound,
                tolerance: opts.tail_tolerance,
            });
        }
        t *= 2.0;
    }
}

fn laplace_of_samples(times: &[f64], values: &[f64], s: Complex64, opts: &LaplaceOptions) -> Result<Complex64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Input("Laplace samples need at least two (t, f) pairs".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Input("Laplace samples must start at t = 0".into()));
    }
    if !(s.re > 0.0) {
        return Err(Error::Domain(format!("Laplace transform needs Re s > 0, got {s}")));
    }
    let last = times.len() - 1;
    let tail = values[last].abs() * (-s.re * times[last]).exp() / s.re;
    if tail > opts.tail_tolerance {
        return Err(Error::Truncation {
            tail,
            tolerance: opts.tail_tolerance,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..last {
        let (t0, t1) = (times[i], times[i + 1]);
        let h = t1 - t0;
        if !(h > 0.0) {
            return Err(Error::Input("Laplace sample times must increase".into()));
        }
        let z = -s * h;
        let (p1, p2) = linear_moments(z);
        acc += (-s * t0).exp() * h * (values[i] * (p1 - p2) + values[i + 1] * p2);
    }
    Ok(acc)
}

/// (∫₀¹ e^{zu} du, ∫₀¹ u e^{zu} du), series near z = 0.
fn linear_moments(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0); // z^n / n!
        for n in 0..24 {
            p1 += term / (n as f64 + 1.0);
            p2 += term / (n as f64 + 2.0);
            term = term * z / (n as f64 + 1.0);
        }
        (p1, p2)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    }
}

// --------------------------------------------------------- Talbot inverse

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotOptions {
    pub nodes: usize,
    pub max_doublings: u32,
    /// Accept when |f_N − f_{N/2}| ≤ max(abs, rel·|f_N|).
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TalbotOptions {
    fn default() -> Self {
        Self {
            nodes: 64,
            max_doublings: 2,
            rel_tol: 1e-9,
            abs_tol: 1e-13,
        }
    }
}

// Optimized fixed-Talbot contour z(θ) = (N/t)(σ + μθ cot(αθ) + iνθ).
const TALBOT_SIGMA: f64 = -0.6122;
const TALBOT_MU: f64 = 0.5017;
const TALBOT_ALPHA: f64 = 0.6407;
const TALBOT_NU: f64 = 0.2645;

fn talbot_once(f: &dyn Fn(Complex64) -> Complex64, t: f64, n: usize) -> Option<f64> {
    let scale = n as f64 / t;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let theta = -std::f64::consts::PI + (k as f64 + 0.5) * std::f64::consts::TAU / n as f64;
        let at = TALBOT_ALPHA * theta;
        let cot = at.cos() / at.sin();
        let z = scale * Complex64::new(TALBOT_SIGMA + TALBOT_MU * theta * cot, TALBOT_NU * theta);
        let dz = scale * Complex64::new(TALBOT_MU * (cot - at / (at.sin() * at.sin())), TALBOT_NU);
        let term = (z * t).exp() * f(z) * dz;
        if !(term.re.is_finite() && term.im.is_finite()) {
            return None;
        }
        acc += term;
    }
    // (1/2πi) Σ e^{zt} F(z) z′(θ) Δθ with Δθ = 2π/N.
    Some((acc / Complex64::new(0.0, n as f64)).re)
}

/// Inverse Laplace transform at each t > 0 via Talbot quadrature. The
/// error estimate compares N and N/2 nodes; N is doubled on failure.
pub fn inverse_laplace_numeric(
    f: &dyn Fn(Complex64) -> Complex64,
    times: &[f64],
    opts: &TalbotOptions,
) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("inverse Laplace transform needs t > 0, got {t}")));
            }
            let mut n = opts.nodes.max(8);
            let mut estimate = f64::INFINITY;
            for _ in 0..=opts.max_doublings {
                if let (Some(full), Some(half)) = (talbot_once(f, t, n), talbot_once(f, t, n / 2)) {
                    estimate = (full - half).abs();
                    if estimate <= opts.abs_tol.max(opts.rel_tol * full.abs()) {
                        return Ok(full);
                    }
                }
                n *= 2;
            }
            Err(Error::Accuracy { t, estimate })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                if log {
                    (lo.ln() + u * (hi / lo).ln()).exp()
                } else {
                    lo + u * (hi - lo)
                }
            })
            .collect()
    }

    #[test]
    fn cubic_exponent_exact() {
        let t = grid(1.0, 100.0, 40, true);
        let y: Vec<f64> = t.iter().map(|v| v.powi(3)).collect();
        let f = fit_power_law_xy(&t, &y, (1.0, 100.0)).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-10);
        assert!((f.coefficient - 1.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_is_nearly_linear() {
        let t = grid(1e3, 1e5, 50, true);
        let y: Vec<f64> = t.iter().map(|v| 5.0 * v + 3.0).collect();
        let f = fit_power_law_xy(&t, &y, (1e3, 1e5)).unwrap();
        assert!((0.99..=1.01).contains(&f.exponent));
    }

    #[test]
    fn noisy_cubic_within_stderr() {
        use crate::rng::{CounterRng, Purpose, SeedInfo};
        let mut rng = CounterRng::new(SeedInfo::new(42, 0, 0), Purpose::Synthetic);
        let t = grid(1.0, 100.0, 60, true);
        let y: Vec<f64> = t.iter().map(|v| v.powi(3) * (1.0 + 0.01 * rng.normal_pair().0)).collect();
        let f = fit_power_law_xy(&t, &y, (1.0, 100.0)).unwrap();
        assert!((f.exponent - 3.0).abs() <= 2.0 * f.stderr_exponent, "{f:?}");
        assert!(f.stderr_exponent > 0.0);
    }

    #[test]
    fn fit_errors() {
        let t = grid(1.0, 10.0, 20, false);
        let mut y: Vec<f64> = t.clone();
        y[3] = -1.0;
        assert!(matches!(fit_power_law_xy(&t, &y, (1.0, 10.0)), Err(Error::Domain(_))));
        assert!(matches!(fit_power_law_xy(&t, &t, (1.0, 2.0)), Err(Error::Input(_))));
        // Values under the floor are skipped, not fatal.
        let mut z = t.clone();
        z[0] = 0.0;
        assert!(fit_power_law_xy(&t, &z, (1.0, 10.0)).is_ok());
    }

    proptest! {
        #[test]
        fn scale_equivariance(a in 1e-6f64..1e6, p in 0.5f64..3.5) {
            let t = grid(1.0, 50.0, 30, true);
            let y: Vec<f64> = t.iter().map(|v| v.powf(p) * (1.0 + 0.1 * (v * 3.0).sin())).collect();
            let ya: Vec<f64> = y.iter().map(|v| a * v).collect();
            let f = fit_power_law_xy(&t, &y, (1.0, 50.0)).unwrap();
            let g = fit_power_law_xy(&t, &ya, (1.0, 50.0)).unwrap();
            prop_assert!((f.exponent - g.exponent).abs() < 1e-12);
            prop_assert!((g.coefficient / f.coefficient / a - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_recovers_coefficients() {
        let t = grid(0.0, 2.0, 30, false);
        let y: Vec<f64> = t.iter().map(|v| 1.0 + 0.25 * v * v + (2.0 / 3.0) * v.powi(3)).collect();
        let c = polynomial_fit(&t, &y, &[0, 2, 3]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[1] - 0.25).abs() < 1e-11);
        assert!((c[2] - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn richardson_stencils() {
        let d2: f64 = richardson_second_derivative(|x: f64| Ok(x.sin()), 0.7, 0.1).unwrap();
        assert!((d2 + 0.7f64.sin()).abs() < 1e-10);
        let d1: f64 = richardson_first_derivative(|x: f64| Ok((2.0 * x).exp()), 0.3, 0.05).unwrap();
        assert!((d1 - 2.0 * (0.6f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn laplace_of_constant_and_ramp() {
        let o = LaplaceOptions::default();
        let one = |_: f64| 1.0;
        let v = laplace_transform_numeric(LaplaceInput::Real(&one), Complex64::new(2.0, 0.0), &o).unwrap();
        assert!((v - 0.5).norm() < 1e-10);
        let ramp = |t: f64| t;
        let v = laplace_transform_numeric(LaplaceInput::Real(&ramp), Complex64::new(1.0, 0.0), &o).unwrap();
        assert!((v - 1.0).norm() < 1e-10);
    }

    #[test]
    fn laplace_of_lattice_law() {
        // 1/(s²(s+Γ)) = 1/(Γs²) − 1/(Γ²s) + 1/(Γ²(s+Γ)); at Γ = 1, s = 1/2 this is 8/3.
        let law = |t: f64| (-t).exp() + t - 1.0;
        let v = laplace_transform_numeric(LaplaceInput::Real(&law), Complex64::new(0.5, 0.0), &LaplaceOptions::default())
            .unwrap();
        assert!((v.re - 8.0 / 3.0).abs() < 1e-8, "{v}");
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn laplace_of_samples_is_exact_for_piecewise_linear() {
        let times: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let s = Complex64::new(1.0, 0.5);
        let v = laplace_transform_numeric(
            LaplaceInput::Samples {
                times: &times,
                values: &values,
            },
            s,
            &LaplaceOptions::default(),
        )
        .unwrap();
        let exact = 1.0 / (s + 1.0);
        assert!((v - exact).norm() < 1e-5);
        let flat = vec![1.0; times.len()];
        let err = laplace_transform_numeric(
            LaplaceInput::Samples {
                times: &times,
                values: &flat,
            },
            Complex64::new(0.1, 0.0),
            &LaplaceOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn laplace_rejects_growth() {
        let grow = |t: f64| (2.0 * t).exp();
        let r = laplace_transform_numeric(LaplaceInput::Real(&grow), Complex64::new(1.0, 0.0), &LaplaceOptions::default());
        assert!(matches!(r, Err(Error::Truncation { .. })));
    }

    #[test]
    fn talbot_rational_transforms() {
        let o = TalbotOptions::default();
        let times = grid(0.1, 50.0, 40, true);
        let f = inverse_laplace_numeric(&|s| 1.0 / (s * s), &times, &o).unwrap();
        for (t, v) in times.iter().zip(&f) {
            assert!((v - t).abs() <= 1e-10 * t.max(1.0), "t={t} got {v}");
        }
        let f = inverse_laplace_numeric(&|s| 1.0 / (s * s * (s + 1.0)), &times, &o).unwrap();
        for (t, v) in times.iter().zip(&f) {
            let exact = (-t).exp_m1() + t;
            assert!(((v - exact) / exact).abs() <= 1e-8, "t={t}");
        }
        let f = inverse_laplace_numeric(&|s| 1.0 / (s * s * s), &times, &o).unwrap();
        for (t, v) in times.iter().zip(&f) {
            assert!(((v - t * t / 2.0) / (t * t / 2.0)).abs() <= 1e-8);
        }
    }

    #[test]
    fn talbot_rejects_nonpositive_time() {
        assert!(inverse_laplace_numeric(&|s| 1.0 / s, &[0.0], &TalbotOptions::default()).is_err());
    }

    #[test]
    fn round_trip_through_both_transforms() {
        type Pair<'a> = (&'a dyn Fn(Complex64) -> Complex64, fn(f64) -> f64);
        let funcs: [Pair; 2] = [
            (&|t| 1.0 / (1.0 + t), |t| 1.0 / (1.0 + t)),
            (&|t| 1.0 + t * (-t / 2.0).exp(), |t| 1.0 + t * (-t / 2.0).exp()),
        ];
        let o = LaplaceOptions::default();
        let talbot = TalbotOptions {
            rel_tol: 1e-7,
            ..TalbotOptions::default()
        };
        let times = grid(0.5, 20.0, 12, true);
        for (f, exact) in funcs {
            let big_f = |s: Complex64| laplace_transform_numeric(LaplaceInput::Analytic(f), s, &o).unwrap();
            let back = inverse_laplace_numeric(&big_f, &times, &talbot).unwrap();
            for (t, v) in times.iter().zip(&back) {
                assert!(((v - exact(*t)) / exact(*t)).abs() < 1e-6, "t={t}: {v} vs {}", exact(*t));
            }
        }
    }
}
