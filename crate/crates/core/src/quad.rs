//! Adaptive Gauss–Kronrod (7/15) quadrature for real and complex integrands.

// Node tables are quoted to the digits of the published tables.
#![allow(clippy::excessive_precision)]

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss nodes sit at the odd Kronrod indices 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Stopping rule: accept when `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut fv = [T::zero(); 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_abs = fc.magnitude() * WGK[7];
    let mut res_asc = (fc - mean).magnitude() * WGK[7];
    for j in 0..7 {
        res_abs += WGK[j] * (fv[j].magnitude() + fv[14 - j].magnitude());
        res_asc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[14 - j] - mean).magnitude());
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;

    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value: res_k * half,
        error: err,
    }
}

/// Integrates `f` over `[a, b]`, bisecting the worst panel until the
/// tolerance holds. `initial_panels` seeds a uniform partition, which helps
/// with oscillatory integrands.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance, initial_panels: usize) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: 0.0,
            intervals: 0,
        });
    }
    let n0 = initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel<T>> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            kronrod(&f, lo, hi)
        })
        .collect();

    loop {
        let (value, error) = totals(&panels);
        if error <= tol.target(value.magnitude()) {
            return Ok(QuadResult {
                value,
                error,
                intervals: panels.len(),
            });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                achieved: error,
                requested: tol.target(value.magnitude()),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel is at the resolution of f64; nothing left to refine.
            return Err(Error::Quadrature {
                achieved: error,
                requested: tol.target(value.magnitude()),
            });
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

fn totals<T: QuadValue>(panels: &[Panel<T>]) -> (T, f64) {
    // Summed in partition order so results do not depend on refinement history.
    let mut sorted: Vec<&Panel<T>> = panels.iter().collect();
    sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = T::zero();
    let mut error = 0.0;
    for p in sorted {
        value = value + p.value;
        error += p.error;
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::default(), 1).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate(|x: f64| (-x * x).exp(), 0.0, 10.0, Tolerance::new(0.0, 1e-13), 1).unwrap();
        let exact = 0.5 * std::f64::consts::PI.sqrt();
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate(
            |x: f64| Complex64::new(0.0, 7.0 * x).exp(),
            0.0,
            3.0,
            Tolerance::new(0.0, 1e-12),
            4,
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 21.0).exp() - 1.0) / Complex64::new(0.0, 7.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-15,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (1.0 / x.max(1e-300)).sqrt(), 0.0, 1.0, tol, 1).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
