//! Physical parameters, spatial correlation functions, and the checks the
//! transport results rely on (evenness, a critical point at the origin with
//! negative-definite Hessian, nonnegative spectrum).

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::NdFft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Continuum,
    Lattice,
}

/// Physical constants of the model. Units default to ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hbar: f64,
    pub mass: f64,
    /// Disorder strength V₀. Zero is allowed and gives free motion.
    pub v0: f64,
    pub dim: usize,
    pub space: SpaceKind,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            v0: 1.0,
            dim: 1,
            space: SpaceKind::Continuum,
        }
    }
}

impl ModelParams {
    pub fn new(hbar: f64, mass: f64, v0: f64, dim: usize, space: SpaceKind) -> Result<Self> {
        let p = Self {
            hbar,
            mass,
            v0,
            dim,
            space,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn continuum(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn lattice(dim: usize) -> Self {
        Self {
            dim,
            space: SpaceKind::Lattice,
            ..Self::default()
        }
    }

    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Input(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Input(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.v0 >= 0.0 && self.v0.is_finite()) {
            return Err(Error::Input(format!("v0 must be nonnegative, got {}", self.v0)));
        }
        if self.dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// ħ/m, the lattice hopping velocity scale.
    pub fn c1(&self) -> f64 {
        self.hbar / self.mass
    }

    /// 2ħ/m, the speed of the characteristics Y(s) = Y₀ − (2ħ/m) s k.
    pub fn characteristic_speed(&self) -> f64 {
        2.0 * self.hbar / self.mass
    }

    /// (V₀/ħ)², the prefactor of the dephasing rate V₀²[g(0) − g(Y)]/ħ².
    pub fn dephasing_scale(&self) -> f64 {
        (self.v0 / self.hbar).powi(2)
    }
}

/// A one-dimensional uniform table of g, symmetrized and interpolated with
/// a natural cubic spline. For d > 1 it is evaluated radially, g(‖x‖).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    x_min: f64,
    spacing: f64,
    values: Vec<f64>,
    second: Vec<f64>,
    /// Largest |g(x) − g(−x)|/2 removed by symmetrization.
    pub asymmetry: f64,
    /// Tables whose end samples vanish are extended by zero.
    pub zero_extended: bool,
}

impl CorrelationTable {
    /// Builds a table from samples on a uniform grid symmetric about 0.
    pub fn new(xs: &[f64], gs: &[f64]) -> Result<Self> {
        if xs.len() != gs.len() || xs.len() < 5 {
            return Err(Error::Input(
                "correlation table needs at least 5 (x, g) rows of equal length".into(),
            ));
        }
        let n = xs.len();
        let spacing = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        if !(spacing > 0.0) {
            return Err(Error::Input("correlation table x must be increasing".into()));
        }
        for (i, &x) in xs.iter().enumerate() {
            let expect = xs[0] + spacing * i as f64;
            if (x - expect).abs() > 1e-9 * spacing.max(1.0) {
                return Err(Error::Input(format!("correlation table grid is not uniform at row {i}")));
            }
            if (x + xs[n - 1 - i]).abs() > 1e-9 * spacing.max(1.0) {
                return Err(Error::Input("correlation table grid must be symmetric about 0".into()));
            }
        }
        if gs.iter().any(|g| !g.is_finite()) {
            return Err(Error::Input("correlation table contains non-finite values".into()));
        }
        let mut values = vec![0.0; n];
        let mut asymmetry: f64 = 0.0;
        for i in 0..n {
            let j = n - 1 - i;
            values[i] = 0.5 * (gs[i] + gs[j]);
            asymmetry = asymmetry.max(0.5 * (gs[i] - gs[j]).abs());
        }
        let zero_extended = values[0].abs() < 1e-15 && values[n - 1].abs() < 1e-15;
        let second = natural_spline_second_derivatives(&values, spacing);
        Ok(Self {
            x_min: xs[0],
            spacing,
            values,
            second,
            asymmetry,
            zero_extended,
        })
    }

    pub fn half_width(&self) -> f64 {
        -self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let n = self.values.len();
        let x_max = self.x_min + self.spacing * (n - 1) as f64;
        let slack = 1e-12 * self.spacing;
        if x < self.x_min - slack || x > x_max + slack {
            if self.zero_extended {
                return Ok(0.0);
            }
            return Err(Error::Input(format!(
                "correlation table evaluated at {x}, outside [{}, {x_max}]",
                self.x_min
            )));
        }
        let u = ((x - self.x_min) / self.spacing).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        if t == 0.0 {
            return Ok(self.values[i]);
        }
        let h2 = self.spacing * self.spacing;
        let a = 1.0 - t;
        let value = a * self.values[i]
            + t * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (t * t * t - t) * self.second[i + 1]) * h2 / 6.0;
        Ok(value)
    }
}

fn natural_spline_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    // Tridiagonal system (1, 4, 1) M = 6 Δ²y / h² with M₀ = M_{n−1} = 0.
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let inner = n - 2;
    let mut diag = vec![4.0; inner];
    let mut rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
        .collect();
    for i in 1..inner {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for i in (0..inner - 1).rev() {
        m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKind {
    /// g(x) = exp(−xᵀAx) for a symmetric positive-definite A (row-major d×d).
    GaussianQuadratic { a: Vec<f64> },
    Tabulated(CorrelationTable),
}

/// Spatial correlation function g of the noise, with derivative evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    dim: usize,
    kind: CorrelationKind,
}

const FD_STEP: f64 = 1e-4;

impl CorrelationSpec {
    /// g(x) = exp(−xᵀAx).
    pub fn gaussian(dim: usize, a: Vec<f64>) -> Result<Self> {
        if dim == 0 || a.len() != dim * dim {
            return Err(Error::Input(format!("matrix A must be {dim}x{dim}")));
        }
        for i in 0..dim {
            for j in 0..dim {
                if (a[i * dim + j] - a[j * dim + i]).abs() > 1e-14 * a[i * dim + j].abs().max(1.0) {
                    return Err(Error::Input("matrix A must be symmetric".into()));
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(dim, dim, &a));
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Input("matrix A must be positive definite".into()));
        }
        Ok(Self {
            dim,
            kind: CorrelationKind::GaussianQuadratic { a },
        })
    }

    /// g(x) = exp(−‖x‖²).
    pub fn isotropic_gaussian(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Self::gaussian(dim, a).expect("identity is positive definite")
    }

    /// g(x) = exp(−Σ aᵢ xᵢ²).
    pub fn diagonal_gaussian(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut a = vec![0.0; d * d];
        for (i, &v) in diag.iter().enumerate() {
            a[i * d + i] = v;
        }
        Self::gaussian(d, a)
    }

    pub fn tabulated(dim: usize, table: CorrelationTable) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            kind: CorrelationKind::Tabulated(table),
        })
    }

    /// Loads a two-column `x,g` CSV file (an optional header row is skipped).
    pub fn from_csv(path: &Path, dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (xs, gs) = parse_two_column_csv(&text)?;
        Self::tabulated(dim, CorrelationTable::new(&xs, &gs)?)
    }

    /// Lattice correlation given on integer offsets −R..=R (g[R] is g(0)).
    pub fn lattice_table(dim: usize, values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n.is_multiple_of(2) {
            return Err(Error::Input("lattice table must have odd length".into()));
        }
        let r = (n / 2) as f64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 - r).collect();
        Self::tabulated(dim, CorrelationTable::new(&xs, values)?)
    }

    /// Uncorrelated on-site lattice noise: g(0) = 1, g(x) = 0 otherwise.
    pub fn lattice_onsite(dim: usize) -> Self {
        Self::lattice_table(dim, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).expect("valid table")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &CorrelationKind {
        &self.kind
    }

    /// Distance beyond which g is negligible (< 1e-16), used to size grids.
    pub fn correlation_length(&self) -> f64 {
        match &self.kind {
            CorrelationKind::GaussianQuadratic { a } => {
                let eig = SymmetricEigen::new(DMatrix::from_row_slice(self.dim, self.dim, a));
                let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                (37.0 / lmin).sqrt()
            }
            CorrelationKind::Tabulated(t) => t.half_width(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Input(format!(
                "point has dimension {}, correlation has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn quadratic_form(a: &[f64], x: &[f64]) -> f64 {
        let d = x.len();
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += x[i] * a[i * d + j] * x[j];
            }
        }
        q
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match &self.kind {
            CorrelationKind::GaussianQuadratic { a } => Ok((-Self::quadratic_form(a, x)).exp()),
            CorrelationKind::Tabulated(t) => t.eval(radius(x, self.dim)),
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value(&vec![0.0; self.dim]).expect("origin is always in range")
    }

    /// g(0) − g(x), computed without cancellation for the Gaussian family.
    pub fn deficit(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match &self.kind {
            CorrelationKind::GaussianQuadratic { a } => Ok(-(-Self::quadratic_form(a, x)).exp_m1()),
            CorrelationKind::Tabulated(t) => Ok(t.eval(0.0)? - t.eval(radius(x, self.dim))?),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let d = self.dim;
        match &self.kind {
            CorrelationKind::GaussianQuadratic { a } => {
                let g = self.value(x)?;
                Ok((0..d)
                    .map(|i| -2.0 * g * (0..d).map(|j| a[i * d + j] * x[j]).sum::<f64>())
                    .collect())
            }
            CorrelationKind::Tabulated(_) => finite_difference_gradient(|y| self.value(y), x, FD_STEP),
        }
    }

    /// Row-major d×d Hessian.
    pub fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let d = self.dim;
        match &self.kind {
            CorrelationKind::GaussianQuadratic { a } => {
                let g = self.value(x)?;
                let ax: Vec<f64> = (0..d).map(|i| (0..d).map(|j| a[i * d + j] * x[j]).sum()).collect();
                let mut h = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        h[i * d + j] = g * (4.0 * ax[i] * ax[j] - 2.0 * a[i * d + j]);
                    }
                }
                Ok(h)
            }
            CorrelationKind::Tabulated(_) => finite_difference_hessian(|y| self.value(y), x, FD_STEP),
        }
    }
}

fn radius(x: &[f64], dim: usize) -> f64 {
    if dim == 1 {
        x[0]
    } else {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub(crate) fn parse_two_column_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut gs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = match (cols.next(), cols.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Input(format!("line {}: expected two columns", lineno + 1))),
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(g)) => {
                xs.push(x);
                gs.push(g);
            }
            _ if xs.is_empty() && lineno == 0 => continue,
            _ => return Err(Error::Input(format!("line {}: cannot parse numbers", lineno + 1))),
        }
    }
    Ok((xs, gs))
}

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut y = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y)?;
        y[i] = x[i] - h;
        let fm = f(&y)?;
        y[i] = x[i];
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(out)
}

/// Central finite-difference Hessian with step `h` (row-major).
pub fn finite_difference_hessian<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d = x.len();
    let f0 = f(x)?;
    let mut y = x.to_vec();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        y[i] = x[i] + h;
        let fp = f(&y)?;
        y[i] = x[i] - h;
        let fm = f(&y)?;
        y[i] = x[i];
        out[i * d + i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                / (4.0 * h * h);
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
    Ok(out)
}

/// Laplacian (Δg)(0) = Σⱼ ∂²g/∂xⱼ²(0).
pub fn laplacian_g_at_zero(g: &CorrelationSpec) -> Result<f64> {
    let d = g.dim();
    let h = g.hessian(&vec![0.0; d])?;
    let lap: f64 = (0..d).map(|i| h[i * d + i]).sum();
    if !lap.is_finite() {
        return Err(Error::Input("Hessian of g at 0 is not finite".into()));
    }
    Ok(lap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    pub passed: bool,
    /// Eigenvalues of Hess g(0), ascending (continuum only).
    pub hessian_eigenvalues: Vec<f64>,
    pub gradient_norm: f64,
    /// Minimum of the sampled spectrum divided by its maximum.
    pub min_spectral_ratio: f64,
    /// Lattice directions m with g(0) = g(ê_m).
    pub ballistic_channels: Vec<usize>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const EVENNESS_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-10;
pub const HESSIAN_TOL: f64 = -1e-12;
pub const SPECTRUM_TOL: f64 = -1e-8;

/// Default spectral-check grid: 256 points per side (fewer in d ≥ 3) over
/// 16 correlation lengths on the continuum, a 64-site box on the lattice.
pub fn default_validation_grid(g: &CorrelationSpec, p: &ModelParams) -> (usize, f64) {
    let n = match p.dim {
        1 => 256,
        2 => 128,
        _ => 16,
    };
    match p.space {
        SpaceKind::Continuum => (n, 16.0 * g.correlation_length().max(1.0)),
        SpaceKind::Lattice => (n.min(64), n.min(64) as f64),
    }
}

/// Checks evenness, the critical point and curvature at the origin,
/// and the sign of the sampled spectrum on a default grid.
pub fn validate_hypotheses(g: &CorrelationSpec, p: &ModelParams) -> Result<ValidationReport> {
    let (n, side) = default_validation_grid(g, p);
    validate_on_grid(g, p, n, side)
}

/// As [`validate_hypotheses`], with the spectral check on a periodic grid of
/// `points_per_side^d` sites and side `side_length` (lattice spacing is 1).
pub fn validate_on_grid(
    g: &CorrelationSpec,
    p: &ModelParams,
    points_per_side: usize,
    side_length: f64,
) -> Result<ValidationReport> {
    p.validate()?;
    if g.dim() != p.dim {
        return Err(Error::Input(format!(
            "correlation dimension {} does not match model dimension {}",
            g.dim(),
            p.dim
        )));
    }
    let d = p.dim;
    let mut checks = Vec::new();

    // Evenness on a symmetric stencil, plus whether the raw table was even.
    let scale = g.correlation_length().min(4.0);
    let mut worst_odd: f64 = 0.0;
    for point in evenness_stencil(d, scale) {
        let neg: Vec<f64> = point.iter().map(|v| -v).collect();
        let a = g.value(&point)?;
        let b = g.value(&neg)?;
        worst_odd = worst_odd.max((a - b).abs());
    }
    let asymmetry = match g.kind() {
        CorrelationKind::Tabulated(t) => t.asymmetry,
        CorrelationKind::GaussianQuadratic { .. } => 0.0,
    };
    let even = worst_odd <= EVENNESS_TOL && asymmetry <= EVENNESS_TOL;
    checks.push(HypothesisCheck {
        name: "evenness".into(),
        passed: even,
        detail: format!("max |g(x)-g(-x)| = {worst_odd:.3e}, table asymmetry removed = {asymmetry:.3e}"),
    });

    let mut gradient_norm = 0.0;
    let mut hessian_eigenvalues = Vec::new();
    let mut ballistic_channels = Vec::new();
    match p.space {
        SpaceKind::Continuum => {
            let zero = vec![0.0; d];
            let grad = g.gradient(&zero)?;
            gradient_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            checks.push(HypothesisCheck {
                name: "vanishing_gradient".into(),
                passed: gradient_norm <= GRADIENT_TOL,
                detail: format!("|grad g(0)| = {gradient_norm:.3e}"),
            });
            let hess = g.hessian(&zero)?;
            if hess.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("Hessian of g at 0 is not finite".into()));
            }
            let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, &hess));
            let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            ev.sort_by(f64::total_cmp);
            let max_ev = ev.last().cloned().unwrap_or(0.0);
            checks.push(HypothesisCheck {
                name: "negative_definite_hessian".into(),
                passed: max_ev < HESSIAN_TOL,
                detail: format!("Hessian eigenvalues {ev:?}"),
            });
            hessian_eigenvalues = ev;
        }
        SpaceKind::Lattice => {
            let data = LatticeCorrelationData::new(g, p)?;
            let deficits_ok = (0..d).all(|m| data.g0 >= data.g_nn[m]);
            ballistic_channels = data.ballistic_channels();
            checks.push(HypothesisCheck {
                name: "nearest_neighbour_deficit".into(),
                passed: deficits_ok,
                detail: format!(
                    "g(0) = {}, g(e_m) = {:?}, ballistic channels {:?}",
                    data.g0, data.g_nn, ballistic_channels
                ),
            });
        }
    }

    let min_spectral_ratio = spectral_minimum_ratio(g, p, points_per_side, side_length)?;
    checks.push(HypothesisCheck {
        name: "nonnegative_spectrum".into(),
        passed: min_spectral_ratio >= SPECTRUM_TOL,
        detail: format!("min/max sampled spectrum = {min_spectral_ratio:.3e}"),
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        checks,
        passed,
        hessian_eigenvalues,
        gradient_norm,
        min_spectral_ratio,
        ballistic_channels,
    })
}

fn evenness_stencil(d: usize, scale: f64) -> Vec<Vec<f64>> {
    let radii = [0.013, 0.05, 0.1, 0.25, 0.5, 0.77, 1.0];
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    if d > 1 {
        dirs.push(vec![1.0 / (d as f64).sqrt(); d]);
        let mut alt: Vec<f64> = (0..d).map(|i| if i % 2 == 0 { 0.6 } else { -0.8 }).collect();
        let norm = alt.iter().map(|v| v * v).sum::<f64>().sqrt();
        alt.iter_mut().for_each(|v| *v /= norm);
        dirs.push(alt);
    }
    let mut pts = Vec::new();
    for dir in &dirs {
        for &r in &radii {
            pts.push(dir.iter().map(|c| c * r * scale).collect());
        }
    }
    pts
}

/// Min/max of the discrete Fourier transform of g sampled at minimum-image
/// offsets of a periodic grid.
pub fn spectral_minimum_ratio(
    g: &CorrelationSpec,
    p: &ModelParams,
    points_per_side: usize,
    side_length: f64,
) -> Result<f64> {
    let spectrum = sampled_spectrum(g, p.dim, p.space, points_per_side, side_length)?;
    let max = spectrum.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        return Err(Error::Input("sampled spectrum of g is not positive anywhere".into()));
    }
    Ok(min / max)
}

/// DFT of g at minimum-image grid offsets, in row-major mode order.
pub(crate) fn sampled_spectrum(
    g: &CorrelationSpec,
    dim: usize,
    space: SpaceKind,
    n: usize,
    side_length: f64,
) -> Result<Vec<f64>> {
    let spacing = match space {
        SpaceKind::Continuum => side_length / n as f64,
        SpaceKind::Lattice => 1.0,
    };
    let total = n.pow(dim as u32);
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); total];
    let mut point = vec![0.0; dim];
    for (flat, slot) in buf.iter_mut().enumerate() {
        let mut rem = flat;
        for axis in (0..dim).rev() {
            let j = rem % n;
            rem /= n;
            let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            point[axis] = signed * spacing;
        }
        // Nyquist offsets are symmetrized so the table stays exactly even.
        let mut v = g.value(&point)?;
        if n.is_multiple_of(2) {
            let mut mirrored = point.clone();
            let mut touched = false;
            for axis in 0..dim {
                if (point[axis] - (n / 2) as f64 * spacing).abs() < 1e-12 * spacing {
                    mirrored[axis] = -point[axis];
                    touched = true;
                }
            }
            if touched {
                v = 0.5 * (v + g.value(&mirrored)?);
            }
        }
        *slot = num_complex::Complex64::new(v, 0.0);
    }
    NdFft::new(dim, n).forward(&mut buf);
    Ok(buf.iter().map(|c| c.re).collect())
}

/// Nearest-neighbour lattice data: g(0), g(ê_m), Γ_m = (V₀/ħ)²[g(0) − g(ê_m)],
/// and the same at 2ê_m (needed by the second-moment recursion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeCorrelationData {
    pub g0: f64,
    pub g_nn: Vec<f64>,
    pub gamma: Vec<f64>,
    pub g_2nn: Vec<f64>,
    pub gamma_2nn: Vec<f64>,
}

impl LatticeCorrelationData {
    pub fn new(g: &CorrelationSpec, p: &ModelParams) -> Result<Self> {
        let d = p.dim;
        if g.dim() != d {
            return Err(Error::Input("correlation/model dimension mismatch".into()));
        }
        let scale = p.dephasing_scale();
        let mut g_nn = Vec::with_capacity(d);
        let mut gamma = Vec::with_capacity(d);
        let mut g_2nn = Vec::with_capacity(d);
        let mut gamma_2nn = Vec::with_capacity(d);
        for m in 0..d {
            let mut e = vec![0.0; d];
            e[m] = 1.0;
            g_nn.push(g.value(&e)?);
            gamma.push(scale * g.deficit(&e)?);
            e[m] = 2.0;
            g_2nn.push(g.value(&e)?);
            gamma_2nn.push(scale * g.deficit(&e)?);
        }
        Ok(Self {
            g0: g.value_at_zero(),
            g_nn,
            gamma,
            g_2nn,
            gamma_2nn,
        })
    }

    /// Builds data directly from rates, for algebra that does not need g.
    pub fn from_gammas(gamma: Vec<f64>) -> Self {
        Self {
            g0: 1.0,
            g_nn: gamma.iter().map(|g| 1.0 - g).collect(),
            gamma_2nn: gamma.clone(),
            g_2nn: gamma.iter().map(|g| 1.0 - g).collect(),
            gamma,
        }
    }

    pub fn ballistic_channels(&self) -> Vec<usize> {
        self.gamma
            .iter()
            .enumerate()
            .filter(|(_, &g)| g.abs() <= 1e-14)
            .map(|(m, _)| m)
            .collect()
    }
}
