//! Laplace-domain moment algebra on Z^d.
//!
//! On the lattice, with the same kernel conventions as the continuum,
//! ∂ₜR̂(k, Y) = −c₁ Σⱼ sin kⱼ [R̂(Y + êⱼ) − R̂(Y − êⱼ)] − Γ(Y) R̂(k, Y),
//! c₁ = ħ/m, Γ(Y) = (V₀/ħ)²[g(0) − g(Y)]. Laplace transforming the k = 0
//! moments replaces ∂ₜ + Γ(Y) by h(Y, s) = s + Γ(Y).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationSpec, LatticeCorrelationData, ModelParams};

/// Initial-kernel probes along one axis m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisProbes {
    /// R̂(0, ±ê_m, 0).
    pub r_plus1: Complex64,
    pub r_minus1: Complex64,
    /// R̂(0, ±2ê_m, 0).
    pub r_plus2: Complex64,
    pub r_minus2: Complex64,
    /// ∂_{k_m} R̂(0, ±ê_m, 0).
    pub d_plus1: Complex64,
    pub d_minus1: Complex64,
    /// ∂²_{k_m} R̂(0, 0, 0) = −4 Σ_x x_m² ρ(x, x).
    pub d2_zero: Complex64,
}

impl AxisProbes {
    pub const LOCALIZED: AxisProbes = AxisProbes {
        r_plus1: Complex64::new(0.0, 0.0),
        r_minus1: Complex64::new(0.0, 0.0),
        r_plus2: Complex64::new(0.0, 0.0),
        r_minus2: Complex64::new(0.0, 0.0),
        d_plus1: Complex64::new(0.0, 0.0),
        d_minus1: Complex64::new(0.0, 0.0),
        d2_zero: Complex64::new(0.0, 0.0),
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeMomentInputs {
    pub corr: LatticeCorrelationData,
    pub c1: f64,
    /// R̂(0, 0, 0) = Σ_x ρ(x, x) = Tr ρ on the lattice.
    pub r000: f64,
    pub probes: Vec<AxisProbes>,
}

impl LatticeMomentInputs {
    pub fn new(corr: LatticeCorrelationData, c1: f64, r000: f64, probes: Vec<AxisProbes>) -> Result<Self> {
        if !(r000 > 0.0) {
            return Err(Error::Input(format!("R̂(0,0,0) must be positive, got {r000}")));
        }
        if probes.len() != corr.gamma.len() {
            return Err(Error::Input("one probe set per axis is required".into()));
        }
        if !(c1 > 0.0) {
            return Err(Error::Input("c1 = ħ/m must be positive".into()));
        }
        Ok(Self { corr, c1, r000, probes })
    }

    /// State concentrated on the origin: R̂(k, Y, 0) = trace · δ_{Y,0}.
    pub fn point_localized(g: &CorrelationSpec, p: &ModelParams, trace: f64) -> Result<Self> {
        let corr = LatticeCorrelationData::new(g, p)?;
        let probes = vec![AxisProbes::LOCALIZED; p.dim];
        Self::new(corr, p.c1(), trace, probes)
    }

    pub fn dim(&self) -> usize {
        self.probes.len()
    }
}

fn pole_check(h: Complex64, what: &str, s: Complex64) -> Result<()> {
    if h.norm() <= 1e-14 * (1.0 + s.norm()) {
        return Err(Error::Pole(format!("{s} (h({what}, s) = 0)")));
    }
    Ok(())
}

/// −Δ_k L[R̂](0, 0, s): the Laplace transform of −Δ_k R̂(k, 0, t)|_{k=0},
/// including the O(1/s) terms carried by the initial-kernel probes.
pub fn laplace_msd(s: Complex64, inputs: &LatticeMomentInputs) -> Result<Complex64> {
    if s.norm() == 0.0 {
        return Err(Error::Pole("0".into()));
    }
    let c1 = inputs.c1;
    let m0_zero = inputs.r000 / s;
    let mut total = Complex64::new(0.0, 0.0);
    for (m, pr) in inputs.probes.iter().enumerate() {
        let h1 = s + inputs.corr.gamma[m];
        let h2 = s + inputs.corr.gamma_2nn[m];
        pole_check(h1, "ê_m", s)?;
        pole_check(h2, "2ê_m", s)?;
        let m0_p2 = pr.r_plus2 / h2;
        let m0_m2 = pr.r_minus2 / h2;
        let m1_p = (pr.d_plus1 - c1 * (m0_p2 - m0_zero)) / h1;
        let m1_m = (pr.d_minus1 - c1 * (m0_zero - m0_m2)) / h1;
        let m2 = (pr.d2_zero - 2.0 * c1 * (m1_p - m1_m)) / s;
        total -= m2;
    }
    Ok(total)
}

/// Leading small-s part (2ħ/m)² R̂(0,0,0) Σ_m 1/(s² h(ê_m, s)).
pub fn laplace_msd_leading(s: Complex64, inputs: &LatticeMomentInputs) -> Result<Complex64> {
    if s.norm() == 0.0 {
        return Err(Error::Pole("0".into()));
    }
    let cd = (2.0 * inputs.c1).powi(2) * inputs.r000;
    let mut total = Complex64::new(0.0, 0.0);
    for &g in &inputs.corr.gamma {
        let h = s + g;
        pole_check(h, "ê_m", s)?;
        total += 1.0 / (s * s * h);
    }
    Ok(total * cd)
}

/// C_d Σ_m [e^{−Γ_m t}/Γ_m² + t/Γ_m − 1/Γ_m²], with C_d t²/2 for Γ_m = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeMsdLaw {
    #[serde(rename = "Cd")]
    pub cd: f64,
    pub gamma: Vec<f64>,
    pub trace: f64,
    /// Below this time the law is ballistic (t ≪ 1/max Γ).
    pub short_time: f64,
    /// Above this time the law is diffusive (t ≫ 1/min Γ).
    pub long_time: f64,
}

impl LatticeMsdLaw {
    /// C_d = (2ħ/m)² R̂(0,0,0).
    pub fn from_inputs(inputs: &LatticeMomentInputs) -> Self {
        Self::new((2.0 * inputs.c1).powi(2) * inputs.r000, inputs.corr.gamma.clone(), inputs.r000)
    }

    pub fn new(cd: f64, gamma: Vec<f64>, trace: f64) -> Self {
        let gmax = gamma.iter().cloned().fold(0.0, f64::max);
        let gmin_pos = gamma.iter().cloned().filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
        Self {
            cd,
            short_time: if gmax > 0.0 { 0.05 / gmax } else { f64::INFINITY },
            long_time: if gmin_pos.is_finite() { 10.0 / gmin_pos } else { f64::INFINITY },
            gamma,
            trace,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        msd_inverse_laplace_closed_form(t, self)
    }

    /// Long-time slope C_d Σ 1/Γ_m (infinite if some channel is ballistic).
    pub fn asymptotic_slope(&self) -> f64 {
        self.gamma.iter().map(|g| if *g > 0.0 { self.cd / g } else { f64::INFINITY }).sum()
    }
}

/// (e^{−x} − 1 + x) for x ≥ 0 without cancellation.
fn relaxation(x: f64) -> f64 {
    if x < 1e-3 {
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
    } else {
        (-x).exp_m1() + x
    }
}

pub fn msd_inverse_laplace_closed_form(t: f64, law: &LatticeMsdLaw) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("law evaluated at t = {t} < 0")));
    }
    Ok(law
        .gamma
        .iter()
        .map(|&g| {
            if g > 0.0 {
                law.cd * relaxation(g * t) / (g * g)
            } else {
                law.cd * t * t / 2.0
            }
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffusionConstant {
    Diffusive(f64),
    Ballistic { ballistic_channels: Vec<usize> },
}

/// D = (2ħ/m)² · trace · Σ_m 1/Γ_m, or a ballistic flag.
pub fn diffusion_constant(inputs: &LatticeMomentInputs, trace: f64) -> DiffusionConstant {
    let channels = inputs.corr.ballistic_channels();
    if !channels.is_empty() {
        return DiffusionConstant::Ballistic {
            ballistic_channels: channels,
        };
    }
    let sum: f64 = inputs.corr.gamma.iter().map(|g| 1.0 / g).sum();
    DiffusionConstant::Diffusive((2.0 * inputs.c1).powi(2) * trace * sum)
}

/// Serializable summary {Cd, gamma[], D or "ballistic"}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawExport {
    #[serde(rename = "Cd")]
    pub cd: f64,
    pub gamma: Vec<f64>,
    #[serde(rename = "D")]
    pub d: serde_json::Value,
}

impl LawExport {
    pub fn new(law: &LatticeMsdLaw, d: &DiffusionConstant) -> Self {
        Self {
            cd: law.cd,
            gamma: law.gamma.clone(),
            d: match d {
                DiffusionConstant::Diffusive(v) => serde_json::json!(v),
                DiffusionConstant::Ballistic { .. } => serde_json::json!("ballistic"),
            },
        }
    }
}
