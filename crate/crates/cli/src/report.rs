//! Joint reports: route comparisons, the t³ prefactor table, run manifests.

use serde::{Deserialize, Serialize};

use qtn_core::mc::Estimate;
use qtn_core::transforms::FitResult;

use crate::config::LoadedConfig;

/// Printed vs measured coefficient of t³ in the continuum MSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefactorReport {
    /// Composed from the averaged kernel.
    pub closed_form: f64,
    pub monte_carlo: Estimate,
    pub mc_window: [f64; 2],
    /// −(Δg)(0)(V₀/m)² Tr/(3·2^d), the printed general-d form.
    pub printed_general: f64,
    /// −(1/6)(V₀/m)² g″(0) Tr, the printed one-dimensional form.
    pub printed_one_dim: Option<f64>,
    /// |MC − closed| / |closed|.
    pub relative_difference: f64,
    pub agree_within_10_percent: bool,
    /// "general-d", "one-dim", "both" or "neither" (10% tolerance).
    pub matches: String,
}

pub const AGREEMENT_TOL: f64 = 0.10;

impl PrefactorReport {
    pub fn new(
        closed_form: f64,
        monte_carlo: Estimate,
        mc_window: [f64; 2],
        printed_general: f64,
        printed_one_dim: Option<f64>,
    ) -> Self {
        let relative_difference = ((monte_carlo.value - closed_form) / closed_form).abs();
        let measured = 0.5 * (closed_form + monte_carlo.value);
        let near = |v: f64| ((measured - v) / v).abs() <= AGREEMENT_TOL;
        let general = near(printed_general);
        let one_dim = printed_one_dim.is_some_and(near);
        let matches = match (general, one_dim) {
            (true, true) => "both",
            (true, false) => "general-d",
            (false, true) => "one-dim",
            (false, false) => "neither",
        }
        .to_string();
        Self {
            closed_form,
            monte_carlo,
            mc_window,
            printed_general,
            printed_one_dim,
            relative_difference,
            agree_within_10_percent: relative_difference <= AGREEMENT_TOL,
            matches,
        }
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let one_dim = self
            .printed_one_dim
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "n/a".into());
        format!(
            "t^3 coefficient\n  printed general-d form  {:.6}\n  printed 1-d form         {}\n  closed form (composed)   {:.6}\n  Monte Carlo              {:.6} ± {:.6} (window [{}, {}])\n  MC vs closed form        {:.2}%  agree within 10%: {}\n  measured pair matches    {}\n",
            self.printed_general,
            one_dim,
            self.closed_form,
            self.monte_carlo.value,
            self.monte_carlo.stderr,
            self.mc_window[0],
            self.mc_window[1],
            100.0 * self.relative_difference,
            self.agree_within_10_percent,
            self.matches
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub route: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseComparison {
    pub route: String,
    pub reference: String,
    pub times: Vec<f64>,
    /// route / reference at each time.
    pub ratios: Vec<f64>,
    pub max_rel_deviation: f64,
}

impl PointwiseComparison {
    pub fn new(route: &str, reference: &str, times: Vec<f64>, values: &[f64], reference_values: &[f64]) -> Self {
        let ratios: Vec<f64> = values.iter().zip(reference_values).map(|(a, b)| a / b).collect();
        let max_rel_deviation = ratios
            .iter()
            .filter(|r| r.is_finite())
            .map(|r| (r - 1.0).abs())
            .fold(0.0, f64::max);
        Self {
            route: route.into(),
            reference: reference.into(),
            times,
            ratios,
            max_rel_deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub routes: Vec<String>,
    pub exponents: Vec<ExponentRow>,
    pub pointwise: Vec<PointwiseComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<PrefactorReport>,
}

/// Everything needed to re-run an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub code_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// The effective configuration (after command-line overrides), as TOML.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    /// Input files of the post-processing commands.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: Option<&LoadedConfig>, inputs: Vec<String>, outputs: Vec<String>) -> Self {
        Self {
            command: command.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.map(|c| c.config.seed),
            config: cfg.map(LoadedConfig::to_toml),
            inputs,
            outputs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefactor_flags_neither_printed_form() {
        let r = PrefactorReport::new(
            2.0 / 3.0,
            Estimate {
                value: 0.65,
                stderr: 0.004,
            },
            [2.0, 10.0],
            1.0 / 3.0,
            Some(1.0 / 3.0),
        );
        assert!(r.agree_within_10_percent);
        assert_eq!(r.matches, "neither");
        assert!(r.table().contains("neither"));
    }

    #[test]
    fn pointwise_deviation() {
        let c = PointwiseComparison::new("a", "b", vec![1.0, 2.0], &[1.0, 2.2], &[1.0, 2.0]);
        assert!((c.max_rel_deviation - 0.1).abs() < 1e-12);
    }
}
