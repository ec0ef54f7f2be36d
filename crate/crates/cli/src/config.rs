//! Experiment configuration: one TOML file, unknown keys rejected, every
//! physical default spelled out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qtn_core::continuum::InitialKernelSpec;
use qtn_core::evolve::{LatticeBox, LatticeInitialState};
use qtn_core::mc::{Scheme, WavePacket};
use qtn_core::model::{CorrelationSpec, LatticeCorrelationData, ModelParams, SpaceKind};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Analytic,
    LatticeLaw,
    Evolve,
    Mc,
    Classical,
    ColoredStudy,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    #[default]
    Continuum,
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub space: Space,
    #[serde(default = "one_usize")]
    pub dim: usize,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub v0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            space: Space::Continuum,
            dim: 1,
            hbar: 1.0,
            mass: 1.0,
            v0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationKindName {
    /// exp(−xᵀAx); `a` is d×d row-major or a diagonal of length d (default identity).
    #[default]
    Gaussian,
    /// Two-column CSV `x,g` on a symmetric uniform grid.
    Tabulated,
    /// Lattice values g(−r..=r) (d = 1), radial table otherwise.
    LatticeTable,
    /// g(0) = 1, zero elsewhere.
    Onsite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default)]
    pub kind: CorrelationKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    Gaussian,
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub kind: InitialKind,
    /// Per-axis widths; a single value applies to every axis. Default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub trace: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: InitialKind::Gaussian,
            sigma: None,
            trace: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// First output time of closed-form routes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Number of output times of closed-form routes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    /// Step of time-stepping routes (default from the route's stability rule).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_boundary")]
    pub boundary_threshold: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            points: default_points(),
            length: default_length(),
            boundary_threshold: default_boundary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    /// Odd side of the Y-box of the deterministic lattice routes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_traj: default_n_traj(),
            scheme: Scheme::Stratonovich,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_init: Option<Vec<f64>>,
    #[serde(default = "default_classical_points")]
    pub grid_points: usize,
    #[serde(default = "default_classical_length")]
    pub grid_length: f64,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            v_init: None,
            grid_points: default_classical_points(),
            grid_length: default_classical_length(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoredSection {
    #[serde(default = "default_nu")]
    pub nu: Vec<f64>,
    #[serde(default = "yes")]
    pub ito_control: bool,
}

impl Default for ColoredSection {
    fn default() -> Self {
        Self {
            nu: default_nu(),
            ito_control: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Late (asymptotic) window of the power-law fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Short-time window (lattice routes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_window: Option<[f64; 2]>,
    /// Window of the c₀ + c₂t² + c₃t³ fit (continuum routes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t3_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routes: Option<Vec<Route>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub route: Route,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub correlation: CorrelationSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, rename = "box")]
    pub lattice_box: BoxSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub classical: ClassicalSection,
    #[serde(default)]
    pub colored: ColoredSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub compare: CompareSection,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_seed() -> u64 {
    1
}
fn default_points() -> usize {
    1024
}
fn default_length() -> f64 {
    200.0
}
fn default_boundary() -> f64 {
    1e-6
}
fn default_n_traj() -> usize {
    2000
}
fn default_classical_points() -> usize {
    128
}
fn default_classical_length() -> f64 {
    32.0
}
fn default_nu() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}

/// 1-based line of `key` inside `[section]` (top level when empty).
pub fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Parsed configuration together with its source text and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub path: Option<PathBuf>,
}

impl LoadedConfig {
    pub fn parse(source: &str, path: Option<&Path>) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| CliError::Config {
            path: path.map(Path::to_path_buf),
            line: e.span().map(|s| line_of_offset(source, s.start)),
            message: e.message().to_string(),
        })?;
        let loaded = Self {
            config,
            source: source.to_string(),
            path: path.map(Path::to_path_buf),
        };
        loaded.check()?;
        Ok(loaded)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, Some(path))
    }

    /// A config error anchored at `[section] key`.
    pub fn error(&self, section: &str, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.clone(),
            line: locate(&self.source, section, key).or_else(|| locate(&self.source, section, "")),
            message: match (section.is_empty(), key.is_empty()) {
                (true, true) => message.into(),
                (true, false) => format!("{key}: {}", message.into()),
                (false, true) => format!("[{section}]: {}", message.into()),
                (false, false) => format!("{section}.{key}: {}", message.into()),
            },
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let c = &self.config;
        let m = &c.model;
        if m.dim == 0 || m.dim > 3 {
            return Err(self.error("model", "dim", "must be 1, 2 or 3"));
        }
        for (key, v) in [("hbar", m.hbar), ("mass", m.mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(self.error("model", key, "must be positive"));
            }
        }
        if !(m.v0 >= 0.0 && m.v0.is_finite()) {
            return Err(self.error("model", "v0", "must be nonnegative"));
        }
        if let Some(s) = &c.initial.sigma {
            if s.is_empty() || s.iter().any(|v| !(*v > 0.0)) || (s.len() != 1 && s.len() != m.dim) {
                return Err(self.error("initial", "sigma", "needs one positive value or one per axis"));
            }
        }
        if !(c.initial.trace > 0.0) {
            return Err(self.error("initial", "trace", "must be positive"));
        }
        let t = &c.time;
        if let (Some(a), Some(b)) = (t.t_min, t.t_max) {
            if !(a > 0.0 && b > a) {
                return Err(self.error("time", "t_min", "need 0 < t_min < t_max"));
            }
        }
        if t.t_max.is_some_and(|v| !(v > 0.0)) {
            return Err(self.error("time", "t_max", "must be positive"));
        }
        if t.dt.is_some_and(|v| !(v > 0.0)) {
            return Err(self.error("time", "dt", "must be positive"));
        }
        if t.points.is_some_and(|v| v < 2) {
            return Err(self.error("time", "points", "need at least 2 output times"));
        }
        if c.mc.n_traj < 2 {
            return Err(self.error("mc", "n_traj", "need at least 2 trajectories"));
        }
        if !c.grid.points.is_power_of_two() {
            return Err(self.error("grid", "points", "must be a power of two"));
        }
        if !(c.grid.length > 0.0) {
            return Err(self.error("grid", "length", "must be positive"));
        }
        if let Some(side) = c.lattice_box.side {
            if side < 5 || side.is_multiple_of(2) {
                return Err(self.error("box", "side", "must be odd and at least 5"));
            }
        }
        for (key, w) in [("window", c.fit.window), ("short_window", c.fit.short_window), ("t3_window", c.fit.t3_window)] {
            if let Some([a, b]) = w {
                if !(a >= 0.0 && b > a) {
                    return Err(self.error("fit", key, "needs 0 ≤ lo < hi"));
                }
            }
        }
        if c.colored.nu.iter().any(|v| !(*v > 0.0)) {
            return Err(self.error("colored", "nu", "widths must be positive"));
        }
        match (c.model.space, c.correlation.kind) {
            (Space::Continuum, CorrelationKindName::LatticeTable | CorrelationKindName::Onsite) => {
                return Err(self.error("correlation", "kind", "lattice correlations need space = \"lattice\""));
            }
            (_, CorrelationKindName::Tabulated) if c.correlation.file.is_none() => {
                return Err(self.error("correlation", "file", "tabulated correlations need a file"));
            }
            (_, CorrelationKindName::LatticeTable) if c.correlation.values.is_none() => {
                return Err(self.error("correlation", "values", "lattice tables need values"));
            }
            _ => {}
        }
        if c.model.space == Space::Continuum && c.initial.kind == InitialKind::Point {
            return Err(self.error("initial", "kind", "point states exist only on the lattice"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.config.model;
        let space = match m.space {
            Space::Continuum => SpaceKind::Continuum,
            Space::Lattice => SpaceKind::Lattice,
        };
        ModelParams::new(m.hbar, m.mass, m.v0, m.dim, space).map_err(|e| self.error("model", "", e.to_string()))
    }

    pub fn correlation(&self) -> Result<CorrelationSpec, CliError> {
        let c = &self.config.correlation;
        let d = self.config.model.dim;
        let built = match c.kind {
            CorrelationKindName::Gaussian => match &c.a {
                None => Ok(CorrelationSpec::isotropic_gaussian(d)),
                Some(a) if a.len() == d => CorrelationSpec::diagonal_gaussian(a),
                Some(a) => CorrelationSpec::gaussian(d, a.clone()),
            },
            CorrelationKindName::Tabulated => {
                let file = c.file.as_ref().expect("checked at load");
                let path = match (&self.path, file.is_relative()) {
                    (Some(cfg), true) => cfg.parent().unwrap_or(Path::new(".")).join(file),
                    _ => file.clone(),
                };
                CorrelationSpec::from_csv(&path, d)
            }
            CorrelationKindName::LatticeTable => {
                CorrelationSpec::lattice_table(d, c.values.as_ref().expect("checked at load"))
            }
            CorrelationKindName::Onsite => Ok(CorrelationSpec::lattice_onsite(d)),
        };
        built.map_err(|e| self.error("correlation", "", e.to_string()))
    }

    pub fn sigma(&self) -> Vec<f64> {
        let d = self.config.model.dim;
        match &self.config.initial.sigma {
            None => vec![1.0; d],
            Some(s) if s.len() == 1 => vec![s[0]; d],
            Some(s) => s.clone(),
        }
    }

    pub fn continuum_initial(&self) -> Result<InitialKernelSpec, CliError> {
        InitialKernelSpec::gaussian(self.sigma())
            .map(|s| s.with_trace(self.config.initial.trace))
            .map_err(|e| self.error("initial", "", e.to_string()))
    }

    pub fn wave_packet(&self) -> WavePacket {
        match self.config.initial.kind {
            InitialKind::Gaussian => WavePacket::Gaussian { sigma: self.sigma() },
            InitialKind::Point => WavePacket::PointLocalized,
        }
    }

    pub fn lattice_initial(&self) -> LatticeInitialState {
        match self.config.initial.kind {
            InitialKind::Gaussian => LatticeInitialState::Gaussian { sigma: self.sigma() },
            InitialKind::Point => LatticeInitialState::PointLocalized,
        }
    }

    /// Nearest-neighbour decay rates Γ_m of the lattice model.
    pub fn lattice_gammas(&self) -> Result<Vec<f64>, CliError> {
        let data = LatticeCorrelationData::new(&self.correlation()?, &self.params()?)?;
        Ok(data.gamma)
    }

    /// Late-time scale 1/min Γ (1 for ballistic models).
    pub fn lattice_time_scale(&self) -> Result<(f64, f64), CliError> {
        let gammas = self.lattice_gammas()?;
        let lo = gammas.iter().cloned().filter(|g| *g > 1e-14).fold(f64::INFINITY, f64::min);
        let hi = gammas.iter().cloned().fold(0.0, f64::max);
        Ok((if lo.is_finite() { lo } else { 1.0 }, if hi > 0.0 { hi } else { 1.0 }))
    }

    /// Y-box of the deterministic lattice routes.
    pub fn lattice_box(&self) -> Result<LatticeBox, CliError> {
        let d = self.config.model.dim;
        let side = match self.config.lattice_box.side {
            Some(s) => s,
            None => {
                // The hierarchy reaches two sites beyond the initial support.
                let extent = self.lattice_initial().extent(d) as usize;
                2 * (extent + 4) + 1
            }
        };
        LatticeBox::new(d, side).map_err(|e| self.error("box", "side", e.to_string()))
    }

    /// Output times of closed-form routes.
    pub fn output_times(&self, default: (f64, f64, usize)) -> Vec<f64> {
        let t = &self.config.time;
        let lo = t.t_min.unwrap_or(default.0);
        let hi = t.t_max.unwrap_or(default.1);
        let n = t.points.unwrap_or(default.2);
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match t.spacing {
                    Spacing::Log => (lo.ln() + f * (hi.ln() - lo.ln())).exp(),
                    Spacing::Linear => lo + f * (hi - lo),
                }
            })
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.config).expect("configuration serializes")
    }

    pub fn scheme(&self) -> Scheme {
        self.config.mc.scheme
    }
}
