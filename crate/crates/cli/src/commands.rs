//! Route implementations. Each command computes in memory, then writes its
//! artifacts and a manifest from a single writer.

use std::path::{Path, PathBuf};

use serde::Serialize;

use qtn_core::continuum::msd_closed_form;
use qtn_core::evolve::{evolve_hierarchy, EvolveOptions};
use qtn_core::lattice::{diffusion_constant, DiffusionConstant, LatticeMomentInputs, LatticeMsdLaw, LawExport};
use qtn_core::mc::{
    colored_noise_convergence_study, run_classical, run_continuum, run_lattice, ClassicalOptions, EnsembleResult,
    Estimate, McOptions,
};
use qtn_core::model::validate_hypotheses;
use qtn_core::noise::FieldGrid;
use qtn_core::series::fmt_f64;
use qtn_core::transforms::{fit_power_law, linear_fit, LinearFit};
use qtn_core::{FitResult, MomentSeries, Provenance};

use crate::config::{LoadedConfig, Route, Space};
use crate::error::CliError;
use crate::plot::{emit_plot_data, PlotSeries};
use crate::report::{CompareReport, ExponentRow, Manifest, PointwiseComparison, PrefactorReport};

/// Subcommands that run from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    AnalyticMsd,
    LatticeLaw,
    EvolveLattice,
    McContinuum,
    McLattice,
    Classical,
    ColoredStudy,
    Compare,
    /// The route named in the configuration.
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::AnalyticMsd => "analytic-msd",
            Self::LatticeLaw => "lattice-law",
            Self::EvolveLattice => "evolve-lattice",
            Self::McContinuum => "mc-continuum",
            Self::McLattice => "mc-lattice",
            Self::Classical => "classical",
            Self::ColoredStudy => "colored-study",
            Self::Compare => "compare",
            Self::Run => "run",
        }
    }
}

/// Single writer of one output directory.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
        text.push('\n');
        self.text(name, &text)
    }

    pub fn series(&mut self, name: &str, series: &MomentSeries) -> Result<(), CliError> {
        self.text(name, &series.to_csv())
    }

    pub fn plot(&mut self, stem: &str, series: &[PlotSeries]) -> Result<(), CliError> {
        emit_plot_data(series, &self.dir, stem)?;
        self.files.push(format!("{stem}.dat"));
        self.files.push(format!("{stem}.svg"));
        Ok(())
    }

    /// Writes `manifest.json` (and the effective `config.toml`) and returns
    /// the list of files written.
    pub fn finish(mut self, command: &str, cfg: Option<&LoadedConfig>, inputs: Vec<String>) -> Result<Vec<String>, CliError> {
        if let Some(c) = cfg {
            self.text("config.toml", &c.to_toml())?;
        }
        let manifest = Manifest::new(command, cfg, inputs, self.files.clone());
        self.json("manifest.json", &manifest)?;
        Ok(self.files)
    }
}

fn window_of(w: Option<[f64; 2]>, default: (f64, f64)) -> (f64, f64) {
    w.map(|[a, b]| (a, b)).unwrap_or(default)
}

/// Steps of `dt` that land exactly on `t_max`; the step is shrunk if needed.
fn fit_dt(t_max: f64, dt: f64) -> f64 {
    t_max / (t_max / dt).ceil()
}

fn record_every(cfg: &LoadedConfig, t_max: f64, dt: f64, target: usize) -> usize {
    cfg.config
        .time
        .record_every
        .unwrap_or_else(|| (((t_max / dt).round() as usize) / target).max(1))
}

fn summary_line(route: &str, fit: &FitResult) -> String {
    format!(
        "{route}: exponent {:.4} ± {:.4} on [{}, {}] (r2 {:.6})",
        fit.exponent, fit.stderr_exponent, fit.window[0], fit.window[1], fit.r_squared
    )
}

fn require_space(cfg: &LoadedConfig, space: Space, command: Command) -> Result<(), CliError> {
    if cfg.config.model.space != space {
        let want = match space {
            Space::Continuum => "continuum",
            Space::Lattice => "lattice",
        };
        return Err(cfg.error("model", "space", format!("{} needs space = \"{want}\"", command.name())));
    }
    Ok(())
}

/// Hypothesis check that precedes every run.
pub fn check_hypotheses(cfg: &LoadedConfig) -> Result<qtn_core::model::ValidationReport, CliError> {
    let report = validate_hypotheses(&cfg.correlation()?, &cfg.params()?)?;
    Ok(report)
}

fn require_hypotheses(cfg: &LoadedConfig) -> Result<(), CliError> {
    let report = check_hypotheses(cfg)?;
    if !report.passed {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(cfg.error("correlation", "", format!("hypotheses fail: {}", failed.join("; "))));
    }
    Ok(())
}

/// A computed MSD route.
#[derive(Debug, Clone)]
pub struct RouteResult {
    pub name: String,
    pub series: MomentSeries,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientReport {
    pub t3_coefficient: f64,
    pub printed_general_coefficient: f64,
    pub printed_one_dim_coefficient: Option<f64>,
    pub trace: f64,
    pub laplacian_g0: f64,
}

pub struct AnalyticRun {
    pub route: RouteResult,
    pub coefficients: CoefficientReport,
}

pub fn analytic_continuum(cfg: &LoadedConfig) -> Result<AnalyticRun, CliError> {
    let times = cfg.output_times((0.1, 100.0, 200));
    let msd = msd_closed_form(&times, &cfg.continuum_initial()?, &cfg.correlation()?, &cfg.params()?)?;
    let fit = fit_power_law(&msd.series, window_of(cfg.config.fit.window, (10.0, 100.0)))?;
    Ok(AnalyticRun {
        route: RouteResult {
            name: "analytic".into(),
            series: msd.series,
            fit,
        },
        coefficients: CoefficientReport {
            t3_coefficient: msd.t3_coefficient,
            printed_general_coefficient: msd.printed_general_coefficient,
            printed_one_dim_coefficient: msd.printed_one_dim_coefficient,
            trace: msd.trace,
            laplacian_g0: msd.laplacian_g0,
        },
    })
}

pub struct LawRun {
    pub route: RouteResult,
    pub short_fit: FitResult,
    pub law: LatticeMsdLaw,
    pub export: LawExport,
    pub diffusion: DiffusionConstant,
}

fn lattice_law_of(cfg: &LoadedConfig) -> Result<(LatticeMsdLaw, DiffusionConstant), CliError> {
    let trace = cfg.config.initial.trace;
    let inputs = LatticeMomentInputs::point_localized(&cfg.correlation()?, &cfg.params()?, trace)?;
    Ok((LatticeMsdLaw::from_inputs(&inputs), diffusion_constant(&inputs, trace)))
}

/// The closed-form lattice law converted to a physical MSD.
fn law_msd(law: &LatticeMsdLaw, times: &[f64]) -> Result<Vec<f64>, CliError> {
    times
        .iter()
        .map(|&t| Ok(qtn_core::evolve::LATTICE_MSD_FACTOR * law.eval(t)?))
        .collect()
}

fn late_window(cfg: &LoadedConfig, gmin: f64) -> (f64, f64) {
    window_of(cfg.config.fit.window, (50.0 / gmin, 500.0 / gmin))
}

fn short_window(cfg: &LoadedConfig, gmax: f64) -> (f64, f64) {
    window_of(cfg.config.fit.short_window, (0.005 / gmax, 0.05 / gmax))
}

pub fn lattice_law(cfg: &LoadedConfig) -> Result<LawRun, CliError> {
    let (gmin, gmax) = cfg.lattice_time_scale()?;
    let (law, diffusion) = lattice_law_of(cfg)?;
    let times = cfg.output_times((1e-3 / gmax, 500.0 / gmin, 400));
    let series = MomentSeries::new(times.clone(), law_msd(&law, &times)?, Provenance::ClosedForm)?;
    let fit = fit_power_law(&series, late_window(cfg, gmin))?;
    let short_fit = fit_power_law(&series, short_window(cfg, gmax))?;
    Ok(LawRun {
        export: LawExport::new(&law, &diffusion),
        route: RouteResult {
            name: "lattice-law".into(),
            series,
            fit,
        },
        short_fit,
        law,
        diffusion,
    })
}

pub struct EvolveRun {
    pub route: RouteResult,
    pub short_series: MomentSeries,
    pub short_fit: FitResult,
    pub hermiticity_error: f64,
    pub trace_drift: f64,
}

pub fn evolve_lattice(cfg: &LoadedConfig) -> Result<EvolveRun, CliError> {
    let (gmin, gmax) = cfg.lattice_time_scale()?;
    let p = cfg.params()?;
    let g = cfg.correlation()?;
    let bx = cfg.lattice_box()?;
    let init = cfg.lattice_initial();
    let trace = cfg.config.initial.trace;
    let t_max = cfg.config.time.t_max.unwrap_or(500.0 / gmin);
    let dt = fit_dt(t_max, cfg.config.time.dt.unwrap_or(0.05 * (p.mass / p.hbar).min(1.0 / gmax)));
    let opts = EvolveOptions::new(t_max, dt, record_every(cfg, t_max, dt, 2000));
    let main = evolve_hierarchy(&init, trace, &g, &p, &bx, &opts)?;
    let (lo, hi) = late_window(cfg, gmin);
    let fit = fit_power_law(&main.series, (lo.min(t_max / 10.0), hi.min(t_max)))?;

    // The short window sits far below the main step; rerun it finely.
    let (slo, shi) = short_window(cfg, gmax);
    let short_opts = EvolveOptions::new(shi, shi / 400.0, 1);
    let short = evolve_hierarchy(&init, trace, &g, &p, &bx, &short_opts)?;
    let short_fit = fit_power_law(&short.series, (slo, shi))?;
    let trace_drift = main.trace.iter().map(|m| (m - main.trace[0]).norm()).fold(0.0, f64::max);
    Ok(EvolveRun {
        route: RouteResult {
            name: "evolve".into(),
            series: main.series,
            fit,
        },
        short_series: short.series,
        short_fit,
        hermiticity_error: main.hermiticity_error,
        trace_drift,
    })
}

pub struct McRun {
    pub route: RouteResult,
    pub ensemble: EnsembleResult,
    /// Continuum only.
    pub t3: Option<(Estimate, [f64; 2])>,
    pub energy_fit: Option<LinearFit>,
}

fn mc_options(cfg: &LoadedConfig, t_max: f64, dt: f64) -> McOptions {
    let dt = fit_dt(t_max, dt);
    McOptions::new(t_max, dt, cfg.config.mc.n_traj, cfg.config.seed)
        .with_record_every(record_every(cfg, t_max, dt, 500))
        .with_boundary_threshold(cfg.config.grid.boundary_threshold)
        .with_scheme(cfg.scheme())
}

fn windowed(times: &[f64], values: &[f64], (lo, hi): (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .unzip()
}

pub fn mc_continuum(cfg: &LoadedConfig) -> Result<McRun, CliError> {
    let p = cfg.params()?;
    let g = cfg.correlation()?;
    let d = p.dim;
    let grid = FieldGrid::continuum(d, cfg.config.grid.points, cfg.config.grid.length)?;
    let t_max = cfg.config.time.t_max.unwrap_or(10.0);
    let opts = mc_options(cfg, t_max, cfg.config.time.dt.unwrap_or(0.02));
    let ensemble = run_continuum(&grid, &cfg.wave_packet(), &g, &p, &opts, &[])?;
    let series = ensemble.series()?;
    let window = window_of(cfg.config.fit.window, (t_max / 5.0, t_max));
    let fit = fit_power_law(&series, window)?;
    let t3_window = window_of(cfg.config.fit.t3_window, window);
    let t3 = ensemble.t3_coefficient(t3_window)?;
    let (et, ev) = windowed(&ensemble.times, &ensemble.energy_mean, window);
    let energy_fit = linear_fit(&et, &ev)?;
    Ok(McRun {
        route: RouteResult {
            name: "mc".into(),
            series,
            fit,
        },
        ensemble,
        t3: Some((t3, [t3_window.0, t3_window.1])),
        energy_fit: Some(energy_fit),
    })
}

pub fn mc_lattice(cfg: &LoadedConfig) -> Result<McRun, CliError> {
    let p = cfg.params()?;
    let g = cfg.correlation()?;
    let (gmin, gmax) = cfg.lattice_time_scale()?;
    let grid = FieldGrid::lattice(p.dim, cfg.config.grid.points)?;
    let t_max = cfg.config.time.t_max.unwrap_or(50.0 / gmin);
    let dt = cfg.config.time.dt.unwrap_or(0.05 * (p.mass / p.hbar).min(1.0 / gmax));
    let opts = mc_options(cfg, t_max, dt);
    let ensemble = run_lattice(&grid, &cfg.wave_packet(), &g, &p, &opts)?;
    let series = ensemble.series()?;
    let fit = fit_power_law(&series, window_of(cfg.config.fit.window, (t_max / 5.0, t_max)))?;
    Ok(McRun {
        route: RouteResult {
            name: "mc".into(),
            series,
            fit,
        },
        ensemble,
        t3: None,
        energy_fit: None,
    })
}

pub fn mc_route(cfg: &LoadedConfig) -> Result<McRun, CliError> {
    match cfg.config.model.space {
        Space::Continuum => mc_continuum(cfg),
        Space::Lattice => mc_lattice(cfg),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityReport {
    pub fit: LinearFit,
    /// −(V₀/m)²(Δg)(0).
    pub oracle_slope: f64,
    pub printed_slope: f64,
    pub ratio_to_oracle: f64,
    pub ratio_to_printed: f64,
}

pub struct ClassicalRun {
    pub route: RouteResult,
    pub velocity: VelocityReport,
    pub velocity_variance: Vec<f64>,
    pub velocity_stderr: Vec<f64>,
}

pub fn classical(cfg: &LoadedConfig) -> Result<ClassicalRun, CliError> {
    let p = cfg.params()?;
    let g = cfg.correlation()?;
    let d = p.dim;
    let t_max = cfg.config.time.t_max.unwrap_or(20.0);
    let dt = fit_dt(t_max, cfg.config.time.dt.unwrap_or(0.01));
    let c = &cfg.config.classical;
    let v_init = c.v_init.clone().unwrap_or_else(|| vec![0.0; d]);
    if v_init.len() != d {
        return Err(cfg.error("classical", "v_init", "needs one value per axis"));
    }
    let mut opts = ClassicalOptions::new(d, t_max, dt, cfg.config.mc.n_traj, cfg.config.seed)?
        .with_record_every(record_every(cfg, t_max, dt, 500));
    opts.field_grid = FieldGrid::continuum(d, c.grid_points, c.grid_length)?;
    let r = run_classical(&g, &p, &v_init, &opts)?;
    let window = window_of(cfg.config.fit.window, (t_max / 4.0, t_max));
    let fit = fit_power_law(&r.msd, window)?;
    let (vt, vv) = windowed(&r.msd.times, &r.velocity_variance, window);
    let vfit = linear_fit(&vt, &vv)?;
    Ok(ClassicalRun {
        velocity: VelocityReport {
            fit: vfit,
            oracle_slope: r.oracle_slope,
            printed_slope: r.printed_slope,
            ratio_to_oracle: vfit.slope / r.oracle_slope,
            ratio_to_printed: vfit.slope / r.printed_slope,
        },
        route: RouteResult {
            name: "classical".into(),
            series: r.msd,
            fit,
        },
        velocity_variance: r.velocity_variance,
        velocity_stderr: r.velocity_stderr,
    })
}

fn route_plot(r: &RouteResult) -> PlotSeries {
    PlotSeries::new(r.name.clone(), r.series.times.clone(), r.series.msd.clone()).with_fit(r.fit)
}

/// Linear interpolation of a series at `t` (None outside its range).
fn interpolate(s: &MomentSeries, t: f64) -> Option<f64> {
    let i = s.times.partition_point(|x| *x < t);
    if i == s.times.len() {
        return None;
    }
    if s.times[i] == t {
        return Some(s.msd[i]);
    }
    if i == 0 {
        return None;
    }
    let (t0, t1) = (s.times[i - 1], s.times[i]);
    let f = (t - t0) / (t1 - t0);
    Some(s.msd[i - 1] * (1.0 - f) + s.msd[i] * f)
}

/// Closed-form route values at arbitrary times, when the route has one.
fn closed_form_at(cfg: &LoadedConfig, route: &str, times: &[f64]) -> Result<Option<Vec<f64>>, CliError> {
    match (route, cfg.config.model.space) {
        ("analytic", Space::Continuum) => Ok(Some(
            msd_closed_form(times, &cfg.continuum_initial()?, &cfg.correlation()?, &cfg.params()?)?
                .series
                .msd,
        )),
        ("lattice-law", _) | ("analytic", Space::Lattice) => Ok(Some(law_msd(&lattice_law_of(cfg)?.0, times)?)),
        _ => Ok(None),
    }
}

/// Pointwise comparison of `route` against `reference` at the route's positive times.
pub fn pointwise(
    cfg: &LoadedConfig,
    route: &RouteResult,
    reference: &RouteResult,
) -> Result<PointwiseComparison, CliError> {
    let times: Vec<f64> = route.series.times.iter().copied().filter(|t| *t > 0.0).collect();
    let values: Vec<f64> = route
        .series
        .times
        .iter()
        .zip(&route.series.msd)
        .filter(|(t, _)| **t > 0.0)
        .map(|(_, v)| *v)
        .collect();
    let (times, values, refs) = match closed_form_at(cfg, &reference.name, &times)? {
        Some(r) => (times, values, r),
        None => {
            let mut keep = (Vec::new(), Vec::new(), Vec::new());
            for (t, v) in times.iter().zip(&values) {
                if let Some(r) = interpolate(&reference.series, *t) {
                    keep.0.push(*t);
                    keep.1.push(*v);
                    keep.2.push(r);
                }
            }
            keep
        }
    };
    Ok(PointwiseComparison::new(&route.name, &reference.name, times, &values, &refs))
}

/// Adjudicates the t³ coefficient from an analytic run and a continuum MC run.
pub fn prefactor_report(analytic: &CoefficientReport, mc: (Estimate, [f64; 2])) -> PrefactorReport {
    PrefactorReport::new(
        analytic.t3_coefficient,
        mc.0,
        mc.1,
        analytic.printed_general_coefficient,
        analytic.printed_one_dim_coefficient,
    )
}

fn default_compare_routes(space: Space) -> Vec<Route> {
    match space {
        Space::Continuum => vec![Route::Analytic, Route::Mc],
        Space::Lattice => vec![Route::LatticeLaw, Route::Evolve],
    }
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Analytic => "analytic",
        Route::LatticeLaw => "lattice-law",
        Route::Evolve => "evolve",
        Route::Mc => "mc",
        Route::Classical => "classical",
        Route::ColoredStudy => "colored-study",
        Route::Compare => "compare",
    }
}

pub fn compare(cfg: &LoadedConfig) -> Result<CompareReport, CliError> {
    let routes = cfg
        .config
        .compare
        .routes
        .clone()
        .unwrap_or_else(|| default_compare_routes(cfg.config.model.space));
    if routes.len() < 2 {
        return Err(cfg.error("compare", "routes", "a comparison needs at least two routes"));
    }
    let mut results = Vec::new();
    let mut coefficients = None;
    let mut mc_t3 = None;
    for r in &routes {
        let result = match (r, cfg.config.model.space) {
            (Route::Analytic, Space::Continuum) => {
                let a = analytic_continuum(cfg)?;
                coefficients = Some(a.coefficients);
                a.route
            }
            (Route::Analytic | Route::LatticeLaw, Space::Lattice) => lattice_law(cfg)?.route,
            (Route::Evolve, Space::Lattice) => evolve_lattice(cfg)?.route,
            (Route::Mc, _) => {
                let m = mc_route(cfg)?;
                mc_t3 = m.t3;
                m.route
            }
            (Route::Classical, Space::Continuum) => classical(cfg)?.route,
            (r, _) => {
                return Err(cfg.error(
                    "compare",
                    "routes",
                    format!("route {} cannot be compared in this space", route_name(*r)),
                ))
            }
        };
        results.push(result);
    }
    let reference = results
        .iter()
        .position(|r| r.name == "analytic" || r.name == "lattice-law")
        .unwrap_or(0);
    let mut pointwise_rows = Vec::new();
    for (i, r) in results.iter().enumerate() {
        if i != reference {
            pointwise_rows.push(pointwise(cfg, r, &results[reference])?);
        }
    }
    Ok(CompareReport {
        routes: results.iter().map(|r| r.name.clone()).collect(),
        exponents: results
            .iter()
            .map(|r| ExponentRow {
                route: r.name.clone(),
                fit: r.fit,
            })
            .collect(),
        pointwise: pointwise_rows,
        prefactor: match (coefficients, mc_t3) {
            (Some(a), Some(m)) => Some(prefactor_report(&a, m)),
            _ => None,
        },
    })
}

/// Text rendering of a comparison.
pub fn compare_text(report: &CompareReport) -> String {
    let mut out = String::from("route            exponent    stderr      window\n");
    for e in &report.exponents {
        out.push_str(&format!(
            "{:<16} {:<11.6} {:<11.2e} [{}, {}]\n",
            e.route, e.fit.exponent, e.fit.stderr_exponent, e.fit.window[0], e.fit.window[1]
        ));
    }
    for p in &report.pointwise {
        out.push_str(&format!(
            "{} / {}: max rel deviation {:.3e} over {} times\n",
            p.route,
            p.reference,
            p.max_rel_deviation,
            p.times.len()
        ));
    }
    if let Some(pf) = &report.prefactor {
        out.push_str(&pf.table());
    }
    out
}

fn ratios_csv(p: &PointwiseComparison) -> String {
    let mut out = String::from("t,ratio\n");
    for (t, r) in p.times.iter().zip(&p.ratios) {
        out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*r)));
    }
    out
}

fn resolve(cfg: &LoadedConfig, command: Command) -> Result<Command, CliError> {
    if command != Command::Run {
        return Ok(command);
    }
    Ok(match (cfg.config.route, cfg.config.model.space) {
        (Route::Analytic, Space::Continuum) => Command::AnalyticMsd,
        (Route::Analytic | Route::LatticeLaw, Space::Lattice) => Command::LatticeLaw,
        (Route::LatticeLaw, Space::Continuum) => {
            return Err(cfg.error("", "route", "lattice-law needs space = \"lattice\""))
        }
        (Route::Evolve, _) => Command::EvolveLattice,
        (Route::Mc, Space::Continuum) => Command::McContinuum,
        (Route::Mc, Space::Lattice) => Command::McLattice,
        (Route::Classical, _) => Command::Classical,
        (Route::ColoredStudy, _) => Command::ColoredStudy,
        (Route::Compare, _) => Command::Compare,
    })
}

/// Runs a configuration-driven command into `out`; returns the files
/// written and one summary line per result.
pub fn execute(command: Command, cfg: &LoadedConfig, out: &Path) -> Result<(Vec<String>, Vec<String>), CliError> {
    let command = resolve(cfg, command)?;
    let mut o = Outputs::create(out)?;
    let mut lines = Vec::new();
    if command == Command::Validate {
        let report = check_hypotheses(cfg)?;
        o.json("validation.json", &report)?;
        for c in &report.checks {
            lines.push(format!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail));
        }
        let files = o.finish(command.name(), Some(cfg), Vec::new())?;
        if !report.passed {
            return Err(cfg.error("correlation", "", "hypotheses fail (see validation.json)"));
        }
        return Ok((files, lines));
    }
    require_hypotheses(cfg)?;
    match command {
        Command::AnalyticMsd => {
            require_space(cfg, Space::Continuum, command)?;
            let a = analytic_continuum(cfg)?;
            o.series("msd.csv", &a.route.series)?;
            o.json("fit.json", &a.route.fit)?;
            o.json("coefficients.json", &a.coefficients)?;
            o.plot("msd", &[route_plot(&a.route)])?;
            lines.push(summary_line("analytic", &a.route.fit));
            lines.push(format!("t^3 coefficient {:.6}", a.coefficients.t3_coefficient));
        }
        Command::LatticeLaw => {
            require_space(cfg, Space::Lattice, command)?;
            let l = lattice_law(cfg)?;
            o.series("msd.csv", &l.route.series)?;
            o.json("fit.json", &l.route.fit)?;
            o.json("fit_short.json", &l.short_fit)?;
            o.json("law.json", &l.export)?;
            o.plot("msd", &[route_plot(&l.route)])?;
            lines.push(summary_line("lattice-law late", &l.route.fit));
            lines.push(summary_line("lattice-law short", &l.short_fit));
            if let DiffusionConstant::Ballistic { ballistic_channels } = &l.diffusion {
                lines.push(format!("ballistic channels {ballistic_channels:?}"));
            }
        }
        Command::EvolveLattice => {
            require_space(cfg, Space::Lattice, command)?;
            let e = evolve_lattice(cfg)?;
            o.series("msd.csv", &e.route.series)?;
            o.series("msd_short.csv", &e.short_series)?;
            o.json("fit.json", &e.route.fit)?;
            o.json("fit_short.json", &e.short_fit)?;
            o.json(
                "diagnostics.json",
                &serde_json::json!({
                    "hermiticity_error": e.hermiticity_error,
                    "trace_drift": e.trace_drift,
                }),
            )?;
            o.plot("msd", &[route_plot(&e.route)])?;
            lines.push(summary_line("evolve late", &e.route.fit));
            lines.push(summary_line("evolve short", &e.short_fit));
        }
        Command::McContinuum | Command::McLattice => {
            let space = if command == Command::McContinuum {
                Space::Continuum
            } else {
                Space::Lattice
            };
            require_space(cfg, space, command)?;
            let m = mc_route(cfg)?;
            o.series("ensemble.csv", &m.route.series)?;
            o.json("fit.json", &m.route.fit)?;
            let mut summary = serde_json::json!({
                "n_traj": m.ensemble.n_traj,
                "norm_drift_max": m.ensemble.norm_drift_max,
                "boundary_mass_max": m.ensemble.boundary_mass_max,
            });
            if let Some((t3, w)) = m.t3 {
                summary["t3_coefficient"] = serde_json::json!({ "estimate": t3, "window": w });
            }
            if let Some(f) = m.energy_fit {
                summary["energy_fit"] = serde_json::json!(f);
            }
            o.json("summary.json", &summary)?;
            o.plot("msd", &[route_plot(&m.route)])?;
            lines.push(summary_line("mc", &m.route.fit));
            if let Some((t3, _)) = m.t3 {
                lines.push(format!("t^3 coefficient {:.6} ± {:.6}", t3.value, t3.stderr));
            }
        }
        Command::Classical => {
            require_space(cfg, Space::Continuum, command)?;
            let c = classical(cfg)?;
            o.series("msd.csv", &c.route.series)?;
            let mut v = String::from("t,velocity_variance,stderr\n");
            for i in 0..c.route.series.len() {
                v.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(c.route.series.times[i]),
                    fmt_f64(c.velocity_variance[i]),
                    fmt_f64(c.velocity_stderr[i])
                ));
            }
            o.text("velocity.csv", &v)?;
            o.json("fit.json", &c.route.fit)?;
            o.json("velocity_fit.json", &c.velocity)?;
            o.plot("msd", &[route_plot(&c.route)])?;
            lines.push(summary_line("classical", &c.route.fit));
            lines.push(format!(
                "velocity variance slope {:.4} (r2 {:.4}); oracle {:.4}, printed {:.4}",
                c.velocity.fit.slope, c.velocity.fit.r_squared, c.velocity.oracle_slope, c.velocity.printed_slope
            ));
        }
        Command::ColoredStudy => {
            require_space(cfg, Space::Continuum, command)?;
            let study = colored_study(cfg)?;
            o.json("colored.json", &study)?;
            let mut csv = String::from("nu,msd_final,deviation,stderr,paired_difference,paired_stderr\n");
            let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            for (label, r) in study
                .rows
                .iter()
                .map(|r| (r.nu.map(fmt_f64).unwrap_or_else(|| "white".into()), r))
                .chain(study.ito_control.iter().map(|r| ("ito".to_string(), r)))
            {
                csv.push_str(&format!(
                    "{label},{},{},{},{},{}\n",
                    fmt_f64(r.msd_final),
                    fmt_f64(r.deviation),
                    fmt_f64(r.stderr),
                    cell(r.paired_difference),
                    cell(r.paired_stderr)
                ));
            }
            o.text("colored.csv", &csv)?;
            lines.push(format!(
                "white deviation {:.4} ± {:.4}; nonincreasing within 2 stderr: {}",
                study.white().deviation,
                study.white().stderr,
                study.nonincreasing(2.0)
            ));
        }
        Command::Compare => {
            let report = compare(cfg)?;
            for p in &report.pointwise {
                o.text(&format!("ratios_{}_{}.csv", p.route, p.reference), &ratios_csv(p))?;
            }
            o.json("report.json", &report)?;
            let text = compare_text(&report);
            o.text("report.txt", &text)?;
            lines.extend(text.lines().map(str::to_string));
        }
        Command::Validate | Command::Run => unreachable!("resolved above"),
    }
    Ok((o.finish(command.name(), Some(cfg), Vec::new())?, lines))
}

pub fn colored_study(cfg: &LoadedConfig) -> Result<qtn_core::mc::ColoredStudy, CliError> {
    let p = cfg.params()?;
    let g = cfg.correlation()?;
    let grid = FieldGrid::continuum(p.dim, cfg.config.grid.points, cfg.config.grid.length)?;
    let t_max = cfg.config.time.t_max.unwrap_or(2.0);
    let dt = fit_dt(t_max, cfg.config.time.dt.unwrap_or(0.01));
    // Only the final time enters the study.
    let opts = McOptions::new(t_max, dt, cfg.config.mc.n_traj, cfg.config.seed)
        .with_record_every(cfg.config.time.record_every.unwrap_or(usize::MAX))
        .with_boundary_threshold(cfg.config.grid.boundary_threshold);
    Ok(colored_noise_convergence_study(
        &cfg.config.colored.nu,
        &grid,
        &cfg.wave_packet(),
        &g,
        &p,
        &opts,
        cfg.config.colored.ito_control,
    )?)
}

/// `fit`: power-law fit of a `t,msd` CSV.
pub fn fit_csv(input: &Path, window: (f64, f64)) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(input).map_err(|source| CliError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let series = MomentSeries::from_csv(&text, Provenance::ClosedForm)?;
    Ok(fit_power_law(&series, window)?)
}

/// `plot`: dat + svg of several `t,msd` CSVs, each optionally fitted.
pub fn plot_csvs(inputs: &[PathBuf], window: Option<(f64, f64)>, out: &Path) -> Result<Vec<String>, CliError> {
    let mut series = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let s = MomentSeries::from_csv(&text, Provenance::ClosedForm)?;
        let name = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into());
        let mut ps = PlotSeries::new(name, s.times.clone(), s.msd.clone());
        if let Some(w) = window {
            ps = ps.with_fit(fit_power_law(&s, w)?);
        }
        series.push(ps);
    }
    let mut o = Outputs::create(out)?;
    o.plot("plot", &series)?;
    o.finish("plot", None, inputs.iter().map(|p| p.display().to_string()).collect())
}
