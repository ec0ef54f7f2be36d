//! Colored-noise convergence: the white-noise (Stratonovich) dynamics are the
//! ν → 0 limit of smooth noise with triangular temporal correlation h_ν.

use serde::{Deserialize, Serialize};

use super::continuum::{run_continuum_colored, check_continuum};
use super::{mean_stderr, run_continuum, EnsembleResult, McOptions, Scheme, WavePacket};
use crate::continuum::{msd_closed_form, InitialKernelSpec};
use crate::error::{Error, Result};
use crate::model::{CorrelationSpec, ModelParams};
use crate::noise::{ColoredKernel, FieldGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredRow {
    /// None for the white-noise run, and for the Itô control.
    pub nu: Option<f64>,
    pub scheme: Scheme,
    pub msd_final: f64,
    /// MSD(t_max) minus the closed form.
    pub deviation: f64,
    pub stderr: f64,
    /// Mean of per-trajectory MSD(t_max) differences against the white run,
    /// which shares every white increment.
    pub paired_difference: Option<f64>,
    pub paired_stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredStudy {
    pub t_final: f64,
    pub closed_form: f64,
    /// Colored rows by decreasing ν, then the white row.
    pub rows: Vec<ColoredRow>,
    pub ito_control: Option<ColoredRow>,
}

impl ColoredStudy {
    pub fn white(&self) -> &ColoredRow {
        self.rows.last().expect("the white row is always present")
    }

    /// |deviation| does not grow as ν shrinks, beyond `k` combined stderr.
    pub fn nonincreasing(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let tol = k * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].deviation.abs() <= w[0].deviation.abs() + tol
        })
    }
}

fn final_values(r: &EnsembleResult) -> Vec<f64> {
    r.trajectories.iter().map(|t| *t.msd.last().expect("records")).collect()
}

fn row(nu: Option<f64>, scheme: Scheme, r: &EnsembleResult, closed: f64, white: Option<&[f64]>) -> ColoredRow {
    let last = r.times.len() - 1;
    let paired = white.map(|w| {
        let diffs: Vec<f64> = final_values(r).iter().zip(w).map(|(a, b)| a - b).collect();
        mean_stderr(&diffs)
    });
    ColoredRow {
        nu,
        scheme,
        msd_final: r.msd_mean[last],
        deviation: r.msd_mean[last] - closed,
        stderr: r.msd_stderr[last],
        paired_difference: paired.map(|p| p.0),
        paired_stderr: paired.map(|p| p.1),
    }
}

pub fn colored_noise_convergence_study(
    nu_list: &[f64],
    grid: &FieldGrid,
    init: &WavePacket,
    g: &CorrelationSpec,
    p: &ModelParams,
    opts: &McOptions,
    with_ito_control: bool,
) -> Result<ColoredStudy> {
    check_continuum(grid, p)?;
    if nu_list.is_empty() {
        return Err(Error::Input("the study needs at least one kernel width".into()));
    }
    if let Some(nu) = nu_list.iter().find(|nu| **nu < opts.dt) {
        return Err(Error::Resolution(format!("kernel width {nu} is below dt = {}", opts.dt)));
    }
    let WavePacket::Gaussian { sigma } = init else {
        return Err(Error::Input("the study needs a Gaussian packet".into()));
    };
    let opts = McOptions {
        scheme: Scheme::Stratonovich,
        ..opts.clone()
    };
    let spec = InitialKernelSpec::gaussian(sigma.clone())?;
    let closed = msd_closed_form(&[opts.t_max], &spec, g, p)?.series.msd[0];

    let white = run_continuum(grid, init, g, p, &opts, &[])?;
    let white_final = final_values(&white);
    let mut nus = nu_list.to_vec();
    nus.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(nus.len() + 1);
    for nu in nus {
        let kernel = ColoredKernel::new(nu, opts.dt)?;
        let r = run_continuum_colored(grid, init, g, p, kernel, &opts)?;
        rows.push(row(Some(nu), Scheme::Stratonovich, &r, closed, Some(&white_final)));
    }
    rows.push(row(None, Scheme::Stratonovich, &white, closed, None));
    let ito_control = if with_ito_control {
        let ito_opts = opts.clone().with_scheme(Scheme::ItoControl).with_boundary_threshold(f64::INFINITY);
        let r = run_continuum(grid, init, g, p, &ito_opts, &[])?;
        Some(row(None, Scheme::ItoControl, &r, closed, Some(&white_final)))
    } else {
        None
    };
    Ok(ColoredStudy {
        t_final: opts.t_max,
        closed_form: closed,
        rows,
        ito_control,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colored_runs_approach_white() {
        let grid = FieldGrid::continuum(1, 256, 32.0).unwrap();
        let g = CorrelationSpec::isotropic_gaussian(1);
        let p = ModelParams::continuum(1);
        let init = WavePacket::Gaussian { sigma: vec![1.0] };
        let opts = McOptions::new(1.0, 0.02, 200, 4).with_record_every(10);
        let s = colored_noise_convergence_study(&[0.4, 0.1], &grid, &init, &g, &p, &opts, true).unwrap();
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.rows[0].nu, Some(0.4));
        let paired = s.rows[0].paired_difference.unwrap().abs();
        assert!(paired > s.rows[1].paired_difference.unwrap().abs());
        let ito = s.ito_control.unwrap();
        assert!(ito.deviation.abs() > 3.0 * ito.stderr);
    }

    #[test]
    fn rejects_widths_below_dt() {
        let grid = FieldGrid::continuum(1, 256, 32.0).unwrap();
        let g = CorrelationSpec::isotropic_gaussian(1);
        let p = ModelParams::continuum(1);
        let init = WavePacket::Gaussian { sigma: vec![1.0] };
        let opts = McOptions::new(1.0, 0.02, 4, 4);
        let e = colored_noise_convergence_study(&[0.01], &grid, &init, &g, &p, &opts, false);
        assert!(matches!(e, Err(Error::Resolution(_))));
    }
}
