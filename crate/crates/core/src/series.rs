//! Time series of the mean-square displacement and CSV round-tripping.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    FiniteDifferenceOfKernel,
    MonteCarlo,
    DeterministicEvolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
    pub energy: Option<Vec<f64>>,
    /// Standard error of `msd` (Monte Carlo only).
    pub stderr: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl MomentSeries {
    pub fn new(times: Vec<f64>, msd: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let s = Self {
            times,
            msd,
            energy: None,
            stderr: None,
            provenance,
        };
        s.check()?;
        Ok(s)
    }

    pub fn with_energy(mut self, energy: Vec<f64>) -> Result<Self> {
        self.energy = Some(energy);
        self.check()?;
        Ok(self)
    }

    pub fn with_stderr(mut self, stderr: Vec<f64>) -> Result<Self> {
        self.stderr = Some(stderr);
        self.check()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.times.len();
        if self.msd.len() != n
            || self.energy.as_ref().is_some_and(|e| e.len() != n)
            || self.stderr.as_ref().is_some_and(|e| e.len() != n)
        {
            return Err(Error::Input("series columns have different lengths".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("series times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// CSV with header `t,msd[,stderr][,energy]` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,msd");
        if self.stderr.is_some() {
            out.push_str(",stderr");
        }
        if self.energy.is_some() {
            out.push_str(",energy");
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{}", fmt_f64(self.times[i]));
            let _ = write!(out, ",{}", fmt_f64(self.msd[i]));
            if let Some(se) = &self.stderr {
                let _ = write!(out, ",{}", fmt_f64(se[i]));
            }
            if let Some(e) = &self.energy {
                let _ = write!(out, ",{}", fmt_f64(e[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, provenance: Provenance) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Input("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let find = |name: &str| cols.iter().position(|c| *c == name);
        let (ti, mi) = match (find("t"), find("msd")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Input("CSV header must contain t and msd".into())),
        };
        let (si, ei) = (find("stderr"), find("energy"));
        let mut times = Vec::new();
        let mut msd = Vec::new();
        let mut stderr = Vec::new();
        let mut energy = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |i: usize| -> Result<f64> {
                fields
                    .get(i)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Input(format!("CSV line {}: bad number in column {}", lineno + 2, i + 1)))
            };
            times.push(get(ti)?);
            msd.push(get(mi)?);
            if let Some(i) = si {
                stderr.push(get(i)?);
            }
            if let Some(i) = ei {
                energy.push(get(i)?);
            }
        }
        let mut s = Self::new(times, msd, provenance)?;
        if si.is_some() {
            s = s.with_stderr(stderr)?;
        }
        if ei.is_some() {
            s = s.with_energy(energy)?;
        }
        Ok(s)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path, provenance: Provenance) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?, provenance)
    }
}

/// Shortest-round-trip is not guaranteed to be 17 digits, so the width is fixed.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_mismatched_columns() {
        assert!(MomentSeries::new(vec![0.0, 1.0], vec![1.0], Provenance::ClosedForm).is_err());
        assert!(MomentSeries::new(vec![1.0, 0.0], vec![1.0, 2.0], Provenance::ClosedForm).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(values in prop::collection::vec(-1e300f64..1e300, 1..40)) {
            let times: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.1).collect();
            let s = MomentSeries::new(times, values.clone(), Provenance::MonteCarlo)
                .unwrap()
                .with_energy(values.iter().map(|v| v * 0.5).collect())
                .unwrap()
                .with_stderr(values.iter().map(|v| v.abs()).collect())
                .unwrap();
            let back = MomentSeries::from_csv(&s.to_csv(), Provenance::MonteCarlo).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
