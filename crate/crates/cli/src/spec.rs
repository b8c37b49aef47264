//! Sweep descriptions: what to scan, over which grid, and where the
//! output goes. A `SweepSpec` round-trips through TOML so a run can be
//! reproduced from a config file alone.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use cbh_core::model::SystemParams;
use cbh_core::solver::SolverConfig;
use cbh_core::thermo::ReferenceFrequencies;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("grid must satisfy start <= stop and step > 0, got {start}:{stop}:{step}")]
    BadGrid { start: f64, stop: f64, step: f64 },
    #[error("grid expects start:stop:step, got {0:?}")]
    UnparsableGrid(String),
    #[error("occupation grids must start above 0")]
    NonPositiveOccupation,
    #[error("fixed-field sweeps need at least one fixed_n value")]
    MissingFixedN,
    #[error("kappa scans must stay within [0, 2] in units of the atomic decay rate")]
    KappaOutOfRange,
}

/// What the grid variable means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Both reservoir occupations move together, m_th = n_th = grid value.
    CommonOccupation,
    /// Grid value is m_th; the field occupation is pinned to each entry
    /// of `fixed_n` in turn.
    FixedFieldOccupation,
    /// Grid value is the field decay rate κ; each row reports the
    /// occupation with the most negative field response at that κ.
    KappaScan,
}

/// Inclusive arithmetic grid, parseable from "start:stop:step".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, SpecError> {
        let grid = GridSpec { start, stop, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step > 0.0
            && self.start <= self.stop;
        if ok {
            Ok(())
        } else {
            Err(SpecError::BadGrid {
                start: self.start,
                stop: self.stop,
                step: self.step,
            })
        }
    }

    /// Grid points start, start+step, ... up to stop (inclusive within
    /// half a step of rounding slack).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 0.5).floor() as usize;
        (0..=n)
            .map(|i| self.start + i as f64 * self.step)
            .filter(|x| *x <= self.stop + 1e-9 * self.step)
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(SpecError::UnparsableGrid(s.to_string()));
        };
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| SpecError::UnparsableGrid(s.to_string()))
        };
        GridSpec::new(parse(start)?, parse(stop)?, parse(step)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}


/// A complete sweep description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub params: SystemParams,
    pub grid: GridSpec,
    /// Field occupations to pin, one sub-curve each (fixed-field mode).
    #[serde(default)]
    pub fixed_n: Vec<f64>,
    #[serde(default)]
    pub freqs: ReferenceFrequencies,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Centered-difference step; None picks max(1e-4, 1e-3·x) per point.
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        self.grid.validate()?;
        match self.mode {
            SweepMode::CommonOccupation => {
                if self.grid.start <= 0.0 {
                    return Err(SpecError::NonPositiveOccupation);
                }
            }
            SweepMode::FixedFieldOccupation => {
                if self.grid.start <= 0.0 {
                    return Err(SpecError::NonPositiveOccupation);
                }
                if self.fixed_n.is_empty() {
                    return Err(SpecError::MissingFixedN);
                }
            }
            SweepMode::KappaScan => {
                if self.grid.start < 0.0 || self.grid.stop > 2.0 * self.params.gamma {
                    return Err(SpecError::KappaOutOfRange);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_are_inclusive_and_evenly_spaced() {
        let g = GridSpec::new(0.05, 3.0, 0.05).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 60);
        assert!((v[0] - 0.05).abs() < 1e-12);
        assert!((v[59] - 3.0).abs() < 1e-12);
        let single = GridSpec::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(single.values(), vec![1.0]);
    }

    #[test]
    fn grid_parses_from_colon_triple() {
        let g: GridSpec = "0.1:2:0.1".parse().unwrap();
        assert_eq!(g, GridSpec::new(0.1, 2.0, 0.1).unwrap());
        assert!("0.1:2".parse::<GridSpec>().is_err());
        assert!("a:b:c".parse::<GridSpec>().is_err());
        assert!("1:0.5:0.1".parse::<GridSpec>().is_err());
        assert!("0.1:2:-0.1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn validation_enforces_mode_requirements() {
        let params = SystemParams::new(1, 1.0, 0.1, 0.0, 0.0).unwrap();
        let mut spec = SweepSpec {
            mode: SweepMode::FixedFieldOccupation,
            params,
            grid: GridSpec::new(0.1, 1.0, 0.1).unwrap(),
            fixed_n: vec![],
            freqs: ReferenceFrequencies::default(),
            solver: SolverConfig::default(),
            fd_step: None,
            format: OutputFormat::Csv,
            out: None,
        };
        assert_eq!(spec.validate(), Err(SpecError::MissingFixedN));
        spec.fixed_n = vec![0.0];
        assert!(spec.validate().is_ok());
        spec.mode = SweepMode::CommonOccupation;
        spec.grid.start = 0.0;
        assert_eq!(spec.validate(), Err(SpecError::NonPositiveOccupation));
        spec.mode = SweepMode::KappaScan;
        spec.grid = GridSpec::new(0.5, 3.0, 0.5).unwrap();
        assert_eq!(spec.validate(), Err(SpecError::KappaOutOfRange));
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = SweepSpec {
            mode: SweepMode::CommonOccupation,
            params: SystemParams::new(2, 0.2, 0.1, 0.0, 0.0).unwrap(),
            grid: GridSpec::new(0.05, 3.0, 0.05).unwrap(),
            fixed_n: vec![],
            freqs: ReferenceFrequencies::default(),
            solver: SolverConfig::default(),
            fd_step: Some(1e-4),
            format: OutputFormat::Json,
            out: Some(PathBuf::from("out.json")),
        };
        let text = toml::to_string(&spec).unwrap();
        let back: SweepSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
