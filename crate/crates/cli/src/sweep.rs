//! Grid evaluation. Every grid point is independent: workers share
//! nothing and the collector keeps grid order, so output is identical
//! whether points run in parallel, sequentially, or in reverse.

use thiserror::Error;

use cbh_core::model::SystemParams;
use cbh_core::thermo::{
    response_sample, ResponseMode, ResponseOptions, ResponseSample, ThermoError,
};

use crate::output::OutputRecord;
use crate::spec::{SpecError, SweepMode, SweepSpec};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("all {0} grid points failed; first error: {1}")]
    AllPointsFailed(usize, String),
}

/// One unit of work: a response mode and the occupation (or κ) to probe.
#[derive(Debug, Clone, Copy)]
struct Point {
    mode: ResponseMode,
    x: f64,
    kappa: Option<f64>,
}

fn enumerate_points(spec: &SweepSpec) -> Vec<Point> {
    let grid = spec.grid.values();
    match spec.mode {
        SweepMode::CommonOccupation => grid
            .iter()
            .map(|&x| Point {
                mode: ResponseMode::Common,
                x,
                kappa: None,
            })
            .collect(),
        SweepMode::FixedFieldOccupation => spec
            .fixed_n
            .iter()
            .flat_map(|&n_th| {
                grid.iter().map(move |&x| Point {
                    mode: ResponseMode::FixedField { n_th },
                    x,
                    kappa: None,
                })
            })
            .collect(),
        SweepMode::KappaScan => grid
            .iter()
            .map(|&kappa| Point {
                mode: ResponseMode::Common,
                x: f64::NAN,
                kappa: Some(kappa),
            })
            .collect(),
    }
}

fn sample_to_record(sample: &ResponseSample) -> OutputRecord {
    let p = &sample.point;
    OutputRecord {
        m_th: p.m_th,
        n_th: p.n_th,
        ea_over_omega0: p.ea_over_omega0,
        ef_over_nu: p.ef_over_nu,
        e_int: p.e_int,
        c_atom: sample.c_atom,
        c_field: sample.c_field,
        n_fock_used: p.n_fock_used,
        residual: p.residual,
        note: sample
            .fd_flag
            .then(|| "finite-difference check moved this point by more than 1%".to_string()),
    }
}

/// The occupation grid used when a κ-scan row hunts for its most negative
/// field response; matches the preset figure resolution.
pub fn witness_grid() -> Vec<f64> {
    (1..=60).map(|i| 0.05 * i as f64).collect()
}

fn eval_occupation_point(spec: &SweepSpec, point: &Point) -> OutputRecord {
    let opts = ResponseOptions {
        fd_step: spec.fd_step,
        richardson_check: true,
    };
    match response_sample(
        &spec.params,
        point.mode,
        point.x,
        &spec.freqs,
        &opts,
        &spec.solver,
    ) {
        Ok(sample) => sample_to_record(&sample),
        Err(err) => {
            let (m, n) = match point.mode {
                ResponseMode::Common => (point.x, point.x),
                ResponseMode::FixedField { n_th } => (point.x, n_th),
                ResponseMode::FixedAtom { m_th } => (m_th, point.x),
            };
            OutputRecord::failed(m, n, format!("occupation {:.6}: {err}", point.x))
        }
    }
}

/// κ-scan row: scan the witness occupation grid and report the point with
/// the most negative field response at this κ, which is what decides
/// whether a bosonic cooling region survives there.
fn eval_kappa_point(spec: &SweepSpec, kappa: f64) -> OutputRecord {
    let params = match with_kappa(&spec.params, kappa) {
        Ok(p) => p,
        Err(err) => return OutputRecord::failed(f64::NAN, f64::NAN, err.to_string()),
    };
    let opts = ResponseOptions {
        fd_step: spec.fd_step,
        richardson_check: false,
    };
    let mut best: Option<ResponseSample> = None;
    let mut first_err: Option<ThermoError> = None;
    for m in witness_grid() {
        match response_sample(&params, ResponseMode::Common, m, &spec.freqs, &opts, &spec.solver)
        {
            Ok(sample) => {
                if best
                    .as_ref()
                    .is_none_or(|b| sample.c_field < b.c_field)
                {
                    best = Some(sample);
                }
            }
            Err(err) => first_err = first_err.or(Some(err)),
        }
    }
    match best {
        Some(sample) => {
            let mut record = sample_to_record(&sample);
            record.note = Some(format!(
                "kappa {kappa:.4}: most negative field response over the occupation grid"
            ));
            record
        }
        None => OutputRecord::failed(
            f64::NAN,
            f64::NAN,
            format!(
                "kappa {kappa:.4}: every witness point failed; first error: {}",
                first_err.expect("empty witness grid")
            ),
        ),
    }
}

pub(crate) fn with_kappa(params: &SystemParams, kappa: f64) -> Result<SystemParams, ThermoError> {
    let mut p = params.clone();
    p.kappa = kappa;
    p.validate()?;
    Ok(p)
}

fn eval_point(spec: &SweepSpec, point: &Point) -> OutputRecord {
    match point.kappa {
        Some(kappa) => eval_kappa_point(spec, kappa),
        None => eval_occupation_point(spec, point),
    }
}

fn collect(records: Vec<OutputRecord>) -> Result<Vec<OutputRecord>, SweepError> {
    if !records.is_empty() && records.iter().all(|r| r.is_failure()) {
        let first = records[0]
            .note
            .clone()
            .unwrap_or_else(|| "unknown".to_string());
        return Err(SweepError::AllPointsFailed(records.len(), first));
    }
    Ok(records)
}

/// Evaluate the whole grid, in parallel when the `parallel` feature is
/// active. Row order always matches grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<OutputRecord>, SweepError> {
    spec.validate()?;
    let points = enumerate_points(spec);
    #[cfg(feature = "parallel")]
    let records: Vec<OutputRecord> = {
        use rayon::prelude::*;
        points.par_iter().map(|p| eval_point(spec, p)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<OutputRecord> = points.iter().map(|p| eval_point(spec, p)).collect();
    collect(records)
}

/// Sequential twin of `run_sweep`, kept unconditionally for benchmarking
/// the parallel speedup and as the reference for output equality.
pub fn run_sweep_seq(spec: &SweepSpec) -> Result<Vec<OutputRecord>, SweepError> {
    spec.validate()?;
    let points = enumerate_points(spec);
    let records: Vec<OutputRecord> = points.iter().map(|p| eval_point(spec, p)).collect();
    collect(records)
}
