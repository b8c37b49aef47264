//! Threshold scan over the field decay rate: the largest κ/γ at which
//! heating either reservoir can still cool the field. Cooling exists at a
//! given κ when any common occupation on the reference grid has a
//! negative field response.

use cbh_core::model::SystemParams;
use cbh_core::solver::SolverConfig;
use cbh_core::thermo::{
    response_common, ReferenceFrequencies, ResponseMode, ResponseOptions, ThermoError,
};

use crate::sweep::{witness_grid, with_kappa};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaThreshold {
    /// Largest κ (in units of γ) with a cooling region, bisected to 0.01.
    pub threshold: f64,
    /// False when no grid κ showed cooling; threshold is 0 then.
    pub found: bool,
    /// True when even the largest grid κ still cools; the threshold is
    /// only a lower bound in that case.
    pub saturated: bool,
}

/// Does any occupation on the reference grid have C_field < 0 at this κ?
/// Scans upward and stops at the first negative point, which near the
/// threshold sits at small occupation.
pub fn has_cooling_region(
    params: &SystemParams,
    freqs: &ReferenceFrequencies,
    config: &SolverConfig,
) -> Result<bool, ThermoError> {
    for m in witness_grid() {
        let (_, c_field) = response_common(
            params,
            m,
            freqs,
            cbh_core::thermo::default_fd_step(m),
            config,
        )?;
        if c_field < 0.0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Largest κ in the grid's span whose field response still dips negative
/// somewhere on the occupation grid, refined by bisection to 0.01.
pub fn kappa_threshold_scan(
    k: u8,
    g: f64,
    kappa_grid: &[f64],
    config: &SolverConfig,
) -> Result<KappaThreshold, ThermoError> {
    assert!(!kappa_grid.is_empty(), "kappa grid must be nonempty");
    let freqs = ReferenceFrequencies::default();
    let base = SystemParams::new(k, g, kappa_grid[0].max(1e-3), 0.0, 0.0)?;
    let cools = |kappa: f64| -> Result<bool, ThermoError> {
        let params = with_kappa(&base, kappa)?;
        has_cooling_region(&params, &freqs, config)
    };

    let mut last_cooling: Option<f64> = None;
    let mut first_quiet: Option<f64> = None;
    for &kappa in kappa_grid {
        if cools(kappa)? {
            last_cooling = Some(kappa);
        } else {
            // Extra damping only ever shrinks the cooling window, so the
            // first quiet grid point already bounds the threshold from
            // above; the quiet scans are the expensive ones (no early
            // exit), so stop walking here.
            first_quiet = Some(kappa);
            break;
        }
    }
    let Some(mut lo) = last_cooling else {
        return Ok(KappaThreshold {
            threshold: 0.0,
            found: false,
            saturated: false,
        });
    };
    let Some(mut hi) = first_quiet.filter(|q| *q > lo) else {
        // the top of the grid still cools; cannot bracket from above
        return Ok(KappaThreshold {
            threshold: lo,
            found: true,
            saturated: true,
        });
    };
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if cools(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KappaThreshold {
        threshold: 0.5 * (lo + hi),
        found: true,
        saturated: false,
    })
}

/// Headline number for a model: the scan repeated over a small set of
/// couplings around the figure value (half, nominal, one and a half
/// times), keeping the largest threshold. A single coupling can
/// understate how far cooling survives, since the optimum g shifts with κ.
pub fn kappa_threshold_over_couplings(
    k: u8,
    couplings: &[f64],
    kappa_grid: &[f64],
    config: &SolverConfig,
) -> Result<KappaThreshold, ThermoError> {
    let mut best = KappaThreshold {
        threshold: 0.0,
        found: false,
        saturated: false,
    };
    for &g in couplings {
        let t = kappa_threshold_scan(k, g, kappa_grid, config)?;
        if t.found && (!best.found || t.threshold > best.threshold) {
            best = t;
        }
    }
    Ok(best)
}

/// Default coupling set for the headline scan: {g/2, g, 3g/2}.
pub fn coupling_set(g: f64) -> Vec<f64> {
    vec![0.5 * g, g, 1.5 * g]
}

/// Default κ grid for threshold scans, step 0.05 over [0.1, 0.55].
pub fn default_kappa_grid() -> Vec<f64> {
    (2..=11).map(|i| 0.05 * i as f64).collect()
}

/// Minimum field response over the occupation grid at fixed parameters;
/// diagnostic companion to the existence test.
pub fn min_field_response(
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<(f64, f64), ThermoError> {
    let freqs = ReferenceFrequencies::default();
    let opts = ResponseOptions {
        fd_step: None,
        richardson_check: false,
    };
    let mut best: Option<(f64, f64)> = None;
    for m in witness_grid() {
        let sample = cbh_core::thermo::response_sample(
            params,
            ResponseMode::Common,
            m,
            &freqs,
            &opts,
            config,
        )?;
        if best.is_none_or(|(_, c)| sample.c_field < c) {
            best = Some((m, sample.c_field));
        }
    }
    Ok(best.expect("witness grid is nonempty"))
}
