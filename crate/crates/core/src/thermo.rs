//! Thermodynamic layer: temperature ↔ occupation maps, steady-state
//! energies, finite-difference response functions C = ∂E/∂T of the two
//! reservoir temperatures, closed-form carrier results for cross-checking
//! the numerics, and sign-change location on sampled response curves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{hamiltonian, ModelError, SystemParams};
use crate::qops::{atom_marginal, expect, field_marginal, DensityMatrix};
use crate::solver::{
    auto_truncate, steady_state_at_cutoff, SolverConfig, SolverError, SteadyStateResult,
};

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("finite-difference step {fd_step} must satisfy 0 < fd_step < occupation {m}")]
    InvalidFdStep { m: f64, fd_step: f64 },
    #[error("occupation 0 has no finite inverse temperature")]
    NoFiniteTemperature,
    #[error("response curve needs at least 2 samples, got {0}")]
    CurveTooShort(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Frequencies used to convert occupation derivatives into temperature
/// derivatives (reduced units, k_B = 1). `omega_ref` applies in
/// common-occupation mode, where the two reservoirs share one nominal
/// temperature axis; sign structure and crossing locations do not depend
/// on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceFrequencies {
    pub omega0: f64,
    pub nu: f64,
    pub omega_ref: f64,
}

impl Default for ReferenceFrequencies {
    fn default() -> Self {
        ReferenceFrequencies {
            omega0: 1.0,
            nu: 1.0,
            omega_ref: 1.0,
        }
    }
}

/// Steady-state energies at one parameter point. The atomic ground state
/// sits at zero energy, so the atomic energy in units of ω₀ is the
/// excited population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub m_th: f64,
    pub n_th: f64,
    /// ⟨σ₊σ₋⟩, in [0, 1].
    pub ea_over_omega0: f64,
    /// ⟨a†a⟩.
    pub ef_over_nu: f64,
    /// Re⟨H_I⟩; vanishes in steady state.
    pub e_int: f64,
    pub n_fock_used: usize,
    pub residual: f64,
}

/// Bose-Einstein occupation of a mode at frequency `omega` and
/// temperature `t` (k_B = 1); the t → 0 limit is 0.
pub fn occupation_from_temperature(omega: f64, t: f64) -> f64 {
    debug_assert!(omega > 0.0);
    if t <= 0.0 {
        return 0.0;
    }
    1.0 / ((omega / t).exp() - 1.0)
}

/// Inverse of `occupation_from_temperature`; occupation 0 corresponds to
/// T = 0 and has no finite answer.
pub fn temperature_from_occupation(omega: f64, m: f64) -> Result<f64, ThermoError> {
    debug_assert!(omega > 0.0);
    if m <= 0.0 {
        return Err(ThermoError::NoFiniteTemperature);
    }
    Ok(omega / (1.0 / m).ln_1p())
}

/// dm/dT of the Bose-Einstein map: m(m+1)·[ln((m+1)/m)]²/omega, the
/// chain-rule factor converting occupation derivatives to temperature
/// derivatives. Strictly positive for m > 0 and 0 in the m → 0 limit.
pub fn doccupation_dtemperature(omega: f64, m: f64) -> f64 {
    debug_assert!(omega > 0.0);
    if m <= 0.0 {
        return 0.0;
    }
    let log_ratio = (1.0 / m).ln_1p();
    m * (m + 1.0) * log_ratio * log_ratio / omega
}

/// Energy observables of a composite state: excited population, field
/// occupation and interaction energy. `residual` is not knowable from the
/// state alone and is left NaN; see `thermo_point` for the full record.
pub fn energies(rho: &DensityMatrix, params: &SystemParams) -> Result<ThermoPoint, ThermoError> {
    let n_fock = rho.n_fock().unwrap_or(params.n_fock);
    let am = atom_marginal(rho, n_fock);
    let fm = field_marginal(rho, n_fock);
    let h = hamiltonian(&params.clone().with_n_fock(n_fock)?)?;
    Ok(ThermoPoint {
        m_th: params.m_th,
        n_th: params.n_th,
        ea_over_omega0: am[[1, 1]].re,
        ef_over_nu: (0..n_fock).map(|n| n as f64 * fm[[n, n]].re).sum(),
        e_int: expect(&h, rho).re,
        n_fock_used: n_fock,
        residual: f64::NAN,
    })
}

/// `energies` plus the solve diagnostics of the result it came from.
pub fn thermo_point(
    result: &SteadyStateResult,
    params: &SystemParams,
) -> Result<ThermoPoint, ThermoError> {
    let mut point = energies(&result.rho, params)?;
    point.n_fock_used = result.n_fock_used;
    point.residual = result.residual;
    Ok(point)
}

/// Which occupation the response differentiates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ResponseMode {
    /// Both reservoirs move together: m_th = n_th = x.
    Common,
    /// Field occupation pinned; the atomic reservoir at x varies.
    FixedField { n_th: f64 },
    /// Atomic occupation pinned; the field reservoir at x varies.
    FixedAtom { m_th: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseObservable {
    Atom,
    Field,
}

#[derive(Debug, Clone, Copy)]
pub struct ResponseOptions {
    /// Centered-difference step; defaults to max(1e-4, 1e-3·x).
    pub fd_step: Option<f64>,
    /// Re-evaluate with a halved step and flag the sample when either
    /// response moves by more than 1%.
    pub richardson_check: bool,
}

impl Default for ResponseOptions {
    fn default() -> Self {
        ResponseOptions {
            fd_step: None,
            richardson_check: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResponseSample {
    pub occupation: f64,
    pub c_atom: f64,
    pub c_field: f64,
    pub point: ThermoPoint,
    /// Set when the halved-step check moved the response by more than 1%.
    pub fd_flag: bool,
}

#[derive(Debug, Clone)]
pub struct ResponseCurve {
    pub mode: ResponseMode,
    pub samples: Vec<ResponseSample>,
    pub params: SystemParams,
    pub freqs: ReferenceFrequencies,
    pub fd_step: Option<f64>,
}

pub fn default_fd_step(x: f64) -> f64 {
    (1e-3 * x).max(1e-4)
}

fn occupations_for(mode: ResponseMode, x: f64) -> (f64, f64) {
    match mode {
        ResponseMode::Common => (x, x),
        ResponseMode::FixedField { n_th } => (x, n_th),
        ResponseMode::FixedAtom { m_th } => (m_th, x),
    }
}

/// dm/dT at the frequency of the reservoir being varied.
fn conversion_for(mode: ResponseMode, x: f64, freqs: &ReferenceFrequencies) -> f64 {
    let omega = match mode {
        ResponseMode::Common => freqs.omega_ref,
        ResponseMode::FixedField { .. } => freqs.omega0,
        ResponseMode::FixedAtom { .. } => freqs.nu,
    };
    doccupation_dtemperature(omega, x)
}

#[cfg(feature = "parallel")]
fn join<A: Send, B: Send>(
    a: impl FnOnce() -> A + Send,
    b: impl FnOnce() -> B + Send,
) -> (A, B) {
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
fn join<A, B>(a: impl FnOnce() -> A, b: impl FnOnce() -> B) -> (A, B) {
    (a(), b())
}

/// Centered difference of (⟨σ₊σ₋⟩, ⟨a†a⟩) against the varied occupation,
/// already converted to temperature derivatives. The Fock cutoff is
/// confirmed once at the midpoint and both offset solves run in that
/// fixed basis, so the difference is free of cutoff jitter.
fn response_pair(
    params: &SystemParams,
    mode: ResponseMode,
    x: f64,
    freqs: &ReferenceFrequencies,
    h: f64,
    config: &SolverConfig,
) -> Result<(f64, f64), ThermoError> {
    if !(h > 0.0 && h < x) {
        return Err(ThermoError::InvalidFdStep { m: x, fd_step: h });
    }
    let (m0, n0) = occupations_for(mode, x);
    let center = auto_truncate(&params.with_occupations(m0, n0)?, config)?;
    response_pair_at_cutoff(params, mode, x, freqs, h, center.n_fock_used, config)
}

/// The finite-difference pair at an already-confirmed cutoff.
fn response_pair_at_cutoff(
    params: &SystemParams,
    mode: ResponseMode,
    x: f64,
    freqs: &ReferenceFrequencies,
    h: f64,
    n_fock: usize,
    config: &SolverConfig,
) -> Result<(f64, f64), ThermoError> {
    if !(h > 0.0 && h < x) {
        return Err(ThermoError::InvalidFdStep { m: x, fd_step: h });
    }
    let (mm, nm) = occupations_for(mode, x - h);
    let (mp, np) = occupations_for(mode, x + h);
    let p_minus = params.with_occupations(mm, nm)?.with_n_fock(n_fock)?;
    let p_plus = params.with_occupations(mp, np)?.with_n_fock(n_fock)?;
    let (r_minus, r_plus) = join(
        || steady_state_at_cutoff(&p_minus, config),
        || steady_state_at_cutoff(&p_plus, config),
    );
    let (r_minus, r_plus) = (r_minus?, r_plus?);
    let e_minus = thermo_point(&r_minus, &p_minus)?;
    let e_plus = thermo_point(&r_plus, &p_plus)?;
    let conv = conversion_for(mode, x, freqs);
    let c_atom = (e_plus.ea_over_omega0 - e_minus.ea_over_omega0) / (2.0 * h) * conv;
    let c_field = (e_plus.ef_over_nu - e_minus.ef_over_nu) / (2.0 * h) * conv;
    Ok((c_atom, c_field))
}

/// Full response sample at one grid point: energies at the point itself
/// plus both temperature responses, with an optional halved-step check.
pub fn response_sample(
    params: &SystemParams,
    mode: ResponseMode,
    x: f64,
    freqs: &ReferenceFrequencies,
    opts: &ResponseOptions,
    config: &SolverConfig,
) -> Result<ResponseSample, ThermoError> {
    let h = opts.fd_step.unwrap_or_else(|| default_fd_step(x));
    let (m0, n0) = occupations_for(mode, x);
    let p_center = params.with_occupations(m0, n0)?;
    let center = auto_truncate(&p_center, config)?;
    let point = thermo_point(&center, &p_center)?;
    let cutoff = center.n_fock_used;
    let (c_atom, c_field) = response_pair_at_cutoff(params, mode, x, freqs, h, cutoff, config)?;
    let mut fd_flag = false;
    if opts.richardson_check {
        let (ca2, cf2) = response_pair_at_cutoff(params, mode, x, freqs, 0.5 * h, cutoff, config)?;
        let drift = |coarse: f64, fine: f64| (coarse - fine).abs() / fine.abs().max(1e-6);
        if drift(c_atom, ca2) > 0.01 || drift(c_field, cf2) > 0.01 {
            log::warn!(
                "finite-difference check failed at occupation {x}: \
                 atom {c_atom:.3e}->{ca2:.3e}, field {c_field:.3e}->{cf2:.3e}"
            );
            fd_flag = true;
        }
    }
    Ok(ResponseSample {
        occupation: x,
        c_atom,
        c_field,
        point,
        fd_flag,
    })
}

/// Both common-occupation responses at m_th = n_th = m.
pub fn response_common(
    params: &SystemParams,
    m: f64,
    freqs: &ReferenceFrequencies,
    fd_step: f64,
    config: &SolverConfig,
) -> Result<(f64, f64), ThermoError> {
    response_pair(params, ResponseMode::Common, m, freqs, fd_step, config)
}

/// Atomic response with the field reservoir pinned at `n_fixed`.
pub fn response_atomic_fixed_n(
    params: &SystemParams,
    m: f64,
    n_fixed: f64,
    freqs: &ReferenceFrequencies,
    fd_step: f64,
    config: &SolverConfig,
) -> Result<f64, ThermoError> {
    response_pair(
        params,
        ResponseMode::FixedField { n_th: n_fixed },
        m,
        freqs,
        fd_step,
        config,
    )
    .map(|(c_atom, _)| c_atom)
}

/// Field response with the atomic reservoir pinned at `m_fixed`.
pub fn response_field_fixed_m(
    params: &SystemParams,
    n: f64,
    m_fixed: f64,
    freqs: &ReferenceFrequencies,
    fd_step: f64,
    config: &SolverConfig,
) -> Result<f64, ThermoError> {
    response_pair(
        params,
        ResponseMode::FixedAtom { m_th: m_fixed },
        n,
        freqs,
        fd_step,
        config,
    )
    .map(|(_, c_field)| c_field)
}

/// Sequentially sampled response curve over an occupation grid.
pub fn response_curve(
    params: &SystemParams,
    mode: ResponseMode,
    grid: &[f64],
    freqs: &ReferenceFrequencies,
    opts: &ResponseOptions,
    config: &SolverConfig,
) -> Result<ResponseCurve, ThermoError> {
    let samples = grid
        .iter()
        .map(|&x| response_sample(params, mode, x, freqs, opts, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResponseCurve {
        mode,
        samples,
        params: params.clone(),
        freqs: *freqs,
        fd_step: opts.fd_step,
    })
}

/// Steady-state excited population of the carrier-driven atom (field
/// decoupled), from eliminating the optical Bloch equations by hand under
/// the factor-2 dissipator convention:
///   p_e = (G² + m(2m+1)) / (2G² + (2m+1)²),  G = g/γ.
/// Undriven it reduces to the thermal value m/(2m+1); strongly driven it
/// saturates at 1/2.
pub fn carrier_excited_population_oracle(m: f64, g_over_gamma: f64) -> f64 {
    debug_assert!(m >= 0.0 && g_over_gamma >= 0.0);
    let g2 = g_over_gamma * g_over_gamma;
    let w = 2.0 * m + 1.0;
    (g2 + m * w) / (2.0 * g2 + w * w)
}

/// Printed closed form of the carrier atomic response:
///   −2·m(m+1)·ln²((m+1)/m)·[2G² − (2m+1)²] / [2G² + (2m+1)²]²,  k_B = 1.
/// The numeric pipeline reproduces its sign and shape; the overall
/// constant is compared, not assumed (see the crossing and ratio tests).
pub fn carrier_response_analytic(m: f64, g_over_gamma: f64) -> f64 {
    debug_assert!(m > 0.0);
    let g2 = g_over_gamma * g_over_gamma;
    let w = 2.0 * m + 1.0;
    let log_ratio = (1.0 / m).ln_1p();
    let denom = 2.0 * g2 + w * w;
    -2.0 * m * (m + 1.0) * log_ratio * log_ratio * (2.0 * g2 - w * w) / (denom * denom)
}

/// Largest atomic-reservoir occupation with a negative carrier response:
/// m* = g/(√2·γ) − 1/2, clamped at 0.
pub fn cooling_threshold_carrier(g_over_gamma: f64) -> f64 {
    debug_assert!(g_over_gamma > 0.0);
    (g_over_gamma / 2.0f64.sqrt() - 0.5).max(0.0)
}

/// Response of N independent atoms sharing the reservoirs.
pub fn n_atoms_scale(c_single: f64, n_atoms: u32) -> f64 {
    debug_assert!(n_atoms >= 1);
    n_atoms as f64 * c_single
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCrossing {
    pub occupation: f64,
    /// The curve changes sign more than once; the smallest crossing is
    /// the one reported.
    pub multiple: bool,
}

/// Locate where the chosen response changes sign along the curve,
/// refining the bracketing grid interval by bisection on fresh solves
/// until it is narrower than 1e-3.
pub fn find_zero_crossing(
    curve: &ResponseCurve,
    which: ResponseObservable,
    config: &SolverConfig,
) -> Result<Option<ZeroCrossing>, ThermoError> {
    if curve.samples.len() < 2 {
        return Err(ThermoError::CurveTooShort(curve.samples.len()));
    }
    let pick = |s: &ResponseSample| match which {
        ResponseObservable::Atom => s.c_atom,
        ResponseObservable::Field => s.c_field,
    };
    let mut brackets = Vec::new();
    for pair in curve.samples.windows(2) {
        let (c0, c1) = (pick(&pair[0]), pick(&pair[1]));
        if c0 == 0.0 || c0 * c1 < 0.0 {
            brackets.push((pair[0].occupation, pair[1].occupation, c0));
        }
    }
    let Some(&(mut lo, mut hi, c_lo)) = brackets.first() else {
        return Ok(None);
    };
    let multiple = brackets.len() > 1;
    if multiple {
        log::warn!(
            "response changes sign {} times; reporting the smallest crossing",
            brackets.len()
        );
    }
    if c_lo == 0.0 {
        return Ok(Some(ZeroCrossing {
            occupation: lo,
            multiple,
        }));
    }
    let eval = |x: f64| -> Result<f64, ThermoError> {
        let h = curve.fd_step.unwrap_or_else(|| default_fd_step(x));
        let (c_atom, c_field) =
            response_pair(&curve.params, curve.mode, x, &curve.freqs, h, config)?;
        Ok(match which {
            ResponseObservable::Atom => c_atom,
            ResponseObservable::Field => c_field,
        })
    };
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let c_mid = eval(mid)?;
        if c_mid == 0.0 {
            return Ok(Some(ZeroCrossing {
                occupation: mid,
                multiple,
            }));
        }
        if (c_mid > 0.0) == (c_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(ZeroCrossing {
        occupation: 0.5 * (lo + hi),
        multiple,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn occupation_map_basics() {
        assert_eq!(occupation_from_temperature(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(
            occupation_from_temperature(1.0, 1.0 / 2.0f64.ln()),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            temperature_from_occupation(1.0, 0.0),
            Err(ThermoError::NoFiniteTemperature)
        ));
    }

    #[test]
    fn occupation_map_round_trips() {
        for exp in -3..=3 {
            let m = 10f64.powi(exp);
            for &omega in &[0.5, 1.0, 2.0] {
                let t = temperature_from_occupation(omega, m).unwrap();
                assert_abs_diff_eq!(
                    occupation_from_temperature(omega, t),
                    m,
                    epsilon = 1e-12 * m.max(1.0)
                );
            }
        }
    }

    #[test]
    fn occupation_derivative_values_and_limit() {
        assert_eq!(doccupation_dtemperature(1.0, 0.0), 0.0);
        let ln2 = 2.0f64.ln();
        assert_abs_diff_eq!(
            doccupation_dtemperature(1.0, 1.0),
            2.0 * ln2 * ln2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn occupation_derivative_matches_finite_differences() {
        for &m in &[0.1, 0.5, 1.0, 2.0] {
            let omega = 1.3;
            let t = temperature_from_occupation(omega, m).unwrap();
            let h = 1e-6 * t;
            let fd = (occupation_from_temperature(omega, t + h)
                - occupation_from_temperature(omega, t - h))
                / (2.0 * h);
            let analytic = doccupation_dtemperature(omega, m);
            assert!(
                (fd - analytic).abs() / analytic < 1e-6,
                "m={m}: fd {fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn carrier_population_limits() {
        assert_eq!(carrier_excited_population_oracle(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(
            carrier_excited_population_oracle(0.0, 1e6),
            0.5,
            epsilon = 1e-9
        );
        // undriven limit is the thermal population
        for &m in &[0.2, 1.0, 3.0] {
            assert_abs_diff_eq!(
                carrier_excited_population_oracle(m, 0.0),
                m / (2.0 * m + 1.0),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn carrier_analytic_response_values() {
        // direct evaluation at m = 1, g = γ
        let ln2 = 2.0f64.ln();
        let want = -2.0 * 2.0 * ln2 * ln2 * (2.0 - 9.0) / ((2.0 + 9.0) * (2.0 + 9.0));
        assert_abs_diff_eq!(carrier_response_analytic(1.0, 1.0), want, epsilon = 1e-15);
        assert_abs_diff_eq!(want, 0.11118, epsilon = 5e-6);
        // m → 0 limit vanishes
        assert!(carrier_response_analytic(1e-9, 1.0).abs() < 1e-6);
        // the sign flips exactly where the numerator root sits
        let g = 1.3;
        let m_star = cooling_threshold_carrier(g);
        assert!(carrier_response_analytic(m_star - 1e-6, g) < 0.0);
        assert!(carrier_response_analytic(m_star + 1e-6, g) > 0.0);
    }

    #[test]
    fn carrier_threshold_values() {
        assert_abs_diff_eq!(
            cooling_threshold_carrier(1.0),
            0.20711,
            epsilon = 5e-6
        );
        assert_abs_diff_eq!(
            cooling_threshold_carrier(1.0 / 2.0f64.sqrt()),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            cooling_threshold_carrier(2.0 * 2.0f64.sqrt()),
            1.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn atom_count_scaling_is_linear() {
        assert_eq!(n_atoms_scale(0.3, 1), 0.3);
        assert_eq!(n_atoms_scale(-0.1, 10), -1.0);
        for n in [1, 2, 7] {
            assert_eq!(n_atoms_scale(-0.5, n).signum(), -1.0);
            assert_eq!(n_atoms_scale(0.5, n).signum(), 1.0);
        }
    }
}
