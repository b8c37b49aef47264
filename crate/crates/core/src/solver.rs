//! Steady states of the master equation. The generator is assembled as a
//! sparse superoperator on column-stacked density matrices; the direct
//! method appends the trace constraint and solves in least-squares sense,
//! while the propagation method integrates the equation of motion until
//! the residual stops it. A cutoff-growth loop adapts the Fock truncation.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::lstsq_qr_pivoted;
use crate::model::{collapse_set, hamiltonian, CollapseChannel, ModelError, SystemParams};
use crate::qops::{
    atom_ops, basis_state, field_marginal, tensor_state, thermal_fock, DensityMatrix, Operator,
};
use crate::sparse::{CooBuilder, CsrMatrix};

/// Relative pivot threshold below which the trace-augmented system is
/// declared rank deficient (a steady-state manifold, not a point).
const RANK_TOL: f64 = 1e-9;

/// Relative change in ⟨a†a⟩ between consecutive cutoffs accepted as
/// truncation convergence.
const OCCUPATION_CONVERGENCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: Hamiltonian is {dim}, channel '{label}' is {got}")]
    DimensionMismatch {
        dim: usize,
        got: usize,
        label: String,
    },
    #[error("channel '{label}' has negative rate {rate}")]
    NegativeRate { rate: f64, label: String },
    #[error("vector of length {0} is not a stacked square matrix")]
    NotSquare(usize),
    #[error("state dimension {got} does not match the generator dimension {dim}")]
    StateDimension { dim: usize, got: usize },
    #[error(
        "steady state is not unique: trace-augmented rank {rank} of {dim} \
         (degenerate steady-state manifold)"
    )]
    MultipleSteadyStates { rank: usize, dim: usize },
    #[error("steady-state residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualExceeded { residual: f64, tol: f64 },
    #[error("propagation stalled at residual {residual:.3e} after t = {time:.3e}")]
    NotConverged { residual: f64, time: f64 },
    #[error(
        "Fock cutoff limit {n_fock} reached with tail population {tail:.3e} \
         still above tolerance"
    )]
    MaxFockExceeded {
        n_fock: usize,
        tail: f64,
        best: Box<SteadyStateResult>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodPreference {
    Direct,
    Propagate,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Direct,
    Propagate,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Accept a state only if ‖L·vec(ρ)‖∞ stays below this.
    pub residual_tol: f64,
    /// Accept a cutoff only if the top-3 Fock populations stay below this.
    pub truncation_tol: f64,
    /// Hard ceiling for the cutoff-growth loop.
    pub max_fock: usize,
    pub method: MethodPreference,
    /// Initial propagation step; derived from the generator when absent.
    pub dt_init: Option<f64>,
    /// Give up propagating past this time.
    pub max_time: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-10,
            truncation_tol: 1e-8,
            max_fock: 256,
            method: MethodPreference::Auto,
            dt_init: None,
            max_time: 1e5,
        }
    }
}

/// Sparse generator of the master equation on vectorized states.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub dim_hilbert: usize,
    pub matrix: CsrMatrix,
    pub channel_summary: Vec<(f64, String)>,
    /// Suggested initial propagation step, 0.01 over the fastest scale.
    pub dt_hint: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    /// ‖L·vec(ρ)‖∞ on the full generator.
    pub residual: f64,
    pub method: SolveMethod,
    pub n_fock_used: usize,
    /// Summed population of the top three Fock levels.
    pub tail_population: f64,
    pub wall_time: f64,
}

/// Column-major stacking: vec(ρ)[i + d·j] = ρ(i, j).
pub fn vectorize(rho: &DensityMatrix) -> Vec<Complex64> {
    let d = rho.dim();
    let mut v = vec![Complex64::ZERO; d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = rho.entry(i, j);
        }
    }
    v
}

/// Inverse of `vectorize`; fails when the length is not a perfect square.
pub fn devectorize(v: &[Complex64]) -> Result<DensityMatrix, SolverError> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(SolverError::NotSquare(v.len()));
    }
    let mut m = Array2::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            m[[i, j]] = v[i + d * j];
        }
    }
    Ok(DensityMatrix::from_matrix(m, None))
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Build L = −i(I⊗H − Hᵀ⊗I) + Σ rate·[2(c̄⊗c) − I⊗(c†c) − (c†c)ᵀ⊗I],
/// acting on column-stacked ρ, with the dissipator's explicit factor 2 so
/// channel rates enter exactly as stated prefactors.
pub fn assemble(h: &Operator, channels: &[CollapseChannel]) -> Result<Liouvillian, SolverError> {
    let d = h.dim();
    for ch in channels {
        if ch.op.dim() != d {
            return Err(SolverError::DimensionMismatch {
                dim: d,
                got: ch.op.dim(),
                label: ch.label.to_string(),
            });
        }
        if ch.rate < 0.0 {
            return Err(SolverError::NegativeRate {
                rate: ch.rate,
                label: ch.label.to_string(),
            });
        }
    }
    let n2 = d * d;
    let id = CsrMatrix::identity(d);
    let hs = h.to_csr();
    let i = Complex64::new(0.0, 1.0);
    let mut acc = CooBuilder::new(n2, n2);
    acc.add_scaled(&id.kron(&hs), -i);
    acc.add_scaled(&hs.transpose().kron(&id), i);
    let mut fastest = h.max_abs().max(1.0);
    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let c = ch.op.to_csr();
        let cdc = c.adjoint().matmul(&c);
        acc.add_scaled(&c.conj().kron(&c), Complex64::new(2.0 * ch.rate, 0.0));
        acc.add_scaled(&id.kron(&cdc), Complex64::new(-ch.rate, 0.0));
        acc.add_scaled(&cdc.transpose().kron(&id), Complex64::new(-ch.rate, 0.0));
        fastest = fastest.max(ch.rate * ch.op.max_abs().powi(2));
    }
    Ok(Liouvillian {
        dim_hilbert: d,
        matrix: acc.build(),
        channel_summary: channels
            .iter()
            .map(|c| (c.rate, c.label.to_string()))
            .collect(),
        dt_hint: 0.01 / fastest,
    })
}

/// Hamiltonian, channels and generator for a parameter set in one call.
pub fn liouvillian_for(params: &SystemParams) -> Result<Liouvillian, SolverError> {
    let h = hamiltonian(params)?;
    let channels = collapse_set(params)?;
    assemble(&h, &channels)
}

fn tail_population(rho: &DensityMatrix, n_fock: usize) -> f64 {
    let fm = field_marginal(rho, n_fock);
    (n_fock.saturating_sub(3)..n_fock)
        .map(|n| fm[[n, n]].re)
        .sum()
}

/// Shared post-processing: Hermitize, renormalize, then verify the
/// residual against the full generator (not the reduced system the
/// solution came from).
fn finalize(
    x: &[Complex64],
    l: &Liouvillian,
    method: SolveMethod,
    started: Instant,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    let raw = devectorize(x)?;
    let defect = raw.hermiticity_defect();
    if defect > 1e-10 {
        log::warn!("hermitization correction {defect:.2e} is unusually large");
    } else {
        log::debug!("hermitization correction {defect:.2e}");
    }
    let n_fock = l.dim_hilbert / 2;
    let rho = DensityMatrix::from_matrix(
        raw.hermitized().normalized().matrix().clone(),
        Some(n_fock),
    );
    let residual = inf_norm(&l.matrix.matvec(&vectorize(&rho)));
    if residual > config.residual_tol {
        return Err(SolverError::ResidualExceeded {
            residual,
            tol: config.residual_tol,
        });
    }
    Ok(SteadyStateResult {
        tail_population: tail_population(&rho, n_fock),
        rho,
        residual,
        method,
        n_fock_used: n_fock,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Direct solve of L·x = 0 with Tr(x) = 1 appended, in least-squares
/// sense. Only the connected component of the sparsity graph containing
/// the diagonal can carry a trace-one steady state, so the solve is
/// restricted there; the returned residual is still measured on the full
/// generator. Rank deficiency of the restricted system means the steady
/// state is not unique and is reported as such.
pub fn steady_state_direct(
    l: &Liouvillian,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    let started = Instant::now();
    let d = l.dim_hilbert;
    let n2 = d * d;
    let seeds: Vec<usize> = (0..d).map(|i| i * (d + 1)).collect();
    let comp = l.matrix.reachable_from(&seeds);
    let nc = comp.len();
    let mut pos: Vec<Option<usize>> = vec![None; n2];
    for (loc, &glob) in comp.iter().enumerate() {
        pos[glob] = Some(loc);
    }
    let sub = l.matrix.submatrix(&comp, &pos);
    let mut m = Array2::zeros((nc + 1, nc));
    for r in 0..nc {
        for c in 0..nc {
            m[[r, c]] = sub[[r, c]];
        }
    }
    for i in 0..d {
        if let Some(loc) = pos[i * (d + 1)] {
            m[[nc, loc]] = Complex64::ONE;
        }
    }
    let mut rhs = vec![Complex64::ZERO; nc + 1];
    rhs[nc] = Complex64::ONE;
    let sol = lstsq_qr_pivoted(&m, &rhs, RANK_TOL);
    if sol.rank < nc {
        return Err(SolverError::MultipleSteadyStates {
            rank: sol.rank,
            dim: nc,
        });
    }
    let mut x = vec![Complex64::ZERO; n2];
    for (loc, &glob) in comp.iter().enumerate() {
        x[glob] = sol.solution[loc];
    }
    finalize(&x, l, SolveMethod::Direct, started, config)
}

fn rk4_step(m: &CsrMatrix, y: &[Complex64], k1: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = y.len();
    let half = 0.5 * dt;
    let mut stage: Vec<Complex64> = (0..n).map(|i| y[i] + half * k1[i]).collect();
    let k2 = m.matvec(&stage);
    for i in 0..n {
        stage[i] = y[i] + half * k2[i];
    }
    let k3 = m.matvec(&stage);
    for i in 0..n {
        stage[i] = y[i] + dt * k3[i];
    }
    let k4 = m.matvec(&stage);
    (0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrate dvec(ρ)/dt = L·vec(ρ) from `rho0` with classical RK4 and
/// step halving/doubling on the step-doubling error estimate, until the
/// residual drops below tolerance. The trace is renormalized every
/// accepted step to absorb integrator drift.
pub fn steady_state_evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    let started = Instant::now();
    let d = l.dim_hilbert;
    if rho0.dim() != d {
        return Err(SolverError::StateDimension {
            dim: d,
            got: rho0.dim(),
        });
    }
    let mut y = vectorize(rho0);
    let mut dt = config.dt_init.unwrap_or(l.dt_hint);
    let step_tol = (0.1 * config.residual_tol).clamp(1e-13, 1e-9);
    let mut t = 0.0;
    let mut k1 = l.matrix.matvec(&y);
    for _step in 0..5_000_000u64 {
        let residual = inf_norm(&k1);
        if residual < 0.5 * config.residual_tol {
            return finalize(&y, l, SolveMethod::Propagate, started, config);
        }
        if t >= config.max_time {
            return Err(SolverError::NotConverged { residual, time: t });
        }
        let full = rk4_step(&l.matrix, &y, &k1, dt);
        let h1 = rk4_step(&l.matrix, &y, &k1, 0.5 * dt);
        let k1h = l.matrix.matvec(&h1);
        let h2 = rk4_step(&l.matrix, &h1, &k1h, 0.5 * dt);
        let err = full
            .iter()
            .zip(&h2)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if err > step_tol && dt > 1e-12 {
            dt *= 0.5;
            continue;
        }
        t += dt;
        y = h2;
        let trace: Complex64 = (0..d).map(|i| y[i * (d + 1)]).sum();
        for v in &mut y {
            *v /= trace.re;
        }
        k1 = l.matrix.matvec(&y);
        if err < step_tol / 64.0 {
            dt *= 2.0;
        }
    }
    Err(SolverError::NotConverged {
        residual: inf_norm(&k1),
        time: t,
    })
}

/// When the field has no decay channel and the drive does not couple the
/// factors (carrier order, or no drive at all), the composite generator
/// has a whole manifold of steady states: one atomic fixed point for
/// every field distribution. This path resolves the atomic factor on its
/// own 4-dimensional system and pins the field to the thermal state its
/// reservoir would select at any nonzero coupling, then verifies the
/// residual of the product against the full composite generator.
fn decoupled_steady_state(
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    let started = Instant::now();
    let (minus, plus, _) = atom_ops();
    let h_atom = if params.k == 0 {
        minus.add(&plus).scale(Complex64::new(params.g, 0.0))
    } else {
        Operator::zeros(2)
    };
    let atom_channels = vec![
        CollapseChannel {
            rate: params.gamma * (params.m_th + 1.0),
            op: minus,
            label: "atom decay",
        },
        CollapseChannel {
            rate: params.gamma * params.m_th,
            op: plus,
            label: "atom excitation",
        },
    ];
    let l_atom = assemble(&h_atom, &atom_channels)?;
    let atom = steady_state_direct(&l_atom, config)?;
    let field = thermal_fock(params.n_fock, params.n_th);
    let rho = tensor_state(&atom.rho, &field);
    let l = liouvillian_for(params)?;
    finalize(&vectorize(&rho), &l, SolveMethod::Direct, started, config)
}

/// Steady state at the cutoff recorded in `params`, dispatching on the
/// configured method and on the decoupled carrier structure.
pub fn steady_state_at_cutoff(
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    params.validate()?;
    if params.kappa == 0.0 && (params.k == 0 || params.g == 0.0) {
        return decoupled_steady_state(params, config);
    }
    let l = liouvillian_for(params)?;
    let ground = || basis_state(l.dim_hilbert, 0);
    match config.method {
        MethodPreference::Direct => steady_state_direct(&l, config),
        MethodPreference::Propagate => steady_state_evolve(&l, &ground(), config),
        MethodPreference::Auto => match steady_state_direct(&l, config) {
            Err(SolverError::ResidualExceeded { .. }) => {
                steady_state_evolve(&l, &ground(), config)
            }
            other => other,
        },
    }
}

fn field_occupation(result: &SteadyStateResult) -> f64 {
    let fm = field_marginal(&result.rho, result.n_fock_used);
    (0..result.n_fock_used)
        .map(|n| n as f64 * fm[[n, n]].re)
        .sum()
}

/// Grow the Fock cutoff by half until a solve is confirmed: the cutoff is
/// accepted when its tail population is below tolerance and the next
/// cutoff up moves ⟨a†a⟩ by less than a relative 1e-6. The accepted
/// (smaller) solve is returned, tagged with its cutoff.
pub fn auto_truncate(
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<SteadyStateResult, SolverError> {
    params.validate()?;
    let mut n = params.n_fock.clamp(2, config.max_fock);
    let p = params.clone().with_n_fock(n)?;
    let mut current = steady_state_at_cutoff(&p, config)?;
    loop {
        if n >= config.max_fock {
            return Err(SolverError::MaxFockExceeded {
                n_fock: n,
                tail: current.tail_population,
                best: Box::new(current),
            });
        }
        let n_next = (((n as f64) * 1.5).ceil() as usize).min(config.max_fock);
        let p_next = params.clone().with_n_fock(n_next)?;
        let next = steady_state_at_cutoff(&p_next, config)?;
        let occ = field_occupation(&current);
        let occ_next = field_occupation(&next);
        let shift = (occ - occ_next).abs() / occ_next.abs().max(1e-6);
        if current.tail_population < config.truncation_tol && shift < OCCUPATION_CONVERGENCE {
            return Ok(current);
        }
        n = n_next;
        current = next;
    }
}
