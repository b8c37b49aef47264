//! The physical model: a two-level atom coupled to a bosonic mode through
//! a sideband interaction of order k ∈ {0, 1, 2}, each subsystem damped by
//! its own thermal reservoir. All rates are expressed in units of the
//! atomic decay rate γ, with ħ = k_B = 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qops::{atom_ops, destroy, kron, Operator, QopsError};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("sideband order k must be 0, 1 or 2, got {0}")]
    InvalidSideband(u8),
    #[error("{name} must be nonnegative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    #[error("Rabi frequency must be positive, got {0}")]
    NonPositiveRabi(f64),
    #[error("Lamb-Dicke parameter must lie in [0, 1), got {0}")]
    LambDickeOutOfRange(f64),
    #[error(transparent)]
    Qops(#[from] QopsError),
}

/// Default Fock cutoff heuristic: enough levels that the thermal tail
/// (n_th/(n_th+1))^n drops below 1e-8 for n_th ≤ 3, never fewer than 20.
pub fn default_n_fock(n_th: f64) -> usize {
    ((12.0 * (n_th + 1.0)).ceil() as usize).max(20)
}

/// Model definition in reduced units (γ = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Sideband order: 0 carrier, 1 first blue sideband, 2 second.
    pub k: u8,
    /// Effective coupling g_k in units of γ.
    pub g: f64,
    /// Field decay rate κ in units of γ.
    pub kappa: f64,
    /// Atomic decay rate; the unit of all rates (fixed to 1).
    pub gamma: f64,
    /// Field-reservoir mean occupation.
    pub n_th: f64,
    /// Atom-reservoir mean occupation.
    pub m_th: f64,
    /// Fock cutoff for the bosonic factor.
    pub n_fock: usize,
}

impl SystemParams {
    pub fn new(k: u8, g: f64, kappa: f64, n_th: f64, m_th: f64) -> Result<SystemParams, ModelError> {
        let params = SystemParams {
            k,
            g,
            kappa,
            gamma: 1.0,
            n_th,
            m_th,
            n_fock: default_n_fock(n_th),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_n_fock(mut self, n_fock: usize) -> Result<SystemParams, ModelError> {
        if n_fock < 2 {
            return Err(QopsError::FockCutoffTooSmall(n_fock).into());
        }
        self.n_fock = n_fock;
        Ok(self)
    }

    /// New occupations, keeping the cutoff at least at its default for the
    /// new field occupation so nearby evaluations stay comparable.
    pub fn with_occupations(&self, m_th: f64, n_th: f64) -> Result<SystemParams, ModelError> {
        let mut p = self.clone();
        p.m_th = m_th;
        p.n_th = n_th;
        p.n_fock = p.n_fock.max(default_n_fock(n_th));
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.k > 2 {
            return Err(ModelError::InvalidSideband(self.k));
        }
        for (name, value) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
            ("m_th", self.m_th),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteParameter { name, value });
            }
            if value < 0.0 {
                return Err(ModelError::NegativeParameter { name, value });
            }
        }
        if !self.gamma.is_finite() {
            return Err(ModelError::NonFiniteParameter {
                name: "gamma",
                value: self.gamma,
            });
        }
        if self.gamma <= 0.0 {
            return Err(ModelError::NegativeParameter {
                name: "gamma",
                value: self.gamma,
            });
        }
        if self.n_fock < 2 {
            return Err(QopsError::FockCutoffTooSmall(self.n_fock).into());
        }
        Ok(())
    }

    pub fn composite_dim(&self) -> usize {
        2 * self.n_fock
    }
}

/// Interaction Hamiltonian g·(σ_-⊗a^k + σ_+⊗a†^k); k = 0 reduces to the
/// carrier drive g·(σ_- + σ_+)⊗I.
pub fn hamiltonian(params: &SystemParams) -> Result<Operator, ModelError> {
    hamiltonian_with_phase(params, 0.0)
}

/// Same Hamiltonian with coupling g·e^{iφ} on the lowering term (and its
/// conjugate on the raising term). Steady-state observables are invariant
/// in φ, which lets complex couplings be reduced to their magnitudes.
pub fn hamiltonian_with_phase(params: &SystemParams, phi: f64) -> Result<Operator, ModelError> {
    params.validate()?;
    let (minus, _, _) = atom_ops();
    let a = destroy(params.n_fock)?;
    let ak = a.pow(params.k as u32);
    let g = Complex64::from_polar(params.g, phi);
    let lower = kron(&minus, &ak)?.scale(g);
    Ok(lower.add(&lower.dagger()))
}

/// One thermal decay channel: `rate` multiplies the factor-2 dissipator
/// D[op]ρ = 2·op ρ op† − op†op ρ − ρ op†op.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub rate: f64,
    pub op: Operator,
    pub label: &'static str,
}

/// The four reservoir channels, in fixed order: field decay κ(n_th+1),
/// field excitation κ·n_th, atom decay γ(m_th+1), atom excitation γ·m_th.
/// Zero-rate channels are kept so the list shape is stable.
pub fn collapse_set(params: &SystemParams) -> Result<Vec<CollapseChannel>, ModelError> {
    params.validate()?;
    let (minus, plus, _) = atom_ops();
    let a = destroy(params.n_fock)?;
    let id_atom = Operator::identity(2);
    let id_field = Operator::identity(params.n_fock);
    Ok(vec![
        CollapseChannel {
            rate: params.kappa * (params.n_th + 1.0),
            op: kron(&id_atom, &a)?,
            label: "field decay",
        },
        CollapseChannel {
            rate: params.kappa * params.n_th,
            op: kron(&id_atom, &a.dagger())?,
            label: "field excitation",
        },
        CollapseChannel {
            rate: params.gamma * (params.m_th + 1.0),
            op: kron(&minus, &id_field)?,
            label: "atom decay",
        },
        CollapseChannel {
            rate: params.gamma * params.m_th,
            op: kron(&plus, &id_field)?,
            label: "atom excitation",
        },
    ])
}

/// Coupling magnitudes (g₀, g₁, g₂) = (Ω/2, ηΩ/2, η²Ω/4) of the carrier
/// and first two blue sidebands for a drive of Rabi frequency Ω at
/// Lamb-Dicke parameter η. Phases are dropped; see the phase-invariance
/// property of the steady state.
pub fn lamb_dicke_couplings(rabi_frequency: f64, eta: f64) -> Result<(f64, f64, f64), ModelError> {
    if !rabi_frequency.is_finite() || rabi_frequency <= 0.0 {
        return Err(ModelError::NonPositiveRabi(rabi_frequency));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(ModelError::LambDickeOutOfRange(eta));
    }
    if eta > 0.3 {
        log::warn!(
            "Lamb-Dicke parameter {eta} is large; the sideband expansion degrades above ~0.3"
        );
    }
    Ok((
        rabi_frequency / 2.0,
        eta * rabi_frequency / 2.0,
        eta * eta * rabi_frequency / 4.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(0, 1.0, 0.0, 0.0, 0.0).is_ok());
        assert_eq!(
            SystemParams::new(3, 1.0, 0.1, 0.5, 0.5).unwrap_err(),
            ModelError::InvalidSideband(3)
        );
        assert!(matches!(
            SystemParams::new(1, -0.5, 0.1, 0.5, 0.5).unwrap_err(),
            ModelError::NegativeParameter { name: "g", .. }
        ));
        let p = SystemParams::new(1, 1.0, 0.1, 0.5, 0.5).unwrap();
        assert_eq!(p.n_fock, default_n_fock(0.5));
        assert!(p.clone().with_n_fock(1).is_err());
    }

    #[test]
    fn default_cutoff_tracks_occupation() {
        assert_eq!(default_n_fock(0.0), 20);
        assert_eq!(default_n_fock(3.0), 48);
        let tail = (3.0f64 / 4.0).powi(default_n_fock(3.0) as i32);
        assert!(tail < 1e-5, "heuristic leaves a small thermal tail");
    }

    #[test]
    fn carrier_hamiltonian_is_a_pure_atomic_drive() {
        let p = SystemParams::new(0, 1.0, 0.0, 0.0, 0.0)
            .unwrap()
            .with_n_fock(2)
            .unwrap();
        let h = hamiltonian(&p).unwrap();
        // g·(σ_- + σ_+) ⊗ I₂
        let (minus, plus, _) = atom_ops();
        let want = kron(&minus.add(&plus), &Operator::identity(2)).unwrap();
        assert!(h.sub(&want).max_abs() < 1e-15);
    }

    #[test]
    fn sideband_matrix_elements() {
        // k = 1: ⟨e,1|H|g,0⟩ = g
        let p = SystemParams::new(1, 0.8, 0.1, 0.0, 0.0)
            .unwrap()
            .with_n_fock(4)
            .unwrap();
        let h = hamiltonian(&p).unwrap();
        // composite index = atom * n_fock + field
        let idx = |atom: usize, field: usize| atom * 4 + field;
        assert_abs_diff_eq!(h.entry(idx(1, 1), idx(0, 0)).re, 0.8, epsilon = 1e-15);

        // k = 2: ⟨e,2|H|g,0⟩ = √2·g
        let p2 = SystemParams::new(2, 0.8, 0.1, 0.0, 0.0)
            .unwrap()
            .with_n_fock(4)
            .unwrap();
        let h2 = hamiltonian(&p2).unwrap();
        assert_abs_diff_eq!(
            h2.entry(idx(1, 2), idx(0, 0)).re,
            0.8 * 2.0f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn hamiltonian_is_hermitian_for_all_orders_and_phases() {
        for k in 0..=2u8 {
            for &phi in &[0.0, 0.7, std::f64::consts::FRAC_PI_2] {
                let p = SystemParams::new(k, 1.3, 0.1, 0.5, 0.5)
                    .unwrap()
                    .with_n_fock(6)
                    .unwrap();
                let h = hamiltonian_with_phase(&p, phi).unwrap();
                assert!(h.is_hermitian(0.0), "k={k}, phi={phi}");
            }
        }
    }

    #[test]
    fn collapse_rates_follow_the_prefactors() {
        let p = SystemParams::new(1, 1.0, 0.1, 1.0, 2.0).unwrap();
        let chans = collapse_set(&p).unwrap();
        let rates: Vec<f64> = chans.iter().map(|c| c.rate).collect();
        assert_eq!(rates, vec![0.2, 0.1, 3.0, 2.0]);

        let cold = SystemParams::new(1, 1.0, 0.5, 0.0, 0.0).unwrap();
        let rates: Vec<f64> = collapse_set(&cold).unwrap().iter().map(|c| c.rate).collect();
        assert_eq!(rates, vec![0.5, 0.0, 1.0, 0.0]);

        let undamped_field = SystemParams::new(0, 1.0, 0.0, 0.7, 0.3).unwrap();
        let rates: Vec<f64> = collapse_set(&undamped_field)
            .unwrap()
            .iter()
            .map(|c| c.rate)
            .collect();
        assert_eq!(rates, vec![0.0, 0.0, 1.3, 0.3]);
    }

    #[test]
    fn collapse_ops_live_on_the_composite_space() {
        let p = SystemParams::new(2, 0.2, 0.1, 0.5, 0.5)
            .unwrap()
            .with_n_fock(10)
            .unwrap();
        for ch in collapse_set(&p).unwrap() {
            assert_eq!(ch.op.dim(), 20);
        }
    }

    #[test]
    fn lamb_dicke_magnitudes() {
        let (g0, g1, g2) = lamb_dicke_couplings(1.0, 0.2).unwrap();
        assert_abs_diff_eq!(g0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g1, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g2, 0.01, epsilon = 1e-15);

        let (g0, g1, g2) = lamb_dicke_couplings(1.0, 0.0).unwrap();
        assert_eq!((g0, g1, g2), (0.5, 0.0, 0.0));

        let (g0, g1, g2) = lamb_dicke_couplings(2.0, 0.1).unwrap();
        assert_abs_diff_eq!(g0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g1, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g2, 0.005, epsilon = 1e-15);

        assert!(lamb_dicke_couplings(0.0, 0.2).is_err());
        assert!(lamb_dicke_couplings(1.0, 1.0).is_err());
        assert!(lamb_dicke_couplings(1.0, -0.1).is_err());
    }
}
