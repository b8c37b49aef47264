//! Named scenarios. Each preset fixes the model (sideband order,
//! coupling, field decay) and the scan shape used for the reference
//! figures; the grid is step 0.05 in occupation over (0, 3].

use clap::ValueEnum;

use cbh_core::model::SystemParams;
use cbh_core::solver::SolverConfig;
use cbh_core::thermo::ReferenceFrequencies;

use crate::spec::{GridSpec, OutputFormat, SweepMode, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// First blue sideband, g = 1.0γ, κ = 0.1γ, common occupations.
    Fig1,
    /// Second blue sideband, g = 0.2γ, κ = 0.1γ, common occupations.
    Fig2,
    /// First sideband with the field occupation pinned at 0, 1, 2.
    Fig3a,
    /// Second sideband with the field occupation pinned at 0, 1, 2.
    Fig3b,
    /// Carrier drive, field decoupled (κ = 0), against the closed form.
    Carrier,
}

pub fn occupation_grid() -> GridSpec {
    GridSpec {
        start: 0.05,
        stop: 3.0,
        step: 0.05,
    }
}

pub fn spec(preset: Preset) -> SweepSpec {
    let (params, mode, fixed_n) = match preset {
        Preset::Fig1 => (
            SystemParams::new(1, 1.0, 0.1, 0.0, 0.0).unwrap(),
            SweepMode::CommonOccupation,
            vec![],
        ),
        Preset::Fig2 => (
            SystemParams::new(2, 0.2, 0.1, 0.0, 0.0).unwrap(),
            SweepMode::CommonOccupation,
            vec![],
        ),
        Preset::Fig3a => (
            SystemParams::new(1, 1.0, 0.1, 0.0, 0.0).unwrap(),
            SweepMode::FixedFieldOccupation,
            vec![0.0, 1.0, 2.0],
        ),
        Preset::Fig3b => (
            SystemParams::new(2, 0.2, 0.1, 0.0, 0.0).unwrap(),
            SweepMode::FixedFieldOccupation,
            vec![0.0, 1.0, 2.0],
        ),
        Preset::Carrier => (
            SystemParams::new(0, 1.0, 0.0, 0.0, 0.0).unwrap(),
            SweepMode::FixedFieldOccupation,
            vec![0.0],
        ),
    };
    SweepSpec {
        mode,
        params,
        grid: occupation_grid(),
        fixed_n,
        freqs: ReferenceFrequencies::default(),
        solver: SolverConfig::default(),
        fd_step: None,
        format: OutputFormat::Csv,
        out: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_cover_both_sidebands() {
        for p in [
            Preset::Fig1,
            Preset::Fig2,
            Preset::Fig3a,
            Preset::Fig3b,
            Preset::Carrier,
        ] {
            let s = spec(p);
            s.validate().unwrap();
            assert_eq!(s.grid.values().len(), 60);
        }
        assert_eq!(spec(Preset::Fig1).params.k, 1);
        assert_eq!(spec(Preset::Fig2).params.k, 2);
        assert_eq!(spec(Preset::Fig2).params.g, 0.2);
        assert_eq!(spec(Preset::Carrier).params.kappa, 0.0);
        assert_eq!(spec(Preset::Fig3b).fixed_n, vec![0.0, 1.0, 2.0]);
    }
}
