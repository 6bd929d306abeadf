//! Run configuration, loaded from TOML. Every field has a default, so an
//! empty file is a valid configuration.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use reqc::crystal::CouplingParams;
use reqc::qsim::default_alpha_schedule;
use reqc::readout::{ChainGeometry, ReadoutModel, ScanParams};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub trials: u64,
    /// Worker threads; 0 uses every core.
    pub parallelism: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub crystal: CrystalSection,
    pub census: CensusSection,
    pub stats: StatsSection,
    pub distill: DistillSection,
    pub entanglement: EntanglementSection,
    pub readout: ReadoutSection,
    pub stark: StarkSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 0,
            trials: 100,
            parallelism: 0,
            output: None,
            format: Format::Csv,
            crystal: Default::default(),
            census: Default::default(),
            stats: Default::default(),
            distill: Default::default(),
            entanglement: Default::default(),
            readout: Default::default(),
            stark: Default::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalSection {
    /// m
    pub box_side: f64,
    /// m⁻³
    pub density: f64,
    /// Hz
    pub bandwidth: f64,
    /// C·m
    pub dmu: f64,
    /// Channel width used for the occupancy summary, Hz.
    pub channel_width: f64,
    pub coupling: CouplingParams,
}

impl Default for CrystalSection {
    fn default() -> Self {
        CrystalSection {
            box_side: 2e-8,
            density: 1e26,
            bandwidth: 1e9,
            dmu: 1e-31,
            channel_width: 1e6,
            coupling: CouplingParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusSection {
    pub n_qubits: Vec<u32>,
    /// Mean channel occupancy of a blockade ball.
    pub nbar: Vec<f64>,
    pub channel_width: f64,
    pub box_in_radii: f64,
    /// Mean bus candidates per crystal.
    pub bus_candidates: f64,
    pub dmu: f64,
    pub coupling: CouplingParams,
}

impl Default for CensusSection {
    fn default() -> Self {
        CensusSection {
            n_qubits: vec![1, 2, 3],
            nbar: vec![0.5, 1.0, 2.0],
            channel_width: 1e6,
            box_in_radii: 10.0,
            bus_candidates: 1.0,
            dmu: 1e-31,
            coupling: CouplingParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub n_qubits: Vec<u32>,
    pub nbar: Vec<f64>,
    pub target_p: f64,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            n_qubits: vec![1, 2, 3, 10, 100],
            nbar: vec![0.5, 1.0, 2.0, 4.6052, 6.9078],
            target_p: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistillSection {
    pub n_initial: Vec<usize>,
    pub alpha_schedule: Vec<f64>,
    pub beta: f64,
    pub branch_to_aux: f64,
    pub max_rounds: usize,
}

impl Default for DistillSection {
    fn default() -> Self {
        DistillSection {
            n_initial: vec![1, 2, 3, 4],
            alpha_schedule: default_alpha_schedule(),
            beta: 0.05,
            branch_to_aux: 1.0,
            max_rounds: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntanglementSection {
    /// Coupling of the `|ee⟩` shift for `ent-rate`, rad/s.
    pub g: f64,
    /// Grid points of the `f-max` curve.
    pub f_points: usize,
    /// Couplings swept by `gate-bound`, rad/s.
    pub gate_g: Vec<f64>,
    /// Rabi frequencies swept by `gate-bound`, rad/s.
    pub gate_rabi: Vec<f64>,
    /// Integrator step as a fraction of `1 / (g + rabi)`.
    pub step_fraction: f64,
}

impl Default for EntanglementSection {
    fn default() -> Self {
        EntanglementSection {
            g: 1.0,
            f_points: 91,
            gate_g: vec![2e7, 5e7, 1e8, 2e8, 5e8],
            gate_rabi: vec![1e6, 2e6, 5e6, 1e7, 2e7],
            step_fraction: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub model: ReadoutModel,
    pub success_target: f64,
    pub scan: ScanParams,
    pub chain_length: usize,
    pub geometry: ChainGeometry,
    /// Scan log of the first `readout-init` trial, as CSV.
    pub scan_log: Option<PathBuf>,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection {
            model: ReadoutModel::default(),
            success_target: 0.99,
            scan: ScanParams::default(),
            chain_length: 3,
            geometry: ChainGeometry::default(),
            scan_log: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkSection {
    /// Hz per V/cm
    pub coefficient: f64,
    /// V/cm
    pub fields: Vec<f64>,
}

impl Default for StarkSection {
    fn default() -> Self {
        StarkSection { coefficient: 35e3, fields: vec![0.0, 1.0, 1e3, 1e6] }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn example_file_lists_the_defaults() {
        let c = RunConfig::parse(include_str!("../reqc.example.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn round_trips() {
        let mut c = RunConfig { master_seed: 77, output: Some("out.csv".into()), ..Default::default() };
        c.readout.scan.pi_pulse_fidelity = 0.99;
        c.census.coupling.g_min = 2.5e7;
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_field_rejected() {
        let e = RunConfig::parse("[census]\nnbarr = [1.0]\n").unwrap_err();
        assert!(e.to_string().contains("nbarr"), "{e}");
    }

    #[test]
    fn partial_nested_sections() {
        let c = RunConfig::parse("[census.coupling]\ng_min = 2e7\n[readout.model]\nphotons_needed = 50\n").unwrap();
        assert_eq!(c.census.coupling.g_min, 2e7);
        assert_eq!(c.census.coupling.g_ref, CouplingParams::default().g_ref);
        assert_eq!(c.readout.model.photons_needed, 50);
    }
}
