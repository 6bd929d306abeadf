//! Single-instance operation through a dedicated read-out ion.
//!
//! A qubit next to the read-out ion is read by exciting it on `0↔e`: the
//! excitation shifts the read-out ion into resonance with a laser at `ν₀`,
//! so fluorescence means the qubit was in `|0⟩`.

mod chain;
mod initiation;
mod transfer;

pub use chain::{random_chain, ChainGeometry, GroundTruthChain};
pub use initiation::{
    initiate_characterization, DiscoveredChain, LaserKind, ScanLogEntry, ScanParams, ScanPhase,
};
pub use transfer::{execute_steps, transfer_state, ProtocolStep};

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::Level;
use crate::qsim::QsimError;

#[derive(Debug, Error, PartialEq)]
pub enum ReadoutError {
    #[error("parameter {field}: {reason}")]
    Param { field: &'static str, reason: String },
    #[error("qubit {0} cannot be read directly; transfer it to qubit 1 first")]
    Routing(usize),
    #[error("no read-out ion fluorescence found in the scan range")]
    ScanExhausted,
    #[error("invalid chain: {0}")]
    Chain(String),
    #[error(transparent)]
    State(#[from] QsimError),
}

fn param(field: &'static str, reason: impl Into<String>) -> ReadoutError {
    ReadoutError::Param { field, reason: reason.into() }
}

/// Photon-counting model of the read-out ion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutModel {
    /// Seconds per emitted photon.
    pub emission_interval: f64,
    pub detection_efficiency: f64,
    /// Detected photons the design aims for.
    pub photons_needed: u64,
    /// Lifetime of the qubit's `|e⟩`, which bounds the read-out window (s).
    pub qubit_e_lifetime: f64,
    pub trap_probability_per_cycle: f64,
    /// Read-out resonance with the adjacent qubit excited, measured from the
    /// bare resonance (Hz).
    pub nu0: f64,
    pub homogeneous_linewidth: f64,
    /// Detected photons at or above which a window counts as bright.
    pub detection_threshold: u64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        ReadoutModel {
            emission_interval: 2.0e-7,
            detection_efficiency: 0.01,
            photons_needed: 100,
            qubit_e_lifetime: 2.0e-3,
            trap_probability_per_cycle: 1e-6,
            nu0: 8.0e7,
            homogeneous_linewidth: 5.0e7,
            detection_threshold: 1,
        }
    }
}

/// Named read-out system parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutPreset {
    pub name: String,
    pub homogeneous_linewidth: f64,
    pub excited_lifetime: f64,
}

/// Ce³⁺ 4f-5d in YPO₄.
pub fn ce_preset() -> ReadoutPreset {
    ReadoutPreset { name: "ce_ypo4".into(), homogeneous_linewidth: 5.0e7, excited_lifetime: 2.0e-8 }
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<(), ReadoutError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.emission_interval) {
            return Err(param("emission_interval", "must be > 0"));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(param("detection_efficiency", "must be in (0, 1]"));
        }
        if self.photons_needed == 0 {
            return Err(param("photons_needed", "must be >= 1"));
        }
        if !pos(self.qubit_e_lifetime) {
            return Err(param("qubit_e_lifetime", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.trap_probability_per_cycle) {
            return Err(param("trap_probability_per_cycle", "must be in [0, 1)"));
        }
        if !pos(self.nu0) {
            return Err(param("nu0", "must be > 0"));
        }
        if !pos(self.homogeneous_linewidth) {
            return Err(param("homogeneous_linewidth", "must be > 0"));
        }
        if self.detection_threshold == 0 {
            return Err(param("detection_threshold", "must be >= 1"));
        }
        Ok(())
    }

    /// Apply a preset's linewidth.
    pub fn with_preset(mut self, preset: &ReadoutPreset) -> Self {
        self.homogeneous_linewidth = preset.homogeneous_linewidth;
        self
    }

    /// Emission cycles that fit in one read-out window.
    pub fn cycles_per_window(&self) -> u64 {
        (self.qubit_e_lifetime / self.emission_interval).round() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    /// Longest allowed time per emitted photon (s).
    pub required_emission_interval: f64,
    /// Photons that must be emitted for the detected target.
    pub emitted_photons: f64,
    /// Largest per-cycle trapping probability that keeps the success target.
    pub max_trap_probability: f64,
    /// `1 / max_trap_probability`, rounded up: cycles the ion must survive
    /// on average.
    pub required_cycles: u64,
}

pub fn photon_budget(model: &ReadoutModel, success_target: f64) -> Result<PhotonBudget, ReadoutError> {
    model.validate()?;
    if !(success_target > 0.0 && success_target < 1.0) {
        return Err(param("success_target", "must be in (0, 1)"));
    }
    let emitted = model.photons_needed as f64 / model.detection_efficiency;
    let max_trap = -(success_target.ln() / emitted).exp_m1();
    Ok(PhotonBudget {
        required_emission_interval: model.qubit_e_lifetime / emitted,
        emitted_photons: emitted,
        max_trap_probability: max_trap,
        required_cycles: (1.0 / max_trap).ceil() as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub fluoresced: bool,
    pub photons_detected: u64,
    pub trapped: bool,
}

/// Fluorescence during one window with the read-out ion in resonance.
pub(crate) fn fluorescence_window<R: Rng + ?Sized>(model: &ReadoutModel, rng: &mut R) -> ReadoutResult {
    let cycles = model.cycles_per_window();
    let p = model.trap_probability_per_cycle;
    let (emitted, trapped) = if p > 0.0 {
        let before_trap = Geometric::new(p).expect("trap probability in (0, 1)").sample(rng);
        (before_trap.min(cycles), before_trap < cycles)
    } else {
        (cycles, false)
    };
    let mean = emitted as f64 * model.detection_efficiency;
    let photons = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(rng) as u64 } else { 0 };
    ReadoutResult { fluoresced: photons >= model.detection_threshold, photons_detected: photons, trapped }
}

/// Read qubit 1 (the read-out ion's neighbour) given its level.
pub fn readout_qubit<R: Rng + ?Sized>(
    qubit_index: usize,
    level: Level,
    model: &ReadoutModel,
    rng: &mut R,
) -> Result<ReadoutResult, ReadoutError> {
    model.validate()?;
    if qubit_index != 1 {
        return Err(ReadoutError::Routing(qubit_index));
    }
    // the π pulse only moves |0⟩ to |e⟩
    if level == Level::Zero {
        Ok(fluorescence_window(model, rng))
    } else {
        Ok(ReadoutResult { fluoresced: false, photons_detected: 0, trapped: false })
    }
}

/// Linear Stark tuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StarkParams {
    /// Hz per V/cm.
    pub coefficient: f64,
    /// V/cm.
    pub field: f64,
}

impl Default for StarkParams {
    fn default() -> Self {
        StarkParams { coefficient: 35e3, field: 0.0 }
    }
}

impl StarkParams {
    /// Field given in V/m.
    pub fn with_si_field(mut self, v_per_m: f64) -> Self {
        self.field = v_per_m / 100.0;
        self
    }
}

pub fn stark_shift(params: &StarkParams) -> Result<f64, ReadoutError> {
    if !(params.coefficient > 0.0 && params.coefficient.is_finite()) {
        return Err(param("coefficient", "must be > 0"));
    }
    if !(params.field >= 0.0 && params.field.is_finite()) {
        return Err(param("field", "must be >= 0"));
    }
    Ok(params.coefficient * params.field)
}

/// Probability that `n` independent uniform picks among `channels` values
/// contain a repeat.
pub fn collision_probability(n: u64, channels: u64) -> Result<f64, ReadoutError> {
    if channels == 0 {
        return Err(param("usable_channels", "must be >= 1"));
    }
    if n > channels {
        return Ok(1.0);
    }
    let c = channels as f64;
    let distinct: f64 = (0..n).map(|k| 1.0 - k as f64 / c).product();
    Ok(1.0 - distinct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn budget_defaults() {
        let b = photon_budget(&ReadoutModel::default(), 0.99).unwrap();
        assert_eq!(b.required_emission_interval, 2.0e-7);
        assert_eq!(b.emitted_photons, 1e4);
        assert!((b.max_trap_probability - 1.005_033_08e-6).abs() < 1e-13);
        assert!((9.9e5..1.0e6).contains(&(b.required_cycles as f64)));
    }

    #[test]
    fn budget_limits_and_scaling() {
        let m = ReadoutModel { detection_efficiency: 1.0, photons_needed: 1, ..Default::default() };
        assert_eq!(photon_budget(&m, 0.9).unwrap().required_emission_interval, m.qubit_e_lifetime);
        let base = photon_budget(&ReadoutModel::default(), 0.99).unwrap();
        let m2 = ReadoutModel { qubit_e_lifetime: 4e-3, ..Default::default() };
        let doubled = photon_budget(&m2, 0.99).unwrap();
        assert!((doubled.required_emission_interval - 2.0 * base.required_emission_interval).abs() < 1e-22);
        let bad = ReadoutModel { detection_efficiency: 0.0, ..Default::default() };
        assert!(photon_budget(&bad, 0.99).is_err());
    }

    #[test]
    fn bright_qubit_fluoresces() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = ReadoutModel { trap_probability_per_cycle: 0.0, ..Default::default() };
        let n = 2000;
        let mut total = 0;
        for _ in 0..n {
            let r = readout_qubit(1, Level::Zero, &m, &mut rng).unwrap();
            assert!(r.fluoresced && !r.trapped);
            total += r.photons_detected;
        }
        // Poisson(100) mean over 2000 draws: σ = 0.22
        assert!((total as f64 / n as f64 - 100.0).abs() < 1.0);
    }

    #[test]
    fn dark_levels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = ReadoutModel::default();
        for l in [Level::One, Level::Aux] {
            let r = readout_qubit(1, l, &m, &mut rng).unwrap();
            assert_eq!(r, ReadoutResult { fluoresced: false, photons_detected: 0, trapped: false });
        }
        assert_eq!(readout_qubit(2, Level::Zero, &m, &mut rng), Err(ReadoutError::Routing(2)));
    }

    #[test]
    fn trapping_truncates_emission() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = ReadoutModel { trap_probability_per_cycle: 1e-3, ..Default::default() };
        let trapped = (0..2000).filter(|_| readout_qubit(1, Level::Zero, &m, &mut rng).unwrap().trapped).count();
        // 1 - (1 - 1e-3)^1e4 ≈ 1
        assert!(trapped > 1990);
    }

    #[test]
    fn stark_values() {
        let s = |f| stark_shift(&StarkParams { field: f, ..Default::default() }).unwrap();
        assert_eq!(s(1e6), 3.5e10);
        assert_eq!(s(0.0), 0.0);
        assert_eq!(s(1.0), 35e3);
        assert!((s(3.0) + s(5.0) - s(8.0)).abs() < 1e-9);
        let si = StarkParams::default().with_si_field(1e8);
        assert_eq!(stark_shift(&si).unwrap(), 3.5e10);
    }

    #[test]
    fn birthday_numbers() {
        assert_eq!(collision_probability(1, 10).unwrap(), 0.0);
        assert_eq!(collision_probability(2, 2).unwrap(), 0.5);
        assert_eq!(collision_probability(5, 3).unwrap(), 1.0);
        let mut q = 1.0;
        for k in 0..23 {
            q *= (365.0 - k as f64) / 365.0;
        }
        assert!((collision_probability(23, 365).unwrap() - (1.0 - q)).abs() < 1e-12);
        assert!((collision_probability(23, 365).unwrap() - 0.5073).abs() < 1e-4);
    }
}
