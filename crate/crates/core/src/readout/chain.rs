//! Ground-truth chains of qubits hanging off a read-out ion.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ReadoutError;
use crate::crystal::{CouplingParams, Ion};
use crate::level::{Level, Species};

/// Read-out ion plus qubits `1..=n`, where qubit 1 couples to the read-out
/// ion and qubit `k` to qubit `k-1`. Transition frequencies are the ions'
/// `shift` fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthChain {
    pub readout_ion: Option<Ion>,
    pub qubits: Vec<Ion>,
    /// `couplings[0]` is read-out to qubit 1, `couplings[k]` qubit k to k+1 (Hz).
    pub couplings: Vec<f64>,
    pub g_min: f64,
    /// Read-out resonance with qubit 1 excited (Hz).
    pub nu0: f64,
    pub readout_band: (f64, f64),
    pub qubit_band: (f64, f64),
}

impl GroundTruthChain {
    pub fn validate(&self) -> Result<(), ReadoutError> {
        let bad = |m: String| Err(ReadoutError::Chain(m));
        if self.couplings.len() != self.qubits.len() {
            return bad(format!("{} couplings for {} qubits", self.couplings.len(), self.qubits.len()));
        }
        if !(self.g_min > 0.0) {
            return bad("g_min must be > 0".into());
        }
        if let Some(k) = self.couplings.iter().position(|&g| !(g >= self.g_min)) {
            return bad(format!("link {k} is below the blockade threshold"));
        }
        let inside = |(lo, hi): (f64, f64), f: f64| lo <= f && f < hi;
        if !(self.readout_band.0 < self.readout_band.1 && self.qubit_band.0 < self.qubit_band.1) {
            return bad("empty scan band".into());
        }
        if let Some(r) = &self.readout_ion {
            if !inside(self.readout_band, r.shift) || !inside(self.readout_band, self.nu0) {
                return bad("read-out frequencies outside the read-out band".into());
            }
        }
        if let Some(k) = self.qubits.iter().position(|q| !inside(self.qubit_band, q.shift)) {
            return bad(format!("qubit {} outside the qubit band", k + 1));
        }
        Ok(())
    }

    pub fn qubit_freqs(&self) -> Vec<f64> {
        self.qubits.iter().map(|q| q.shift).collect()
    }

    /// Smallest frequency gap between any two qubits.
    pub fn min_qubit_gap(&self) -> f64 {
        let f = self.qubit_freqs();
        let mut gap = f64::INFINITY;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                gap = gap.min((f[i] - f[j]).abs());
            }
        }
        gap
    }
}

/// Layout used by [`random_chain`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainGeometry {
    /// Distance between neighbours on a straight line (m).
    pub spacing: f64,
    pub coupling: CouplingParams,
    pub dmu: f64,
    pub readout_band: (f64, f64),
    pub qubit_band: (f64, f64),
    /// Qubit frequencies are redrawn until all gaps exceed this (Hz).
    pub min_separation: f64,
}

impl Default for ChainGeometry {
    fn default() -> Self {
        // 1.5 nm neighbours couple at ≈24 MHz; next-nearest (3 nm) stay
        // below the 10 MHz threshold
        ChainGeometry {
            spacing: 1.5e-9,
            coupling: CouplingParams::default(),
            dmu: 0.8e-31,
            readout_band: (0.0, 2.0e8),
            qubit_band: (0.0, 5.0e8),
            min_separation: 2.0e6,
        }
    }
}

/// Straight chain with random, non-colliding qubit frequencies.
pub fn random_chain<R: Rng + ?Sized>(
    n_qubits: usize,
    geom: &ChainGeometry,
    rng: &mut R,
) -> Result<GroundTruthChain, ReadoutError> {
    geom.coupling.validate().map_err(|e| ReadoutError::Chain(e.to_string()))?;
    let g = geom.coupling.strength_at(geom.dmu, geom.dmu, geom.spacing);
    let g_next = geom.coupling.strength_at(geom.dmu, geom.dmu, 2.0 * geom.spacing);
    if g < geom.coupling.g_min || g_next >= geom.coupling.g_min {
        return Err(ReadoutError::Chain("spacing must couple neighbours only".into()));
    }
    let (qlo, qhi) = geom.qubit_band;
    if (qhi - qlo) <= geom.min_separation * 2.0 * n_qubits as f64 {
        return Err(ReadoutError::Chain("qubit band too narrow for the requested separation".into()));
    }
    let mut freqs: Vec<f64> = Vec::with_capacity(n_qubits);
    while freqs.len() < n_qubits {
        let f = rng.random_range(qlo..qhi);
        if freqs.iter().all(|&x| (x - f).abs() > geom.min_separation) {
            freqs.push(f);
        }
    }
    let (rlo, rhi) = geom.readout_band;
    if rhi - rlo <= g {
        return Err(ReadoutError::Chain("read-out band narrower than the qubit shift".into()));
    }
    let nu_r = rng.random_range(rlo..rhi - g);
    let ion = |id: u32, x: f64, shift: f64, species| Ion {
        id,
        position: [x, 0.0, 0.0],
        shift,
        dmu: geom.dmu,
        species,
        level: Level::Zero,
    };
    let qubits = freqs
        .iter()
        .enumerate()
        .map(|(k, &f)| ion(k as u32 + 1, geom.spacing * (k as f64 + 1.0), f, Species::QubitDopant))
        .collect();
    let chain = GroundTruthChain {
        readout_ion: Some(ion(0, 0.0, nu_r, Species::Readout)),
        qubits,
        couplings: vec![g; n_qubits],
        g_min: geom.coupling.g_min,
        nu0: nu_r + g,
        readout_band: geom.readout_band,
        qubit_band: geom.qubit_band,
    };
    chain.validate()?;
    Ok(chain)
}
