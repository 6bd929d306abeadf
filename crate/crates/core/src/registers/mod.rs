//! Register yield: closed forms, Monte Carlo census, hole burning.

mod census;
mod experiment;
mod holeburn;

pub use census::{census, census_both, Architecture, CensusResult, CensusRow};
pub use experiment::{CensusExperiment, CensusLayout};
pub use holeburn::holeburn_simulate;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Crystal(#[from] crate::crystal::CrystalError),
}

/// One point of the yield formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterStatsQuery {
    pub nbar: f64,
    pub n_qubits: u32,
    pub target_p: f64,
}

impl RegisterStatsQuery {
    pub fn validate(&self) -> Result<(), RegisterError> {
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(RegisterError::Domain(format!("nbar {} must be >= 0", self.nbar)));
        }
        if !(self.target_p > 0.0 && self.target_p < 1.0) {
            return Err(RegisterError::Domain(format!("target_p {} outside (0, 1)", self.target_p)));
        }
        Ok(())
    }
}

/// Probability that a given ion sees exactly one ion in each of `n`
/// channels of mean occupancy `nbar`: `(nbar e^{-nbar})^n`.
pub fn p_register_exact(nbar: f64, n: u32) -> f64 {
    (nbar * (-nbar).exp()).powi(n as i32)
}

/// Probability that every one of `n` channels holds at least one ion:
/// `(1 - e^{-nbar})^n`.
pub fn p_register_postselect(nbar: f64, n: u32) -> f64 {
    (-(-nbar).exp_m1()).powi(n as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequiredNbar {
    /// `ln(N / (1 - P))`, accurate when `1 - P` is small.
    pub approximate: f64,
    /// `-ln(1 - P^{1/N})`.
    pub exact: f64,
}

/// Mean channel occupancy needed for `n` channels all to be populated with
/// probability `target_p`.
pub fn required_nbar(n: u32, target_p: f64) -> Result<RequiredNbar, RegisterError> {
    if n == 0 {
        return Err(RegisterError::Domain("register size must be >= 1".into()));
    }
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(RegisterError::Domain(format!("target_p {target_p} outside (0, 1)")));
    }
    let nf = n as f64;
    Ok(RequiredNbar {
        approximate: (nf / (1.0 - target_p)).ln(),
        exact: -(-(target_p.ln() / nf).exp_m1()).ln(),
    })
}

/// Volume gain `8^{n-2}` from placing the bus at the centre instead of
/// requiring all `n` ions to be mutually within range.
pub fn enhancement_factor(n: u32) -> Result<f64, RegisterError> {
    if n < 2 {
        return Err(RegisterError::Domain(format!("enhancement needs n >= 2, got {n}")));
    }
    Ok(8f64.powi(n as i32 - 2))
}

/// Mean number of ions of one channel inside a blockade ball:
/// `density · (4/3)πR³ · channel_width / bandwidth`.
pub fn analytic_nbar(density: f64, radius: f64, channel_width: f64, bandwidth: f64) -> f64 {
    density * 4.0 / 3.0 * PI * radius.powi(3) * channel_width / bandwidth
}
