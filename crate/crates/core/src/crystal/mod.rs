//! Random doped crystals and the dipole-coupling model.
//!
//! A [`Crystal`] is a homogeneous Poisson point process in a periodic cubic
//! box. Each ion carries an inhomogeneous shift drawn uniformly from
//! `[0, bandwidth)`, independent of its position. Couplings follow an
//! isotropic inverse-cube law
//!
//! ```text
//! g(a, b) = g_ref · (dmu_a · dmu_b / dmu_ref²) · (r_ref / r)³
//! ```
//!
//! with `r` the minimum-image distance. The default calibration gives 80 MHz
//! for two 0.8e-31 C·m dipoles one nanometre apart.

mod channels;
mod graph;
mod io;

pub use channels::{assign_channels, channel_of, BusChannel, ChannelPlan};
pub use graph::{coupling_graph, coupling_graph_brute_force, CouplingGraph, Edge};
pub use io::{load_crystal, save_crystal, CrystalFile, FORMAT_VERSION};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{Level, Species};
use crate::seeding::rng_from_seed;

#[derive(Debug, Error)]
pub enum CrystalError {
    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: String, reason: String },
    #[error("degenerate geometry: ions {a} and {b} coincide")]
    Coincident { a: u32, b: u32 },
    #[error("invalid channel plan: {0}")]
    Plan(String),
    #[error("crystal file schema error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("crystal file schema error in `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CrystalError {
    fn param(field: &str, reason: impl Into<String>) -> Self {
        CrystalError::Param { field: field.to_string(), reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ion {
    pub id: u32,
    /// Position in metres, inside `[0, box_side)³`.
    pub position: [f64; 3],
    /// Inhomogeneous shift in Hz, inside `[0, bandwidth)`.
    pub shift: f64,
    /// Static dipole-moment difference between ground and excited state, C·m.
    pub dmu: f64,
    pub species: Species,
    pub level: Level,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystalParams {
    /// Side of the periodic box, m.
    pub box_side: f64,
    /// Ion number density, m⁻³.
    pub density: f64,
    /// Width of the inhomogeneous profile, Hz.
    pub bandwidth: f64,
    /// Dipole-moment difference assigned to generated ions, C·m.
    pub dmu_default: f64,
    pub seed: u64,
}

impl CrystalParams {
    pub fn validate(&self) -> Result<(), CrystalError> {
        if !(self.box_side.is_finite() && self.box_side > 0.0) {
            return Err(CrystalError::param("box_side", "must be finite and > 0"));
        }
        if !(self.density.is_finite() && self.density >= 0.0) {
            return Err(CrystalError::param("density", "must be finite and >= 0"));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(CrystalError::param("bandwidth", "must be finite and > 0"));
        }
        if !(self.dmu_default.is_finite() && self.dmu_default > 0.0) {
            return Err(CrystalError::param("dmu_default", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.box_side.powi(3)
    }

    /// Expected number of ions in the box.
    pub fn expected_count(&self) -> f64 {
        self.density * self.volume()
    }
}

/// An immutable ion configuration. `ions[i].id == i` for every ion.
#[derive(Clone, Debug, PartialEq)]
pub struct Crystal {
    params: CrystalParams,
    ions: Vec<Ion>,
}

impl Crystal {
    /// Assemble a crystal from explicit ions, checking every invariant.
    pub fn new(params: CrystalParams, ions: Vec<Ion>) -> Result<Self, CrystalError> {
        params.validate()?;
        for (i, ion) in ions.iter().enumerate() {
            validate_ion(&params, ion, i).map_err(|(field, reason)| CrystalError::Schema {
                field: format!("ions[{i}].{field}"),
                reason,
            })?;
        }
        Ok(Crystal { params, ions })
    }

    pub fn params(&self) -> &CrystalParams {
        &self.params
    }

    pub fn ions(&self) -> &[Ion] {
        &self.ions
    }

    pub fn len(&self) -> usize {
        self.ions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ions.is_empty()
    }

    pub fn ion(&self, id: u32) -> Option<&Ion> {
        self.ions.get(id as usize)
    }

    /// Copy of this crystal with the levels replaced. `levels` is indexed by id.
    pub fn with_levels(&self, levels: &[Level]) -> Crystal {
        assert_eq!(levels.len(), self.ions.len());
        let ions = self
            .ions
            .iter()
            .zip(levels)
            .map(|(ion, &level)| Ion { level, ..ion.clone() })
            .collect();
        Crystal { params: self.params, ions }
    }

    /// Keep only the ions accepted by `keep`, renumbering ids densely.
    ///
    /// Poisson thinning by an independent mark (such as frequency) is again a
    /// Poisson process, so filtered crystals are valid census inputs.
    pub fn filtered(&self, mut keep: impl FnMut(&Ion) -> bool) -> Crystal {
        let ions = self
            .ions
            .iter()
            .filter(|ion| keep(ion))
            .enumerate()
            .map(|(i, ion)| Ion { id: i as u32, ..ion.clone() })
            .collect();
        Crystal { params: self.params, ions }
    }
}

fn validate_ion(params: &CrystalParams, ion: &Ion, index: usize) -> Result<(), (String, String)> {
    if ion.id as usize != index {
        return Err(("id".into(), format!("expected {index}, found {}", ion.id)));
    }
    for (axis, &x) in ion.position.iter().enumerate() {
        if !(x.is_finite() && (0.0..params.box_side).contains(&x)) {
            return Err((format!("pos[{axis}]"), format!("{x} outside [0, {})", params.box_side)));
        }
    }
    if !(ion.shift.is_finite() && (0.0..params.bandwidth).contains(&ion.shift)) {
        return Err(("shift".into(), format!("{} outside [0, {})", ion.shift, params.bandwidth)));
    }
    if !(ion.dmu.is_finite() && ion.dmu > 0.0) {
        return Err(("dmu".into(), format!("{} must be > 0", ion.dmu)));
    }
    Ok(())
}

/// Draw a crystal: Poisson ion count, i.i.d. uniform positions and shifts.
pub fn generate_crystal(params: &CrystalParams) -> Result<Crystal, CrystalError> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let mean = params.expected_count();
    let count = if mean > 0.0 {
        let dist = Poisson::new(mean).map_err(|e| CrystalError::param("density", e.to_string()))?;
        dist.sample(&mut rng) as usize
    } else {
        0
    };
    let l = params.box_side;
    let ions = (0..count)
        .map(|i| Ion {
            id: i as u32,
            position: [
                rng.random_range(0.0..l),
                rng.random_range(0.0..l),
                rng.random_range(0.0..l),
            ],
            shift: rng.random_range(0.0..params.bandwidth),
            dmu: params.dmu_default,
            species: Species::QubitDopant,
            level: Level::Zero,
        })
        .collect();
    Ok(Crystal { params: *params, ions })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CouplingParams {
    /// Coupling of two reference dipoles at the reference distance, Hz.
    pub g_ref: f64,
    /// Reference distance, m.
    pub r_ref: f64,
    /// Reference dipole-moment difference, C·m.
    pub dmu_ref: f64,
    /// Blockade threshold, Hz.
    pub g_min: f64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        CouplingParams { g_ref: 8.0e7, r_ref: 1.0e-9, dmu_ref: 0.8e-31, g_min: 1.0e7 }
    }
}

impl CouplingParams {
    pub fn validate(&self) -> Result<(), CrystalError> {
        for (name, v) in [
            ("g_ref", self.g_ref),
            ("r_ref", self.r_ref),
            ("dmu_ref", self.dmu_ref),
            ("g_min", self.g_min),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(CrystalError::param(name, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Coupling at distance `r` between dipoles `dmu_a` and `dmu_b`.
    pub fn strength_at(&self, dmu_a: f64, dmu_b: f64, r: f64) -> f64 {
        self.g_ref * (dmu_a * dmu_b / (self.dmu_ref * self.dmu_ref)) * (self.r_ref / r).powi(3)
    }

    /// Blockade radius `R` with `g(R) = g_min` for two equal dipoles `dmu`.
    pub fn blockade_radius(&self, dmu: f64) -> f64 {
        self.r_ref * (self.g_ref * dmu * dmu / (self.dmu_ref * self.dmu_ref * self.g_min)).cbrt()
    }

    /// Threshold giving blockade radius `radius` for two equal dipoles `dmu`.
    pub fn with_radius(self, radius: f64, dmu: f64) -> Self {
        let g_min = self.strength_at(dmu, dmu, radius);
        CouplingParams { g_min, ..self }
    }
}

/// Minimum-image separation vector length in a periodic cube.
pub fn minimum_image_distance(a: &[f64; 3], b: &[f64; 3], box_side: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        let mut d = (a[k] - b[k]).abs();
        if d > 0.5 * box_side {
            d = box_side - d;
        }
        s += d * d;
    }
    s.sqrt()
}

/// Dipole coupling between two ions, Hz. Symmetric in its arguments.
pub fn coupling_strength(
    a: &Ion,
    b: &Ion,
    cp: &CouplingParams,
    box_side: f64,
) -> Result<f64, CrystalError> {
    let r = minimum_image_distance(&a.position, &b.position, box_side);
    if r == 0.0 {
        return Err(CrystalError::Coincident { a: a.id, b: b.id });
    }
    Ok(cp.strength_at(a.dmu, b.dmu, r))
}
