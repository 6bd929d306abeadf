//! JSON crystal files.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "params": {"box_side": 2e-8, "density": 1e26, "bandwidth": 1e9, "dmu_default": 8e-32, "seed": 7},
//!   "ions": [{"id": 0, "pos": [1e-9, 2e-9, 3e-9], "shift": 12.5, "dmu": 8e-32,
//!             "species": "qubit_dopant", "level": "zero"}]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Crystal, CrystalError, CrystalParams, Ion};
use crate::level::{Level, Species};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalFile {
    pub format_version: u32,
    pub params: CrystalParams,
    pub ions: Vec<IonRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonRecord {
    pub id: u32,
    pub pos: [f64; 3],
    pub shift: f64,
    pub dmu: f64,
    pub species: Species,
    pub level: Level,
}

impl From<&Crystal> for CrystalFile {
    fn from(c: &Crystal) -> Self {
        CrystalFile {
            format_version: FORMAT_VERSION,
            params: *c.params(),
            ions: c
                .ions()
                .iter()
                .map(|i| IonRecord {
                    id: i.id,
                    pos: i.position,
                    shift: i.shift,
                    dmu: i.dmu,
                    species: i.species,
                    level: i.level,
                })
                .collect(),
        }
    }
}

impl TryFrom<CrystalFile> for Crystal {
    type Error = CrystalError;

    fn try_from(f: CrystalFile) -> Result<Self, Self::Error> {
        if f.format_version != FORMAT_VERSION {
            return Err(CrystalError::Schema {
                field: "format_version".into(),
                reason: format!("unsupported version {} (expected {FORMAT_VERSION})", f.format_version),
            });
        }
        f.params.validate().map_err(|e| match e {
            CrystalError::Param { field, reason } => CrystalError::Schema { field: format!("params.{field}"), reason },
            other => other,
        })?;
        let ions = f
            .ions
            .into_iter()
            .map(|r| Ion { id: r.id, position: r.pos, shift: r.shift, dmu: r.dmu, species: r.species, level: r.level })
            .collect();
        Crystal::new(f.params, ions).map_err(|e| match e {
            // Crystal::new reports the internal field name for positions
            CrystalError::Schema { field, reason } => CrystalError::Schema { field: field.replace("position", "pos"), reason },
            other => other,
        })
    }
}

pub fn crystal_to_json(crystal: &Crystal) -> String {
    serde_json::to_string_pretty(&CrystalFile::from(crystal)).expect("crystal serializes")
}

pub fn crystal_from_json(text: &str) -> Result<Crystal, CrystalError> {
    let file: CrystalFile = serde_json::from_str(text).map_err(|e| CrystalError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Crystal::try_from(file)
}

pub fn save_crystal(crystal: &Crystal, path: impl AsRef<Path>) -> Result<(), CrystalError> {
    let mut text = crystal_to_json(crystal);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_crystal(path: impl AsRef<Path>) -> Result<Crystal, CrystalError> {
    crystal_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::generate_crystal;

    fn params(density: f64) -> CrystalParams {
        CrystalParams { box_side: 5e-8, density, bandwidth: 3e9, dmu_default: 0.8e-31, seed: 42 }
    }

    #[test]
    fn empty_crystal_round_trips() {
        let c = generate_crystal(&params(0.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        save_crystal(&c, &path).unwrap();
        assert_eq!(load_crystal(&path).unwrap(), c);
    }

    #[test]
    fn large_crystal_round_trips_bit_exactly() {
        let c = generate_crystal(&params(1e4 / 1.25e-22)).unwrap();
        assert!(c.len() > 9_000);
        let back = crystal_from_json(&crystal_to_json(&c)).unwrap();
        for (a, b) in c.ions().iter().zip(back.ions()) {
            for k in 0..3 {
                assert_eq!(a.position[k].to_bits(), b.position[k].to_bits());
            }
            assert_eq!(a.shift.to_bits(), b.shift.to_bits());
        }
        assert_eq!(back, c);
    }

    #[test]
    fn negative_dmu_rejected_with_field() {
        let text = r#"{"format_version":1,
            "params":{"box_side":1e-8,"density":0,"bandwidth":1e9,"dmu_default":1e-31,"seed":0},
            "ions":[{"id":0,"pos":[1e-9,1e-9,1e-9],"shift":1.0,"dmu":1e-31,"species":"qubit_dopant","level":"zero"},
                    {"id":1,"pos":[2e-9,1e-9,1e-9],"shift":1.0,"dmu":-1e-31,"species":"qubit_dopant","level":"zero"}]}"#;
        match crystal_from_json(text) {
            Err(CrystalError::Schema { field, .. }) => assert_eq!(field, "ions[1].dmu"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\n\"format_version\": 1,\n\"params\": oops\n}";
        match crystal_from_json(text) {
            Err(CrystalError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_box_position_names_axis() {
        let text = r#"{"format_version":1,
            "params":{"box_side":1e-8,"density":0,"bandwidth":1e9,"dmu_default":1e-31,"seed":0},
            "ions":[{"id":0,"pos":[1e-9,2e-8,1e-9],"shift":1.0,"dmu":1e-31,"species":"readout","level":"e"}]}"#;
        match crystal_from_json(text) {
            Err(CrystalError::Schema { field, .. }) => assert_eq!(field, "ions[0].pos[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
