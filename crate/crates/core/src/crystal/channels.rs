use serde::{Deserialize, Serialize};

use super::{Crystal, CrystalError, Ion};
use crate::level::Species;

/// Qubit frequency channels cut into the inhomogeneous profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    /// Channel centre frequencies, Hz.
    pub centers: Vec<f64>,
    /// Full width of each channel, Hz. Membership is the closed interval
    /// `|shift - center| <= channel_width / 2`.
    pub channel_width: f64,
    /// Full width of the hole burnt around each channel, Hz.
    pub vacated_width: f64,
}

impl ChannelPlan {
    pub fn validate(&self) -> Result<(), CrystalError> {
        if !(self.channel_width > 0.0) {
            return Err(CrystalError::Plan("channel_width must be > 0".into()));
        }
        if !(self.channel_width < self.vacated_width) {
            return Err(CrystalError::Plan("channel_width must be < vacated_width".into()));
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return Err(CrystalError::Plan("channel centres must be finite".into()));
        }
        for (i, a) in self.centers.iter().enumerate() {
            for (j, b) in self.centers.iter().enumerate().skip(i + 1) {
                if (a - b).abs() <= self.vacated_width {
                    return Err(CrystalError::Plan(format!(
                        "channels {i} and {j} are separated by {} Hz <= vacated width",
                        (a - b).abs()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `n` channels at `spacing` intervals starting from `first`.
    pub fn evenly_spaced(n: usize, first: f64, spacing: f64, channel_width: f64, vacated_width: f64) -> Self {
        ChannelPlan {
            centers: (0..n).map(|k| first + k as f64 * spacing).collect(),
            channel_width,
            vacated_width,
        }
    }

    /// Channel containing `shift`, if any.
    pub fn channel_of_shift(&self, shift: f64) -> Option<usize> {
        let half = 0.5 * self.channel_width;
        self.centers.iter().position(|c| (shift - c).abs() <= half)
    }

    /// True when `shift` lies in a burnt hole but outside its channel.
    pub fn in_vacated_region(&self, shift: f64) -> bool {
        let (hc, hv) = (0.5 * self.channel_width, 0.5 * self.vacated_width);
        self.centers.iter().any(|c| {
            let d = (shift - c).abs();
            d > hc && d <= hv
        })
    }
}

/// The bus channel of a register layout.
///
/// Its width is independent of the qubit channel width so that the density
/// of bus candidates can be tuned without touching the qubit occupancy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusChannel {
    pub center: f64,
    pub width: f64,
}

impl BusChannel {
    pub fn validate(&self, plan: &ChannelPlan) -> Result<(), CrystalError> {
        if !(self.width > 0.0 && self.width < plan.vacated_width) {
            return Err(CrystalError::Plan("bus width must be in (0, vacated_width)".into()));
        }
        if let Some(k) = plan.centers.iter().position(|c| (c - self.center).abs() <= plan.vacated_width) {
            return Err(CrystalError::Plan(format!("bus channel overlaps qubit channel {k}")));
        }
        Ok(())
    }

    pub fn contains(&self, shift: f64) -> bool {
        (shift - self.center).abs() <= 0.5 * self.width
    }
}

/// Channel index of an ion, counting only qubit dopants.
pub fn channel_of(plan: &ChannelPlan, ion: &Ion) -> Option<usize> {
    match ion.species {
        Species::QubitDopant => plan.channel_of_shift(ion.shift),
        Species::Readout => None,
    }
}

/// Ion ids per channel, in id order.
pub fn assign_channels(crystal: &Crystal, plan: &ChannelPlan) -> Result<Vec<Vec<u32>>, CrystalError> {
    plan.validate()?;
    let mut out = vec![Vec::new(); plan.len()];
    for ion in crystal.ions() {
        if let Some(k) = channel_of(plan, ion) {
            out[k].push(ion.id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{generate_crystal, CrystalParams};
    use crate::level::Level;
    use crate::stats::binomial_sigma;

    fn ion(id: u32, shift: f64) -> Ion {
        Ion {
            id,
            position: [1e-9; 3],
            shift,
            dmu: 1e-31,
            species: Species::QubitDopant,
            level: Level::Zero,
        }
    }

    fn params() -> CrystalParams {
        CrystalParams { box_side: 1e-8, density: 0.0, bandwidth: 100.0, dmu_default: 1e-31, seed: 0 }
    }

    #[test]
    fn overlapping_plan_rejected() {
        let plan = ChannelPlan { centers: vec![10.0, 12.0], channel_width: 1.0, vacated_width: 3.0 };
        assert!(matches!(plan.validate(), Err(CrystalError::Plan(_))));
        let plan = ChannelPlan { centers: vec![10.0], channel_width: 3.0, vacated_width: 2.0 };
        assert!(plan.validate().is_err());
    }

    #[test]
    fn empty_channels() {
        let c = Crystal::new(params(), vec![ion(0, 50.0), ion(1, 70.0)]).unwrap();
        let plan = ChannelPlan { centers: vec![10.0, 20.0], channel_width: 1.0, vacated_width: 4.0 };
        assert_eq!(assign_channels(&c, &plan).unwrap(), vec![Vec::<u32>::new(), vec![]]);
    }

    #[test]
    fn channel_edge_is_inclusive() {
        let c = Crystal::new(params(), vec![ion(0, 9.5), ion(1, 20.5), ion(2, 20.5000001)]).unwrap();
        let plan = ChannelPlan { centers: vec![10.0, 20.0], channel_width: 1.0, vacated_width: 4.0 };
        assert_eq!(assign_channels(&c, &plan).unwrap(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn readout_ions_never_assigned() {
        let mut r = ion(0, 10.0);
        r.species = Species::Readout;
        let c = Crystal::new(params(), vec![r]).unwrap();
        let plan = ChannelPlan { centers: vec![10.0], channel_width: 1.0, vacated_width: 4.0 };
        assert_eq!(assign_channels(&c, &plan).unwrap(), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn occupancy_is_poisson_one() {
        // mean channel occupancy 1: density·V·(w/B) = 1
        let plan = ChannelPlan { centers: vec![50.0], channel_width: 1.0, vacated_width: 2.0 };
        let base = CrystalParams {
            box_side: 1e-8,
            density: 100.0 / 1e-24,
            bandwidth: 100.0,
            dmu_default: 1e-31,
            seed: 0,
        };
        let trials = 10_000u64;
        let singles = (0..trials)
            .filter(|&s| {
                let c = generate_crystal(&CrystalParams { seed: s, ..base }).unwrap();
                assign_channels(&c, &plan).unwrap()[0].len() == 1
            })
            .count();
        let p = (-1.0f64).exp();
        let frac = singles as f64 / trials as f64;
        assert!((frac - p).abs() <= 3.0 * binomial_sigma(p, trials), "{frac}");
    }
}
