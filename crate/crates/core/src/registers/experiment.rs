//! Seeded Monte Carlo census over many independent crystals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analytic_nbar, census_both, CensusResult, RegisterError};
use crate::crystal::{coupling_graph, generate_crystal, BusChannel, ChannelPlan, CouplingParams, CrystalParams};
use crate::seeding::derive_seed;

/// Frequency layout: `n` qubit channels at `spacing, 2·spacing, …`, the bus
/// channel one spacing above the last, total bandwidth one more spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusLayout {
    pub n_qubits: u32,
    pub channel_width: f64,
    pub vacated_width: f64,
    pub spacing: f64,
}

impl CensusLayout {
    pub fn with_width(n_qubits: u32, channel_width: f64) -> Self {
        CensusLayout { n_qubits, channel_width, vacated_width: 2.0 * channel_width, spacing: 3.0 * channel_width }
    }

    pub fn plan(&self) -> ChannelPlan {
        ChannelPlan::evenly_spaced(
            self.n_qubits as usize,
            self.spacing,
            self.spacing,
            self.channel_width,
            self.vacated_width,
        )
    }

    pub fn bus_center(&self) -> f64 {
        self.spacing * (self.n_qubits as f64 + 1.0)
    }

    pub fn bandwidth(&self) -> f64 {
        self.spacing * (self.n_qubits as f64 + 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusExperiment {
    pub layout: CensusLayout,
    /// Mean number of ions of one channel inside a blockade ball.
    pub nbar: f64,
    pub coupling: CouplingParams,
    pub dmu: f64,
    /// Box side in blockade radii.
    pub box_in_radii: f64,
    /// Mean number of bus candidates per crystal; sets the bus width.
    pub bus_candidates: f64,
    pub crystals: u64,
    pub seed: u64,
}

impl CensusExperiment {
    pub fn radius(&self) -> f64 {
        self.coupling.blockade_radius(self.dmu)
    }

    pub fn density(&self) -> f64 {
        let l = &self.layout;
        let unit = analytic_nbar(1.0, self.radius(), l.channel_width, l.bandwidth());
        self.nbar / unit
    }

    pub fn box_side(&self) -> f64 {
        self.box_in_radii * self.radius()
    }

    pub fn bus(&self) -> BusChannel {
        let l = &self.layout;
        let per_hz = self.density() * self.box_side().powi(3) / l.bandwidth();
        BusChannel { center: l.bus_center(), width: self.bus_candidates / per_hz }
    }

    pub fn validate(&self) -> Result<(), RegisterError> {
        self.coupling.validate()?;
        if !(self.nbar > 0.0 && self.nbar.is_finite()) {
            return Err(RegisterError::Domain(format!("nbar {} must be > 0", self.nbar)));
        }
        if !(self.box_in_radii >= 3.0) {
            return Err(RegisterError::Domain("box must span at least 3 blockade radii".into()));
        }
        if !(self.bus_candidates > 0.0) {
            return Err(RegisterError::Domain("bus_candidates must be > 0".into()));
        }
        let plan = self.layout.plan();
        plan.validate()?;
        self.bus().validate(&plan)?;
        Ok(())
    }

    fn crystal_params(&self, index: u64) -> CrystalParams {
        CrystalParams {
            box_side: self.box_side(),
            density: self.density(),
            bandwidth: self.layout.bandwidth(),
            dmu_default: self.dmu,
            seed: derive_seed(self.seed, "census", index),
        }
    }

    /// Census of crystal number `index`: `(bus, clique)`.
    pub fn run_one(&self, index: u64) -> Result<(CensusResult, CensusResult), RegisterError> {
        let plan = self.layout.plan();
        let bus = self.bus();
        let full = generate_crystal(&self.crystal_params(index))?;
        // other frequencies play no part in the register
        let crystal = full.filtered(|i| plan.channel_of_shift(i.shift).is_some() || bus.contains(i.shift));
        let graph = coupling_graph(&crystal, &self.coupling)?;
        census_both(&crystal, &graph, &plan, &bus)
    }

    /// Pooled census over all crystals; the result does not depend on the
    /// number of worker threads.
    pub fn run(&self) -> Result<(CensusResult, CensusResult), RegisterError> {
        self.validate()?;
        let per: Vec<(CensusResult, CensusResult)> =
            (0..self.crystals).into_par_iter().map(|i| self.run_one(i)).collect::<Result<_, _>>()?;
        let n = self.layout.n_qubits;
        let zero = (
            CensusResult::from_counts(super::Architecture::Bus, n, 0, 0),
            CensusResult::from_counts(super::Architecture::Clique, n, 0, 0),
        );
        Ok(per.iter().fold(zero, |acc, (b, c)| (acc.0.merge(b), acc.1.merge(c))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(n: u32, nbar: f64) -> CensusExperiment {
        CensusExperiment {
            layout: CensusLayout::with_width(n, 1e6),
            nbar,
            coupling: CouplingParams::default(),
            dmu: 0.8e-31,
            box_in_radii: 8.0,
            bus_candidates: 1.0,
            crystals: 200,
            seed: 11,
        }
    }

    #[test]
    fn density_reproduces_nbar() {
        let e = exp(2, 1.3);
        let l = e.layout;
        let back = analytic_nbar(e.density(), e.radius(), l.channel_width, l.bandwidth());
        assert!((back - 1.3).abs() < 1e-12);
    }

    #[test]
    fn bus_width_sets_candidate_count() {
        let e = CensusExperiment { crystals: 400, ..exp(1, 1.0) };
        let (b, _) = e.run().unwrap();
        // Poisson(1) per crystal: 400 ± 3·20
        assert!((b.trials as f64 - 400.0).abs() < 60.0, "{}", b.trials);
    }

    #[test]
    fn deterministic() {
        let e = exp(2, 1.0);
        assert_eq!(e.run().unwrap(), e.run().unwrap());
    }

    #[test]
    fn clique_never_exceeds_bus() {
        let (b, c) = exp(3, 1.0).run().unwrap();
        assert_eq!(b.trials, c.trials);
        assert!(c.hits <= b.hits);
    }
}
