//! Counting bus candidates that see exactly one ion per channel.

use serde::{Deserialize, Serialize};

use super::RegisterError;
use crate::crystal::{channel_of, BusChannel, ChannelPlan, CouplingGraph, Crystal};
use crate::level::{Level, Species};
use crate::stats::wilson95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Every register ion must couple to every other.
    Clique,
    /// Register ions only need to couple to the central bus ion.
    Bus,
}

impl Architecture {
    pub fn label(self) -> &'static str {
        match self {
            Architecture::Clique => "clique",
            Architecture::Bus => "bus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub architecture: Architecture,
    pub n_qubits: u32,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
}

impl CensusResult {
    pub fn from_counts(architecture: Architecture, n_qubits: u32, trials: u64, hits: u64) -> Self {
        let p_hat = if n_qubits == 0 {
            1.0
        } else if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let ci95 = if n_qubits == 0 { (1.0, 1.0) } else { wilson95(hits, trials) };
        CensusResult { architecture, n_qubits, trials, hits, p_hat, ci95 }
    }

    /// Pool two independent estimates of the same quantity.
    pub fn merge(&self, other: &CensusResult) -> CensusResult {
        assert_eq!((self.architecture, self.n_qubits), (other.architecture, other.n_qubits));
        Self::from_counts(self.architecture, self.n_qubits, self.trials + other.trials, self.hits + other.hits)
    }

    /// Binomial standard error of `p_hat`.
    pub fn sigma(&self) -> f64 {
        crate::stats::binomial_sigma(self.p_hat, self.trials)
    }

    pub fn row(&self, nbar_analytic: f64, p_eq1: f64) -> CensusRow {
        CensusRow {
            architecture: self.architecture,
            n: self.n_qubits,
            nbar_analytic,
            trials: self.trials,
            hits: self.hits,
            p_hat: self.p_hat,
            ci_lo: self.ci95.0,
            ci_hi: self.ci95.1,
            p_eq1,
        }
    }
}

/// One line of a census sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub architecture: Architecture,
    #[serde(rename = "N")]
    pub n: u32,
    pub nbar_analytic: f64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p_eq1: f64,
}

fn is_live_dopant(crystal: &Crystal, id: u32) -> bool {
    crystal.ion(id).is_some_and(|i| i.species == Species::QubitDopant && i.level != Level::Aux)
}

/// Registers found around one candidate: `(bus, clique)`.
fn inspect(crystal: &Crystal, graph: &CouplingGraph, plan: &ChannelPlan, candidate: u32) -> (bool, bool) {
    let mut picks = vec![None; plan.len()];
    for &(nb, _) in graph.neighbors(candidate) {
        if !is_live_dopant(crystal, nb) {
            continue;
        }
        if let Some(k) = channel_of(plan, &crystal.ions()[nb as usize]) {
            picks[k] = match picks[k] {
                None => Some(Some(nb)),
                Some(_) => Some(None),
            };
        }
    }
    let chosen: Option<Vec<u32>> = picks.into_iter().map(|p| p.flatten()).collect();
    let Some(chosen) = chosen else {
        return (false, false);
    };
    let clique = chosen
        .iter()
        .enumerate()
        .all(|(i, &a)| chosen[i + 1..].iter().all(|&b| graph.are_coupled(a, b)));
    (true, clique)
}

/// Census of both architectures over every live ion of the bus channel.
pub fn census_both(
    crystal: &Crystal,
    graph: &CouplingGraph,
    plan: &ChannelPlan,
    bus: &BusChannel,
) -> Result<(CensusResult, CensusResult), RegisterError> {
    plan.validate()?;
    bus.validate(plan)?;
    if graph.node_count() != crystal.len() {
        return Err(RegisterError::Domain("graph was built from a different crystal".into()));
    }
    let n = plan.len() as u32;
    let (mut trials, mut bus_hits, mut clique_hits) = (0u64, 0u64, 0u64);
    for ion in crystal.ions() {
        if !(bus.contains(ion.shift) && is_live_dopant(crystal, ion.id)) {
            continue;
        }
        trials += 1;
        let (b, c) = inspect(crystal, graph, plan, ion.id);
        bus_hits += u64::from(b);
        clique_hits += u64::from(c);
    }
    Ok((
        CensusResult::from_counts(Architecture::Bus, n, trials, bus_hits),
        CensusResult::from_counts(Architecture::Clique, n, trials, clique_hits),
    ))
}

/// Fraction of bus-channel ions that anchor a complete register.
///
/// Bus mode: the candidate has exactly one coupled ion in each channel.
/// Clique mode: additionally those ions are pairwise coupled.
pub fn census(
    crystal: &Crystal,
    graph: &CouplingGraph,
    plan: &ChannelPlan,
    bus: &BusChannel,
    architecture: Architecture,
) -> Result<CensusResult, RegisterError> {
    let (b, c) = census_both(crystal, graph, plan, bus)?;
    Ok(match architecture {
        Architecture::Bus => b,
        Architecture::Clique => c,
    })
}
