//! Classical bookkeeping of register initialization by hole burning.

use super::RegisterError;
use crate::crystal::{channel_of, BusChannel, ChannelPlan, CouplingGraph, Crystal};
use crate::level::{Level, Species};

/// Move to `aux` every ion that cannot be part of a bus-star register.
///
/// Cleared are dopants in the vacated margin around each channel, bus ions
/// that lack a coupled ion in some channel, and channel ions coupled to no
/// remaining bus ion. The last two rules are iterated to a fixpoint, so the
/// result is idempotent. Ions outside all windows and read-out ions are left
/// alone.
pub fn holeburn_simulate(
    crystal: &Crystal,
    graph: &CouplingGraph,
    plan: &ChannelPlan,
    bus: &BusChannel,
) -> Result<Crystal, RegisterError> {
    plan.validate()?;
    bus.validate(plan)?;
    if graph.node_count() != crystal.len() {
        return Err(RegisterError::Domain("graph was built from a different crystal".into()));
    }
    let ions = crystal.ions();
    let mut levels: Vec<Level> = ions.iter().map(|i| i.level).collect();
    let dopant = |id: usize| ions[id].species == Species::QubitDopant;
    let channel: Vec<Option<usize>> = ions.iter().map(|i| channel_of(plan, i)).collect();
    let is_bus: Vec<bool> = ions.iter().map(|i| i.species == Species::QubitDopant && bus.contains(i.shift)).collect();

    for (id, ion) in ions.iter().enumerate() {
        if dopant(id) && channel[id].is_none() && plan.in_vacated_region(ion.shift) {
            levels[id] = Level::Aux;
        }
    }

    loop {
        let mut changed = false;
        for id in 0..ions.len() {
            if !is_bus[id] || levels[id] == Level::Aux {
                continue;
            }
            let mut seen = vec![false; plan.len()];
            for &(nb, _) in graph.neighbors(id as u32) {
                let nb = nb as usize;
                if let (Some(k), true) = (channel[nb], levels[nb] != Level::Aux) {
                    seen[k] = true;
                }
            }
            if !seen.iter().all(|&s| s) {
                levels[id] = Level::Aux;
                changed = true;
            }
        }
        for id in 0..ions.len() {
            if channel[id].is_none() || levels[id] == Level::Aux {
                continue;
            }
            let anchored = graph
                .neighbors(id as u32)
                .iter()
                .any(|&(nb, _)| is_bus[nb as usize] && levels[nb as usize] != Level::Aux);
            if !anchored {
                levels[id] = Level::Aux;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(crystal.with_levels(&levels))
}
