//! Moving a qubit value one step down the chain towards the read-out ion.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GroundTruthChain, ReadoutError};
use crate::level::Level;
use crate::qsim::{apply_pulse, BlockadeContext, PulseOp, StateVector};

/// Chain qubits are numbered from 1 (the read-out ion's neighbour).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolStep {
    PumpToZero { qubit: usize },
    /// Flip `target` on `0↔1` when `control` is in `|1⟩`.
    Cnot { control: usize, target: usize },
}

/// Pump `to` into `|0⟩`, then copy `from` onto it with a CNOT.
pub fn transfer_state(chain: &GroundTruthChain, from: usize, to: usize) -> Result<Vec<ProtocolStep>, ReadoutError> {
    if to == 0 || from != to + 1 || from > chain.qubits.len() {
        return Err(ReadoutError::Routing(from));
    }
    Ok(vec![ProtocolStep::PumpToZero { qubit: to }, ProtocolStep::Cnot { control: from, target: to }])
}

fn chain_context(chain: &GroundTruthChain) -> BlockadeContext {
    let mut ctx = BlockadeContext::new(chain.g_min);
    for k in 1..chain.qubits.len() {
        ctx.set(chain.qubits[k - 1].id, chain.qubits[k].id, chain.couplings[k]);
    }
    ctx
}

/// Run steps on a state over the chain's qubit ions.
///
/// The CNOT is built from blockade: exciting a control in `|0⟩` detunes
/// the target, whose `0 → e → 1 → …` pulse train otherwise swaps `|0⟩` and
/// `|1⟩`.
pub fn execute_steps<R: Rng + ?Sized>(
    state: &StateVector,
    chain: &GroundTruthChain,
    steps: &[ProtocolStep],
    rng: &mut R,
) -> Result<StateVector, ReadoutError> {
    let ctx = chain_context(chain);
    let id = |k: usize| {
        chain.qubits.get(k.wrapping_sub(1)).map(|q| q.id).ok_or(ReadoutError::Routing(k))
    };
    let (ze, e1) = ((Level::Zero, Level::E), (Level::E, Level::One));
    let mut s = state.clone();
    for step in steps {
        match *step {
            ProtocolStep::PumpToZero { qubit } => s.reset(id(qubit)?, Level::Zero, rng)?,
            ProtocolStep::Cnot { control, target } => {
                let (c, t) = (id(control)?, id(target)?);
                if !ctx.blocks(c, t) {
                    return Err(ReadoutError::Routing(control));
                }
                for op in [
                    PulseOp::ideal(c, ze, PI, 0.0),
                    PulseOp::ideal(t, ze, PI, 0.0),
                    PulseOp::ideal(t, e1, PI, 0.0),
                    PulseOp::ideal(t, ze, PI, 0.0),
                    PulseOp::ideal(c, ze, PI, PI),
                ] {
                    s = apply_pulse(&s, &op, &ctx)?;
                }
            }
        }
    }
    Ok(s)
}
