//! Reducing every qubit channel to a single ion next to the bus.
//!
//! One round: put the bus in `(|0⟩+|1⟩)/√2`, imprint `e^{inα}` on its `|1⟩`
//! branch through excitation round trips of the `n` channel ions (blocked
//! in the `|0⟩` branch because the bus is then excited), rotate the bus so
//! that its `|0⟩` amplitude is `sin((n-1)α/2)`, copy the bus onto the channel
//! ions, excite and let decay the tagged ions, then undo the copy and reset
//! the bus.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::{apply_gate, Gate};
use super::{BlockadeContext, QsimError, StateVector};
use crate::level::Level;
use crate::seeding::rng_from_seed;

/// `{π, 2π/3, 2π/5, 2π(1 - 1/φ)}`.
pub fn default_alpha_schedule() -> Vec<f64> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    vec![PI, TAU / 3.0, TAU / 5.0, TAU * (1.0 - 1.0 / golden)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistillConfig {
    pub alpha_schedule: Vec<f64>,
    /// Decay probability of a tagged ion per round.
    pub beta: f64,
    pub branch_to_aux: f64,
    pub max_rounds: usize,
    pub seed: u64,
    /// Record the gate sequence of every round.
    pub trace: bool,
}

impl Default for DistillConfig {
    fn default() -> Self {
        DistillConfig {
            alpha_schedule: default_alpha_schedule(),
            beta: 0.05,
            branch_to_aux: 1.0,
            max_rounds: 10_000,
            seed: 0,
            trace: false,
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<(), QsimError> {
        let bad = |m: String| Err(QsimError::InvalidOp(m));
        if self.alpha_schedule.is_empty() {
            return bad("alpha_schedule is empty".into());
        }
        if let Some(a) = self.alpha_schedule.iter().find(|&&a| !(a > 0.0 && a < TAU)) {
            return bad(format!("alpha {a} outside (0, 2π)"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta {} outside (0, 1)", self.beta));
        }
        if !(0.0..=1.0).contains(&self.branch_to_aux) {
            return bad(format!("branch_to_aux {} outside [0, 1]", self.branch_to_aux));
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub branch_to_aux: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundReport {
    /// Ions that decayed from `e` this round (to aux or back to `|0⟩`).
    pub decays: usize,
    pub to_aux: usize,
    /// The bus copy found the channel tagged.
    pub tagged: bool,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub occupancy_before: usize,
    pub alpha: f64,
    pub tagged: bool,
    pub decays: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillOutcome {
    pub final_occupancy: usize,
    pub rounds_used: usize,
    pub per_round_decays: Vec<usize>,
    pub rounds: Vec<RoundRecord>,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<String>,
}

fn rot(ion: u32, transition: (Level, Level), area: f64, phase: f64) -> Gate {
    Gate::Rotation { ion, transition, area, phase, blockade: true }
}

/// Steps 1 to 3 as a gate list: superposition, conditional phase, analysis
/// rotation with its frame correction.
fn phase_steps(bus: u32, channel: &[u32], alpha: f64) -> Vec<Gate> {
    let ze = (Level::Zero, Level::E);
    let mut g = vec![rot(bus, (Level::Zero, Level::One), FRAC_PI_2, FRAC_PI_2), rot(bus, ze, PI, 0.0)];
    for &c in channel {
        g.push(rot(c, ze, PI, 0.0));
        g.push(rot(c, ze, PI, PI - alpha));
    }
    g.push(rot(bus, ze, PI, PI));
    g.push(rot(bus, (Level::Zero, Level::One), FRAC_PI_2, alpha + FRAC_PI_2));
    g.push(Gate::Phase { ion: bus, level: Level::One, angle: -(alpha + FRAC_PI_2) });
    g
}

fn copy_steps(bus: u32, channel: &[u32], phase: f64) -> Vec<Gate> {
    channel
        .iter()
        .map(|&c| Gate::Controlled {
            control: bus,
            control_level: Level::One,
            ion: c,
            transition: (Level::Zero, Level::One),
            area: PI,
            phase,
        })
        .collect()
}

/// The coherent part of a round: steps 1 to 4.
pub fn round_circuit(bus: u32, channel: &[u32], alpha: f64) -> Vec<Gate> {
    let mut g = phase_steps(bus, channel, alpha);
    g.extend(copy_steps(bus, channel, 0.0));
    g
}

fn check_round_inputs(
    state: &StateVector,
    bus: u32,
    channel: &[u32],
    ctx: &BlockadeContext,
) -> Result<(), QsimError> {
    for (i, &c) in channel.iter().enumerate() {
        if c == bus || channel[..i].contains(&c) {
            return Err(QsimError::InvalidOp(format!("ion {c} listed twice")));
        }
        if !ctx.blocks(bus, c) {
            return Err(QsimError::Architecture(bus, c));
        }
    }
    for &id in std::iter::once(&bus).chain(channel) {
        let p0 = state.population(id, Level::Zero)?;
        if (p0 - 1.0).abs() > 1e-12 {
            return Err(QsimError::ProtocolState(format!("ion {id} is not in |0⟩ (population {p0})")));
        }
    }
    Ok(())
}

/// State after steps 1 to 3. The bus then holds
/// `sin((n-1)α/2)|0⟩ + cos((n-1)α/2)|1⟩` up to a global phase.
pub fn distill_prepare(
    state: &StateVector,
    bus: u32,
    channel: &[u32],
    alpha: f64,
    ctx: &BlockadeContext,
) -> Result<StateVector, QsimError> {
    check_round_inputs(state, bus, channel, ctx)?;
    let mut s = state.clone();
    for g in phase_steps(bus, channel, alpha) {
        apply_gate(&mut s, &g, ctx)?;
    }
    Ok(s)
}

/// One full round. Channel survivors and the bus end in `|0⟩`; decayed ions
/// sit in `aux` or `|0⟩`.
pub fn distill_round<R: Rng + ?Sized>(
    state: &StateVector,
    bus: u32,
    channel: &[u32],
    params: RoundParams,
    ctx: &BlockadeContext,
    rng: &mut R,
    trace: bool,
) -> Result<(StateVector, RoundReport), QsimError> {
    check_round_inputs(state, bus, channel, ctx)?;
    let mut report = RoundReport::default();
    let mut s = state.clone();
    let run = |s: &mut StateVector, gates: Vec<Gate>, report: &mut RoundReport| -> Result<(), QsimError> {
        for g in gates {
            if trace {
                report.trace.push(g.to_string());
            }
            apply_gate(s, &g, ctx)?;
        }
        Ok(())
    };
    run(&mut s, round_circuit(bus, channel, params.alpha), &mut report)?;

    // which branch the copy selected
    let bus_level = s.measure(bus, rng)?;
    report.tagged = bus_level == Level::Zero && !channel.is_empty();
    if trace {
        report.trace.push(format!("M ion={bus} -> {}", bus_level.label()));
    }

    // each ion is excited with probability beta and decays before the next
    // one is addressed, so channel ions never block each other here
    let theta = 2.0 * params.beta.sqrt().asin();
    for &c in channel {
        let g = Gate::Rotation { ion: c, transition: (Level::Zero, Level::E), area: theta, phase: 0.0, blockade: false };
        run(&mut s, vec![g], &mut report)?;
        let pe = s.population(c, Level::E)?;
        if pe > 0.0 && rng.random::<f64>() < pe {
            let to = if rng.random::<f64>() < params.branch_to_aux { Level::Aux } else { Level::Zero };
            s.jump(c, Level::E, to)?;
            report.decays += 1;
            report.to_aux += usize::from(to == Level::Aux);
            if trace {
                report.trace.push(format!("J ion={c} e -> {}", to.label()));
            }
        } else if pe > 0.0 {
            s.project_out(c, Level::E)?;
        }
    }

    run(&mut s, copy_steps(bus, channel, PI), &mut report)?;
    s.reset(bus, Level::Zero, rng)?;
    if trace {
        report.trace.push(format!("P ion={bus} -> 0"));
    }
    Ok((s, report))
}

/// Repeat rounds with the configured α schedule until at most one ion is
/// left and a whole schedule pass went untagged, or `max_rounds` is hit.
pub fn distill_until_single(n_initial: usize, config: &DistillConfig) -> Result<DistillOutcome, QsimError> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let bus = 0u32;
    let mut channel: Vec<u32> = (1..=n_initial as u32).collect();
    let mut ctx = BlockadeContext::new(1.0);
    for &c in &channel {
        ctx.set(bus, c, 2.0);
    }
    let ions: Vec<(u32, Level)> = std::iter::once(bus).chain(channel.iter().copied()).map(|i| (i, Level::Zero)).collect();
    let mut state = StateVector::product(&ions)?;
    let params = |alpha| RoundParams { alpha, beta: config.beta, branch_to_aux: config.branch_to_aux };

    let pass = config.alpha_schedule.len();
    let mut quiet = 0usize;
    let mut outcome = DistillOutcome {
        final_occupancy: n_initial,
        rounds_used: 0,
        per_round_decays: Vec::new(),
        rounds: Vec::new(),
        timed_out: false,
        trace: Vec::new(),
    };
    loop {
        if channel.len() <= 1 && quiet >= pass {
            break;
        }
        if outcome.rounds_used == config.max_rounds {
            outcome.timed_out = true;
            break;
        }
        let alpha = config.alpha_schedule[outcome.rounds_used % pass];
        let (next, report) = distill_round(&state, bus, &channel, params(alpha), &ctx, &mut rng, config.trace)?;
        outcome.rounds.push(RoundRecord {
            occupancy_before: channel.len(),
            alpha,
            tagged: report.tagged,
            decays: report.decays,
        });
        outcome.per_round_decays.push(report.decays);
        if config.trace {
            outcome.trace.push(format!("# round {} alpha={alpha:.6} n={}", outcome.rounds_used, channel.len()));
            outcome.trace.extend(report.trace);
        }
        state = next;
        for id in channel.clone() {
            if state.population(id, Level::Aux)? > 0.5 {
                state = state.remove_ion(id)?;
                channel.retain(|&c| c != id);
            }
        }
        quiet = if report.tagged { 0 } else { quiet + 1 };
        outcome.rounds_used += 1;
    }
    outcome.final_occupancy = channel.len();
    Ok(outcome)
}
