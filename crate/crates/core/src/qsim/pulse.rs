//! Laser pulses on ions or groups of ions, and the blockade gate.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gates::{apply_two_level, blockers, not_blockaded, rotation_matrix, Mat2};
use super::{BlockadeContext, QsimError, StateVector};
use crate::level::Level;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseMode {
    /// Perfect blockade: no action where a strongly coupled ion is excited.
    #[default]
    IdealBlockade,
    /// Exact two-level evolution with the dipole shift as a detuning.
    Detuned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseTarget {
    Ion(u32),
    /// Every listed ion, pulsed one after another.
    Ions(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseOp {
    pub target: PulseTarget,
    pub transition: (Level, Level),
    /// Rotation angle (rad).
    pub area: f64,
    pub phase: f64,
    pub mode: PulseMode,
    /// Pulse length (s); the Rabi frequency is `area / duration`.
    pub duration: f64,
}

impl PulseOp {
    pub fn ideal(ion: u32, transition: (Level, Level), area: f64, phase: f64) -> Self {
        PulseOp { target: PulseTarget::Ion(ion), transition, area, phase, mode: PulseMode::IdealBlockade, duration: 0.0 }
    }

    pub fn validate(&self) -> Result<(), QsimError> {
        if self.transition.0 == self.transition.1 {
            return Err(QsimError::InvalidOp("transition levels must differ".into()));
        }
        if !(self.area >= 0.0) || !self.area.is_finite() || !self.phase.is_finite() {
            return Err(QsimError::InvalidOp(format!("bad pulse area {} / phase {}", self.area, self.phase)));
        }
        if self.mode == PulseMode::Detuned && !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(QsimError::InvalidOp("detuned pulses need a positive duration".into()));
        }
        Ok(())
    }

    fn targets(&self) -> Vec<u32> {
        match &self.target {
            PulseTarget::Ion(id) => vec![*id],
            PulseTarget::Ions(ids) => ids.clone(),
        }
    }
}

/// Exact propagator of `(Ω/2)(e^{-iφ}|a⟩⟨b| + h.c.) + d_a|a⟩⟨a| + d_b|b⟩⟨b|`
/// over `tau`.
fn detuned_unitary(rabi: f64, phase: f64, d_a: f64, d_b: f64, tau: f64) -> Mat2 {
    let mean = 0.5 * (d_a + d_b);
    let delta = 0.5 * (d_a - d_b);
    let h = C64::from_polar(0.5 * rabi, -phase);
    let w = (delta * delta + h.norm_sqr()).sqrt();
    let (c, sw) = ((w * tau).cos(), if w > 0.0 { (w * tau).sin() / w } else { tau });
    let mi = C64::new(0.0, -1.0);
    let g = C64::from_polar(1.0, -mean * tau);
    [
        [g * (c + mi * sw * delta), g * mi * sw * h],
        [g * mi * sw * h.conj(), g * (c - mi * sw * delta)],
    ]
}

fn pulse_one(state: &mut StateVector, ion: u32, op: &PulseOp, ctx: &BlockadeContext) -> Result<(), QsimError> {
    let pos = state.position(ion)?;
    match op.mode {
        PulseMode::IdealBlockade => {
            let u = rotation_matrix(op.area, op.phase);
            let bl = blockers(state, ion, ctx);
            apply_two_level(state, pos, op.transition, &u, |s, i| not_blockaded(s, i, &bl))
        }
        PulseMode::Detuned => {
            let e = Level::E.index();
            let (a, b) = op.transition;
            // dipole shift of this ion's |e⟩, per configuration of the others
            let partners: Vec<(usize, f64)> = state
                .ion_ids()
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .filter_map(|(p, &other)| ctx.coupling(ion, other).map(|g| (p, TAU * g)))
                .collect();
            let rabi = op.area / op.duration;
            let mut cache: Vec<(f64, Mat2)> = Vec::new();
            let (ia, ib) = (a.index(), b.index());
            let stride = state.stride(pos);
            let indices: Vec<usize> = (0..state.dim()).filter(|&i| state.level_at(i, pos) == ia).collect();
            let mut updates = Vec::with_capacity(indices.len());
            for i in indices {
                let shift: f64 = partners.iter().filter(|&&(p, _)| state.level_at(i, p) == e).map(|&(_, g)| g).sum();
                let u = match cache.iter().find(|(s, _)| *s == shift) {
                    Some((_, u)) => *u,
                    None => {
                        let d_a = if a == Level::E { shift } else { 0.0 };
                        let d_b = if b == Level::E { shift } else { 0.0 };
                        let u = detuned_unitary(rabi, op.phase, d_a, d_b, op.duration);
                        cache.push((shift, u));
                        u
                    }
                };
                updates.push((i, i + ib * stride - ia * stride, u));
            }
            let amps = state.amps_mut();
            for (i, j, u) in updates {
                let (x, y) = (amps[i], amps[j]);
                amps[i] = u[0][0] * x + u[0][1] * y;
                amps[j] = u[1][0] * x + u[1][1] * y;
            }
            Ok(())
        }
    }
}

/// Apply a pulse; group targets are addressed one ion at a time.
pub fn apply_pulse(state: &StateVector, op: &PulseOp, ctx: &BlockadeContext) -> Result<StateVector, QsimError> {
    op.validate()?;
    let mut s = state.clone();
    for ion in op.targets() {
        pulse_one(&mut s, ion, op, ctx)?;
    }
    Ok(s)
}

/// `π(control 0↔e) · 2π(target 0↔e) · π(control 0↔e)` in the ideal blockade
/// model. On the qubit subspace this is `diag(-1, -1, -1, 1)`, i.e. CZ up to a
/// global phase.
pub fn blockade_cz(
    state: &StateVector,
    control: u32,
    target: u32,
    ctx: &BlockadeContext,
) -> Result<StateVector, QsimError> {
    if !ctx.blocks(control, target) {
        return Err(QsimError::Architecture(control, target));
    }
    let t = (Level::Zero, Level::E);
    let mut s = apply_pulse(state, &PulseOp::ideal(control, t, PI, 0.0), ctx)?;
    s = apply_pulse(&s, &PulseOp::ideal(target, t, TAU, 0.0), ctx)?;
    apply_pulse(&s, &PulseOp::ideal(control, t, PI, 0.0), ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> BlockadeContext {
        BlockadeContext::new(1e7).with(0, 1, 8e7)
    }

    #[test]
    fn zero_area_is_identity() {
        let s = StateVector::normalized(vec![0, 1], (0..16).map(|k| C64::new(k as f64, 1.0)).collect()).unwrap();
        let out = apply_pulse(&s, &PulseOp::ideal(1, (Level::One, Level::E), 0.0, 0.3), &ctx()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn isolated_pi_pulse() {
        let s = StateVector::product(&[(4, Level::Zero)]).unwrap();
        let out = apply_pulse(&s, &PulseOp::ideal(4, (Level::Zero, Level::E), PI, 0.0), &ctx()).unwrap();
        assert!((out.population(4, Level::E).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.amplitude(&[Level::E]).unwrap() - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn excited_control_blocks_target() {
        let s = StateVector::product(&[(0, Level::E), (1, Level::Zero)]).unwrap();
        let out = apply_pulse(&s, &PulseOp::ideal(1, (Level::Zero, Level::E), PI, 0.0), &ctx()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn unknown_target() {
        let s = StateVector::product(&[(0, Level::Zero)]).unwrap();
        let r = apply_pulse(&s, &PulseOp::ideal(9, (Level::Zero, Level::E), PI, 0.0), &ctx());
        assert_eq!(r, Err(QsimError::UnknownIon(9)));
    }

    #[test]
    fn detuned_without_shift_matches_ideal() {
        let s = StateVector::normalized(vec![0, 1], (0..16).map(|k| C64::new(1.0, k as f64)).collect()).unwrap();
        let far = BlockadeContext::new(1e7);
        let mut op = PulseOp::ideal(1, (Level::Zero, Level::E), 1.3, 0.4);
        let ideal = apply_pulse(&s, &op, &far).unwrap();
        op.mode = PulseMode::Detuned;
        op.duration = 1e-6;
        let det = apply_pulse(&s, &op, &far).unwrap();
        for (a, b) in ideal.amplitudes().iter().zip(det.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn large_detuning_suppresses_transfer() {
        let s = StateVector::product(&[(0, Level::E), (1, Level::Zero)]).unwrap();
        let strong = BlockadeContext::new(1e7).with(0, 1, 1e10);
        let op = PulseOp {
            target: PulseTarget::Ion(1),
            transition: (Level::Zero, Level::E),
            area: PI,
            phase: 0.0,
            mode: PulseMode::Detuned,
            duration: 1e-6,
        };
        let out = apply_pulse(&s, &op, &strong).unwrap();
        assert!(out.population(1, Level::E).unwrap() < 1e-6);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detuned_transfer_matches_generalized_rabi() {
        // P_e = Ω²/W² sin²(W t/2), W = sqrt(Ω² + Δ²)
        let g = 2e5;
        let c = BlockadeContext::new(1e9).with(0, 1, g);
        let s = StateVector::product(&[(0, Level::E), (1, Level::Zero)]).unwrap();
        let (area, dur) = (PI, 1e-6);
        let op = PulseOp {
            target: PulseTarget::Ion(1),
            transition: (Level::Zero, Level::E),
            area,
            phase: 0.7,
            mode: PulseMode::Detuned,
            duration: dur,
        };
        let out = apply_pulse(&s, &op, &c).unwrap();
        let (om, d) = (area / dur, TAU * g);
        let w = (om * om + d * d).sqrt();
        let want = om * om / (w * w) * (w * dur / 2.0).sin().powi(2);
        assert!((out.population(1, Level::E).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn cz_phases() {
        let c = ctx();
        let expect = [
            ([Level::Zero, Level::Zero], -1.0),
            ([Level::Zero, Level::One], -1.0),
            ([Level::One, Level::Zero], -1.0),
            ([Level::One, Level::One], 1.0),
        ];
        for (levels, sign) in expect {
            let s = StateVector::product(&[(0, levels[0]), (1, levels[1])]).unwrap();
            let out = blockade_cz(&s, 0, 1, &c).unwrap();
            let a = out.amplitude(&levels).unwrap();
            assert!((a - C64::new(sign, 0.0)).norm() < 1e-12, "{levels:?}: {a}");
        }
    }

    #[test]
    fn cz_squared_is_identity() {
        let c = ctx();
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        for (k, &(i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
            amps[i * 4 + j] = C64::new(1.0 + k as f64, 0.5 * k as f64);
        }
        let s = StateVector::normalized(vec![0, 1], amps).unwrap();
        let out = blockade_cz(&blockade_cz(&s, 0, 1, &c).unwrap(), 0, 1, &c).unwrap();
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn cz_needs_coupled_pair() {
        let s = StateVector::product(&[(0, Level::Zero), (1, Level::Zero)]).unwrap();
        let weak = BlockadeContext::new(1e7).with(0, 1, 1e6);
        assert_eq!(blockade_cz(&s, 0, 1, &weak), Err(QsimError::Architecture(0, 1)));
    }
}
