//! Two-level rotations, conditional rotations and phase gates.

use std::fmt;

use num_complex::Complex64 as C64;

use super::{BlockadeContext, QsimError, StateVector};
use crate::level::Level;

pub type Mat2 = [[C64; 2]; 2];

/// `R(θ, φ)` acting on amplitudes `(a, b)` of an ordered transition.
pub fn rotation_matrix(area: f64, phase: f64) -> Mat2 {
    let c = C64::new((area / 2.0).cos(), 0.0);
    let s = (area / 2.0).sin();
    let mi = C64::new(0.0, -1.0);
    [
        [c, mi * C64::from_polar(s, -phase)],
        [mi * C64::from_polar(s, phase), c],
    ]
}

/// Single step of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// Rotation on `ion`. With `blockade`, basis states in which an ion
    /// coupled above threshold sits in `e` are left untouched.
    Rotation { ion: u32, transition: (Level, Level), area: f64, phase: f64, blockade: bool },
    /// Rotation on `ion` applied only where `control` is in `control_level`.
    Controlled { control: u32, control_level: Level, ion: u32, transition: (Level, Level), area: f64, phase: f64 },
    /// Multiply the `level` component of `ion` by `e^{i angle}`.
    Phase { ion: u32, level: Level, angle: f64 },
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::Rotation { ion, transition, area, phase, blockade } => {
                Gate::Rotation { ion, transition, area, phase: phase + std::f64::consts::PI, blockade }
            }
            Gate::Controlled { control, control_level, ion, transition, area, phase } => Gate::Controlled {
                control,
                control_level,
                ion,
                transition,
                area,
                phase: phase + std::f64::consts::PI,
            },
            Gate::Phase { ion, level, angle } => Gate::Phase { ion, level, angle: -angle },
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rotation { ion, transition: (a, b), area, phase, blockade } => write!(
                f,
                "R ion={ion} {}<->{} area={area:.6} phase={phase:.6}{}",
                a.label(),
                b.label(),
                if *blockade { " blockade" } else { "" }
            ),
            Gate::Controlled { control, control_level, ion, transition: (a, b), area, phase } => write!(
                f,
                "C[{control}={}] ion={ion} {}<->{} area={area:.6} phase={phase:.6}",
                control_level.label(),
                a.label(),
                b.label()
            ),
            Gate::Phase { ion, level, angle } => write!(f, "Z ion={ion} level={} angle={angle:.6}", level.label()),
        }
    }
}

/// Apply `u` to every `(a, b)` amplitude pair of the ion at `pos` for which
/// `active(index)` holds. The predicate must not depend on that ion's level.
pub(crate) fn apply_two_level(
    state: &mut StateVector,
    pos: usize,
    transition: (Level, Level),
    u: &Mat2,
    active: impl Fn(&StateVector, usize) -> bool,
) -> Result<(), QsimError> {
    let (a, b) = transition;
    if a == b {
        return Err(QsimError::InvalidOp(format!("degenerate transition {}<->{}", a.label(), b.label())));
    }
    let stride = state.stride(pos);
    let (ia, ib) = (a.index(), b.index());
    let indices: Vec<usize> =
        (0..state.dim()).filter(|&i| state.level_at(i, pos) == ia && active(state, i)).collect();
    let amps = state.amps_mut();
    for i in indices {
        let j = i + ib * stride - ia * stride;
        let (x, y) = (amps[i], amps[j]);
        amps[i] = u[0][0] * x + u[0][1] * y;
        amps[j] = u[1][0] * x + u[1][1] * y;
    }
    Ok(())
}

/// Positions of ions that blockade `ion` in the ideal model.
pub(crate) fn blockers(state: &StateVector, ion: u32, ctx: &BlockadeContext) -> Vec<usize> {
    state
        .ion_ids()
        .iter()
        .enumerate()
        .filter(|&(_, &other)| ctx.blocks(ion, other))
        .map(|(p, _)| p)
        .collect()
}

pub(crate) fn not_blockaded(state: &StateVector, idx: usize, blockers: &[usize]) -> bool {
    blockers.iter().all(|&p| state.level_at(idx, p) != Level::E.index())
}

pub(crate) fn apply_gate(state: &mut StateVector, gate: &Gate, ctx: &BlockadeContext) -> Result<(), QsimError> {
    match gate {
        Gate::Rotation { ion, transition, area, phase, blockade } => {
            let pos = state.position(*ion)?;
            let u = rotation_matrix(*area, *phase);
            if *blockade {
                let bl = blockers(state, *ion, ctx);
                apply_two_level(state, pos, *transition, &u, |s, i| not_blockaded(s, i, &bl))
            } else {
                apply_two_level(state, pos, *transition, &u, |_, _| true)
            }
        }
        Gate::Controlled { control, control_level, ion, transition, area, phase } => {
            if control == ion {
                return Err(QsimError::InvalidOp("control and target coincide".into()));
            }
            let cpos = state.position(*control)?;
            let pos = state.position(*ion)?;
            let u = rotation_matrix(*area, *phase);
            let cl = control_level.index();
            apply_two_level(state, pos, *transition, &u, |s, i| s.level_at(i, cpos) == cl)
        }
        Gate::Phase { ion, level, angle } => {
            let pos = state.position(*ion)?;
            let f = C64::from_polar(1.0, *angle);
            let l = level.index();
            let idx: Vec<usize> = (0..state.dim()).filter(|&i| state.level_at(i, pos) == l).collect();
            let amps = state.amps_mut();
            for i in idx {
                amps[i] *= f;
            }
            Ok(())
        }
    }
}

/// Apply gates in order.
pub fn apply_circuit(state: &StateVector, gates: &[Gate], ctx: &BlockadeContext) -> Result<StateVector, QsimError> {
    let mut s = state.clone();
    for g in gates {
        apply_gate(&mut s, g, ctx)?;
    }
    Ok(s)
}

/// Reversed circuit of inverted gates.
pub fn circuit_inverse(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn pi_pulse_convention() {
        let u = rotation_matrix(PI, 0.0);
        assert!(close(u[1][0], C64::new(0.0, -1.0)));
        let u = rotation_matrix(PI / 2.0, PI / 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(u[0][0], C64::new(s, 0.0)));
        assert!(close(u[1][0], C64::new(s, 0.0)));
    }

    #[test]
    fn rotation_is_unitary() {
        for &(t, p) in &[(0.3, 1.1), (PI, -0.4), (2.0 * PI, 2.0)] {
            let u = rotation_matrix(t, p);
            for r in 0..2 {
                for c in 0..2 {
                    let dot: C64 = (0..2).map(|k| u[k][r].conj() * u[k][c]).sum();
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!(close(dot, C64::new(want, 0.0)));
                }
            }
        }
    }

    #[test]
    fn full_turn_is_minus_identity() {
        let u = rotation_matrix(2.0 * PI, 0.7);
        assert!(close(u[0][0], C64::new(-1.0, 0.0)));
        assert!(close(u[1][1], C64::new(-1.0, 0.0)));
    }

    #[test]
    fn blockaded_rotation_acts_only_when_partner_is_ground() {
        let ctx = BlockadeContext::new(1e7).with(0, 1, 5e7);
        let gate = Gate::Rotation { ion: 1, transition: (Level::Zero, Level::E), area: PI, phase: 0.0, blockade: true };
        let s = StateVector::product(&[(0, Level::E), (1, Level::Zero)]).unwrap();
        assert_eq!(apply_circuit(&s, std::slice::from_ref(&gate), &ctx).unwrap(), s);
        let s = StateVector::product(&[(0, Level::One), (1, Level::Zero)]).unwrap();
        let out = apply_circuit(&s, &[gate], &ctx).unwrap();
        assert!((out.population(1, Level::E).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_coupling_does_not_blockade() {
        let ctx = BlockadeContext::new(1e7).with(0, 1, 5e6);
        let gate = Gate::Rotation { ion: 1, transition: (Level::Zero, Level::E), area: PI, phase: 0.0, blockade: true };
        let s = StateVector::product(&[(0, Level::E), (1, Level::Zero)]).unwrap();
        let out = apply_circuit(&s, &[gate], &ctx).unwrap();
        assert!((out.population(1, Level::E).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn controlled_flip() {
        let ctx = BlockadeContext::default();
        let g = Gate::Controlled {
            control: 0,
            control_level: Level::One,
            ion: 1,
            transition: (Level::Zero, Level::One),
            area: PI,
            phase: 0.0,
        };
        let s = StateVector::product(&[(0, Level::One), (1, Level::Zero)]).unwrap();
        let out = apply_circuit(&s, std::slice::from_ref(&g), &ctx).unwrap();
        assert!((out.population(1, Level::One).unwrap() - 1.0).abs() < 1e-12);
        let back = apply_circuit(&out, &circuit_inverse(&[g]), &ctx).unwrap();
        assert!((back.inner(&s).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
