//! Time-resolved gate dynamics with a finite dipole coupling.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{check_hermitian, check_normalized, von_neumann_entropy, Bipartition, EntanglementError};
use crate::level::Level;
use crate::qsim::operators::{drive, embed, excitation_coupling, projector};
use crate::qsim::StateVector;

/// Constant laser drive on one ion over a segment (rad/s). `detuning`
/// shifts the upper level of the transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub ion: u32,
    pub transition: (Level, Level),
    pub rabi: f64,
    pub phase: f64,
    pub detuning: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// seconds
    pub duration: f64,
    pub drives: Vec<Drive>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Total excited population of both ions.
    pub pe: Vec<f64>,
    /// Entanglement in bits.
    pub entropy: Vec<f64>,
    /// Running trapezoidal `∫ P_e dt`.
    pub integrated_pe: Vec<f64>,
}

impl Trajectory {
    pub fn final_entropy(&self) -> f64 {
        *self.entropy.last().expect("trajectory has the initial point")
    }

    pub fn total_integrated_pe(&self) -> f64 {
        *self.integrated_pe.last().expect("trajectory has the initial point")
    }

    /// Largest `E(t) - E(0) - ½ g ∫₀ᵗ P_e` over the run; `≤ 0` when the
    /// cumulative bound holds everywhere.
    pub fn worst_bound_margin(&self, g: f64) -> f64 {
        let e0 = self.entropy[0];
        self.entropy
            .iter()
            .zip(&self.integrated_pe)
            .map(|(e, i)| e - e0 - 0.5 * g * i)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows `t, P_e, E, running_integral_P_e`.
    pub fn csv_rows(&self) -> impl Iterator<Item = [f64; 4]> + '_ {
        (0..self.times.len()).map(|k| [self.times[k], self.pe[k], self.entropy[k], self.integrated_pe[k]])
    }
}

/// `π(control) · 2π(target) · π(control)` on the 0↔e transitions with a
/// common Rabi frequency.
pub fn cz_pulse_plan(control: u32, target: u32, rabi: f64) -> Vec<Segment> {
    let seg = |ion, area: f64| Segment {
        duration: area / rabi,
        drives: vec![Drive { ion, transition: (Level::Zero, Level::E), rabi, phase: 0.0, detuning: 0.0 }],
    };
    vec![seg(control, PI), seg(target, TAU), seg(control, PI)]
}

fn segment_hamiltonian(seg: &Segment, state: &StateVector, hc: &DMatrix<C64>) -> Result<DMatrix<C64>, EntanglementError> {
    let n = state.ion_ids().len();
    let mut h = hc.clone();
    for d in &seg.drives {
        let pos = state.position(d.ion)?;
        h += embed(&drive(d.transition, d.rabi, d.phase), pos, n);
        if d.detuning != 0.0 {
            h += embed(&projector(d.transition.1), pos, n) * C64::new(d.detuning, 0.0);
        }
    }
    check_hermitian(&h, state.dim())?;
    Ok(h)
}

/// One classical RK4 step for a constant `H`: the degree-4 Taylor
/// polynomial of `e^{-iH dt}`.
fn rk4_matrix(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let a = h * C64::new(0.0, -dt);
    let mut term = DMatrix::identity(h.nrows(), h.ncols());
    let mut m = term.clone();
    for k in 1..=4 {
        term = &term * &a / C64::new(k as f64, 0.0);
        m += &term;
    }
    m
}

/// Integrate a two-ion state through the pulse plan under
/// `H(t) = H_drive(t) + g|ee⟩⟨ee|` with fixed RK4 steps of at most `dt`,
/// aligned to segment boundaries.
pub fn simulate_gate_trajectory(
    initial: &StateVector,
    plan: &[Segment],
    g: f64,
    dt: f64,
) -> Result<Trajectory, EntanglementError> {
    check_normalized(initial)?;
    let ids = initial.ion_ids().to_vec();
    if ids.len() != 2 {
        return Err(EntanglementError::Input("trajectories need exactly two ions".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(g >= 0.0 && g.is_finite()) {
        return Err(EntanglementError::Input(format!("need dt > 0 and g >= 0 (dt {dt}, g {g})")));
    }
    if let Some(s) = plan.iter().find(|s| !(s.duration >= 0.0 && s.duration.is_finite())) {
        return Err(EntanglementError::Input(format!("bad segment duration {}", s.duration)));
    }
    let bip = Bipartition::new(vec![ids[0]], vec![ids[1]]);
    let hc = excitation_coupling(0, 1, 2, g);
    let pe_op = embed(&projector(Level::E), 0, 2) + embed(&projector(Level::E), 1, 2);

    let mut out = Trajectory { times: vec![], states: vec![], pe: vec![], entropy: vec![], integrated_pe: vec![] };
    let mut record = |t: f64, s: StateVector| -> Result<(), EntanglementError> {
        let psi = s.to_dvector();
        let pe = psi.dotc(&(&pe_op * &psi)).re;
        let running = match (out.times.last(), out.pe.last(), out.integrated_pe.last()) {
            (Some(&t0), Some(&p0), Some(&i0)) => i0 + 0.5 * (pe + p0) * (t - t0),
            _ => 0.0,
        };
        out.entropy.push(von_neumann_entropy(&s, &bip)?);
        out.times.push(t);
        out.pe.push(pe);
        out.integrated_pe.push(running);
        out.states.push(s);
        Ok(())
    };

    let mut t = 0.0;
    let mut psi = initial.to_dvector();
    record(t, initial.clone())?;
    for seg in plan {
        if seg.duration == 0.0 {
            continue;
        }
        let h = segment_hamiltonian(seg, initial, &hc)?;
        let steps = (seg.duration / dt).ceil().max(1.0) as usize;
        let step = seg.duration / steps as f64;
        let m = rk4_matrix(&h, step);
        let t_start = t;
        for k in 1..=steps {
            psi = &m * &psi;
            t = t_start + step * k as f64;
            let drift = (psi.norm() - 1.0).abs();
            if drift > 1e-6 {
                return Err(EntanglementError::StepSize { drift, time: t });
            }
            let s = StateVector::from_dvector(ids.clone(), &psi).map_err(EntanglementError::State)?;
            record(t, s)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{blockade_cz, BlockadeContext};

    fn plus_plus() -> StateVector {
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            amps[i * 4 + j] = C64::new(0.5, 0.0);
        }
        StateVector::from_amplitudes(vec![0, 1], amps).unwrap()
    }

    #[test]
    fn idle_ground_state_stays_put() {
        let s = StateVector::product(&[(0, Level::Zero), (1, Level::Zero)]).unwrap();
        let plan = vec![Segment { duration: 1e-6, drives: vec![] }];
        let tr = simulate_gate_trajectory(&s, &plan, 1e8, 1e-8).unwrap();
        assert!(tr.pe.iter().all(|&p| p == 0.0));
        assert!(tr.entropy.iter().all(|&e| e.abs() < 1e-12));
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn strong_coupling_reproduces_ideal_gate() {
        let rabi = 1e6;
        let g = 2e8;
        let tr = simulate_gate_trajectory(&plus_plus(), &cz_pulse_plan(0, 1, rabi), g, 1e-10).unwrap();
        let ideal = blockade_cz(&plus_plus(), 0, 1, &BlockadeContext::new(1.0).with(0, 1, 2.0)).unwrap();
        let fid = tr.states.last().unwrap().inner(&ideal).unwrap().norm_sqr();
        assert!(fid > 0.999, "{fid}");
        assert!(tr.final_entropy() > 0.99);
        assert!(tr.worst_bound_margin(g) <= 0.0);
    }

    #[test]
    fn coarse_steps_are_refused() {
        let r = simulate_gate_trajectory(&plus_plus(), &cz_pulse_plan(0, 1, 1e6), 1e8, 1e-6);
        assert!(matches!(r, Err(EntanglementError::StepSize { .. })));
    }

    #[test]
    fn needs_two_ions() {
        let s = StateVector::product(&[(0, Level::Zero)]).unwrap();
        assert!(simulate_gate_trajectory(&s, &[], 1.0, 1e-3).is_err());
    }
}
