//! The excitation bound on the entanglement rate.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{rate_from_schmidt, schmidt_decompose, Bipartition, EntanglementError};
use crate::level::Level;
use crate::qsim::operators::{embed, excitation_coupling, projector};
use crate::qsim::StateVector;

/// `|log₂ tan θ| sin θ cos θ`, extended continuously by 0 at the ends.
pub fn f_theta(theta: f64) -> f64 {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return 0.0;
    }
    let (s, c) = theta.sin_cos();
    (s / c).log2().abs() * s * c
}

/// Maximizer and maximum of [`f_theta`] on `(0, π/4]`.
///
/// The stationary point solves `cos 2θ · ln cot θ = 1`; the left side falls
/// monotonically from +∞ to 0 on `(0, π/4)`, so bisection converges.
pub fn f_max() -> (f64, f64) {
    let h = |t: f64| (2.0 * t).cos() * (1.0 / t.tan()).ln() - 1.0;
    let (mut lo, mut hi) = (1e-6, FRAC_PI_4);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f_theta(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// bits
    pub entropy: f64,
    /// bits/s under `g|ee⟩⟨ee|`
    pub edot: f64,
    pub pe_tot: f64,
    /// `2 Σ w_i c_i²` from the Schmidt vectors.
    pub pe_tot_schmidt: f64,
    /// `½ P_e g`
    pub bound: f64,
    pub satisfied: bool,
    pub degenerate: bool,
}

/// Compare the entanglement rate under `g|ee⟩⟨ee|` (g in rad/s) with
/// `½ P_e g`, for a state of two single ions.
pub fn rate_bound_check(state: &StateVector, bip: &Bipartition, g: f64) -> Result<RateReport, EntanglementError> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(EntanglementError::Input(format!("coupling {g} must be > 0")));
    }
    if bip.side_a.len() != 1 || bip.side_b.len() != 1 {
        return Err(EntanglementError::Bipartition("each side must be a single ion".into()));
    }
    let s = schmidt_decompose(state, bip)?;
    let (pa, pb) = (state.position(bip.side_a[0])?, state.position(bip.side_b[0])?);
    let hc = excitation_coupling(pa, pb, 2, g);
    let rate = rate_from_schmidt(&s, &hc);

    let pe = projector(Level::E);
    let p_op = embed(&pe, pa, 2) + embed(&pe, pb, 2);
    let psi = state.to_dvector();
    let pe_tot = psi.dotc(&(&p_op * &psi)).re;

    let e = Level::E.index();
    let w = |i: usize| 0.5 * (s.basis_a[i][e].norm_sqr() + s.basis_b[i][e].norm_sqr());
    let pe_tot_schmidt = 2.0 * (0..s.coeffs.len()).map(|i| w(i) * s.coeffs[i] * s.coeffs[i]).sum::<f64>();

    let bound = 0.5 * pe_tot * g;
    Ok(RateReport {
        entropy: s.entropy(),
        edot: rate.value,
        pe_tot,
        pe_tot_schmidt,
        bound,
        satisfied: rate.value.abs() <= bound + 1e-9,
        degenerate: rate.degenerate,
    })
}

/// `g|ee⟩⟨ee|` for a two-ion state.
pub fn coupling_hamiltonian(g: f64) -> DMatrix<C64> {
    excitation_coupling(0, 1, 2, g)
}
