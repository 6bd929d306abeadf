//! Dense operators on the ion Hilbert space, for continuous-time work.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{QsimError, StateVector};
use crate::level::Level;

const D: usize = Level::DIM;

/// `|level⟩⟨level|` on one ion.
pub fn projector(level: Level) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(D, D);
    m[(level.index(), level.index())] = C64::new(1.0, 0.0);
    m
}

/// `(Ω/2)(e^{-iφ}|a⟩⟨b| + h.c.)` on one ion (rad/s).
pub fn drive(transition: (Level, Level), rabi: f64, phase: f64) -> DMatrix<C64> {
    let (a, b) = (transition.0.index(), transition.1.index());
    let mut m = DMatrix::zeros(D, D);
    let h = C64::from_polar(0.5 * rabi, -phase);
    m[(a, b)] = h;
    m[(b, a)] = h.conj();
    m
}

/// Single-ion operator acting on ion `pos` of `n` ions.
pub fn embed(op: &DMatrix<C64>, pos: usize, n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for p in 0..n {
        let f = if p == pos { op.clone() } else { DMatrix::identity(D, D) };
        out = out.kronecker(&f);
    }
    out
}

/// `g |e e⟩⟨e e|` between ions `p` and `q` of `n` (g in rad/s).
pub fn excitation_coupling(p: usize, q: usize, n: usize, g: f64) -> DMatrix<C64> {
    let pe = projector(Level::E);
    embed(&pe, p, n) * embed(&pe, q, n) * C64::new(g, 0.0)
}

impl StateVector {
    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(self.amplitudes())
    }

    pub fn from_dvector(ion_ids: Vec<u32>, v: &DVector<C64>) -> Result<StateVector, QsimError> {
        StateVector::from_amplitudes(ion_ids, v.iter().copied().collect())
    }
}
