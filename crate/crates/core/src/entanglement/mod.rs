//! Entanglement of two-party pure states and how fast a coupling makes it.
//!
//! Entropies are in bits. Hamiltonians are in rad/s (ħ = 1), so rates come
//! out in bits/s and the coupling `g` of `g|ee⟩⟨ee|` is an angular frequency.

mod bound;
mod trajectory;

pub use bound::{coupling_hamiltonian, f_max, f_theta, rate_bound_check, RateReport};
pub use trajectory::{cz_pulse_plan, simulate_gate_trajectory, Drive, Segment, Trajectory};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::Level;
use crate::qsim::{QsimError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum EntanglementError {
    #[error("state is not normalized (norm {0})")]
    Normalization(f64),
    #[error("invalid bipartition: {0}")]
    Bipartition(String),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator has dimension {found}, state has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("norm drifted by {drift:e} at t = {time:e} s; use a smaller dt")]
    StepSize { drift: f64, time: f64 },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    State(#[from] QsimError),
}

/// Split of a state's ions into two parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub side_a: Vec<u32>,
    pub side_b: Vec<u32>,
}

impl Bipartition {
    pub fn new(side_a: Vec<u32>, side_b: Vec<u32>) -> Self {
        Bipartition { side_a, side_b }
    }

    /// Check that the two sides are disjoint and together cover the state.
    pub fn validate(&self, state: &StateVector) -> Result<(), EntanglementError> {
        let mut all: Vec<u32> = self.side_a.iter().chain(&self.side_b).copied().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != n {
            return Err(EntanglementError::Bipartition("sides overlap".into()));
        }
        let mut ids = state.ion_ids().to_vec();
        ids.sort_unstable();
        if ids != all {
            return Err(EntanglementError::Bipartition("sides do not cover the state's ions".into()));
        }
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(EntanglementError::Bipartition("empty side".into()));
        }
        Ok(())
    }

    fn dims(&self) -> (usize, usize) {
        (Level::DIM.pow(self.side_a.len() as u32), Level::DIM.pow(self.side_b.len() as u32))
    }

    /// `(row, column)` of every state amplitude in the coefficient matrix.
    fn layout(&self, state: &StateVector) -> Result<Vec<(usize, usize)>, EntanglementError> {
        self.validate(state)?;
        let pa: Vec<usize> = self.side_a.iter().map(|&id| state.position(id)).collect::<Result<_, _>>()?;
        let pb: Vec<usize> = self.side_b.iter().map(|&id| state.position(id)).collect::<Result<_, _>>()?;
        let digits = |idx: usize, ps: &[usize]| ps.iter().fold(0, |acc, &p| acc * Level::DIM + state.level_at(idx, p));
        Ok((0..state.dim()).map(|i| (digits(i, &pa), digits(i, &pb))).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    /// Descending, non-negative.
    pub coeffs: Vec<f64>,
    pub basis_a: Vec<DVector<C64>>,
    pub basis_b: Vec<DVector<C64>>,
    layout: Vec<(usize, usize)>,
}

impl SchmidtDecomposition {
    /// `Σ c_i |v_i⟩|u_i⟩` as amplitudes in the original state's order.
    pub fn reconstruct(&self) -> Vec<C64> {
        self.layout
            .iter()
            .map(|&(ra, rb)| {
                self.coeffs
                    .iter()
                    .zip(self.basis_a.iter().zip(&self.basis_b))
                    .map(|(&c, (v, u))| v[ra] * u[rb] * c)
                    .sum()
            })
            .collect()
    }

    /// `|v_i u_i⟩` embedded in the full space.
    pub fn product_vector(&self, i: usize) -> DVector<C64> {
        let (v, u) = (&self.basis_a[i], &self.basis_b[i]);
        DVector::from_iterator(self.layout.len(), self.layout.iter().map(|&(ra, rb)| v[ra] * u[rb]))
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.coeffs)
    }
}

pub(crate) fn check_normalized(state: &StateVector) -> Result<(), EntanglementError> {
    let n = state.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(EntanglementError::Normalization(n));
    }
    Ok(())
}

pub fn schmidt_decompose(state: &StateVector, bip: &Bipartition) -> Result<SchmidtDecomposition, EntanglementError> {
    check_normalized(state)?;
    let layout = bip.layout(state)?;
    let (da, db) = bip.dims();
    let mut m = DMatrix::<C64>::zeros(da, db);
    for (amp, &(ra, rb)) in state.amplitudes().iter().zip(&layout) {
        m[(ra, rb)] = *amp;
    }
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut coeffs = Vec::with_capacity(order.len());
    let mut basis_a = Vec::with_capacity(order.len());
    let mut basis_b = Vec::with_capacity(order.len());
    for i in order {
        let mut v: DVector<C64> = u.column(i).into_owned();
        let mut w: DVector<C64> = vt.row(i).transpose();
        if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
            let ph = first / first.norm();
            v /= ph;
            w *= ph;
        }
        coeffs.push(svd.singular_values[i]);
        basis_a.push(v);
        basis_b.push(w);
    }
    Ok(SchmidtDecomposition { coeffs, basis_a, basis_b, layout })
}

/// `-Σ c² log₂ c²` with `0 log 0 = 0`.
pub fn entropy_bits(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .map(|c| c * c)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn von_neumann_entropy(state: &StateVector, bip: &Bipartition) -> Result<f64, EntanglementError> {
    Ok(schmidt_decompose(state, bip)?.entropy())
}

/// Rate of change of entanglement, flagged when two nonzero Schmidt
/// coefficients are closer than `DEGENERACY_GAP`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    /// bits/s
    pub value: f64,
    pub degenerate: bool,
}

pub const DEGENERACY_GAP: f64 = 1e-6;
const NONZERO: f64 = 1e-12;

pub(crate) fn check_hermitian(h: &DMatrix<C64>, dim: usize) -> Result<(), EntanglementError> {
    if h.nrows() != dim || h.ncols() != dim {
        return Err(EntanglementError::Dimension { expected: dim, found: h.nrows().max(h.ncols()) });
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 * scale {
        return Err(EntanglementError::NotHermitian(dev));
    }
    Ok(())
}

/// `Ė = 2 Σ_{i,j} log₂(c_j/c_i) c_i c_j Im⟨v_i u_i|H|v_j u_j⟩`.
pub fn rate_from_schmidt(s: &SchmidtDecomposition, h: &DMatrix<C64>) -> RateValue {
    let live: Vec<usize> = (0..s.coeffs.len()).filter(|&i| s.coeffs[i] > 0.0).collect();
    let vecs: Vec<DVector<C64>> = live.iter().map(|&i| s.product_vector(i)).collect();
    let hv: Vec<DVector<C64>> = vecs.iter().map(|v| h * v).collect();
    let mut total = 0.0;
    for (a, &i) in live.iter().enumerate() {
        for (b, &j) in live.iter().enumerate() {
            if i == j {
                continue;
            }
            let (ci, cj) = (s.coeffs[i], s.coeffs[j]);
            let m = vecs[a].dotc(&hv[b]);
            total += (cj / ci).log2() * ci * cj * m.im;
        }
    }
    let nz: Vec<f64> = s.coeffs.iter().copied().filter(|&c| c > NONZERO).collect();
    let degenerate = nz.windows(2).any(|w| (w[0] - w[1]).abs() < DEGENERACY_GAP);
    RateValue { value: 2.0 * total, degenerate }
}

pub fn entanglement_rate(
    state: &StateVector,
    bip: &Bipartition,
    h: &DMatrix<C64>,
) -> Result<RateValue, EntanglementError> {
    check_hermitian(h, state.dim())?;
    let s = schmidt_decompose(state, bip)?;
    Ok(rate_from_schmidt(&s, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::operators::{embed, excitation_coupling};
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    type Rng8 = rand_chacha::ChaCha8Rng;

    pub(crate) fn random_state(ids: Vec<u32>, rng: &mut Rng8) -> StateVector {
        let d = Level::DIM.pow(ids.len() as u32);
        let amps = (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        StateVector::normalized(ids, amps).unwrap()
    }

    pub(crate) fn random_hermitian(d: usize, rng: &mut Rng8) -> DMatrix<C64> {
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn pair() -> Bipartition {
        Bipartition::new(vec![0], vec![1])
    }

    #[test]
    fn product_and_bell() {
        let s = StateVector::product(&[(0, Level::Zero), (1, Level::Zero)]).unwrap();
        let d = schmidt_decompose(&s, &pair()).unwrap();
        assert!((d.coeffs[0] - 1.0).abs() < 1e-12 && d.coeffs[1..].iter().all(|&c| c < 1e-12));
        assert!(d.entropy().abs() < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        amps[0] = C64::new(h, 0.0);
        amps[5] = C64::new(h, 0.0);
        let bell = StateVector::from_amplitudes(vec![0, 1], amps).unwrap();
        let d = schmidt_decompose(&bell, &pair()).unwrap();
        assert!((d.coeffs[0] - h).abs() < 1e-12 && (d.coeffs[1] - h).abs() < 1e-12);
        assert!((d.entropy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_uneven_pair() {
        assert!((entropy_bits(&[0.9f64.sqrt(), 0.1f64.sqrt()]) - 0.468_995_593_589_281_2).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = Rng8::seed_from_u64(4);
        for (a, b) in [(vec![0], vec![1]), (vec![2, 0], vec![1, 3]), (vec![1], vec![0, 2])] {
            let ids: Vec<u32> = (0..(a.len() + b.len()) as u32).collect();
            let s = random_state(ids, &mut rng);
            let d = schmidt_decompose(&s, &Bipartition::new(a, b)).unwrap();
            let back = d.reconstruct();
            let err = back.iter().zip(s.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
            assert!((d.coeffs.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(d.coeffs.windows(2).all(|w| w[0] >= w[1]));
            for basis in [&d.basis_a, &d.basis_b] {
                for (i, x) in basis.iter().enumerate() {
                    for (j, y) in basis.iter().enumerate() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((x.dotc(y) - C64::new(want, 0.0)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn overlapping_sides_rejected() {
        let mut rng = Rng8::seed_from_u64(1);
        let s = random_state(vec![0, 1], &mut rng);
        assert!(Bipartition::new(vec![0], vec![0]).validate(&s).is_err());
        assert!(Bipartition::new(vec![0], vec![2]).validate(&s).is_err());
        assert!(schmidt_decompose(&s, &Bipartition::new(vec![0, 1], vec![])).is_err());
    }

    #[test]
    fn local_hamiltonians_make_no_entanglement() {
        let mut rng = Rng8::seed_from_u64(7);
        for _ in 0..50 {
            let s = random_state(vec![0, 1], &mut rng);
            let ha = random_hermitian(4, &mut rng);
            for pos in 0..2 {
                let r = entanglement_rate(&s, &pair(), &embed(&ha, pos, 2)).unwrap();
                assert!(r.value.abs() < 1e-10, "{}", r.value);
            }
        }
    }

    #[test]
    fn rate_is_additive_and_odd() {
        let mut rng = Rng8::seed_from_u64(8);
        for _ in 0..50 {
            let s = random_state(vec![0, 1], &mut rng);
            let h1 = random_hermitian(16, &mut rng);
            let h2 = random_hermitian(16, &mut rng);
            let r = |h: &DMatrix<C64>| entanglement_rate(&s, &pair(), h).unwrap().value;
            assert!((r(&(&h1 + &h2)) - r(&h1) - r(&h2)).abs() < 1e-9);
            assert!((r(&(-&h1)) + r(&h1)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut rng = Rng8::seed_from_u64(9);
        let s = random_state(vec![0, 1], &mut rng);
        let mut h = excitation_coupling(0, 1, 2, 1.0);
        h[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(entanglement_rate(&s, &pair(), &h), Err(EntanglementError::NotHermitian(_))));
    }

    #[test]
    fn degenerate_spectrum_flagged() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        amps[0] = C64::new(h, 0.0);
        amps[15] = C64::new(h, 0.0);
        let s = StateVector::from_amplitudes(vec![0, 1], amps).unwrap();
        let r = entanglement_rate(&s, &pair(), &excitation_coupling(0, 1, 2, 1.0)).unwrap();
        assert!(r.degenerate);
    }
}
