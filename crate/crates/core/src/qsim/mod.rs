//! Exact state-vector simulation of a few four-level ions.
//!
//! Basis states are `|l_0 l_1 … l_{k-1}⟩` with `l ∈ {0, 1, aux, e}` and ion 0
//! the slowest-varying index, so the amplitude of a basis state sits at
//! `Σ_p l_p · 4^(k-1-p)`.
//!
//! Two-level rotations follow `R(θ, φ) = exp(-iθ/2 (cos φ σx + sin φ σy))`
//! on an ordered transition `(a, b)`, with `σx = |a⟩⟨b| + |b⟩⟨a|` and
//! `σy = -i|a⟩⟨b| + i|b⟩⟨a|`. In particular `R(π, 0)|a⟩ = -i|b⟩`.

mod distill;
mod gates;
pub mod operators;
mod pulse;

pub use distill::{
    default_alpha_schedule, distill_prepare, distill_round, distill_until_single, DistillConfig,
    DistillOutcome, RoundParams, RoundRecord, RoundReport,
};
pub use gates::{apply_circuit, circuit_inverse, rotation_matrix, Gate};
pub use pulse::{apply_pulse, blockade_cz, PulseMode, PulseOp, PulseTarget};

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::crystal::CouplingGraph;
use crate::level::Level;

#[derive(Debug, Error, PartialEq)]
pub enum QsimError {
    #[error("ion {0} is not part of this state")]
    UnknownIon(u32),
    #[error("duplicate ion id {0}")]
    DuplicateIon(u32),
    #[error("amplitude vector has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("invalid operation: {0}")]
    InvalidOp(String),
    #[error("ions {0} and {1} are not coupled above the blockade threshold")]
    Architecture(u32, u32),
    #[error("protocol precondition violated: {0}")]
    ProtocolState(String),
}

const NORM_TOL: f64 = 1e-12;

/// Pure state of an ordered list of ions.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    ion_ids: Vec<u32>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Product state with every ion in the given level.
    pub fn product(ions: &[(u32, Level)]) -> Result<Self, QsimError> {
        let ids: Vec<u32> = ions.iter().map(|&(id, _)| id).collect();
        check_unique(&ids)?;
        let mut amps = vec![C64::new(0.0, 0.0); Level::DIM.pow(ids.len() as u32)];
        let idx = ions.iter().fold(0, |acc, &(_, l)| acc * Level::DIM + l.index());
        amps[idx] = C64::new(1.0, 0.0);
        Ok(StateVector { ion_ids: ids, amps })
    }

    /// Build from explicit amplitudes; the vector must be normalized.
    pub fn from_amplitudes(ion_ids: Vec<u32>, amps: Vec<C64>) -> Result<Self, QsimError> {
        check_unique(&ion_ids)?;
        let expected = Level::DIM.pow(ion_ids.len() as u32);
        if amps.len() != expected {
            return Err(QsimError::Shape { expected, found: amps.len() });
        }
        let s = StateVector { ion_ids, amps };
        let n = s.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(QsimError::NotNormalized(n));
        }
        Ok(s)
    }

    /// Normalize arbitrary nonzero amplitudes.
    pub fn normalized(ion_ids: Vec<u32>, mut amps: Vec<C64>) -> Result<Self, QsimError> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(QsimError::NotNormalized(n));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Self::from_amplitudes(ion_ids, amps)
    }

    /// Haar-random state: normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(ion_ids: Vec<u32>, rng: &mut R) -> Result<Self, QsimError> {
        let d = Level::DIM.pow(ion_ids.len() as u32);
        let amps = (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        Self::normalized(ion_ids, amps)
    }

    pub fn ion_ids(&self) -> &[u32] {
        &self.ion_ids
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn position(&self, id: u32) -> Result<usize, QsimError> {
        self.ion_ids.iter().position(|&x| x == id).ok_or(QsimError::UnknownIon(id))
    }

    pub(crate) fn stride(&self, pos: usize) -> usize {
        Level::DIM.pow((self.ion_ids.len() - 1 - pos) as u32)
    }

    /// Level of the ion at position `pos` in basis state `idx`.
    #[inline]
    pub(crate) fn level_at(&self, idx: usize, pos: usize) -> usize {
        (idx / self.stride(pos)) % Level::DIM
    }

    /// Amplitude of the basis state with the given levels (in ion order).
    pub fn amplitude(&self, levels: &[Level]) -> Result<C64, QsimError> {
        if levels.len() != self.ion_ids.len() {
            return Err(QsimError::Shape { expected: self.ion_ids.len(), found: levels.len() });
        }
        let idx = levels.iter().fold(0, |acc, l| acc * Level::DIM + l.index());
        Ok(self.amps[idx])
    }

    /// Probability of finding ion `id` in `level`.
    pub fn population(&self, id: u32, level: Level) -> Result<f64, QsimError> {
        let pos = self.position(id)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.level_at(*i, pos) == level.index())
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// `⟨ψ|φ⟩` for states over the same ion list.
    pub fn inner(&self, other: &StateVector) -> Result<C64, QsimError> {
        if self.ion_ids != other.ion_ids {
            return Err(QsimError::InvalidOp("inner product of states over different ions".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn renormalize(&mut self) -> Result<(), QsimError> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(QsimError::NotNormalized(n));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    /// Keep only the component where ion `id` is in `level`, renormalized.
    pub fn project(&mut self, id: u32, level: Level) -> Result<(), QsimError> {
        let pos = self.position(id)?;
        for i in 0..self.amps.len() {
            if self.level_at(i, pos) != level.index() {
                self.amps[i] = C64::new(0.0, 0.0);
            }
        }
        self.renormalize()
    }

    /// Remove the `level` component of ion `id`, renormalized.
    pub fn project_out(&mut self, id: u32, level: Level) -> Result<(), QsimError> {
        let pos = self.position(id)?;
        for i in 0..self.amps.len() {
            if self.level_at(i, pos) == level.index() {
                self.amps[i] = C64::new(0.0, 0.0);
            }
        }
        self.renormalize()
    }

    /// Apply the jump operator `|to⟩⟨from|` on ion `id` and renormalize.
    pub fn jump(&mut self, id: u32, from: Level, to: Level) -> Result<(), QsimError> {
        let pos = self.position(id)?;
        let stride = self.stride(pos);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if self.level_at(i, pos) == from.index() {
                let j = i + to.index() * stride - from.index() * stride;
                out[j] = *a;
            }
        }
        self.amps = out;
        self.renormalize()
    }

    /// Measure ion `id` in the level basis, collapse, and return the outcome.
    pub fn measure<R: Rng + ?Sized>(&mut self, id: u32, rng: &mut R) -> Result<Level, QsimError> {
        let probs: Vec<f64> = Level::ALL
            .iter()
            .map(|&l| self.population(id, l))
            .collect::<Result<_, _>>()?;
        let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut outcome = *Level::ALL.iter().rev().find(|l| probs[l.index()] > 0.0).unwrap_or(&Level::Zero);
        for &l in &Level::ALL {
            acc += probs[l.index()];
            if u < acc && probs[l.index()] > 0.0 {
                outcome = l;
                break;
            }
        }
        self.project(id, outcome)?;
        Ok(outcome)
    }

    /// Measure ion `id` and move it to `level` (optical pumping).
    pub fn reset<R: Rng + ?Sized>(&mut self, id: u32, level: Level, rng: &mut R) -> Result<(), QsimError> {
        let found = self.measure(id, rng)?;
        if found != level {
            self.jump(id, found, level)?;
        }
        Ok(())
    }

    /// Trace out an ion that is in a definite level, returning the reduced
    /// pure state. Fails if the ion is entangled or in superposition.
    pub fn remove_ion(&self, id: u32) -> Result<StateVector, QsimError> {
        let pos = self.position(id)?;
        let level = Level::ALL
            .into_iter()
            .find(|&l| (self.population(id, l).unwrap_or(0.0) - 1.0).abs() < NORM_TOL)
            .ok_or_else(|| QsimError::InvalidOp(format!("ion {id} is not in a definite level")))?;
        let stride = self.stride(pos);
        let outer = self.amps.len() / (stride * Level::DIM);
        let mut amps = Vec::with_capacity(self.amps.len() / Level::DIM);
        for hi in 0..outer {
            let base = hi * stride * Level::DIM + level.index() * stride;
            amps.extend_from_slice(&self.amps[base..base + stride]);
        }
        let mut ion_ids = self.ion_ids.clone();
        ion_ids.remove(pos);
        Ok(StateVector { ion_ids, amps })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QsimError> {
        let mut ids = self.ion_ids.clone();
        ids.extend_from_slice(&other.ion_ids);
        check_unique(&ids)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { ion_ids: ids, amps })
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

fn check_unique(ids: &[u32]) -> Result<(), QsimError> {
    for (i, a) in ids.iter().enumerate() {
        if ids[..i].contains(a) {
            return Err(QsimError::DuplicateIon(*a));
        }
    }
    Ok(())
}

/// Probability that `ion_id` is found in `level`.
pub fn measure_population(state: &StateVector, ion_id: u32, level: Level) -> Result<f64, QsimError> {
    state.population(ion_id, level)
}

/// Pairwise couplings between the ions of a state, plus the blockade
/// threshold that decides which pairs block each other.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockadeContext {
    g_min: f64,
    couplings: HashMap<(u32, u32), f64>,
}

impl BlockadeContext {
    pub fn new(g_min: f64) -> Self {
        BlockadeContext { g_min, couplings: HashMap::new() }
    }

    /// Context holding every edge of a coupling graph.
    pub fn from_graph(graph: &CouplingGraph) -> Self {
        let mut ctx = BlockadeContext::new(graph.g_min());
        for e in graph.edges() {
            ctx.set(e.a, e.b, e.g);
        }
        ctx
    }

    pub fn with(mut self, a: u32, b: u32, g: f64) -> Self {
        self.set(a, b, g);
        self
    }

    pub fn set(&mut self, a: u32, b: u32, g: f64) {
        self.couplings.insert(key(a, b), g);
    }

    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    /// Coupling in Hz, if known.
    pub fn coupling(&self, a: u32, b: u32) -> Option<f64> {
        self.couplings.get(&key(a, b)).copied()
    }

    pub fn blocks(&self, a: u32, b: u32) -> bool {
        a != b && self.coupling(a, b).is_some_and(|g| g >= self.g_min)
    }
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
