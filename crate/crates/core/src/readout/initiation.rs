//! Characterizing an unknown chain by laser scans and fluorescence.
//!
//! The scan order: find the read-out line with no qubit pulses; park the
//! read-out laser there and sweep π pulses until the fluorescence stops
//! (qubit 1); excite qubit 1 and sweep the read-out laser again (`ν₀`); then
//! for qubit `k ≥ 2` sweep π pulses followed by a probe train on qubits
//! `k-1, …, 1` and watch `ν₀`. Without a hit the probe train alternates
//! blocked/unblocked, so the idle signal is bright for even `k`; a hit on
//! qubit `k` flips it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{fluorescence_window, GroundTruthChain, ReadoutError, ReadoutModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanParams {
    /// Grid step of both lasers; a line responds within half a step (Hz).
    pub resolution: f64,
    pub pi_pulse_fidelity: f64,
    /// Repeat measurements that must mostly agree before a change counts.
    pub confirmation_shots: usize,
    /// Full sweeps tried before concluding nothing is there.
    pub max_sweeps: usize,
    pub max_chain: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { resolution: 1e6, pi_pulse_fidelity: 1.0, confirmation_shots: 5, max_sweeps: 3, max_chain: 64 }
    }
}

impl ScanParams {
    pub fn validate(&self, model: &ReadoutModel) -> Result<(), ReadoutError> {
        let p = |field, reason: &str| Err(ReadoutError::Param { field, reason: reason.into() });
        if !(self.resolution > 0.0 && self.resolution <= model.homogeneous_linewidth) {
            return p("resolution", "must be in (0, homogeneous_linewidth]");
        }
        if !(self.pi_pulse_fidelity > 0.0 && self.pi_pulse_fidelity <= 1.0) {
            return p("pi_pulse_fidelity", "must be in (0, 1]");
        }
        if self.confirmation_shots == 0 || self.max_sweeps == 0 {
            return p("confirmation_shots", "shots and sweeps must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaserKind {
    Readout,
    Qubit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase", content = "qubit")]
pub enum ScanPhase {
    ReadoutSearch,
    QubitSearch(usize),
    Nu0Search,
    CollisionCheck(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanLogEntry {
    pub step: usize,
    pub phase: ScanPhase,
    /// The laser being stepped.
    pub laser: LaserKind,
    pub frequency_hz: f64,
    pub pulse_applied: bool,
    pub fluoresced: bool,
    /// The observation differed from the idle signal.
    pub event: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredChain {
    pub found_nu_readout: f64,
    pub found_nu0: Option<f64>,
    pub found_qubit_freqs: Vec<f64>,
    /// Responses that the discovered chain cannot explain.
    pub collision_flag: bool,
    pub scan_log: Vec<ScanLogEntry>,
}

impl DiscoveredChain {
    /// Every frequency found, none missing, within half a step of the truth.
    pub fn recovers(&self, truth: &GroundTruthChain, resolution: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 0.5 * resolution;
        let Some(r) = &truth.readout_ion else {
            return false;
        };
        !self.collision_flag
            && close(self.found_nu_readout, r.shift)
            && (truth.qubits.is_empty() || self.found_nu0.is_some_and(|f| close(f, truth.nu0)))
            && self.found_qubit_freqs.len() == truth.qubits.len()
            && self.found_qubit_freqs.iter().zip(&truth.qubits).all(|(&f, q)| close(f, q.shift))
    }
}

/// A chain as seen by the lasers.
struct Lines<'a> {
    nu_r: Option<f64>,
    nu0: f64,
    qubits: &'a [f64],
}

impl Lines<'_> {
    /// Whether the read-out ion is resonant with `laser` after the pulse
    /// train; `pulse_ok` decides each individual π pulse.
    fn resonant(&self, laser: f64, pulses: &[f64], half: f64, mut pulse_ok: impl FnMut() -> bool) -> bool {
        let n = self.qubits.len();
        let mut excited = vec![false; n];
        for &f in pulses {
            let hit: Vec<usize> =
                (0..n).filter(|&j| (self.qubits[j] - f).abs() <= half).filter(|_| pulse_ok()).collect();
            let mut next = excited.clone();
            for &j in &hit {
                let near = |i: usize| i < n && (excited[i] || hit.contains(&i));
                let blocked = (j > 0 && near(j - 1)) || near(j + 1);
                if !blocked {
                    next[j] = !excited[j];
                }
            }
            excited = next;
        }
        let Some(nu_r) = self.nu_r else {
            return false;
        };
        let line = if n > 0 && excited[0] { self.nu0 } else { nu_r };
        (laser - line).abs() <= half
    }
}

struct Scanner<'a, R: Rng + ?Sized> {
    truth: Lines<'a>,
    model: &'a ReadoutModel,
    params: &'a ScanParams,
    rng: &'a mut R,
    log: Vec<ScanLogEntry>,
}

enum Found {
    Nothing,
    One(f64),
    Several(f64),
}

impl<R: Rng + ?Sized> Scanner<'_, R> {
    fn half(&self) -> f64 {
        0.5 * self.params.resolution
    }

    fn observe(&mut self, phase: ScanPhase, laser: LaserKind, f: f64, tune: (f64, &[f64]), idle: bool) -> bool {
        let fid = self.params.pi_pulse_fidelity;
        let half = self.half();
        let rng = &mut *self.rng;
        let on = self.truth.resonant(tune.0, tune.1, half, || fid >= 1.0 || rng.random::<f64>() < fid);
        let fluoresced = on && fluorescence_window(self.model, self.rng).fluoresced;
        self.log.push(ScanLogEntry {
            step: self.log.len(),
            phase,
            laser,
            frequency_hz: f,
            pulse_applied: !tune.1.is_empty(),
            fluoresced,
            event: fluoresced != idle,
        });
        fluoresced
    }

    /// Repeat an observation; true when most repeats differ from `idle`.
    fn confirm(&mut self, phase: ScanPhase, laser: LaserKind, f: f64, tune: (f64, &[f64]), idle: bool) -> bool {
        let shots = self.params.confirmation_shots;
        let flips = (0..shots).filter(|_| self.observe(phase, laser, f, tune, idle) != idle).count();
        2 * flips > shots
    }

    fn grid(&self, band: (f64, f64)) -> Vec<f64> {
        let r = self.params.resolution;
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let f = band.0 + r * (k as f64 + 0.5);
            if f - 0.5 * r >= band.1 {
                break;
            }
            out.push(f);
            k += 1;
        }
        out
    }

    /// Sweep until a confirmed change shows up, or give up after
    /// `max_sweeps` passes.
    fn search(
        &mut self,
        phase: ScanPhase,
        laser: LaserKind,
        band: (f64, f64),
        skip: &[f64],
        idle: bool,
        tune: impl Fn(f64) -> (f64, Vec<f64>),
    ) -> Found {
        let grid = self.grid(band);
        let half = self.half();
        for _ in 0..self.params.max_sweeps {
            let mut hits: Vec<usize> = Vec::new();
            for (k, &f) in grid.iter().enumerate() {
                if skip.iter().any(|&s| (s - f).abs() < half) {
                    continue;
                }
                let (l, p) = tune(f);
                if self.observe(phase, laser, f, (l, &p), idle) != idle && self.confirm(phase, laser, f, (l, &p), idle) {
                    hits.push(k);
                }
            }
            let clusters: Vec<&[usize]> = hits.chunk_by(|a, b| b - a == 1).collect();
            match clusters.as_slice() {
                [] => continue,
                [c] => return Found::One(grid[c[(c.len() - 1) / 2]]),
                [c, ..] => return Found::Several(grid[c[(c.len() - 1) / 2]]),
            }
        }
        Found::Nothing
    }

    /// Compare the response at already-known qubit cells with what the
    /// discovered chain predicts.
    fn check_known(&mut self, k: usize, found: &[f64], nu_r: f64, nu0: f64, tune: impl Fn(f64) -> (f64, Vec<f64>)) -> bool {
        let model = Lines { nu_r: Some(nu_r), nu0, qubits: found };
        let half = self.half();
        for &f in found {
            let (l, p) = tune(f);
            let expect = model.resonant(l, &p, half, || true);
            if self.observe(ScanPhase::CollisionCheck(k), LaserKind::Qubit, f, (l, &p), expect) != expect
                && self.confirm(ScanPhase::CollisionCheck(k), LaserKind::Qubit, f, (l, &p), expect)
            {
                return false;
            }
        }
        true
    }
}

/// Run the scanning procedure against a hidden chain.
pub fn initiate_characterization<R: Rng + ?Sized>(
    truth: &GroundTruthChain,
    scan: &ScanParams,
    model: &ReadoutModel,
    rng: &mut R,
) -> Result<DiscoveredChain, ReadoutError> {
    truth.validate()?;
    model.validate()?;
    scan.validate(model)?;
    let freqs = truth.qubit_freqs();
    let mut s = Scanner {
        truth: Lines { nu_r: truth.readout_ion.as_ref().map(|r| r.shift), nu0: truth.nu0, qubits: &freqs },
        model,
        params: scan,
        rng,
        log: Vec::new(),
    };
    let mut out = DiscoveredChain {
        found_nu_readout: f64::NAN,
        found_nu0: None,
        found_qubit_freqs: Vec::new(),
        collision_flag: false,
        scan_log: Vec::new(),
    };

    let nu_r = match s.search(ScanPhase::ReadoutSearch, LaserKind::Readout, truth.readout_band, &[], false, |f| (f, vec![])) {
        Found::Nothing => return Err(ReadoutError::ScanExhausted),
        Found::One(f) => f,
        Found::Several(f) => {
            out.collision_flag = true;
            f
        }
    };
    out.found_nu_readout = nu_r;

    if !out.collision_flag {
        match s.search(ScanPhase::QubitSearch(1), LaserKind::Qubit, truth.qubit_band, &[], true, |f| (nu_r, vec![f])) {
            Found::Nothing => {}
            Found::One(f) => out.found_qubit_freqs.push(f),
            Found::Several(f) => {
                out.found_qubit_freqs.push(f);
                out.collision_flag = true;
            }
        }
    }

    if let (Some(&q1), false) = (out.found_qubit_freqs.first(), out.collision_flag) {
        match s.search(ScanPhase::Nu0Search, LaserKind::Readout, truth.readout_band, &[nu_r], false, |f| (f, vec![q1])) {
            Found::Nothing => out.collision_flag = true,
            Found::One(f) => out.found_nu0 = Some(f),
            Found::Several(f) => {
                out.found_nu0 = Some(f);
                out.collision_flag = true;
            }
        }
    }

    if let (Some(nu0), false) = (out.found_nu0, out.collision_flag) {
        for k in 2..=scan.max_chain {
            let known = out.found_qubit_freqs.clone();
            let tune = |f: f64| {
                let mut p = vec![f];
                p.extend(known.iter().rev());
                (nu0, p)
            };
            if !s.check_known(k, &known, nu_r, nu0, tune) {
                out.collision_flag = true;
                break;
            }
            match s.search(ScanPhase::QubitSearch(k), LaserKind::Qubit, truth.qubit_band, &known, k % 2 == 0, tune) {
                Found::Nothing => break,
                Found::One(f) => out.found_qubit_freqs.push(f),
                Found::Several(f) => {
                    out.found_qubit_freqs.push(f);
                    out.collision_flag = true;
                    break;
                }
            }
        }
    }
    out.scan_log = s.log;
    Ok(out)
}
