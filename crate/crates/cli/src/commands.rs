//! One function per subcommand. Each validates its section first (failures
//! are configuration errors) and then runs; trial `i` of a command always
//! draws from `derive_seed(master_seed, <command>, i)`.

use std::fmt::Display;
use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use reqc::crystal::{generate_crystal, save_crystal, CrystalParams};
use reqc::entanglement::{cz_pulse_plan, f_max, f_theta, rate_bound_check, simulate_gate_trajectory, Bipartition};
use reqc::level::Level;
use reqc::qsim::{distill_until_single, DistillConfig, StateVector};
use reqc::readout::{
    initiate_characterization, photon_budget, random_chain, stark_shift, DiscoveredChain, StarkParams,
};
use reqc::registers::{
    analytic_nbar, enhancement_factor, p_register_exact, p_register_postselect, required_nbar,
    CensusExperiment, CensusLayout, RegisterStatsQuery,
};
use reqc::seeding::{derive_seed, task_rng};

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

fn config<E: Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime<E: Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn require(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

pub fn gen_crystal(cfg: &RunConfig, out: Option<&Path>) -> Result<Table, CliError> {
    let out = out.ok_or_else(|| CliError::Config("gen-crystal needs an output path (--out)".into()))?;
    let c = &cfg.crystal;
    let params = CrystalParams {
        box_side: c.box_side,
        density: c.density,
        bandwidth: c.bandwidth,
        dmu_default: c.dmu,
        seed: derive_seed(cfg.master_seed, "gen-crystal", 0),
    };
    params.validate().map_err(config)?;
    c.coupling.validate().map_err(config)?;
    require(c.channel_width > 0.0 && c.channel_width <= c.bandwidth, "crystal.channel_width must be in (0, bandwidth]")?;
    let crystal = generate_crystal(&params).map_err(runtime)?;
    save_crystal(&crystal, out).map_err(runtime)?;

    let radius = c.coupling.blockade_radius(c.dmu);
    let mut t = Table::new("gen-crystal", &["ions", "expected_ions", "blockade_radius_m", "nbar_per_channel"]);
    t.push(vec![
        crystal.len().into(),
        params.expected_count().into(),
        radius.into(),
        analytic_nbar(c.density, radius, c.channel_width, c.bandwidth).into(),
    ]);
    Ok(t)
}

pub fn census(cfg: &RunConfig) -> Result<Table, CliError> {
    let c = &cfg.census;
    let mut cells = Vec::new();
    for &n in &c.n_qubits {
        for &nbar in &c.nbar {
            let exp = CensusExperiment {
                layout: CensusLayout::with_width(n, c.channel_width),
                nbar,
                coupling: c.coupling,
                dmu: c.dmu,
                box_in_radii: c.box_in_radii,
                bus_candidates: c.bus_candidates,
                crystals: cfg.trials,
                seed: derive_seed(cfg.master_seed, "census", cells.len() as u64),
            };
            exp.validate().map_err(config)?;
            cells.push(exp);
        }
    }
    let mut t = Table::new(
        "census",
        &[
            "architecture", "N", "nbar", "nbar_analytic", "trials", "hits", "p_hat", "ci_lo", "ci_hi", "p_eq1",
            "bus_clique_ratio",
        ],
    );
    for exp in &cells {
        let (bus, clique) = exp.run().map_err(runtime)?;
        let l = &exp.layout;
        let nbar_analytic = analytic_nbar(exp.density(), exp.radius(), l.channel_width, l.bandwidth());
        let n = l.n_qubits;
        let ratio = (n >= 3 && clique.hits > 0).then(|| bus.p_hat / clique.p_hat);
        for r in [&bus, &clique] {
            let row = r.row(nbar_analytic, p_register_exact(exp.nbar, n));
            t.push(vec![
                r.architecture.label().into(),
                n.into(),
                exp.nbar.into(),
                row.nbar_analytic.into(),
                row.trials.into(),
                row.hits.into(),
                row.p_hat.into(),
                row.ci_lo.into(),
                row.ci_hi.into(),
                row.p_eq1.into(),
                ratio.into(),
            ]);
        }
    }
    Ok(t)
}

pub fn stats(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = &cfg.stats;
    let mut t = Table::new(
        "stats",
        &[
            "N", "nbar", "p_register_exact", "p_register_postselect", "required_nbar_approx", "required_nbar_exact",
            "enhancement_factor",
        ],
    );
    for &n in &s.n_qubits {
        require(n >= 1, "stats.n_qubits entries must be >= 1")?;
        for &nbar in &s.nbar {
            RegisterStatsQuery { nbar, n_qubits: n, target_p: s.target_p }.validate().map_err(config)?;
            let req = required_nbar(n, s.target_p).map_err(config)?;
            t.push(vec![
                n.into(),
                nbar.into(),
                p_register_exact(nbar, n).into(),
                p_register_postselect(nbar, n).into(),
                req.approximate.into(),
                req.exact.into(),
                enhancement_factor(n).ok().into(),
            ]);
        }
    }
    Ok(t)
}

pub fn distill(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = &cfg.distill;
    let base = DistillConfig {
        alpha_schedule: d.alpha_schedule.clone(),
        beta: d.beta,
        branch_to_aux: d.branch_to_aux,
        max_rounds: d.max_rounds,
        seed: 0,
        trace: false,
    };
    base.validate().map_err(config)?;
    let jobs: Vec<(usize, u64)> = d.n_initial.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let outcomes = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, _))| {
            let c = DistillConfig { seed: derive_seed(cfg.master_seed, "distill", i as u64), ..base.clone() };
            distill_until_single(n, &c)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let mut t = Table::new(
        "distill",
        &["n_initial", "trial", "final_occupancy", "rounds_used", "decays", "tagged_rounds", "timed_out"],
    );
    for (&(n, trial), o) in jobs.iter().zip(&outcomes) {
        t.push(vec![
            n.into(),
            trial.into(),
            o.final_occupancy.into(),
            o.rounds_used.into(),
            o.per_round_decays.iter().sum::<usize>().into(),
            o.rounds.iter().filter(|r| r.tagged).count().into(),
            o.timed_out.into(),
        ]);
    }
    Ok(t)
}

pub fn ent_rate(cfg: &RunConfig) -> Result<Table, CliError> {
    let g = cfg.entanglement.g;
    require(g > 0.0 && g.is_finite(), "entanglement.g must be > 0")?;
    let bip = Bipartition::new(vec![0], vec![1]);
    let reports = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(cfg.master_seed, "ent-rate", i);
            let s = StateVector::random(vec![0, 1], &mut rng).map_err(runtime)?;
            rate_bound_check(&s, &bip, g).map_err(runtime)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "ent-rate",
        &["sample", "entropy_bits", "edot_bits_per_s", "pe_tot", "bound", "ratio", "satisfied", "degenerate"],
    );
    for (i, r) in reports.iter().enumerate() {
        let ratio = (r.pe_tot > 0.0).then(|| r.edot.abs() / (r.pe_tot * g));
        t.push(vec![
            i.into(),
            r.entropy.into(),
            r.edot.into(),
            r.pe_tot.into(),
            r.bound.into(),
            ratio.into(),
            r.satisfied.into(),
            r.degenerate.into(),
        ]);
    }
    Ok(t)
}

pub fn f_max_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let points = cfg.entanglement.f_points;
    require(points >= 2, "entanglement.f_points must be >= 2")?;
    let mut t = Table::new("f-max", &["theta", "f", "is_max"]);
    for k in 0..points {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (points - 1) as f64;
        t.push(vec![theta.into(), f_theta(theta).into(), false.into()]);
    }
    let (theta, f) = f_max();
    t.push(vec![theta.into(), f.into(), true.into()]);
    Ok(t)
}

fn plus_plus() -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    for a in [Level::Zero, Level::One] {
        for b in [Level::Zero, Level::One] {
            amps[a.index() * Level::DIM + b.index()] = C64::new(0.5, 0.0);
        }
    }
    StateVector::from_amplitudes(vec![0, 1], amps).expect("normalized")
}

pub fn gate_bound(cfg: &RunConfig) -> Result<Table, CliError> {
    let e = &cfg.entanglement;
    require(e.gate_g.iter().all(|&g| g > 0.0 && g.is_finite()), "entanglement.gate_g entries must be > 0")?;
    require(e.gate_rabi.iter().all(|&r| r > 0.0 && r.is_finite()), "entanglement.gate_rabi entries must be > 0")?;
    require(e.step_fraction > 0.0 && e.step_fraction <= 0.1, "entanglement.step_fraction must be in (0, 0.1]")?;
    let cells: Vec<(f64, f64)> = e.gate_g.iter().flat_map(|&g| e.gate_rabi.iter().map(move |&r| (g, r))).collect();
    let start = plus_plus();
    let runs = cells
        .par_iter()
        .map(|&(g, rabi)| {
            simulate_gate_trajectory(&start, &cz_pulse_plan(0, 1, rabi), g, e.step_fraction / (g + rabi))
                .map_err(runtime)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "gate-bound",
        &["g", "rabi", "steps", "final_entropy", "integrated_pe", "half_g_integral", "worst_margin", "satisfied"],
    );
    for (&(g, rabi), tr) in cells.iter().zip(&runs) {
        let margin = tr.worst_bound_margin(g);
        let integral = tr.total_integrated_pe();
        t.push(vec![
            g.into(),
            rabi.into(),
            (tr.times.len() - 1).into(),
            tr.final_entropy().into(),
            integral.into(),
            (0.5 * g * integral).into(),
            margin.into(),
            (margin <= 1e-9).into(),
        ]);
    }
    Ok(t)
}

pub fn readout_budget(cfg: &RunConfig) -> Result<Table, CliError> {
    let r = &cfg.readout;
    let b = photon_budget(&r.model, r.success_target).map_err(config)?;
    let mut t = Table::new(
        "readout-budget",
        &["success_target", "emission_interval_s", "emitted_photons", "max_trap_probability", "required_cycles"],
    );
    t.push(vec![
        r.success_target.into(),
        b.required_emission_interval.into(),
        b.emitted_photons.into(),
        b.max_trap_probability.into(),
        b.required_cycles.into(),
    ]);
    Ok(t)
}

fn scan_log_table(d: &DiscoveredChain) -> Table {
    let mut t = Table::new("scan-log", &["step", "laser", "frequency_Hz", "pulse_applied", "fluoresced"]);
    for e in &d.scan_log {
        let laser = match e.laser {
            reqc::readout::LaserKind::Readout => "readout",
            reqc::readout::LaserKind::Qubit => "qubit",
        };
        t.push(vec![e.step.into(), laser.into(), e.frequency_hz.into(), e.pulse_applied.into(), e.fluoresced.into()]);
    }
    t
}

pub fn readout_init(cfg: &RunConfig) -> Result<Table, CliError> {
    let r = &cfg.readout;
    r.model.validate().map_err(config)?;
    r.scan.validate(&r.model).map_err(config)?;
    require(r.chain_length >= 1, "readout.chain_length must be >= 1")?;
    let runs = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(cfg.master_seed, "readout-init", i);
            let truth = random_chain(r.chain_length, &r.geometry, &mut rng).map_err(runtime)?;
            let found = initiate_characterization(&truth, &r.scan, &r.model, &mut rng).map_err(runtime)?;
            Ok((found.recovers(&truth, r.scan.resolution), found))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if let (Some(path), Some((_, first))) = (&r.scan_log, runs.first()) {
        std::fs::write(path, scan_log_table(first).render(crate::config::Format::Csv)).map_err(runtime)?;
    }
    let mut t = Table::new(
        "readout-init",
        &["trial", "chain_length", "recovered", "collision_flag", "qubits_found", "scan_steps"],
    );
    for (i, (ok, d)) in runs.iter().enumerate() {
        t.push(vec![
            i.into(),
            r.chain_length.into(),
            (*ok).into(),
            d.collision_flag.into(),
            d.found_qubit_freqs.len().into(),
            d.scan_log.len().into(),
        ]);
    }
    Ok(t)
}

pub fn stark(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = &cfg.stark;
    let mut t = Table::new("stark", &["field_V_per_cm", "shift_Hz"]);
    for &field in &s.fields {
        let shift = stark_shift(&StarkParams { coefficient: s.coefficient, field }).map_err(config)?;
        t.push(vec![field.into(), Cell::Float(shift)]);
    }
    Ok(t)
}
