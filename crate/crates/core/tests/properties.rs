use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use reqc::crystal::{coupling_graph, generate_crystal, BusChannel, ChannelPlan, CouplingParams, CrystalParams};
use reqc::entanglement::{entanglement_rate, f_theta, schmidt_decompose, von_neumann_entropy, Bipartition};
use reqc::level::{Level, Species};
use reqc::qsim::{apply_circuit, circuit_inverse, distill_until_single, BlockadeContext, DistillConfig, Gate, StateVector};
use reqc::readout::{
    initiate_characterization, photon_budget, random_chain, readout_qubit, stark_shift, ChainGeometry, ReadoutModel,
    ScanParams, StarkParams,
};
use reqc::registers::{holeburn_simulate, p_register_exact, p_register_postselect};

const LEVELS: [Level; 4] = [Level::Zero, Level::One, Level::Aux, Level::E];

fn random_state(ids: Vec<u32>, rng: &mut ChaCha8Rng) -> StateVector {
    let d = 4usize.pow(ids.len() as u32);
    let amps = (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    StateVector::normalized(ids, amps).unwrap()
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn random_gate(n_ions: u32, rng: &mut ChaCha8Rng) -> Gate {
    let ion = rng.random_range(0..n_ions);
    let a = LEVELS[rng.random_range(0..4)];
    let b = LEVELS.iter().copied().filter(|&l| l != a).nth(rng.random_range(0..3)).unwrap();
    let (area, phase) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    match rng.random_range(0..3) {
        0 => Gate::Rotation { ion, transition: (a, b), area, phase, blockade: rng.random() },
        1 => {
            let control = (ion + 1) % n_ions;
            Gate::Controlled { control, control_level: LEVELS[rng.random_range(0..4)], ion, transition: (a, b), area, phase }
        }
        _ => Gate::Phase { ion, level: a, angle: phase },
    }
}

fn local_rotations(ion: u32, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    (0..6)
        .map(|_| {
            let a = rng.random_range(0..4);
            let b = (a + rng.random_range(1..4)) % 4;
            Gate::Rotation {
                ion,
                transition: (LEVELS[a], LEVELS[b]),
                area: rng.random_range(0.0..TAU),
                phase: rng.random_range(0.0..TAU),
                blockade: false,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_ions_lie_in_box_and_band(seed in any::<u64>(), n in 0.0..400.0f64) {
        let p = CrystalParams { box_side: 2e-8, density: n / 8e-24, bandwidth: 1e9, dmu_default: 1e-31, seed };
        let c = generate_crystal(&p).unwrap();
        for (i, ion) in c.ions().iter().enumerate() {
            prop_assert_eq!(ion.id as usize, i);
            prop_assert!(ion.position.iter().all(|&x| (0.0..p.box_side).contains(&x)));
            prop_assert!((0.0..p.bandwidth).contains(&ion.shift));
            prop_assert!(ion.dmu > 0.0);
        }
    }

    #[test]
    fn register_probability_peaks_at_one(nbar in 0.01..5.0f64, n in 1u32..=10) {
        prop_assert!(p_register_exact(nbar, n) <= (-(n as f64)).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn postselect_monotone(nbar in 0.01..10.0f64, dn in 0.001..1.0f64, n in 1u32..200) {
        prop_assert!(p_register_postselect(nbar + dn, n) >= p_register_postselect(nbar, n));
        prop_assert!(p_register_postselect(nbar, n + 1) <= p_register_postselect(nbar, n));
    }

    #[test]
    fn holeburn_keeps_complete_registers(seed in any::<u64>()) {
        let plan = ChannelPlan::evenly_spaced(2, 3.0, 3.0, 1.0, 2.0);
        let bus = BusChannel { center: 9.0, width: 1.0 };
        let params = CrystalParams { box_side: 1e-8, density: 600.0 / 1e-24, bandwidth: 12.0, dmu_default: 1e-31, seed };
        let crystal = generate_crystal(&params).unwrap();
        let cp = CouplingParams::default().with_radius(2.5e-9, 1e-31);
        let graph = coupling_graph(&crystal, &cp).unwrap();
        let burnt = holeburn_simulate(&crystal, &graph, &plan, &bus).unwrap();
        for b in crystal.ions().iter().filter(|i| bus.contains(i.shift)) {
            let members: Vec<Vec<u32>> = (0..plan.len())
                .map(|k| {
                    graph.neighbors(b.id).iter().map(|&(id, _)| id)
                        .filter(|&id| plan.channel_of_shift(crystal.ions()[id as usize].shift) == Some(k))
                        .collect()
                })
                .collect();
            if members.iter().all(|m| m.len() == 1) {
                for id in std::iter::once(b.id).chain(members.iter().map(|m| m[0])) {
                    prop_assert_eq!(burnt.ions()[id as usize].level, crystal.ions()[id as usize].level);
                }
            }
        }
    }

    #[test]
    fn circuits_preserve_norm_and_invert(seed in any::<u64>(), len in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(vec![0, 1, 2], &mut rng);
        let ctx = BlockadeContext::new(1.0).with(0, 1, 2.0).with(1, 2, 3.0);
        let gates: Vec<Gate> = (0..len).map(|_| random_gate(3, &mut rng)).collect();
        let out = apply_circuit(&s, &gates, &ctx).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let back = apply_circuit(&out, &circuit_inverse(&gates), &ctx).unwrap();
        for (a, b) in back.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn occupancy_never_increases(seed in any::<u64>(), n in 0usize..=4) {
        let cfg = DistillConfig { seed, beta: 0.2, ..Default::default() };
        let out = distill_until_single(n, &cfg).unwrap();
        let mut last = n;
        for r in &out.rounds {
            prop_assert!(r.occupancy_before <= last);
            last = r.occupancy_before;
        }
        prop_assert!(out.final_occupancy <= last);
        prop_assert!(out.timed_out || out.final_occupancy <= 1);
    }

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>(), na in 1usize..=2, nb in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<u32> = (0..(na + nb) as u32).collect();
        let s = random_state(ids.clone(), &mut rng);
        let bip = Bipartition::new(ids[..na].to_vec(), ids[na..].to_vec());
        let d = schmidt_decompose(&s, &bip).unwrap();
        for (a, b) in d.reconstruct().iter().zip(s.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        for basis in [&d.basis_a, &d.basis_b] {
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let dot: C64 = u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn entropy_ignores_local_unitaries(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(vec![0, 1], &mut rng);
        let bip = Bipartition::new(vec![0], vec![1]);
        let mut gates = local_rotations(0, &mut rng);
        gates.extend(local_rotations(1, &mut rng));
        let t = apply_circuit(&s, &gates, &BlockadeContext::new(1.0)).unwrap();
        let (e0, e1) = (von_neumann_entropy(&s, &bip).unwrap(), von_neumann_entropy(&t, &bip).unwrap());
        prop_assert!((e0 - e1).abs() < 1e-10);
    }

    #[test]
    fn rate_flips_under_time_reversal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(vec![0, 1], &mut rng);
        let h = random_hermitian(16, &mut rng);
        let bip = Bipartition::new(vec![0], vec![1]);
        let fwd = entanglement_rate(&s, &bip, &h).unwrap().value;
        let rev = entanglement_rate(&s, &bip, &(-h)).unwrap().value;
        prop_assert!((fwd + rev).abs() <= 1e-12 * fwd.abs().max(1.0));
    }

    #[test]
    fn f_is_symmetric(theta in 0.0..FRAC_PI_2) {
        prop_assert!((f_theta(theta) - f_theta(FRAC_PI_2 - theta)).abs() < 1e-12);
    }

    #[test]
    fn budget_scales_with_lifetime(lifetime in 1e-6..1.0f64) {
        let m = ReadoutModel { qubit_e_lifetime: lifetime, ..Default::default() };
        let m2 = ReadoutModel { qubit_e_lifetime: 2.0 * lifetime, ..Default::default() };
        let (a, b) = (photon_budget(&m, 0.99).unwrap(), photon_budget(&m2, 0.99).unwrap());
        prop_assert!((b.required_emission_interval - 2.0 * a.required_emission_interval).abs()
            <= 1e-15 * b.required_emission_interval);
    }

    #[test]
    fn readout_deterministic_without_trapping(seed in any::<u64>(), l in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = ReadoutModel { trap_probability_per_cycle: 0.0, ..Default::default() };
        let r = readout_qubit(1, LEVELS[l], &model, &mut rng).unwrap();
        prop_assert_eq!(r.fluoresced, LEVELS[l] == Level::Zero);
    }

    #[test]
    fn stark_is_linear(a in 0.0..1e7f64, b in 0.0..1e7f64) {
        let s = |field| stark_shift(&StarkParams { field, ..Default::default() }).unwrap();
        prop_assert!((s(a + b) - s(a) - s(b)).abs() <= 1e-6 * s(a + b).max(1.0));
        prop_assert_eq!(s(0.0), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reported_frequencies_have_evidence(seed in any::<u64>(), n in 1usize..=3, fidelity in 0.9..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = random_chain(n, &ChainGeometry::default(), &mut rng).unwrap();
        let scan = ScanParams { pi_pulse_fidelity: fidelity, ..Default::default() };
        let d = initiate_characterization(&truth, &scan, &ReadoutModel::default(), &mut rng).unwrap();
        let reported = std::iter::once(d.found_nu_readout).chain(d.found_nu0).chain(d.found_qubit_freqs.iter().copied());
        for f in reported {
            prop_assert!(d.scan_log.iter().any(|e| e.event && e.frequency_hz == f), "{}", f);
        }
    }
}

#[test]
fn readout_species_never_in_generated_crystals() {
    let p = CrystalParams { box_side: 2e-8, density: 1e25, bandwidth: 1e9, dmu_default: 1e-31, seed: 1 };
    assert!(generate_crystal(&p).unwrap().ions().iter().all(|i| i.species == Species::QubitDopant));
}
