mod common;

use std::f64::consts::PI;

use parity_teleport::bell::{
    bell_projectors, collapse, expand_in_bell, outcome_probabilities, BellOutcome,
};
use parity_teleport::dsl::{parse, pretty_print};
use parity_teleport::elements::{dp_sph, BsConvention, Element, ElementOp};
use parity_teleport::hilbert::{
    max_abs, pairing_isometry, OamWindow, Photon, PhotonSpace, TwoPhotonState,
};
use parity_teleport::protocol::{derive_correction_table, haar_qubit, MeasurementMode, Session};
use parity_teleport::spdc::{
    make_chi0, make_profile, prepare_polarization, random_profile, Profile, ProfileKind,
};
use proptest::prelude::*;

fn total_element(n_paths: usize) -> impl Strategy<Value = Element> {
    let path = 0..n_paths;
    let arm = prop_oneof![Just(None), (0..n_paths).prop_map(Some)];
    let pair = (0..n_paths, 0..n_paths).prop_filter("distinct", |(a, b)| a != b);
    let triple =
        (0..n_paths, 0..n_paths, 0..n_paths).prop_filter("distinct outputs", |(_, x, y)| x != y);
    let conv = prop_oneof![Just(BsConvention::Symmetric), Just(BsConvention::Hadamard)];
    prop_oneof![
        (arm.clone(), -PI..PI).prop_map(|(arm, phi)| Element::ParityPhase { phi, arm }),
        (path, -PI..PI).prop_map(|(path, phi)| Element::Delay { path, phi }),
        triple
            .clone()
            .prop_map(|(input, even, odd)| Element::Sorter { input, even, odd }),
        triple.prop_map(|(input, h, v)| Element::Pbs { input, h, v }),
        (pair, conv).prop_map(|((a, b), convention)| Element::BeamSplitter { a, b, convention }),
        (arm.clone(), -PI..PI).prop_map(|(arm, theta)| Element::Hwp { theta, arm }),
        (arm, -PI..PI).prop_map(|(arm, theta)| Element::Qwp { theta, arm }),
    ]
}

fn profile_and_input(
    k: i64,
    seed: u64,
) -> (
    Profile,
    parity_teleport::hilbert::C64,
    parity_teleport::hilbert::C64,
) {
    let mut r = common::rng(seed);
    let p = random_profile(1, k, &mut r).unwrap();
    let (a, b) = haar_qubit(&mut r);
    (p, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compositions_are_unitary(
        k in 1i64..4,
        elements in prop::collection::vec(total_element(3), 0..8),
        dp_arm in prop::option::of(0usize..3),
    ) {
        let space = PhotonSpace::new(OamWindow::new(k).unwrap(), 3).unwrap();
        let mut elements = elements;
        elements.push(Element::DovePrism { arm: dp_arm });
        elements.push(Element::Sph { charge: 1, arm: dp_arm });
        let op = ElementOp::sequence(elements, space).unwrap();
        prop_assert!(op.is_total());
        prop_assert!(op.unitarity_error() < 1e-12);
    }

    #[test]
    fn partial_elements_are_isometries_on_their_domain(k in 1i64..5, charge in prop_oneof![Just(1i32), Just(-1)]) {
        let space = PhotonSpace::single(OamWindow::new(k).unwrap());
        for e in [Element::DovePrism { arm: None }, Element::Sph { charge, arm: None }] {
            let op = ElementOp::new(e, space).unwrap();
            prop_assert!(!op.is_total());
            prop_assert!(op.isometry_error() < 1e-12);
        }
    }

    #[test]
    fn equal_probability_law(k in 1i64..7, seed in any::<u64>()) {
        let (p, a, b) = profile_and_input(k, seed);
        let chi = prepare_polarization(&make_chi0(&p), a, b).unwrap();
        let d = outcome_probabilities(&chi).unwrap();
        prop_assert!((d.total() - 1.0).abs() < 1e-12);
        prop_assert!(d.max_deviation_from(0.25) < 1e-12);
    }

    #[test]
    fn expansion_reconstructs(k in 1i64..5, seed in any::<u64>()) {
        let (p, a, b) = profile_and_input(k, seed);
        let chi = prepare_polarization(&make_chi0(&p), a, b).unwrap();
        let back = expand_in_bell(&chi).unwrap().reconstruct(chi.window()).unwrap();
        prop_assert!(max_abs(&(back.amps() - chi.amps())) < 1e-12);
    }

    #[test]
    fn collapsed_parity_qubit_is_pure(k in 1i64..6, seed in any::<u64>()) {
        let (p, a, b) = profile_and_input(k, seed);
        let chi = prepare_polarization(&make_chi0(&p), a, b).unwrap();
        // The four qubit states α|E⟩±β|O⟩, α|O⟩±β|E⟩.
        let candidates = [(a, b), (a, -b), (b, a), (-b, a)];
        for o in BellOutcome::ALL {
            let q = pairing_isometry(&collapse(&chi, o).unwrap()).qubit;
            prop_assert!((q.purity() - 1.0).abs() < 1e-10);
            let best = candidates.iter().map(|&(x, y)| q.fidelity(x, y).unwrap()).fold(0.0, f64::max);
            prop_assert!((best - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn teleportation_theorem(k in 1i64..6, seed in any::<u64>(), apparatus in any::<bool>()) {
        let (p, a, b) = profile_and_input(k, seed);
        let mode = if apparatus { MeasurementMode::Apparatus } else { MeasurementMode::Projector };
        let report = Session::new(&p, mode, BsConvention::Hadamard).unwrap().exhaustive(a, b).unwrap();
        for r in &report.outcomes {
            prop_assert!(r.parity_fidelity_post.unwrap() >= 1.0 - 1e-10);
            prop_assert!(r.parity_fidelity_post.unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dp_sph_on_b_pairs_equal_charges(k in 1i64..6, seed in any::<u64>()) {
        // (I ⊗ DP·SPH) Σ c_m |m⟩|1-m⟩ = Σ c_m |m⟩|m⟩.
        let p = random_profile(1, k, &mut common::rng(seed)).unwrap();
        let chi0 = make_chi0(&p);
        let op = dp_sph(chi0.space_b());
        let out = op.apply_to_photon(Photon::B, &chi0).unwrap();
        let diag = TwoPhotonState::new(chi0.space_a(), chi0.space_b(), {
            let mut m = out.amps().clone() * parity_teleport::hilbert::c64(0.0, 0.0);
            for (i, _) in chi0.space_a().modes() {
                m[(i, i)] = chi0.amps().row(i).iter().copied().sum();
            }
            m
        }).unwrap();
        prop_assert!(max_abs(&(out.amps() - diag.amps())) < 1e-12);
    }

    #[test]
    fn json_round_trips(k in 1i64..5, seed in any::<u64>()) {
        let (p, a, b) = profile_and_input(k, seed);
        let back = Profile::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert!(back.coeffs().zip(p.coeffs()).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).norm() < 1e-15));
        let chi = prepare_polarization(&make_chi0(&p), a, b).unwrap();
        let chi_back = TwoPhotonState::from_json(&chi.to_json().unwrap()).unwrap();
        prop_assert!(max_abs(&(chi_back.amps() - chi.amps())) < 1e-15);
    }

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let program = common::random_program(&mut common::rng(seed));
        let text = pretty_print(&program);
        prop_assert_eq!(parse(&text).unwrap(), program);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,120}") {
        let _ = parse(&s);
    }
}

#[test]
fn projector_algebra_all_windows() {
    for k in 1..=8 {
        let ps = bell_projectors(OamWindow::new(k).unwrap());
        for (_, p) in ps.iter() {
            assert!(max_abs(&(p * p - p)) < 1e-12);
        }
    }
}

#[test]
fn table_is_shared_by_random_profiles() {
    let reference = make_profile(&ProfileKind::Uniform, 1, 4).unwrap();
    let want = derive_correction_table(reference.window(), &reference).unwrap();
    let mut r = common::rng(5);
    for _ in 0..25 {
        let p = random_profile(1, 4, &mut r).unwrap();
        assert_eq!(derive_correction_table(p.window(), &p).unwrap(), want);
    }
}
