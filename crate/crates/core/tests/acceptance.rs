//! Acceptance checks. Prints one line per criterion and exits nonzero if any fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use common::{fuzz_input, random_case, random_program, rng, BELL_BENCH, SWAP_BENCH};
use nalgebra::{DMatrix, Matrix2};
use parity_teleport::apparatus::{build_fig1_bench, derive_detector_map, detector_distribution};
use parity_teleport::bell::{
    bell_projectors, bell_state, expand_in_bell, outcome_probabilities, BellOutcome, BellProjectors,
};
use parity_teleport::dsl::{lower, parse, parse_bytes, pretty_print};
use parity_teleport::elements::{dp_sph, induced_parity_matrix, BsConvention, Element, ElementOp};
use parity_teleport::hilbert::{
    c64, max_abs, pairing_isometry, OamWindow, PhotonSpace, Pol, SinglePhotonState, C64,
};
use parity_teleport::protocol::{
    haar_qubit, l0_negative_control, octahedral_states, pump_control,
    swap_parity_polarization_pure, Correction, MeasurementMode, Session, SwapCircuit, TrialRecord,
};
use parity_teleport::spdc::{
    make_chi0, make_profile, parity_states, prepare_polarization, ProfileKind,
};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const CONVENTIONS: [BsConvention; 2] = [BsConvention::Symmetric, BsConvention::Hadamard];

fn window(k: i64) -> OamWindow {
    OamWindow::new(k).unwrap()
}

fn equal_up_to_phase(got: &Matrix2<C64>, want: &Matrix2<C64>) -> f64 {
    let overlap = got.component_mul(&want.conjugate()).sum();
    if overlap.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = overlap / c64(overlap.norm(), 0.0);
    max_abs(&(got - want * phase))
}

fn with_pol(state: &SinglePhotonState, pol: Pol) -> SinglePhotonState {
    let space = state.space();
    let mut out = SinglePhotonState::zero(space);
    for (i, m) in space.modes() {
        let a = state.amps()[i];
        if a.norm_sqr() > 0.0 {
            let b = SinglePhotonState::basis(space, m.q, pol, m.path).unwrap();
            out = out.add(&b.scale(a)).unwrap();
        }
    }
    out
}

fn overlap_fidelity(a: &SinglePhotonState, b: &SinglePhotonState) -> f64 {
    a.inner(b).unwrap().norm_sqr()
}

/// 120 random cases: 20 per window half-width 1..6.
fn cases() -> Vec<(parity_teleport::spdc::Profile, C64, C64)> {
    let mut r = rng(1001);
    (1..=6)
        .flat_map(|k| (0..20).map(|_| random_case(&mut r, k)).collect::<Vec<_>>())
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_branch = 0.0f64;
    let all = cases();
    for (p, a, b) in &all {
        let chi = prepare_polarization(&make_chi0(p), *a, *b).unwrap();
        let d = outcome_probabilities(&chi).unwrap();
        worst = worst.max(d.max_deviation_from(0.25));
        // Independent route: norms of the Bell-basis expansion branches.
        let expansion = expand_in_bell(&chi).unwrap();
        for o in BellOutcome::ALL {
            let norm: f64 = expansion
                .branches
                .iter()
                .filter(|br| br.outcome == o)
                .map(|br| br.bob.norm_sqr())
                .sum();
            worst_branch = worst_branch.max((norm - 0.25).abs());
        }
    }
    ensure!(
        worst < 1e-12 && worst_branch < 1e-12,
        "max |p - 1/4| = {worst:.2e}, branch norms {worst_branch:.2e}"
    );
    Ok(format!(
        "{} cases, max |p - 1/4| = {worst:.2e}, branch norms {worst_branch:.2e}",
        all.len()
    ))
}

fn criterion_2() -> Outcome {
    let mut worst = 1.0f64;
    let all = cases();
    for (p, a, b) in &all {
        for mode in [MeasurementMode::Projector, MeasurementMode::Apparatus] {
            let report = Session::new(p, mode, BsConvention::Symmetric)
                .map_err(|e| e.to_string())?
                .exhaustive(*a, *b)
                .map_err(|e| e.to_string())?;
            for r in &report.outcomes {
                worst = worst.min(r.parity_fidelity_post.unwrap());
            }
        }
    }
    ensure!(
        worst >= 1.0 - 1e-10,
        "min post-correction parity fidelity {worst}"
    );
    Ok(format!(
        "{} cases x 4 outcomes x 2 modes, min fidelity 1 - {:.2e}",
        all.len(),
        1.0 - worst
    ))
}

fn criterion_3() -> Outcome {
    let mut r = rng(303);
    let mut p_err = 0.0f64;
    let mut rho_err = 0.0f64;
    for i in 0..50 {
        let k = r.random_range(1..6);
        let (p, a, b) = random_case(&mut r, k);
        let chi = prepare_polarization(&make_chi0(&p), a, b).unwrap();
        let proj = bell_projectors(p.window());
        let convention = CONVENTIONS[i % 2];
        let bench = build_fig1_bench(p.window(), convention);
        let map = derive_detector_map(&bench).map_err(|e| e.to_string())?;
        let dist = detector_distribution(&chi, &bench).map_err(|e| e.to_string())?;
        for (o, reading) in BellOutcome::ALL.iter().zip(dist.by_outcome(&map).unwrap()) {
            let want_p = proj.probabilities(&chi).unwrap().get(*o);
            p_err = p_err.max((reading.probability - want_p).abs());
            let want_rho = proj.collapse(&chi, *o).unwrap();
            rho_err = rho_err.max(
                reading
                    .bob
                    .as_ref()
                    .unwrap()
                    .distance_max(&want_rho)
                    .unwrap(),
            );
        }
    }
    ensure!(
        p_err < 1e-12 && rho_err < 1e-10,
        "probability error {p_err:.2e}, state error {rho_err:.2e}"
    );

    // The map must be a bijection that every even charge agrees on.
    for convention in CONVENTIONS {
        for k in 1..=5 {
            let bench = build_fig1_bench(window(k), convention);
            let map = derive_detector_map(&bench).map_err(|e| e.to_string())?;
            let mut seen: Vec<BellOutcome> = map.entries().iter().map(|(_, o)| *o).collect();
            seen.sort();
            ensure!(
                seen == BellOutcome::ALL.to_vec(),
                "map is not a bijection: {:?}",
                map.entries()
            );
            for o in BellOutcome::ALL {
                let d = bench
                    .detectors()
                    .iter()
                    .position(|d| Some(d.name.as_str()) == map.detector(o))
                    .unwrap();
                for q in window(k).even_modes() {
                    let clicks = bench
                        .click_probabilities(&bell_state(window(k), q, o).unwrap())
                        .unwrap();
                    ensure!(
                        (clicks[d] - 1.0).abs() < 1e-12,
                        "{o} at q={q} misses its detector: {clicks:?}"
                    );
                }
            }
        }
    }
    Ok(format!(
        "50 cases, probability error {p_err:.2e}, state error {rho_err:.2e}, maps q-independent"
    ))
}

fn criterion_4() -> Outcome {
    const N: u64 = 40_000;
    let p = make_profile(&ProfileKind::Uniform, 1, 3).unwrap();
    let session = Session::new(&p, MeasurementMode::Apparatus, BsConvention::Symmetric).unwrap();
    let (a, b) = haar_qubit(&mut rng(404));
    let report = session.exhaustive(a, b).unwrap();
    let forward: Vec<TrialRecord> = (0..N).map(|id| session.trial(&report, 2024, id)).collect();
    let mut backward: Vec<TrialRecord> = (0..N)
        .rev()
        .map(|id| session.trial(&report, 2024, id))
        .collect();
    backward.reverse();

    let mut counts = [0u64; 4];
    for t in &forward {
        counts[t.outcome.index()] += 1;
    }
    let bound = 4.0 * (0.25f64 * 0.75 / N as f64).sqrt();
    let dev = counts
        .iter()
        .map(|&c| (c as f64 / N as f64 - 0.25).abs())
        .fold(0.0, f64::max);
    ensure!(
        dev <= bound,
        "frequencies {counts:?}, deviation {dev:.4} > {bound:.4}"
    );
    let x = serde_json::to_string(&forward).unwrap();
    let y = serde_json::to_string(&backward).unwrap();
    ensure!(x == y, "rerun in reverse order differs");
    Ok(format!(
        "counts {counts:?}, max deviation {dev:.4} <= {bound:.4}, rerun identical ({} bytes)",
        x.len()
    ))
}

fn criterion_5() -> Outcome {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let x = Matrix2::new(zero, one, one, zero);
    let z = Matrix2::new(one, zero, zero, -one);
    let want = [Matrix2::identity(), x, z, x * z];
    let mut worst = 0.0f64;
    for k in 1..=4 {
        let space = PhotonSpace::single(window(k));
        for (c, w) in Correction::CANDIDATES.iter().zip(&want) {
            for pair in window(k).pair_labels() {
                let got = induced_parity_matrix(&c.op(space), pair).map_err(|e| e.to_string())?;
                worst = worst.max(equal_up_to_phase(&got, w));
            }
        }
    }
    ensure!(worst < 1e-12, "deviation from I, X, Z, XZ: {worst:.2e}");
    Ok(format!(
        "identity, dp_sph, parity phase and their product give I, X, Z, XZ (error {worst:.2e})"
    ))
}

fn criterion_6() -> Outcome {
    let mut r = rng(606);
    let mut pol_err = 0.0f64;
    let mut odd = 0.0f64;
    for _ in 0..50 {
        let k = r.random_range(1..6);
        let (p, a, b) = random_case(&mut r, k);
        let (e, o) = parity_states(&p).unwrap();
        let bob = e.scale(a).add(&o.scale(b)).unwrap();
        let out = swap_parity_polarization_pure(&bob).map_err(|e| e.to_string())?;
        pol_err = pol_err.max((out.polarization.fidelity(a, b).unwrap() - 1.0).abs());
        odd = odd.max(out.oam.odd_weight());
    }
    ensure!(
        pol_err < 1e-12 && odd < 1e-12,
        "polarization error {pol_err:.2e}, odd residual {odd:.2e}"
    );

    let p = make_profile(&ProfileKind::Uniform, 1, 3).unwrap();
    let (e, o) = parity_states(&p).unwrap();
    let out = swap_parity_polarization_pure(&o).map_err(|e| e.to_string())?;
    let f = out.state.fidelity(&with_pol(&e, Pol::V)).unwrap();
    ensure!((f - 1.0).abs() < 1e-12, "|O>|H> -> |E>|V> fidelity {f}");
    Ok(format!(
        "50 cases, polarization error {pol_err:.2e}, odd residual {odd:.2e}, |O>|H> -> |E>|V>"
    ))
}

fn criterion_7() -> Outcome {
    let mut r = rng(707);
    let mut worst = 0.0f64;
    let mut involution = 0.0f64;
    for _ in 0..50 {
        let k = r.random_range(1..7);
        let (p, _, _) = random_case(&mut r, k);
        let (e, o) = parity_states(&p).unwrap();
        let op = dp_sph(e.space());
        worst = worst.max((overlap_fidelity(&op.apply(&e).unwrap(), &o) - 1.0).abs());
        worst = worst.max((overlap_fidelity(&op.apply(&o).unwrap(), &e) - 1.0).abs());
        let twice = op.then(&op).unwrap();
        let id = DMatrix::<C64>::identity(e.space().dim(), e.space().dim());
        involution = involution.max(max_abs(&(twice.matrix() - id)));
    }
    ensure!(
        worst < 1e-12 && involution < 1e-12,
        "swap error {worst:.2e}, involution error {involution:.2e}"
    );
    Ok(format!(
        "50 profiles, E <-> O error {worst:.2e}, involution error {involution:.2e}"
    ))
}

fn criterion_8() -> Outcome {
    // Brute force on the 8 x 8 (q, pol) basis of K = 2, index 2(q + 1) + pol.
    let idx = |q: i64, pol: usize| (2 * (q + 1)) as usize + pol;
    let dim = 8;
    let c = 0.5;
    let mut psi = vec![c64(0.0, 0.0); dim * dim];
    for m in -1..=2 {
        psi[idx(m, 0) * dim + idx(1 - m, 0)] = c64(c, 0.0);
    }
    let mut proj = DMatrix::<C64>::zeros(dim, dim);
    for q in [0, 2] {
        let mut v = DMatrix::<C64>::zeros(dim, 1);
        v[idx(q, 0)] = c64(FRAC_1_SQRT_2, 0.0);
        v[idx(1 - q, 1)] = c64(FRAC_1_SQRT_2, 0.0);
        proj += &v * v.adjoint();
    }
    let mut rho_b = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..dim {
        let branch: Vec<C64> = (0..dim)
            .map(|b| (0..dim).map(|a2| proj[(a, a2)] * psi[a2 * dim + b]).sum())
            .collect();
        for b in 0..dim {
            for b2 in 0..dim {
                rho_b[(b, b2)] += branch[b] * branch[b2].conj();
            }
        }
    }
    let prob = rho_b.trace().re;
    rho_b /= c64(prob, 0.0);
    let mut odd = DMatrix::<C64>::zeros(dim, 1);
    odd[idx(1, 0)] = c64(FRAC_1_SQRT_2, 0.0);
    odd[idx(-1, 0)] = c64(FRAC_1_SQRT_2, 0.0);
    let oracle = (odd.adjoint() * &rho_b * &odd)[(0, 0)].re;

    let p = make_profile(&ProfileKind::Uniform, 1, 2).unwrap();
    let chi = prepare_polarization(&make_chi0(&p), c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
    let rho =
        BellProjectors::collapse(&bell_projectors(p.window()), &chi, BellOutcome::PhiPlus).unwrap();
    let (_, o) = parity_states(&p).unwrap();
    let lib = rho.fidelity(&o).unwrap();
    let rho_err = max_abs(&(rho.matrix() - &rho_b));
    let parity = pairing_isometry(&rho)
        .qubit
        .fidelity(c64(0.0, 0.0), c64(1.0, 0.0))
        .unwrap();
    let report = Session::new(&p, MeasurementMode::Projector, BsConvention::Symmetric)
        .unwrap()
        .exhaustive(c64(1.0, 0.0), c64(0.0, 0.0))
        .unwrap();
    let post = report
        .get(BellOutcome::PhiPlus)
        .parity_fidelity_post
        .unwrap();
    ensure!(
        (oracle - 0.5).abs() < 1e-12 && (lib - 0.5).abs() < 1e-12 && rho_err < 1e-12,
        "oracle {oracle}, library {lib}, state error {rho_err:.2e}"
    );
    ensure!(
        (parity - 1.0).abs() < 1e-12 && (post - 1.0).abs() < 1e-10,
        "parity fidelity {parity}, post {post}"
    );
    Ok(format!("full-OAM fidelity with |O> = {lib:.12} (oracle {oracle:.12}), parity fidelity {parity:.12}"))
}

fn criterion_9() -> Outcome {
    let delta = ProfileKind::Explicit {
        coeffs: vec![(0, c64(1.0, 0.0))],
    };
    let stats = l0_negative_control(&delta, 2, 4000, &mut rng(909)).map_err(|e| e.to_string())?;
    // Oracle: the delta source yields mean fidelity 2|α|²|β|² per input.
    let oracle = octahedral_states()
        .iter()
        .map(|(a, b)| 2.0 * a.norm_sqr() * b.norm_sqr())
        .sum::<f64>()
        / 6.0;
    let mut details = vec![format!(
        "delta l=0: exact {:.6}, sampled {:.4} +- {:.4}, oracle {oracle:.6}",
        stats.haar_mean_exact, stats.mean_fidelity, stats.std_error
    )];
    let mut failures = Vec::new();
    if (stats.haar_mean_exact - oracle).abs() > 1e-12 {
        failures.push("library disagrees with oracle".to_string());
    }
    if (stats.haar_mean_exact - 2.0 / 3.0).abs() > 1e-3 {
        failures.push(format!(
            "delta mean {:.6} is not 2/3",
            stats.haar_mean_exact
        ));
    }

    let broad = [
        (ProfileKind::Uniform, 3),
        (ProfileKind::Uniform, 6),
        (ProfileKind::Gaussian { width: 1.0 }, 4),
        (ProfileKind::Gaussian { width: 3.0 }, 6),
    ];
    for (kind, k) in &broad {
        let s = l0_negative_control(kind, *k, 200, &mut rng(910)).map_err(|e| e.to_string())?;
        details.push(format!("{} K={k}: {:.4}", kind.name(), s.haar_mean_exact));
        if s.haar_mean_exact >= 0.98 || s.max_fidelity >= 0.98 {
            failures.push(format!(
                "{} K={k} reaches {:.4}",
                kind.name(),
                s.max_fidelity
            ));
        }
    }

    let l1 = pump_control(
        &make_profile(&ProfileKind::Uniform, 1, 3).unwrap(),
        200,
        &mut rng(911),
    )
    .map_err(|e| e.to_string())?;
    details.push(format!("l=1: {:.12}", l1.haar_mean_exact));
    if (l1.haar_mean_exact - 1.0).abs() > 1e-10 || (l1.min_fidelity - 1.0).abs() > 1e-10 {
        failures.push(format!("l=1 control gives {}", l1.min_fidelity));
    }
    let details = details.join("; ");
    if failures.is_empty() {
        Ok(details)
    } else {
        Err(format!("{}; {details}", failures.join("; ")))
    }
}

fn criterion_10() -> Outcome {
    let bell = lower(&parse(BELL_BENCH).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let bench = build_fig1_bench(bell.profile.window(), BsConvention::Symmetric);
    let e1 = max_abs(&(bell.photon_a.operator().matrix() - bench.operator().matrix()));
    let swap_bench = lower(&parse(SWAP_BENCH).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let swap = SwapCircuit::new(swap_bench.profile.window());
    let e2 = max_abs(&(swap_bench.photon_b.operator().matrix() - swap.operator().matrix()));
    ensure!(
        e1 < 1e-12 && e2 < 1e-12,
        "operator errors {e1:.2e}, {e2:.2e}"
    );
    ensure!(
        pretty_print(&parse(BELL_BENCH).unwrap()) == BELL_BENCH,
        "measurement bench file is not canonical"
    );
    ensure!(
        pretty_print(&parse(SWAP_BENCH).unwrap()) == SWAP_BENCH,
        "swap bench file is not canonical"
    );

    let mut r = rng(1010);
    for i in 0..50 {
        let program = random_program(&mut r);
        let text = pretty_print(&program);
        ensure!(
            parse(&text).as_ref() == Ok(&program),
            "program {i} does not round-trip:\n{text}"
        );
    }
    let bases = [BELL_BENCH.as_bytes(), SWAP_BENCH.as_bytes()];
    let mut rejected = 0;
    for i in 0..10_000 {
        let input = fuzz_input(&mut r, bases[i % 2]);
        match catch_unwind(AssertUnwindSafe(|| parse_bytes(&input).map(|p| lower(&p)))) {
            Ok(Err(_)) => rejected += 1,
            Ok(Ok(_)) => {}
            Err(_) => return Err(format!("panic on {:?}", String::from_utf8_lossy(&input))),
        }
    }
    Ok(format!("operators {e1:.1e}/{e2:.1e}, 50 round-trips, 10000 fuzz inputs ({rejected} rejected, no panics)"))
}

fn all_elements(n_paths: usize) -> Vec<Element> {
    let arms: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..n_paths).map(Some))
        .collect();
    let angles = [0.0, 0.3, PI / 4.0, PI / 2.0, -1.1, PI];
    let mut out = Vec::new();
    for &arm in &arms {
        for &t in &angles {
            out.push(Element::ParityPhase { phi: t, arm });
            out.push(Element::Hwp { theta: t, arm });
            out.push(Element::Qwp { theta: t, arm });
        }
    }
    for path in 0..n_paths {
        for &t in &angles {
            out.push(Element::Delay { path, phi: t });
        }
    }
    for i in 0..n_paths {
        for x in 0..n_paths {
            for y in 0..n_paths {
                if x != y {
                    out.push(Element::Sorter {
                        input: i,
                        even: x,
                        odd: y,
                    });
                    out.push(Element::Pbs {
                        input: i,
                        h: x,
                        v: y,
                    });
                }
            }
            if i != x {
                for convention in CONVENTIONS {
                    out.push(Element::BeamSplitter {
                        a: i,
                        b: x,
                        convention,
                    });
                }
            }
        }
    }
    out
}

fn criterion_11() -> Outcome {
    let mut worst = 0.0f64;
    let mut partial = 0.0f64;
    let mut count = 0;
    let mut r = rng(1111);
    for k in 1..=4 {
        let space = PhotonSpace::new(window(k), 3).unwrap();
        let elements = all_elements(3);
        for e in &elements {
            let op = ElementOp::new(e.clone(), space).map_err(|err| format!("{e:?}: {err}"))?;
            ensure!(op.is_total(), "{e:?} is not total");
            worst = worst.max(op.unitarity_error());
            count += 1;
        }
        for arm in [None, Some(0), Some(2)] {
            for e in [
                Element::DovePrism { arm },
                Element::Sph { charge: 1, arm },
                Element::Sph { charge: -1, arm },
            ] {
                partial = partial.max(ElementOp::new(e, space).unwrap().isometry_error());
                count += 1;
            }
            let fused = ElementOp::sequence(
                vec![Element::DovePrism { arm }, Element::Sph { charge: 1, arm }],
                space,
            )
            .unwrap();
            ensure!(fused.is_total(), "dove then sph is not total");
            worst = worst.max(fused.unitarity_error());
        }
        for _ in 0..100 {
            let n = r.random_range(2..12);
            let mut seq: Vec<Element> = (0..n)
                .map(|_| elements[r.random_range(0..elements.len())].clone())
                .collect();
            if r.random_bool(0.5) {
                let arm = [None, Some(1)][r.random_range(0..2)];
                let at = r.random_range(0..=seq.len());
                seq.splice(
                    at..at,
                    [Element::DovePrism { arm }, Element::Sph { charge: 1, arm }],
                );
            }
            let op = ElementOp::sequence(seq, space).unwrap();
            worst = worst.max(op.unitarity_error());
            count += 1;
        }
        for convention in CONVENTIONS {
            worst = worst.max(
                build_fig1_bench(window(k), convention)
                    .operator()
                    .unitarity_error(),
            );
        }
        worst = worst.max(SwapCircuit::new(window(k)).operator().unitarity_error());
    }
    ensure!(
        worst < 1e-12 && partial < 1e-12,
        "unitarity error {worst:.2e}, partial isometry error {partial:.2e}"
    );

    let mut algebra = 0.0f64;
    for k in 1..=8 {
        let ps = bell_projectors(window(k));
        let dim = PhotonSpace::single(window(k)).dim();
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for (i, (_, p)) in ps.iter().enumerate() {
            algebra = algebra.max(max_abs(&(p * p - p)));
            algebra = algebra.max(max_abs(&(p - p.adjoint())));
            for (j, (_, q)) in ps.iter().enumerate() {
                if i != j {
                    algebra = algebra.max(max_abs(&(p * q)));
                }
            }
            sum += p;
        }
        algebra = algebra.max(max_abs(&(sum - DMatrix::<C64>::identity(dim, dim))));
    }
    ensure!(algebra < 1e-12, "projector algebra error {algebra:.2e}");
    Ok(format!(
        "{count} operators, unitarity error {worst:.2e}, partial isometry error {partial:.2e}, projector error {algebra:.2e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let mut failed = 0;
    for (i, run) in criteria.iter().enumerate() {
        let outcome = catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
