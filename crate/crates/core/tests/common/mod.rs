#![allow(dead_code)]

use parity_teleport::dsl::{
    BenchProgram, ElementKind, ElementStmt, RunDirective, Source, Statement,
};
use parity_teleport::elements::BsConvention;
use parity_teleport::hilbert::{c64, C64};
use parity_teleport::protocol::{haar_qubit, MeasurementMode};
use parity_teleport::spdc::{random_profile, Profile, ProfileKind};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BELL_BENCH: &str = include_str!("../data/bell_measurement.bench");
pub const SWAP_BENCH: &str = include_str!("../data/parity_swap.bench");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random symmetric `l = 1` profile and a Haar-random input.
pub fn random_case<R: Rng>(rng: &mut R, k: i64) -> (Profile, C64, C64) {
    let profile = random_profile(1, k, rng).unwrap();
    let (a, b) = haar_qubit(rng);
    (profile, a, b)
}

fn float<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => -rng.random::<f64>() * 1e-7,
        2 => rng.random::<f64>() * 1e12,
        _ => rng.random::<f64>() * 8.0 - 4.0,
    }
}

fn complex<R: Rng>(rng: &mut R) -> C64 {
    c64(float(rng), float(rng))
}

/// A random program that the parser must accept.
pub fn random_program<R: Rng>(rng: &mut R) -> BenchProgram {
    let mut statements = Vec::new();
    let profile = match rng.random_range(0..3) {
        0 => ProfileKind::Uniform,
        1 => ProfileKind::Gaussian {
            width: rng.random::<f64>() * 3.0 + 0.1,
        },
        _ => ProfileKind::Explicit {
            coeffs: (0..rng.random_range(1..4))
                .map(|_| (rng.random_range(-3..4), complex(rng)))
                .collect(),
        },
    };
    statements.push(Statement::Source(Source {
        l: rng.random_range(-1..3),
        half_width: rng.random_range(1..5),
        profile,
    }));
    if rng.random_bool(0.5) {
        statements.push(Statement::Prepare {
            alpha: complex(rng),
            beta: complex(rng),
        });
    }

    // Live paths per photon.
    let mut live: [Vec<String>; 2] = [vec!["A".into()], vec!["B".into()]];
    let mut counter = 0;
    let mut fresh = || {
        counter += 1;
        format!("n{counter}")
    };
    for _ in 0..rng.random_range(0..10) {
        let ph = rng.random_range(0..2);
        let paths = &mut live[ph];
        let arm_pos = rng.random_range(0..paths.len());
        let arm = paths[arm_pos].clone();
        let two_inputs = paths.len() >= 2;
        let choice = rng.random_range(0..if two_inputs { 10 } else { 8 });
        let stmt = match choice {
            0 => {
                let (e, o) = (fresh(), fresh());
                paths.remove(arm_pos);
                paths.extend([e.clone(), o.clone()]);
                ElementStmt {
                    arm,
                    kind: ElementKind::Sorter,
                    outputs: vec![e, o],
                }
            }
            1 => {
                let (h, v) = (fresh(), fresh());
                paths.remove(arm_pos);
                paths.extend([h.clone(), v.clone()]);
                ElementStmt {
                    arm,
                    kind: ElementKind::Pbs { partner: None },
                    outputs: vec![h, v],
                }
            }
            2 => ElementStmt {
                arm,
                kind: ElementKind::Dove,
                outputs: vec![],
            },
            3 => ElementStmt {
                arm,
                kind: ElementKind::Sph {
                    charge: *[1, -1].choose(rng).unwrap(),
                },
                outputs: vec![],
            },
            4 => ElementStmt {
                arm,
                kind: ElementKind::Hwp { theta: float(rng) },
                outputs: vec![],
            },
            5 => ElementStmt {
                arm,
                kind: ElementKind::Qwp { theta: float(rng) },
                outputs: vec![],
            },
            6 => ElementStmt {
                arm,
                kind: ElementKind::Delay { phi: float(rng) },
                outputs: vec![],
            },
            7 => {
                let out = fresh();
                paths[arm_pos] = out.clone();
                ElementStmt {
                    arm,
                    kind: ElementKind::Dove,
                    outputs: vec![out],
                }
            }
            c => {
                let mut other_pos = rng.random_range(0..paths.len() - 1);
                if other_pos >= arm_pos {
                    other_pos += 1;
                }
                let partner = paths[other_pos].clone();
                paths.retain(|p| *p != arm && *p != partner);
                if c == 8 {
                    let (x, y) = (fresh(), fresh());
                    paths.extend([x.clone(), y.clone()]);
                    ElementStmt {
                        arm,
                        kind: ElementKind::Bs {
                            partner,
                            convention: *[BsConvention::Symmetric, BsConvention::Hadamard]
                                .choose(rng)
                                .unwrap(),
                        },
                        outputs: vec![x, y],
                    }
                } else {
                    let out = fresh();
                    paths.push(out.clone());
                    ElementStmt {
                        arm,
                        kind: ElementKind::Pbs {
                            partner: Some(partner),
                        },
                        outputs: vec![out],
                    }
                }
            }
        };
        statements.push(Statement::Element(stmt));
    }
    let mut detectors = 0;
    for (ph, paths) in live.iter().enumerate() {
        for p in paths.clone() {
            if rng.random_bool(0.6) || (ph == 1 && detectors == 0) {
                detectors += 1;
                statements.push(Statement::Detect {
                    id: format!("D{detectors}"),
                    path: p,
                });
            }
        }
    }
    if rng.random_bool(0.5) {
        statements.push(Statement::Run(RunDirective {
            trials: rng.random_range(0..100_000),
            seed: rng.random(),
            mode: *[MeasurementMode::Projector, MeasurementMode::Apparatus]
                .choose(rng)
                .unwrap(),
        }));
    }
    // Statement order is free apart from path use, so shuffle the header.
    if statements.len() > 2 && rng.random_bool(0.3) {
        statements.swap(0, 1);
    }
    BenchProgram { statements }
}

/// A corrupted variant of `base`: random byte edits or pure noise.
pub fn fuzz_input<R: Rng>(rng: &mut R, base: &[u8]) -> Vec<u8> {
    if rng.random_bool(0.3) {
        let n = rng.random_range(0..200);
        return (0..n).map(|_| rng.random()).collect();
    }
    let mut bytes = base.to_vec();
    let alphabet = b"abcdefghijklmnopqrstuvwxyzAB0123456789 =()->:,.+-i#\n\t\r_e";
    for _ in 0..rng.random_range(1..8) {
        let len = bytes.len();
        match rng.random_range(0..4) {
            0 if len > 0 => {
                let i = rng.random_range(0..len);
                bytes[i] = rng.random();
            }
            1 if len > 0 => {
                let i = rng.random_range(0..len);
                let j = (i + rng.random_range(1..20)).min(len);
                bytes.drain(i..j);
            }
            2 => {
                let i = rng.random_range(0..=len);
                bytes.insert(i, *alphabet.choose(rng).unwrap());
            }
            _ if len > 0 => {
                let i = rng.random_range(0..len);
                let j = (i + rng.random_range(1..30)).min(len);
                let chunk = bytes[i..j].to_vec();
                let k = rng.random_range(0..=len);
                bytes.splice(k..k, chunk);
            }
            _ => {}
        }
    }
    bytes
}
