use std::fmt::Write;

use super::{BenchProgram, ElementKind, Statement};
use crate::hilbert::C64;
use crate::spdc::ProfileKind;

/// Canonical text of a program: one statement per line, no comments.
/// Floats use the shortest representation that reads back exactly.
pub fn pretty_print(program: &BenchProgram) -> String {
    let mut out = String::new();
    for s in &program.statements {
        match s {
            Statement::Source(src) => {
                let _ = write!(
                    out,
                    "source spdc l={} K={} profile={}",
                    src.l,
                    src.half_width,
                    profile(&src.profile)
                );
            }
            Statement::Prepare { alpha, beta } => {
                let _ = write!(
                    out,
                    "prepare A alpha={} beta={}",
                    complex(*alpha),
                    complex(*beta)
                );
            }
            Statement::Element(e) => {
                let _ = write!(out, "element {} {}", e.arm, e.kind.keyword());
                match &e.kind {
                    ElementKind::Sorter
                    | ElementKind::Dove
                    | ElementKind::Pbs { partner: None } => {}
                    ElementKind::Pbs { partner: Some(p) } => {
                        let _ = write!(out, " {p}");
                    }
                    ElementKind::Bs {
                        partner,
                        convention,
                    } => {
                        let _ = write!(out, " {partner} {}", convention.name());
                    }
                    ElementKind::Sph { charge } => {
                        let _ = write!(out, " {charge:+}");
                    }
                    ElementKind::Hwp { theta } | ElementKind::Qwp { theta } => {
                        let _ = write!(out, " {}", real(*theta));
                    }
                    ElementKind::Delay { phi } => {
                        let _ = write!(out, " {}", real(*phi));
                    }
                }
                if !e.outputs.is_empty() {
                    let _ = write!(out, " -> {}", e.outputs.join(" "));
                }
            }
            Statement::Detect { id, path } => {
                let _ = write!(out, "detect {id} {path}");
            }
            Statement::Run(r) => {
                let mode = match r.mode {
                    crate::protocol::MeasurementMode::Projector => "projector",
                    crate::protocol::MeasurementMode::Apparatus => "apparatus",
                };
                let _ = write!(out, "run trials={} seed={} mode={mode}", r.trials, r.seed);
            }
        }
        out.push('\n');
    }
    out
}

fn real(x: f64) -> String {
    format!("{x}")
}

fn complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", z.re, z.im.abs())
}

fn profile(kind: &ProfileKind) -> String {
    match kind {
        ProfileKind::Uniform => "uniform".into(),
        ProfileKind::Gaussian { width } => format!("gaussian({})", real(*width)),
        ProfileKind::Explicit { coeffs } => {
            let items: Vec<String> = coeffs
                .iter()
                .map(|(m, c)| format!("{m}:{}", complex(*c)))
                .collect();
            format!("explicit({})", items.join(", "))
        }
    }
}
