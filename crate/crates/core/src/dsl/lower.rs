use std::collections::HashMap;

use super::{BenchProgram, ElementKind, ElementStmt, RunDirective, Source, Statement};
use crate::apparatus::{BenchLayout, Detector};
use crate::elements::{Element, PathId};
use crate::error::{Error, Result};
use crate::hilbert::{c64, DensityMatrix, Photon, PhotonSpace, C64};
use crate::spdc::{make_chi0, make_profile, prepare_polarization, Profile};

/// A program resolved to numbered paths: one layout per photon.
#[derive(Clone, Debug)]
pub struct LoweredBench {
    pub profile: Profile,
    pub alpha: C64,
    pub beta: C64,
    pub run: Option<RunDirective>,
    pub photon_a: BenchLayout,
    pub photon_b: BenchLayout,
}

#[derive(Default)]
struct Paths {
    index: HashMap<String, PathId>,
    count: usize,
    elements: Vec<Element>,
    detectors: Vec<Detector>,
}

impl Paths {
    fn entry(name: &str) -> Self {
        Paths {
            index: HashMap::from([(name.to_string(), 0)]),
            count: 1,
            ..Default::default()
        }
    }

    fn get(&self, name: &str) -> PathId {
        self.index[name]
    }

    fn keep(&mut self, name: &str, idx: PathId) {
        self.index.insert(name.to_string(), idx);
    }

    fn fresh(&mut self, name: &str) -> PathId {
        let idx = self.count;
        self.count += 1;
        self.index.insert(name.to_string(), idx);
        idx
    }
}

/// Resolves path names to indices. Even, H and renamed outputs keep their
/// input's index; odd and V outputs of a split take the next free index.
pub fn lower(program: &BenchProgram) -> Result<LoweredBench> {
    let src = program.source();
    let profile = make_profile(&src.profile, src.l, src.half_width)?;
    let window = profile.window();
    let (alpha, beta) = program
        .preparation()
        .unwrap_or((c64(1.0, 0.0), c64(0.0, 0.0)));

    let mut photons = [Paths::entry("A"), Paths::entry("B")];
    let photon_of = |photons: &[Paths; 2], name: &str| {
        if photons[0].index.contains_key(name) {
            0
        } else {
            1
        }
    };
    for st in &program.statements {
        match st {
            Statement::Element(e) => {
                let k = photon_of(&photons, &e.arm);
                lower_element(&mut photons[k], e);
            }
            Statement::Detect { id, path } => {
                let k = photon_of(&photons, path);
                let idx = photons[k].get(path);
                photons[k].detectors.push(Detector {
                    name: id.clone(),
                    path: idx,
                });
            }
            _ => {}
        }
    }

    let [pa, pb] = photons;
    let layout = |p: Paths| BenchLayout::new(window, p.count, 0, p.elements, p.detectors);
    let photon_a = layout(pa)?;
    let photon_b = layout(pb)?;

    let chi = prepare_polarization(&make_chi0(&profile), alpha, beta)?;
    let overflow = |photon: &str, e: Error| match e {
        Error::SupportOverflow { q, path, amplitude } => Error::Lowering(format!(
            "photon {photon}: amplitude {amplitude:.3e} at q={q} on path {path} leaves the OAM \
             window {{{}..{}}}; a hologram shift is only closed on the window when paired with a \
             dove prism on the same arm (dove then sph +1)",
            window.min(),
            window.max()
        )),
        other => other,
    };
    photon_a
        .operator()
        .apply_to_photon(Photon::A, &chi.a_on_path(photon_a.n_paths(), 0)?)
        .map_err(|e| overflow("A", e))?;
    let rho_b = embed(&chi.partial_trace_a(), photon_b.space());
    photon_b
        .operator()
        .apply_density(&rho_b)
        .map_err(|e| overflow("B", e))?;

    Ok(LoweredBench {
        profile,
        alpha,
        beta,
        run: program.run_directive(),
        photon_a,
        photon_b,
    })
}

fn embed(rho: &DensityMatrix, space: PhotonSpace) -> DensityMatrix {
    let rows: Vec<usize> = space
        .modes()
        .filter(|(_, m)| m.path == 0)
        .map(|(i, _)| i)
        .collect();
    let mut big = nalgebra::DMatrix::zeros(space.dim(), space.dim());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in rows.iter().enumerate() {
            big[(i, j)] = rho.matrix()[(r, c)];
        }
    }
    DensityMatrix::from_raw(space, big)
}

fn lower_element(p: &mut Paths, e: &ElementStmt) {
    let arm = p.get(&e.arm);
    let out = |k: usize| e.outputs[k].as_str();
    let element = match &e.kind {
        ElementKind::Sorter => {
            p.keep(out(0), arm);
            let odd = p.fresh(out(1));
            Element::Sorter {
                input: arm,
                even: arm,
                odd,
            }
        }
        ElementKind::Pbs { partner: None } => {
            p.keep(out(0), arm);
            let v = p.fresh(out(1));
            Element::Pbs {
                input: arm,
                h: arm,
                v,
            }
        }
        ElementKind::Pbs {
            partner: Some(other),
        } => {
            let v = p.get(other);
            p.keep(out(0), arm);
            Element::Pbs {
                input: arm,
                h: arm,
                v,
            }
        }
        ElementKind::Bs {
            partner,
            convention,
        } => {
            let b = p.get(partner);
            p.keep(out(0), arm);
            p.keep(out(1), b);
            Element::BeamSplitter {
                a: arm,
                b,
                convention: *convention,
            }
        }
        single => {
            if let Some(name) = e.outputs.first() {
                p.keep(name, arm);
            }
            let arm_opt = Some(arm);
            match *single {
                ElementKind::Dove => Element::DovePrism { arm: arm_opt },
                ElementKind::Sph { charge } => Element::Sph {
                    charge,
                    arm: arm_opt,
                },
                ElementKind::Hwp { theta } => Element::Hwp {
                    theta,
                    arm: arm_opt,
                },
                ElementKind::Qwp { theta } => Element::Qwp {
                    theta,
                    arm: arm_opt,
                },
                ElementKind::Delay { phi } => Element::Delay { path: arm, phi },
                _ => unreachable!("multi-path kinds handled above"),
            }
        }
    };
    p.elements.push(element);
}

/// Writes a layout as a program for one photon. Fails when the layout uses
/// elements or path numbering the language cannot express.
pub fn layout_to_program(
    layout: &BenchLayout,
    source: Source,
    photon: Photon,
) -> Result<BenchProgram> {
    let entry = match photon {
        Photon::A => "A",
        Photon::B => "B",
    };
    if layout.entry() != 0 {
        return Err(Error::Lowering("the entry path must be path 0".into()));
    }
    let n = layout.n_paths();
    let mut names: Vec<Option<String>> = vec![None; n];
    names[0] = Some(entry.to_string());
    let mut next_index = 1;
    let mut counter = 0;
    let mut fresh = |idx: PathId, names: &mut Vec<Option<String>>| {
        counter += 1;
        let name = format!("p{counter}");
        names[idx] = Some(name.clone());
        name
    };
    let live = |names: &Vec<Option<String>>, idx: PathId| {
        names[idx]
            .clone()
            .ok_or_else(|| Error::Lowering(format!("path {idx} is used before it is created")))
    };
    let take_new = |idx: PathId, next_index: &mut usize| {
        if idx != *next_index {
            return Err(Error::Lowering(format!(
                "path {idx} is created out of order (expected {next_index})"
            )));
        }
        *next_index += 1;
        Ok(())
    };
    let single_arm = |arm: Option<PathId>| {
        arm.or((n == 1).then_some(0)).ok_or_else(|| {
            Error::Lowering("elements acting on every path have no bench syntax".into())
        })
    };

    let mut statements = vec![Statement::Source(source)];
    for el in layout.elements() {
        let stmt = match *el {
            Element::Sorter { input, even, odd } => {
                if even != input {
                    return Err(Error::Lowering(
                        "sorter must keep even charges on its input path".into(),
                    ));
                }
                let arm = live(&names, input)?;
                take_new(odd, &mut next_index)?;
                ElementStmt {
                    arm,
                    kind: ElementKind::Sorter,
                    outputs: vec![fresh(input, &mut names), fresh(odd, &mut names)],
                }
            }
            Element::Pbs { input, h, v } => {
                if h != input {
                    return Err(Error::Lowering("PBS must keep H on its input path".into()));
                }
                let arm = live(&names, input)?;
                if v < n && names[v].is_some() {
                    let partner = live(&names, v)?;
                    names[v] = None;
                    ElementStmt {
                        arm,
                        kind: ElementKind::Pbs {
                            partner: Some(partner),
                        },
                        outputs: vec![fresh(input, &mut names)],
                    }
                } else {
                    take_new(v, &mut next_index)?;
                    ElementStmt {
                        arm,
                        kind: ElementKind::Pbs { partner: None },
                        outputs: vec![fresh(input, &mut names), fresh(v, &mut names)],
                    }
                }
            }
            Element::BeamSplitter { a, b, convention } => ElementStmt {
                arm: live(&names, a)?,
                kind: ElementKind::Bs {
                    partner: live(&names, b)?,
                    convention,
                },
                outputs: vec![fresh(a, &mut names), fresh(b, &mut names)],
            },
            Element::DovePrism { arm } => ElementStmt {
                arm: live(&names, single_arm(arm)?)?,
                kind: ElementKind::Dove,
                outputs: vec![],
            },
            Element::Sph { charge, arm } => ElementStmt {
                arm: live(&names, single_arm(arm)?)?,
                kind: ElementKind::Sph { charge },
                outputs: vec![],
            },
            Element::Hwp { theta, arm } => ElementStmt {
                arm: live(&names, single_arm(arm)?)?,
                kind: ElementKind::Hwp { theta },
                outputs: vec![],
            },
            Element::Qwp { theta, arm } => ElementStmt {
                arm: live(&names, single_arm(arm)?)?,
                kind: ElementKind::Qwp { theta },
                outputs: vec![],
            },
            Element::Delay { path, phi } => ElementStmt {
                arm: live(&names, path)?,
                kind: ElementKind::Delay { phi },
                outputs: vec![],
            },
            Element::ParityPhase { .. } => {
                return Err(Error::Lowering("parity_phase has no bench syntax".into()))
            }
        };
        statements.push(Statement::Element(stmt));
    }
    for d in layout.detectors() {
        statements.push(Statement::Detect {
            id: d.name.clone(),
            path: live(&names, d.path)?,
        });
    }
    Ok(BenchProgram { statements })
}
