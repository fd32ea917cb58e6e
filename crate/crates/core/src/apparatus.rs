//! Path-level model of the Bell-measurement bench: OAM parity sorter, one PBS
//! per sorter arm, two 50:50 beam splitters and four bucket detectors.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bell::{bell_state, BellOutcome, OutcomeDistribution};
use crate::elements::{BsConvention, Element, ElementOp, PathId};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, reduce_rows, DensityMatrix, OamWindow, Photon, PhotonSpace, SinglePhotonState,
    TwoPhotonState, TOL,
};

/// Number of optical paths in the four-detector bench.
pub const BENCH_PATHS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub name: String,
    pub path: PathId,
}

/// An element sequence over `n_paths` optical paths, the path photon A enters
/// on and the detectors terminating the output paths.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchLayout {
    window: OamWindow,
    entry: PathId,
    elements: Vec<Element>,
    detectors: Vec<Detector>,
    op: ElementOp,
}

impl BenchLayout {
    pub fn new(
        window: OamWindow,
        n_paths: usize,
        entry: PathId,
        elements: Vec<Element>,
        detectors: Vec<Detector>,
    ) -> Result<Self> {
        let space = PhotonSpace::new(window, n_paths)?;
        if entry >= n_paths {
            return Err(Error::Wiring(format!("entry path {entry} out of range")));
        }
        let mut seen_paths = vec![false; n_paths];
        let mut seen_names = std::collections::HashSet::new();
        for d in &detectors {
            if d.path >= n_paths {
                return Err(Error::Wiring(format!(
                    "detector {} on nonexistent path {}",
                    d.name, d.path
                )));
            }
            if std::mem::replace(&mut seen_paths[d.path], true) {
                return Err(Error::Wiring(format!(
                    "path {} terminated by more than one detector",
                    d.path
                )));
            }
            if !seen_names.insert(d.name.as_str()) {
                return Err(Error::Wiring(format!("duplicate detector name {}", d.name)));
            }
        }
        let op = ElementOp::sequence(elements.clone(), space)?;
        Ok(BenchLayout {
            window,
            entry,
            elements,
            detectors,
            op,
        })
    }

    pub fn window(&self) -> OamWindow {
        self.window
    }

    pub fn space(&self) -> PhotonSpace {
        self.op.space()
    }

    pub fn n_paths(&self) -> usize {
        self.op.space().n_paths()
    }

    pub fn entry(&self) -> PathId {
        self.entry
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn operator(&self) -> &ElementOp {
        &self.op
    }

    /// Sends a single-path photon in through the entry path.
    pub fn propagate(&self, state: &SinglePhotonState) -> Result<SinglePhotonState> {
        let embedded = self.embed_single(state)?;
        self.op.apply(&embedded)
    }

    /// Detector click probabilities for a single photon, in detector order.
    pub fn click_probabilities(&self, state: &SinglePhotonState) -> Result<Vec<f64>> {
        let out = self.propagate(state)?;
        let space = out.space();
        let mut per_path = vec![0.0; space.n_paths()];
        for (i, m) in space.modes() {
            per_path[m.path] += out.amps()[i].norm_sqr();
        }
        self.check_undetected(&per_path)?;
        Ok(self.detectors.iter().map(|d| per_path[d.path]).collect())
    }

    fn embed_single(&self, state: &SinglePhotonState) -> Result<SinglePhotonState> {
        let n = self.n_paths();
        match state.space().n_paths() {
            1 => state.on_path(n, self.entry),
            k if k == n => {
                self.check_entry_only(state.space(), |i| state.amps()[i].norm_sqr())?;
                Ok(state.clone())
            }
            k => Err(Error::ShapeMismatch(format!(
                "photon has {k} paths, bench has {n}"
            ))),
        }
    }

    fn embed_a(&self, chi: &TwoPhotonState) -> Result<TwoPhotonState> {
        let n = self.n_paths();
        match chi.space_a().n_paths() {
            1 => chi.a_on_path(n, self.entry),
            k if k == n => {
                self.check_entry_only(chi.space_a(), |i| chi.amps().row(i).norm_squared())?;
                Ok(chi.clone())
            }
            k => Err(Error::ShapeMismatch(format!(
                "photon A has {k} paths, bench has {n}"
            ))),
        }
    }

    fn check_entry_only(&self, space: PhotonSpace, weight: impl Fn(usize) -> f64) -> Result<()> {
        for (i, m) in space.modes() {
            if m.path != self.entry && weight(i) > TOL {
                return Err(Error::Wiring(format!(
                    "input amplitude on path {} instead of the entry path {}",
                    m.path, self.entry
                )));
            }
        }
        Ok(())
    }

    fn check_undetected(&self, per_path: &[f64]) -> Result<()> {
        for (path, &w) in per_path.iter().enumerate() {
            if w > TOL && !self.detectors.iter().any(|d| d.path == path) {
                return Err(Error::Wiring(format!(
                    "probability {w:.3e} reaches path {path}, which has no detector"
                )));
            }
        }
        Ok(())
    }
}

/// The four-detector bench on `BENCH_PATHS` paths.
///
/// The sorter sends odd charges to path 1. There a dove prism and a `+1`
/// hologram map `q -> 1-q` and a half-wave plate at 45° swaps H and V, so the
/// odd-arm component of every Bell state arrives with the same `(q, pol)` as
/// its even-arm partner and can interfere with it. Each PBS then splits its
/// arm, and the beam splitters combine even-H with odd-V (paths 0, 1) and
/// even-V with odd-H (paths 2, 3). With the symmetric splitter convention a
/// quarter-wave delay on the odd arm cancels the reflection phase.
pub fn build_fig1_bench(window: OamWindow, convention: BsConvention) -> BenchLayout {
    let mut elements = vec![
        Element::Sorter {
            input: 0,
            even: 0,
            odd: 1,
        },
        Element::DovePrism { arm: Some(1) },
        Element::Sph {
            charge: 1,
            arm: Some(1),
        },
        Element::Hwp {
            theta: FRAC_PI_4,
            arm: Some(1),
        },
    ];
    if convention == BsConvention::Symmetric {
        elements.push(Element::Delay {
            path: 1,
            phi: FRAC_PI_2,
        });
    }
    elements.extend([
        Element::Pbs {
            input: 0,
            h: 0,
            v: 2,
        },
        Element::Pbs {
            input: 1,
            h: 1,
            v: 3,
        },
        Element::BeamSplitter {
            a: 0,
            b: 1,
            convention,
        },
        Element::BeamSplitter {
            a: 2,
            b: 3,
            convention,
        },
    ]);
    let detectors = (0..BENCH_PATHS)
        .map(|p| Detector {
            name: format!("D{}", p + 1),
            path: p,
        })
        .collect();
    BenchLayout::new(window, BENCH_PATHS, 0, elements, detectors)
        .expect("fixed wiring is valid for every window")
}

#[derive(Clone, Debug)]
pub struct DetectorReading {
    pub detector: String,
    pub path: PathId,
    pub probability: f64,
    /// Bob's conditional state; `None` when the detector never fires.
    pub bob: Option<DensityMatrix>,
}

#[derive(Clone, Debug)]
pub struct DetectorDistribution {
    pub readings: Vec<DetectorReading>,
}

impl DetectorDistribution {
    pub fn reading(&self, detector: &str) -> Option<&DetectorReading> {
        self.readings.iter().find(|r| r.detector == detector)
    }

    pub fn total(&self) -> f64 {
        self.readings.iter().map(|r| r.probability).sum()
    }

    /// Readings relabelled by Bell outcome.
    pub fn by_outcome(&self, map: &DetectorMap) -> Result<[&DetectorReading; 4]> {
        let mut out: [Option<&DetectorReading>; 4] = [None; 4];
        for r in &self.readings {
            if let Some(o) = map.outcome(&r.detector) {
                out[o.index()] = Some(r);
            }
        }
        let missing = || Error::Wiring("detector map does not match the bench detectors".into());
        Ok([
            out[0].ok_or_else(missing)?,
            out[1].ok_or_else(missing)?,
            out[2].ok_or_else(missing)?,
            out[3].ok_or_else(missing)?,
        ])
    }

    pub fn outcome_distribution(&self, map: &DetectorMap) -> Result<OutcomeDistribution> {
        Ok(OutcomeDistribution(
            self.by_outcome(map)?.map(|r| r.probability),
        ))
    }
}

/// Propagates photon A through the bench and conditions Bob on each detector.
pub fn detector_distribution(
    chi: &TwoPhotonState,
    layout: &BenchLayout,
) -> Result<DetectorDistribution> {
    let embedded = layout.embed_a(chi)?;
    let out = layout.op.apply_to_photon(Photon::A, &embedded)?;
    let space = out.space_a();
    let mut rows_by_path: Vec<Vec<usize>> = vec![Vec::new(); space.n_paths()];
    for (i, m) in space.modes() {
        rows_by_path[m.path].push(i);
    }
    let per_path: Vec<f64> = rows_by_path
        .iter()
        .map(|rows| rows.iter().map(|&i| out.amps().row(i).norm_squared()).sum())
        .collect();
    layout.check_undetected(&per_path)?;

    let readings = layout
        .detectors
        .iter()
        .map(|d| {
            let probability = per_path[d.path];
            let bob = (probability > TOL).then(|| {
                let sub: DMatrix<_> = out.amps().select_rows(&rows_by_path[d.path]);
                DensityMatrix::from_raw(out.space_b(), reduce_rows(&sub) / c64(probability, 0.0))
            });
            DetectorReading {
                detector: d.name.clone(),
                path: d.path,
                probability,
                bob,
            }
        })
        .collect();
    Ok(DetectorDistribution { readings })
}

/// Which Bell outcome each detector reports, in detector order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorMap {
    entries: Vec<(String, BellOutcome)>,
}

impl DetectorMap {
    pub fn entries(&self) -> &[(String, BellOutcome)] {
        &self.entries
    }

    pub fn outcome(&self, detector: &str) -> Option<BellOutcome> {
        self.entries
            .iter()
            .find(|(d, _)| d == detector)
            .map(|(_, o)| *o)
    }

    pub fn detector(&self, outcome: BellOutcome) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, o)| *o == outcome)
            .map(|(d, _)| d.as_str())
    }

    pub fn to_map(&self) -> BTreeMap<String, BellOutcome> {
        self.entries.iter().cloned().collect()
    }
}

const CERTAIN: f64 = 1.0 - 1e-10;

/// Sends every Bell state through the bench and records the detector it hits.
pub fn derive_detector_map(layout: &BenchLayout) -> Result<DetectorMap> {
    if layout.detectors.len() != 4 {
        return Err(Error::Wiring(format!(
            "a Bell measurement needs 4 detectors, bench has {}",
            layout.detectors.len()
        )));
    }
    let window = layout.window;
    let mut assigned: Vec<Option<BellOutcome>> = vec![None; 4];
    for outcome in BellOutcome::ALL {
        let mut hit: Option<usize> = None;
        for q in window.even_modes() {
            let probs = layout.click_probabilities(&bell_state(window, q, outcome)?)?;
            let here = probs.iter().position(|&p| p > CERTAIN).ok_or_else(|| {
                Error::ConventionInconsistency(format!(
                    "{outcome} at q={q} does not reach a single detector: {probs:?}"
                ))
            })?;
            match hit {
                None => hit = Some(here),
                Some(prev) if prev != here => {
                    return Err(Error::ConventionInconsistency(format!(
                        "{outcome} reaches {} at one charge and {} at q={q}",
                        layout.detectors[prev].name, layout.detectors[here].name
                    )))
                }
                Some(_) => {}
            }
        }
        let d = hit.expect("window has at least one even charge");
        if let Some(other) = assigned[d] {
            return Err(Error::ConventionInconsistency(format!(
                "{outcome} and {other} both reach {}",
                layout.detectors[d].name
            )));
        }
        assigned[d] = Some(outcome);
    }
    Ok(DetectorMap {
        entries: layout
            .detectors
            .iter()
            .zip(assigned)
            .map(|(d, o)| {
                (
                    d.name.clone(),
                    o.expect("four outcomes fill four detectors"),
                )
            })
            .collect(),
    })
}
