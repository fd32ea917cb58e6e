//! Optical elements as operators on `OAM ⊗ polarization ⊗ path`.
//!
//! Mirrors are pure routing and never appear as operators. Dove prisms and
//! spiral phase holograms move OAM charge and can push amplitude out of the
//! window; such moves are errors rather than silent truncation. Consecutive
//! reflections and shifts on the same arm are fused into a single affine map
//! `q -> s*q + t` before being materialized, so a Dove prism followed by a
//! `+1` hologram is exactly the window-internal involution `q -> 1-q`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c64, max_abs, DensityMatrix, Photon, PhotonSpace, Pol, SinglePhotonState, TwoPhotonState, C64,
    TOL,
};

pub type PathId = usize;

/// Phase convention of a 50:50 beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsConvention {
    /// `|a⟩ -> (|a⟩ + i|b⟩)/√2`, `|b⟩ -> (i|a⟩ + |b⟩)/√2`.
    Symmetric,
    /// `|a⟩ -> (|a⟩ + |b⟩)/√2`, `|b⟩ -> (|a⟩ - |b⟩)/√2`.
    Hadamard,
}

impl BsConvention {
    pub fn name(self) -> &'static str {
        match self {
            BsConvention::Symmetric => "symmetric",
            BsConvention::Hadamard => "hadamard",
        }
    }

    fn block(self) -> Matrix2<C64> {
        let s = FRAC_1_SQRT_2;
        match self {
            BsConvention::Symmetric => {
                Matrix2::new(c64(s, 0.0), c64(0.0, s), c64(0.0, s), c64(s, 0.0))
            }
            BsConvention::Hadamard => {
                Matrix2::new(c64(s, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-s, 0.0))
            }
        }
    }
}

/// Element descriptor. `arm: None` acts on every path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    DovePrism {
        arm: Option<PathId>,
    },
    Sph {
        charge: i32,
        arm: Option<PathId>,
    },
    /// Sorter followed by a delay line: `e^{iφ}` on odd charges.
    ParityPhase {
        phi: f64,
        arm: Option<PathId>,
    },
    /// Phase `e^{iφ}` on one path.
    Delay {
        path: PathId,
        phi: f64,
    },
    /// Even charges are exchanged between `input` and `even`, odd ones between `input` and `odd`.
    Sorter {
        input: PathId,
        even: PathId,
        odd: PathId,
    },
    /// `H` is exchanged between `input` and `h`, `V` between `input` and `v`.
    Pbs {
        input: PathId,
        h: PathId,
        v: PathId,
    },
    BeamSplitter {
        a: PathId,
        b: PathId,
        convention: BsConvention,
    },
    Hwp {
        theta: f64,
        arm: Option<PathId>,
    },
    Qwp {
        theta: f64,
        arm: Option<PathId>,
    },
}

impl Element {
    /// Paths the element reads or writes; `None` means all of them.
    pub fn touched_paths(&self) -> Option<Vec<PathId>> {
        match *self {
            Element::DovePrism { arm }
            | Element::Sph { arm, .. }
            | Element::ParityPhase { arm, .. }
            | Element::Hwp { arm, .. }
            | Element::Qwp { arm, .. } => arm.map(|p| vec![p]),
            Element::Delay { path, .. } => Some(vec![path]),
            Element::Sorter { input, even, odd } => Some(vec![input, even, odd]),
            Element::Pbs { input, h, v } => Some(vec![input, h, v]),
            Element::BeamSplitter { a, b, .. } => Some(vec![a, b]),
        }
    }

    fn affine(&self) -> Option<Affine> {
        match *self {
            Element::DovePrism { arm } => Some(Affine {
                sign: -1,
                shift: 0,
                arm,
            }),
            Element::Sph { charge, arm } => Some(Affine {
                sign: 1,
                shift: charge as i64,
                arm,
            }),
            _ => None,
        }
    }

    fn validate(&self, space: &PhotonSpace) -> Result<()> {
        let n = space.n_paths();
        let check = |p: PathId| {
            if p >= n {
                Err(Error::InvalidArgument(format!(
                    "path {p} out of range (space has {n} paths)"
                )))
            } else {
                Ok(())
            }
        };
        if let Some(paths) = self.touched_paths() {
            paths.into_iter().try_for_each(check)?;
        }
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{what} must be finite")))
            }
        };
        match *self {
            Element::Sph { charge, .. } if charge != 1 && charge != -1 => Err(
                Error::InvalidArgument(format!("hologram charge must be ±1, got {charge}")),
            ),
            Element::Sorter { even, odd, .. } if even == odd => Err(Error::InvalidArgument(
                format!("sorter outputs collide on path {even}"),
            )),
            Element::Pbs { h, v, .. } if h == v => Err(Error::InvalidArgument(format!(
                "PBS outputs collide on path {h}"
            ))),
            Element::BeamSplitter { a, b, .. } if a == b => Err(Error::InvalidArgument(format!(
                "beam splitter ports collide on path {a}"
            ))),
            Element::ParityPhase { phi, .. } | Element::Delay { phi, .. } => finite(phi, "phase"),
            Element::Hwp { theta, .. } | Element::Qwp { theta, .. } => finite(theta, "angle"),
            _ => Ok(()),
        }
    }

    /// Short name used in reports.
    pub fn label(&self) -> String {
        match *self {
            Element::DovePrism { .. } => "dove".into(),
            Element::Sph { charge, .. } => format!("sph({charge:+})"),
            Element::ParityPhase { phi, .. } => format!("parity_phase({phi})"),
            Element::Delay { path, phi } => format!("delay(path {path}, {phi})"),
            Element::Sorter { .. } => "sorter".into(),
            Element::Pbs { .. } => "pbs".into(),
            Element::BeamSplitter { convention, .. } => format!("bs({})", convention.name()),
            Element::Hwp { theta, .. } => format!("hwp({theta})"),
            Element::Qwp { theta, .. } => format!("qwp({theta})"),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `q -> sign*q + shift` on one arm (or all paths).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Affine {
    sign: i64,
    shift: i64,
    arm: Option<PathId>,
}

impl Affine {
    /// `self` applied after `first`.
    fn after(self, first: Affine) -> Affine {
        Affine {
            sign: self.sign * first.sign,
            shift: self.sign * first.shift + self.shift,
            arm: first.arm,
        }
    }
}

fn on_arm(arm: Option<PathId>, path: PathId) -> bool {
    arm.is_none_or(|a| a == path)
}

fn jones_hwp(theta: f64) -> Matrix2<C64> {
    let (s, c) = (2.0 * theta).sin_cos();
    Matrix2::new(c64(c, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-c, 0.0))
}

fn jones_qwp(theta: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    let rot = Matrix2::new(c64(c, 0.0), c64(-s, 0.0), c64(s, 0.0), c64(c, 0.0));
    let retarder = Matrix2::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0));
    rot * retarder * rot.transpose()
}

/// A materialized block: matrix plus the set of basis vectors it may act on.
struct Block {
    matrix: DMatrix<C64>,
    domain: Vec<bool>,
}

fn materialize_affine(map: Affine, space: &PhotonSpace) -> Block {
    let n = space.dim();
    let mut matrix = DMatrix::zeros(n, n);
    let mut domain = vec![true; n];
    for (i, m) in space.modes() {
        if on_arm(map.arm, m.path) {
            match space.index(map.sign * m.q + map.shift, m.pol, m.path) {
                Some(j) => matrix[(j, i)] = c64(1.0, 0.0),
                None => domain[i] = false,
            }
        } else {
            matrix[(i, i)] = c64(1.0, 0.0);
        }
    }
    Block { matrix, domain }
}

fn swap(path: PathId, x: PathId, y: PathId) -> PathId {
    if path == x {
        y
    } else if path == y {
        x
    } else {
        path
    }
}

fn materialize(element: &Element, space: &PhotonSpace) -> Block {
    if let Some(map) = element.affine() {
        return materialize_affine(map, space);
    }
    let n = space.dim();
    let mut matrix = DMatrix::zeros(n, n);
    for (i, m) in space.modes() {
        match *element {
            Element::ParityPhase { phi, arm } => {
                let odd = m.q.rem_euclid(2) == 1;
                matrix[(i, i)] = if odd && on_arm(arm, m.path) {
                    C64::from_polar(1.0, phi)
                } else {
                    c64(1.0, 0.0)
                };
            }
            Element::Delay { path, phi } => {
                matrix[(i, i)] = if m.path == path {
                    C64::from_polar(1.0, phi)
                } else {
                    c64(1.0, 0.0)
                };
            }
            Element::Sorter { input, even, odd } => {
                let out = if m.q.rem_euclid(2) == 0 { even } else { odd };
                let j = space.index(m.q, m.pol, swap(m.path, input, out)).unwrap();
                matrix[(j, i)] = c64(1.0, 0.0);
            }
            Element::Pbs { input, h, v } => {
                let out = if m.pol == Pol::H { h } else { v };
                let j = space.index(m.q, m.pol, swap(m.path, input, out)).unwrap();
                matrix[(j, i)] = c64(1.0, 0.0);
            }
            Element::BeamSplitter { a, b, convention } => {
                let block = convention.block();
                let port = if m.path == a {
                    Some(0)
                } else if m.path == b {
                    Some(1)
                } else {
                    None
                };
                match port {
                    Some(col) => {
                        for (row, path) in [(0, a), (1, b)] {
                            let j = space.index(m.q, m.pol, path).unwrap();
                            matrix[(j, i)] = block[(row, col)];
                        }
                    }
                    None => matrix[(i, i)] = c64(1.0, 0.0),
                }
            }
            Element::Hwp { theta, arm } | Element::Qwp { theta, arm } => {
                if on_arm(arm, m.path) {
                    let jones = if matches!(element, Element::Hwp { .. }) {
                        jones_hwp(theta)
                    } else {
                        jones_qwp(theta)
                    };
                    for pol in Pol::BOTH {
                        let j = space.index(m.q, pol, m.path).unwrap();
                        matrix[(j, i)] = jones[(pol.index(), m.pol.index())];
                    }
                } else {
                    matrix[(i, i)] = c64(1.0, 0.0);
                }
            }
            Element::DovePrism { .. } | Element::Sph { .. } => unreachable!(),
        }
    }
    Block {
        matrix,
        domain: vec![true; n],
    }
}

/// Groups consecutive OAM reflections/shifts on the same arm into one affine
/// map. An affine step is merged into the previous affine step on its arm when
/// nothing in between touches that arm.
enum Stage<'a> {
    Affine(Affine),
    Other(&'a Element),
}

fn touches(stage: &Stage<'_>, arm: Option<PathId>) -> bool {
    let paths = match stage {
        Stage::Affine(a) => a.arm.map(|p| vec![p]),
        Stage::Other(e) => e.touched_paths(),
    };
    match (paths, arm) {
        (None, _) | (_, None) => true,
        (Some(ps), Some(a)) => ps.contains(&a),
    }
}

fn fuse(elements: &[Element]) -> Vec<Stage<'_>> {
    let mut stages: Vec<Stage<'_>> = Vec::new();
    for e in elements {
        if let Some(map) = e.affine() {
            let target = stages
                .iter()
                .rposition(|s| touches(s, map.arm))
                .filter(|&k| matches!(stages[k], Stage::Affine(prev) if prev.arm == map.arm));
            if let Some(k) = target {
                if let Stage::Affine(prev) = stages[k] {
                    stages[k] = Stage::Affine(map.after(prev));
                }
                continue;
            }
            stages.push(Stage::Affine(map));
        } else {
            stages.push(Stage::Other(e));
        }
    }
    stages
}

/// Operator of an element sequence on a fixed photon space.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementOp {
    elements: Vec<Element>,
    space: PhotonSpace,
    matrix: DMatrix<C64>,
    /// Basis vectors whose image stays inside the window.
    domain: Vec<bool>,
    /// Matrix not described by `elements` (adjoints).
    opaque: bool,
}

impl ElementOp {
    pub fn identity(space: PhotonSpace) -> Self {
        ElementOp {
            elements: Vec::new(),
            space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
            domain: vec![true; space.dim()],
            opaque: false,
        }
    }

    pub fn new(element: Element, space: PhotonSpace) -> Result<Self> {
        Self::sequence(vec![element], space)
    }

    /// Matrix product of the elements in application order.
    pub fn sequence(elements: Vec<Element>, space: PhotonSpace) -> Result<Self> {
        for e in &elements {
            e.validate(&space)?;
        }
        let mut op = Self::identity(space);
        for stage in fuse(&elements) {
            let block = match stage {
                Stage::Affine(map) => materialize_affine(map, &space),
                Stage::Other(e) => materialize(e, &space),
            };
            op = op.then_block(block);
        }
        op.elements = elements;
        Ok(op)
    }

    fn then_block(self, block: Block) -> Self {
        let n = self.space.dim();
        let domain = (0..n)
            .map(|i| {
                self.domain[i]
                    && (0..n).all(|j| self.matrix[(j, i)].norm() <= TOL || block.domain[j])
            })
            .collect();
        ElementOp {
            elements: self.elements,
            space: self.space,
            matrix: &block.matrix * &self.matrix,
            domain,
            opaque: self.opaque,
        }
    }

    /// `next ∘ self`. Explicit operator products do not fuse across
    /// boundaries; build a sequence for that.
    pub fn then(&self, next: &ElementOp) -> Result<Self> {
        if self.space != next.space {
            return Err(Error::ShapeMismatch(
                "operators act on different spaces".into(),
            ));
        }
        let mut op = self.clone().then_block(Block {
            matrix: next.matrix.clone(),
            domain: next.domain.clone(),
        });
        op.elements.extend(next.elements.iter().cloned());
        op.opaque |= next.opaque;
        Ok(op)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn space(&self) -> PhotonSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// True when no basis vector can leave the window.
    pub fn is_total(&self) -> bool {
        self.domain.iter().all(|&d| d)
    }

    /// Basis vectors whose image stays inside the window.
    pub fn domain(&self) -> &[bool] {
        &self.domain
    }

    /// `max |U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.space.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n)))
    }

    /// `max |U†U - P|` with `P` the projector onto the domain; zero for a
    /// partial isometry that is unitary wherever it is defined.
    pub fn isometry_error(&self) -> f64 {
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.domain.len(),
            self.domain
                .iter()
                .map(|&d| c64(if d { 1.0 } else { 0.0 }, 0.0)),
        ));
        max_abs(&(self.matrix.adjoint() * &self.matrix - p))
    }

    /// Adjoint operator (only meaningful for total operators).
    pub fn adjoint(&self) -> Self {
        ElementOp {
            elements: Vec::new(),
            space: self.space,
            matrix: self.matrix.adjoint(),
            domain: vec![true; self.space.dim()],
            opaque: true,
        }
    }

    fn check_support<'a>(&self, amps: impl Iterator<Item = (usize, f64)> + 'a) -> Result<()> {
        for (i, weight) in amps {
            if !self.domain[i] && weight > TOL {
                let m = self.space.mode(i);
                return Err(Error::SupportOverflow {
                    q: m.q,
                    path: m.path,
                    amplitude: weight,
                });
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &SinglePhotonState) -> Result<SinglePhotonState> {
        if state.space() != self.space {
            return Err(Error::ShapeMismatch(
                "operator and state spaces differ".into(),
            ));
        }
        self.check_support(state.amps().iter().map(|z| z.norm()).enumerate())?;
        SinglePhotonState::new(self.space, &self.matrix * state.amps())
    }

    /// `U ρ U†`.
    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.space() != self.space {
            return Err(Error::ShapeMismatch(
                "operator and state spaces differ".into(),
            ));
        }
        self.check_support(
            (0..self.space.dim()).map(|i| (i, rho.matrix()[(i, i)].re.max(0.0).sqrt())),
        )?;
        Ok(DensityMatrix::from_raw(
            self.space,
            &self.matrix * rho.matrix() * self.matrix.adjoint(),
        ))
    }

    /// `op ⊗ I` or `I ⊗ op` on a joint state.
    pub fn apply_to_photon(&self, which: Photon, state: &TwoPhotonState) -> Result<TwoPhotonState> {
        let amps = state.amps();
        match which {
            Photon::A => {
                if state.space_a() != self.space {
                    return Err(Error::ShapeMismatch(
                        "operator does not match photon A".into(),
                    ));
                }
                self.check_support((0..amps.nrows()).map(|i| (i, amps.row(i).norm())))?;
                TwoPhotonState::new(state.space_a(), state.space_b(), &self.matrix * amps)
            }
            Photon::B => {
                if state.space_b() != self.space {
                    return Err(Error::ShapeMismatch(
                        "operator does not match photon B".into(),
                    ));
                }
                self.check_support((0..amps.ncols()).map(|j| (j, amps.column(j).norm())))?;
                TwoPhotonState::new(
                    state.space_a(),
                    state.space_b(),
                    amps * self.matrix.transpose(),
                )
            }
        }
    }
}

pub fn apply_to_photon(
    op: &ElementOp,
    which: Photon,
    state: &TwoPhotonState,
) -> Result<TwoPhotonState> {
    op.apply_to_photon(which, state)
}

/// Composition in application order; `compose(&[])` is the identity.
pub fn compose(ops: &[ElementOp], space: PhotonSpace) -> Result<ElementOp> {
    if ops.iter().any(|o| o.space != space) {
        return Err(Error::ShapeMismatch(
            "operators act on different spaces".into(),
        ));
    }
    if ops.iter().any(|o| o.opaque) {
        return ops
            .iter()
            .try_fold(ElementOp::identity(space), |acc, o| acc.then(o));
    }
    ElementOp::sequence(
        ops.iter()
            .flat_map(|o| o.elements.iter().cloned())
            .collect(),
        space,
    )
}

pub fn dove_prism(space: PhotonSpace) -> Result<ElementOp> {
    ElementOp::new(Element::DovePrism { arm: None }, space)
}

pub fn sph(space: PhotonSpace, charge: i32) -> Result<ElementOp> {
    ElementOp::new(Element::Sph { charge, arm: None }, space)
}

/// Dove prism followed by a `+1` hologram: `q -> 1-q`.
pub fn dp_sph(space: PhotonSpace) -> ElementOp {
    ElementOp::sequence(dp_sph_elements(None), space).expect("dp_sph is valid on any space")
}

pub fn dp_sph_elements(arm: Option<PathId>) -> Vec<Element> {
    vec![Element::DovePrism { arm }, Element::Sph { charge: 1, arm }]
}

pub fn parity_phase(space: PhotonSpace, phi: f64) -> Result<ElementOp> {
    ElementOp::new(Element::ParityPhase { phi, arm: None }, space)
}

pub fn parity_flip(space: PhotonSpace) -> ElementOp {
    parity_phase(space, PI).expect("finite phase")
}

pub fn oam_parity_sorter(
    space: PhotonSpace,
    input: PathId,
    even: PathId,
    odd: PathId,
) -> Result<ElementOp> {
    ElementOp::new(Element::Sorter { input, even, odd }, space)
}

pub fn pbs(space: PhotonSpace, input: PathId, h: PathId, v: PathId) -> Result<ElementOp> {
    ElementOp::new(Element::Pbs { input, h, v }, space)
}

pub fn bs_5050(
    space: PhotonSpace,
    a: PathId,
    b: PathId,
    convention: BsConvention,
) -> Result<ElementOp> {
    ElementOp::new(Element::BeamSplitter { a, b, convention }, space)
}

pub fn hwp(space: PhotonSpace, theta: f64) -> Result<ElementOp> {
    ElementOp::new(Element::Hwp { theta, arm: None }, space)
}

pub fn qwp(space: PhotonSpace, theta: f64) -> Result<ElementOp> {
    ElementOp::new(Element::Qwp { theta, arm: None }, space)
}

pub fn delay(space: PhotonSpace, path: PathId, phi: f64) -> Result<ElementOp> {
    ElementOp::new(Element::Delay { path, phi }, space)
}

/// Action of an OAM-only operator on the parity qubit, read off pair `m`:
/// columns are the images of `|E⟩|m⟩ = |2m⟩` and `|O⟩|m⟩ = |1-2m⟩`.
pub fn induced_parity_matrix(op: &ElementOp, pair: i64) -> Result<Matrix2<C64>> {
    let space = op.space();
    let (e, o) = (2 * pair, 1 - 2 * pair);
    let mut out = Matrix2::zeros();
    for (col, q) in [(0, e), (1, o)] {
        let input = SinglePhotonState::basis(space, q, Pol::H, 0)?;
        let image = op.apply(&input)?;
        out[(0, col)] = image.amp(e, Pol::H, 0);
        out[(1, col)] = image.amp(o, Pol::H, 0);
        let captured = out[(0, col)].norm_sqr() + out[(1, col)].norm_sqr();
        if (captured - 1.0).abs() > TOL {
            return Err(Error::InvalidArgument(format!(
                "operator leaks pair {pair} out of its parity qubit"
            )));
        }
    }
    Ok(out)
}
