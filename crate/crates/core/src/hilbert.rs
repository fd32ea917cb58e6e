//! State and operator representation over a truncated OAM window.
//!
//! A single photon lives in `OAM ⊗ polarization ⊗ path`. Basis vectors are
//! ordered lexicographically: OAM charge ascending, then `H` before `V`, then
//! path ascending. Two-photon amplitudes are stored as a `dim_A × dim_B`
//! matrix, so the flattened row-major order is the product basis order.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Global tolerance for invariant checks.
pub const TOL: f64 = 1e-12;

/// Symmetric OAM window `{1-K, ..., K}`.
///
/// Closed under `q -> 1-q`, which is what the pairing isometry and the
/// Dove-prism-then-hologram composite need.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OamWindow {
    half_width: u32,
}

impl OamWindow {
    pub fn new(half_width: i64) -> Result<Self> {
        if half_width < 1 || half_width > u32::MAX as i64 {
            return Err(Error::InvalidArgument(format!(
                "window half-width must be >= 1, got {half_width}"
            )));
        }
        Ok(OamWindow {
            half_width: half_width as u32,
        })
    }

    pub fn half_width(&self) -> i64 {
        self.half_width as i64
    }

    /// Number of OAM modes, `2K`.
    pub fn len(&self) -> usize {
        2 * self.half_width as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> i64 {
        1 - self.half_width()
    }

    pub fn max(&self) -> i64 {
        self.half_width()
    }

    pub fn contains(&self, q: i64) -> bool {
        q >= self.min() && q <= self.max()
    }

    pub fn index_of(&self, q: i64) -> Option<usize> {
        self.contains(q).then(|| (q - self.min()) as usize)
    }

    pub fn mode_at(&self, idx: usize) -> i64 {
        self.min() + idx as i64
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        self.min()..=self.max()
    }

    /// Even charges `2m` in the window, ascending. Each one labels a pair `{2m, 1-2m}`.
    pub fn even_modes(&self) -> impl Iterator<Item = i64> {
        self.modes().filter(|q| q.rem_euclid(2) == 0)
    }

    /// Pair labels `m` (with `2m` in the window), ascending.
    pub fn pair_labels(&self) -> Vec<i64> {
        self.even_modes().map(|q| q / 2).collect()
    }
}

pub fn make_window(half_width: i64) -> Result<OamWindow> {
    OamWindow::new(half_width)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_index(i: usize) -> Pol {
        if i == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

/// Index scheme of one photon: window plus number of spatial paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhotonSpace {
    window: OamWindow,
    n_paths: usize,
}

/// A basis label `(q, pol, path)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub q: i64,
    pub pol: Pol,
    pub path: usize,
}

impl PhotonSpace {
    pub fn new(window: OamWindow, n_paths: usize) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidArgument(
                "a photon needs at least one path".into(),
            ));
        }
        Ok(PhotonSpace { window, n_paths })
    }

    /// Single-path space.
    pub fn single(window: OamWindow) -> Self {
        PhotonSpace { window, n_paths: 1 }
    }

    pub fn window(&self) -> OamWindow {
        self.window
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn dim(&self) -> usize {
        self.window.len() * 2 * self.n_paths
    }

    pub fn index(&self, q: i64, pol: Pol, path: usize) -> Option<usize> {
        let qi = self.window.index_of(q)?;
        (path < self.n_paths).then(|| (qi * 2 + pol.index()) * self.n_paths + path)
    }

    pub fn mode(&self, idx: usize) -> Mode {
        let path = idx % self.n_paths;
        let rest = idx / self.n_paths;
        Mode {
            q: self.window.mode_at(rest / 2),
            pol: Pol::from_index(rest % 2),
            path,
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, Mode)> + '_ {
        (0..self.dim()).map(move |i| (i, self.mode(i)))
    }

    fn check_same(&self, other: &PhotonSpace) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!(
                "K={} paths={} vs K={} paths={}",
                self.window.half_width(),
                self.n_paths,
                other.window.half_width(),
                other.n_paths
            )));
        }
        Ok(())
    }
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a C64>) -> Result<()> {
    if values
        .into_iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        Ok(())
    } else {
        Err(Error::InvalidArgument("amplitudes must be finite".into()))
    }
}

/// Pure state of one photon.
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonState {
    space: PhotonSpace,
    amps: DVector<C64>,
}

impl SinglePhotonState {
    pub fn new(space: PhotonSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} amplitudes, got {}",
                space.dim(),
                amps.len()
            )));
        }
        check_finite(amps.iter())?;
        Ok(SinglePhotonState { space, amps })
    }

    pub fn zero(space: PhotonSpace) -> Self {
        SinglePhotonState {
            space,
            amps: DVector::zeros(space.dim()),
        }
    }

    pub fn basis(space: PhotonSpace, q: i64, pol: Pol, path: usize) -> Result<Self> {
        let idx = space.index(q, pol, path).ok_or_else(|| {
            Error::InvalidArgument(format!("mode (q={q}, {pol:?}, path {path}) not in space"))
        })?;
        let mut s = Self::zero(space);
        s.amps[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn space(&self) -> PhotonSpace {
        self.space
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, q: i64, pol: Pol, path: usize) -> C64 {
        self.space
            .index(q, pol, path)
            .map_or(C64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.amps.norm();
        if n <= TOL {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(SinglePhotonState {
            space: self.space,
            amps: &self.amps / C64::new(n, 0.0),
        })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &SinglePhotonState) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, factor: C64) -> Self {
        SinglePhotonState {
            space: self.space,
            amps: &self.amps * factor,
        }
    }

    pub fn add(&self, other: &SinglePhotonState) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(SinglePhotonState {
            space: self.space,
            amps: &self.amps + &other.amps,
        })
    }

    /// Re-embed into a space with `n_paths` paths, placing every amplitude on `path`.
    pub fn on_path(&self, n_paths: usize, path: usize) -> Result<Self> {
        if self.space.n_paths != 1 || path >= n_paths {
            return Err(Error::InvalidArgument(format!(
                "cannot move a {}-path state onto path {path} of {n_paths}",
                self.space.n_paths
            )));
        }
        let space = PhotonSpace::new(self.space.window, n_paths)?;
        let mut out = Self::zero(space);
        for (i, m) in self.space.modes() {
            out.amps[space.index(m.q, m.pol, path).unwrap()] = self.amps[i];
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = StateWire {
            window_k: self.space.window.half_width(),
            n_paths: self.space.n_paths,
            amps: self.amps.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&wire).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: StateWire =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let space = PhotonSpace::new(OamWindow::new(wire.window_k)?, wire.n_paths)?;
        let amps = DVector::from_iterator(
            wire.amps.len(),
            wire.amps.iter().map(|[re, im]| C64::new(*re, *im)),
        );
        Self::new(space, amps)
    }
}

#[derive(Serialize, Deserialize)]
struct StateWire {
    #[serde(rename = "window_K")]
    window_k: i64,
    n_paths: usize,
    amps: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TwoPhotonWire {
    #[serde(rename = "window_K")]
    window_k: i64,
    n_paths_a: usize,
    n_paths_b: usize,
    amps: Vec<[f64; 2]>,
}

/// Which photon an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Photon {
    A,
    B,
}

/// Pure joint state of photons A and B.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonState {
    space_a: PhotonSpace,
    space_b: PhotonSpace,
    /// Rows index photon A, columns photon B.
    amps: DMatrix<C64>,
}

impl TwoPhotonState {
    pub fn new(space_a: PhotonSpace, space_b: PhotonSpace, amps: DMatrix<C64>) -> Result<Self> {
        if space_a.window != space_b.window {
            return Err(Error::ShapeMismatch(
                "photons must share one OAM window".into(),
            ));
        }
        if amps.nrows() != space_a.dim() || amps.ncols() != space_b.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} amplitude matrix, got {}x{}",
                space_a.dim(),
                space_b.dim(),
                amps.nrows(),
                amps.ncols()
            )));
        }
        check_finite(amps.iter())?;
        Ok(TwoPhotonState {
            space_a,
            space_b,
            amps,
        })
    }

    pub fn product(a: &SinglePhotonState, b: &SinglePhotonState) -> Result<Self> {
        Self::new(a.space, b.space, &a.amps * b.amps.transpose())
    }

    pub fn space_a(&self) -> PhotonSpace {
        self.space_a
    }

    pub fn space_b(&self) -> PhotonSpace {
        self.space_b
    }

    pub fn window(&self) -> OamWindow {
        self.space_a.window
    }

    pub fn amps(&self) -> &DMatrix<C64> {
        &self.amps
    }

    pub fn amp(&self, a: Mode, b: Mode) -> C64 {
        match (
            self.space_a.index(a.q, a.pol, a.path),
            self.space_b.index(b.q, b.pol, b.path),
        ) {
            (Some(i), Some(j)) => self.amps[(i, j)],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.amps.norm();
        if n <= TOL {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(TwoPhotonState {
            amps: &self.amps / C64::new(n, 0.0),
            ..self.clone()
        })
    }

    pub fn inner(&self, other: &TwoPhotonState) -> Result<C64> {
        self.space_a.check_same(&other.space_a)?;
        self.space_b.check_same(&other.space_b)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Move photon A (single path) onto `path` of an `n_paths` space.
    pub fn a_on_path(&self, n_paths: usize, path: usize) -> Result<Self> {
        if self.space_a.n_paths != 1 || path >= n_paths {
            return Err(Error::InvalidArgument(format!(
                "cannot move photon A onto path {path} of {n_paths}"
            )));
        }
        let space_a = PhotonSpace::new(self.space_a.window, n_paths)?;
        let mut amps = DMatrix::zeros(space_a.dim(), self.space_b.dim());
        for (i, m) in self.space_a.modes() {
            let target = space_a.index(m.q, m.pol, path).unwrap();
            amps.set_row(target, &self.amps.row(i));
        }
        Self::new(space_a, self.space_b, amps)
    }

    /// Bob's reduced density matrix, `Tr_A |ψ⟩⟨ψ|`.
    pub fn partial_trace_a(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space_b,
            matrix: reduce_rows(&self.amps),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = TwoPhotonWire {
            window_k: self.window().half_width(),
            n_paths_a: self.space_a.n_paths,
            n_paths_b: self.space_b.n_paths,
            amps: self.amps.transpose().iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&wire).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: TwoPhotonWire =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let window = OamWindow::new(wire.window_k)?;
        let space_a = PhotonSpace::new(window, wire.n_paths_a)?;
        let space_b = PhotonSpace::new(window, wire.n_paths_b)?;
        if wire.amps.len() != space_a.dim() * space_b.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} amplitudes, got {}",
                space_a.dim() * space_b.dim(),
                wire.amps.len()
            )));
        }
        let amps = DMatrix::from_row_iterator(
            space_a.dim(),
            space_b.dim(),
            wire.amps.iter().map(|[re, im]| C64::new(*re, *im)),
        );
        Self::new(space_a, space_b, amps)
    }
}

/// `ρ[b, b'] = Σ_a M[a, b] conj(M[a, b'])`.
pub(crate) fn reduce_rows(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.transpose() * m.conjugate()
}

/// Density matrix of one photon.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: PhotonSpace,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Builds and validates a density matrix (Hermitian, unit trace, PSD).
    pub fn new(space: PhotonSpace, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {0}x{0} matrix, got {1}x{2}",
                space.dim(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_finite(matrix.iter())?;
        let rho = DensityMatrix { space, matrix };
        rho.validate(TOL)?;
        Ok(rho)
    }

    pub fn from_pure(state: &SinglePhotonState) -> Self {
        DensityMatrix {
            space: state.space,
            matrix: &state.amps * state.amps.adjoint(),
        }
    }

    pub(crate) fn from_raw(space: PhotonSpace, matrix: DMatrix<C64>) -> Self {
        DensityMatrix { space, matrix }
    }

    pub fn space(&self) -> PhotonSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.matrix)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidArgument(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidArgument(format!("trace is {tr}, expected 1")));
        }
        let lam = self.min_eigenvalue();
        if lam < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {lam:.3e}"
            )));
        }
        Ok(())
    }

    /// `⟨target|ρ|target⟩`; the target must be normalized.
    pub fn fidelity(&self, target: &SinglePhotonState) -> Result<f64> {
        self.space.check_same(&target.space)?;
        check_normalized(target.norm_sqr())?;
        let v = &self.matrix * &target.amps;
        Ok(target.amps.dotc(&v).re)
    }

    /// Largest deviation between two density matrices, entrywise.
    pub fn distance_max(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// Reduced density matrix over OAM alone (polarization and path traced out).
    pub fn oam_marginal(&self) -> OamDensity {
        let window = self.space.window;
        let mut out = DMatrix::zeros(window.len(), window.len());
        for (i, mi) in self.space.modes() {
            for (j, mj) in self.space.modes() {
                if mi.pol == mj.pol && mi.path == mj.path {
                    let (a, b) = (
                        window.index_of(mi.q).unwrap(),
                        window.index_of(mj.q).unwrap(),
                    );
                    out[(a, b)] += self.matrix[(i, j)];
                }
            }
        }
        OamDensity {
            window,
            matrix: out,
        }
    }

    /// Reduced density matrix over polarization alone.
    pub fn polarization_marginal(&self) -> Qubit {
        let mut out = Matrix2::zeros();
        for (i, mi) in self.space.modes() {
            for (j, mj) in self.space.modes() {
                if mi.q == mj.q && mi.path == mj.path {
                    out[(mi.pol.index(), mj.pol.index())] += self.matrix[(i, j)];
                }
            }
        }
        Qubit { rho: out }
    }
}

fn check_normalized(norm_sqr: f64) -> Result<()> {
    if (norm_sqr - 1.0).abs() > TOL {
        return Err(Error::InvalidArgument(format!(
            "target state is not normalized (norm² = {norm_sqr})"
        )));
    }
    Ok(())
}

fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Density matrix over the OAM window only.
#[derive(Clone, Debug, PartialEq)]
pub struct OamDensity {
    pub window: OamWindow,
    pub matrix: DMatrix<C64>,
}

impl OamDensity {
    /// Total weight on odd charges.
    pub fn odd_weight(&self) -> f64 {
        self.window
            .modes()
            .enumerate()
            .filter(|(_, q)| q.rem_euclid(2) == 1)
            .map(|(i, _)| self.matrix[(i, i)].re)
            .sum()
    }
}

/// Density matrix of the joint two-photon system.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDensityMatrix {
    space_a: PhotonSpace,
    space_b: PhotonSpace,
    matrix: DMatrix<C64>,
}

impl JointDensityMatrix {
    pub fn from_pure(state: &TwoPhotonState) -> Self {
        let flat = DVector::from_iterator(state.amps.len(), state.amps.transpose().iter().copied());
        JointDensityMatrix {
            space_a: state.space_a,
            space_b: state.space_b,
            matrix: &flat * flat.adjoint(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn partial_trace_a(&self) -> DensityMatrix {
        let (da, db) = (self.space_a.dim(), self.space_b.dim());
        let mut out = DMatrix::zeros(db, db);
        for a in 0..da {
            for b in 0..db {
                for b2 in 0..db {
                    out[(b, b2)] += self.matrix[(a * db + b, a * db + b2)];
                }
            }
        }
        DensityMatrix {
            space: self.space_b,
            matrix: out,
        }
    }
}

/// A two-level density matrix. For parity qubits the basis is `(|E⟩, |O⟩)`,
/// for polarization qubits `(|H⟩, |V⟩)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit {
    pub rho: Matrix2<C64>,
}

pub type ParityQubit = Qubit;

impl Qubit {
    pub fn from_pure(a: C64, b: C64) -> Self {
        let v = Vector2::new(a, b);
        Qubit {
            rho: v * v.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// `⟨t|ρ|t⟩` for normalized `t = a|0⟩ + b|1⟩`.
    pub fn fidelity(&self, a: C64, b: C64) -> Result<f64> {
        check_normalized(a.norm_sqr() + b.norm_sqr())?;
        let t = Vector2::new(a, b);
        Ok(t.dotc(&(self.rho * t)).re)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = max_abs(&(self.rho - self.rho.adjoint()));
        let tr = self.trace();
        if herm > tol || (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidArgument(
                "not a valid qubit density matrix".into(),
            ));
        }
        // Eigenvalues of a 2x2 Hermitian matrix: tr/2 ± sqrt((a-d)²/4 + |b|²).
        let (a, d, b) = (self.rho[(0, 0)].re, self.rho[(1, 1)].re, self.rho[(0, 1)]);
        let lam = 0.5 * (a + d) - ((a - d).powi(2) / 4.0 + b.norm_sqr()).sqrt();
        if lam < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {lam:.3e}"
            )));
        }
        Ok(())
    }
}

/// Parity of an OAM charge: `0` for even (E), `1` for odd (O).
pub fn parity(q: i64) -> usize {
    q.rem_euclid(2) as usize
}

/// Pair label of a charge: `2m -> m`, `1-2m -> m`.
pub fn pair_label(q: i64) -> i64 {
    if parity(q) == 0 {
        q / 2
    } else {
        (1 - q) / 2
    }
}

/// Exact factorization `OAM = parity ⊗ pair index` on a closed window,
/// `|2m⟩ -> |E⟩|m⟩`, `|1-2m⟩ -> |O⟩|m⟩`.
#[derive(Clone, Debug)]
pub struct PairingIsometry {
    space: PhotonSpace,
    pairs: Vec<i64>,
    /// For each basis index: `(parity, pair position, rest)` where `rest`
    /// enumerates polarization and path.
    coords: Vec<(usize, usize, usize)>,
}

impl PairingIsometry {
    pub fn new(space: PhotonSpace) -> Self {
        let pairs = space.window.pair_labels();
        let coords = space
            .modes()
            .map(|(_, m)| {
                let pos = pairs
                    .binary_search(&pair_label(m.q))
                    .expect("window is closed under q -> 1-q");
                (parity(m.q), pos, m.pol.index() * space.n_paths + m.path)
            })
            .collect();
        PairingIsometry {
            space,
            pairs,
            coords,
        }
    }

    pub fn pairs(&self) -> &[i64] {
        &self.pairs
    }

    fn rest_dim(&self) -> usize {
        2 * self.space.n_paths
    }

    /// Image of a state in the factorized order `(parity, pair, pol, path)`.
    pub fn apply(&self, state: &SinglePhotonState) -> Result<DVector<C64>> {
        self.space.check_same(&state.space)?;
        let (np, nr) = (self.pairs.len(), self.rest_dim());
        let mut out = DVector::zeros(2 * np * nr);
        for (i, &(p, j, r)) in self.coords.iter().enumerate() {
            out[(p * np + j) * nr + r] = state.amps[i];
        }
        Ok(out)
    }

    pub fn decompose(&self, rho: &DensityMatrix) -> Result<ParityDecomposition> {
        self.space.check_same(&rho.space)?;
        let mut qubit = Matrix2::zeros();
        let np = self.pairs.len();
        let mut pair_marginal = DMatrix::zeros(np, np);
        for (i, &(p, j, r)) in self.coords.iter().enumerate() {
            for (k, &(p2, j2, r2)) in self.coords.iter().enumerate() {
                if r != r2 {
                    continue;
                }
                let x = rho.matrix[(i, k)];
                if j == j2 {
                    qubit[(p, p2)] += x;
                }
                if p == p2 {
                    pair_marginal[(j, j2)] += x;
                }
            }
        }
        Ok(ParityDecomposition {
            qubit: Qubit { rho: qubit },
            pairs: self.pairs.clone(),
            pair_marginal,
        })
    }
}

/// Parity qubit and pair-index marginal of a single-photon state.
#[derive(Clone, Debug)]
pub struct ParityDecomposition {
    pub qubit: ParityQubit,
    pub pairs: Vec<i64>,
    pub pair_marginal: DMatrix<C64>,
}

pub fn pairing_isometry(rho: &DensityMatrix) -> ParityDecomposition {
    PairingIsometry::new(rho.space)
        .decompose(rho)
        .expect("isometry built on the matrix's own space")
}

pub fn fidelity(rho: &DensityMatrix, target: &SinglePhotonState) -> Result<f64> {
    rho.fidelity(target)
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus of a complex matrix or vector.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
