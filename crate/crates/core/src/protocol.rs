//! End-to-end teleportation: prepare, measure, send two bits, correct, score.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    build_fig1_bench, derive_detector_map, detector_distribution, BenchLayout, DetectorMap,
};
use crate::bell::{bell_projectors, collapse, BellOutcome, BellProjectors, OutcomeDistribution};
use crate::elements::{dp_sph_elements, BsConvention, Element, ElementOp};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, pairing_isometry, DensityMatrix, OamDensity, OamWindow, PhotonSpace, Pol, Qubit,
    SinglePhotonState, C64, TOL,
};
use crate::spdc::{
    make_chi0, make_profile, parity_states, prepare_polarization, Profile, ProfileKind,
};

/// Tolerance on the post-correction parity fidelity of a valid run.
pub const FIDELITY_TOL: f64 = 1e-10;

/// The two classical bits: bit 1 is the Φ/Ψ class (0 = Φ), bit 0 the sign (0 = +).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ClassicalMessage(u8);

impl ClassicalMessage {
    pub fn encode(outcome: BellOutcome) -> Self {
        ClassicalMessage(((!outcome.is_phi() as u8) << 1) | outcome.is_minus() as u8)
    }

    pub fn from_bits(bits: u8) -> Result<Self> {
        if bits > 3 {
            return Err(Error::InvalidArgument(format!(
                "{bits} is not a 2-bit message"
            )));
        }
        Ok(ClassicalMessage(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn decode(self) -> BellOutcome {
        match self.0 {
            0b00 => BellOutcome::PhiPlus,
            0b01 => BellOutcome::PhiMinus,
            0b10 => BellOutcome::PsiPlus,
            _ => BellOutcome::PsiMinus,
        }
    }
}

impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

impl From<ClassicalMessage> for String {
    fn from(m: ClassicalMessage) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ClassicalMessage {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        let bits = u8::from_str_radix(&s, 2)
            .ok()
            .filter(|_| s.len() == 2)
            .ok_or_else(|| Error::Serialization(format!("bad classical message {s:?}")))?;
        ClassicalMessage::from_bits(bits)
    }
}

/// Bob's candidate corrections on the parity qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    Identity,
    DpSph,
    ParityPhasePi,
    DpSphParityPhasePi,
}

impl Correction {
    pub const CANDIDATES: [Correction; 4] = [
        Correction::Identity,
        Correction::DpSph,
        Correction::ParityPhasePi,
        Correction::DpSphParityPhasePi,
    ];

    pub fn elements(self) -> Vec<Element> {
        let pp = Element::ParityPhase { phi: PI, arm: None };
        match self {
            Correction::Identity => vec![],
            Correction::DpSph => dp_sph_elements(None),
            Correction::ParityPhasePi => vec![pp],
            Correction::DpSphParityPhasePi => {
                let mut e = dp_sph_elements(None);
                e.push(pp);
                e
            }
        }
    }

    pub fn op(self, space: PhotonSpace) -> ElementOp {
        ElementOp::sequence(self.elements(), space).expect("corrections are valid on any window")
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::Identity => "identity",
            Correction::DpSph => "dp_sph",
            Correction::ParityPhasePi => "parity_phase(pi)",
            Correction::DpSphParityPhasePi => "dp_sph;parity_phase(pi)",
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Correction per outcome, indexed in [`BellOutcome::ALL`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionTable([Correction; 4]);

impl CorrectionTable {
    pub fn get(&self, outcome: BellOutcome) -> Correction {
        self.0[outcome.index()]
    }

    /// What Bob does on receiving `message`; he never sees the outcome itself.
    pub fn for_message(&self, message: ClassicalMessage) -> Correction {
        self.get(message.decode())
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellOutcome, Correction)> + '_ {
        BellOutcome::ALL.into_iter().zip(self.0.iter().copied())
    }
}

/// Two inputs with unequal, complex weights: enough to separate all candidates.
const PROBES: [(f64, f64, f64, f64); 2] = [(0.6, 0.0, 0.0, 0.8), (0.48, 0.36, -0.6, 0.52)];

fn probe(i: usize) -> (C64, C64) {
    let (ar, ai, br, bi) = PROBES[i];
    let (a, b) = (c64(ar, ai), c64(br, bi));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

/// For each outcome, the unique candidate that restores `α|E⟩ + β|O⟩`.
pub fn derive_correction_table(window: OamWindow, profile: &Profile) -> Result<CorrectionTable> {
    profile.require_parity_pump()?;
    if profile.window() != window {
        return Err(Error::ShapeMismatch(
            "profile lives on a different window".into(),
        ));
    }
    let space = PhotonSpace::single(window);
    let chi0 = make_chi0(profile);
    let ops: Vec<ElementOp> = Correction::CANDIDATES.iter().map(|c| c.op(space)).collect();
    let mut table = [Correction::Identity; 4];
    for outcome in BellOutcome::ALL {
        let mut ok = [true; 4];
        for i in 0..PROBES.len() {
            let (a, b) = probe(i);
            let rho = collapse(&prepare_polarization(&chi0, a, b)?, outcome)?;
            for (k, op) in ops.iter().enumerate() {
                let q = pairing_isometry(&op.apply_density(&rho)?).qubit;
                ok[k] &= q.fidelity(a, b)? > 1.0 - FIDELITY_TOL;
            }
        }
        let hits: Vec<usize> = (0..4).filter(|&k| ok[k]).collect();
        match hits.as_slice() {
            [k] => table[outcome.index()] = Correction::CANDIDATES[*k],
            [] => {
                return Err(Error::ProtocolIntegrity(format!(
                    "no correction restores the state after {outcome}"
                )))
            }
            _ => {
                return Err(Error::ProtocolIntegrity(format!(
                    "corrections after {outcome} are not unique"
                )))
            }
        }
    }
    Ok(CorrectionTable(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    /// Ideal projectors on Alice's photon.
    Projector,
    /// Mode-level simulation of the four-detector bench.
    Apparatus,
}

/// Everything computed once per profile: χ₀, the table and the bench.
#[derive(Clone, Debug)]
pub struct Session {
    profile: Profile,
    chi0: crate::hilbert::TwoPhotonState,
    mode: MeasurementMode,
    table: CorrectionTable,
    projectors: BellProjectors,
    bench: Option<(BenchLayout, DetectorMap)>,
    swap: SwapCircuit,
    corrections: [ElementOp; 4],
    target_basis: Option<(SinglePhotonState, SinglePhotonState)>,
    /// Fail when the corrected parity qubit is not the input.
    strict: bool,
}

impl Session {
    /// Session for an `l = 1` profile; the table is derived from the profile.
    pub fn new(profile: &Profile, mode: MeasurementMode, convention: BsConvention) -> Result<Self> {
        let table = derive_correction_table(profile.window(), profile)?;
        Self::with_table(profile, mode, convention, table, true)
    }

    /// Session with a fixed table, for profiles the table was not derived from.
    pub fn with_table(
        profile: &Profile,
        mode: MeasurementMode,
        convention: BsConvention,
        table: CorrectionTable,
        strict: bool,
    ) -> Result<Self> {
        let bench = match mode {
            MeasurementMode::Projector => None,
            MeasurementMode::Apparatus => Some(build_fig1_bench(profile.window(), convention)),
        };
        Self::build(profile, bench, table, strict)
    }

    /// Apparatus-mode session measuring with a custom four-detector bench.
    pub fn with_layout(profile: &Profile, layout: BenchLayout) -> Result<Self> {
        let table = derive_correction_table(profile.window(), profile)?;
        Self::build(profile, Some(layout), table, true)
    }

    fn build(
        profile: &Profile,
        bench: Option<BenchLayout>,
        table: CorrectionTable,
        strict: bool,
    ) -> Result<Self> {
        let window = profile.window();
        let space = PhotonSpace::single(window);
        let (mode, bench) = match bench {
            None => (MeasurementMode::Projector, None),
            Some(layout) => {
                if layout.window() != window {
                    return Err(Error::ShapeMismatch(
                        "bench and profile windows differ".into(),
                    ));
                }
                let map = derive_detector_map(&layout)?;
                (MeasurementMode::Apparatus, Some((layout, map)))
            }
        };
        Ok(Session {
            profile: profile.clone(),
            chi0: make_chi0(profile),
            mode,
            table,
            projectors: bell_projectors(window),
            bench,
            swap: SwapCircuit::new(window),
            corrections: Correction::CANDIDATES.map(|c| c.op(space)),
            target_basis: parity_states(profile).ok(),
            strict,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn mode(&self) -> MeasurementMode {
        self.mode
    }

    pub fn table(&self) -> &CorrectionTable {
        &self.table
    }

    pub fn detector_map(&self) -> Option<&DetectorMap> {
        self.bench.as_ref().map(|(_, m)| m)
    }

    fn correction_op(&self, c: Correction) -> &ElementOp {
        let k = Correction::CANDIDATES.iter().position(|x| *x == c).unwrap();
        &self.corrections[k]
    }

    fn branches(&self, alpha: C64, beta: C64) -> Result<[(f64, Option<DensityMatrix>); 4]> {
        let chi = prepare_polarization(&self.chi0, alpha, beta)?;
        match &self.bench {
            None => {
                let dist = self.projectors.probabilities(&chi)?;
                let mut out: [(f64, Option<DensityMatrix>); 4] = Default::default();
                for (o, p) in dist.iter() {
                    let bob = (p > TOL).then(|| self.projectors.collapse(&chi, o));
                    out[o.index()] = (p, bob.transpose()?);
                }
                Ok(out)
            }
            Some((layout, map)) => {
                let dist = detector_distribution(&chi, layout)?;
                Ok(dist
                    .by_outcome(map)?
                    .map(|r| (r.probability, r.bob.clone())))
            }
        }
    }

    /// Runs every outcome branch for input `α|H⟩ + β|V⟩`.
    pub fn exhaustive(&self, alpha: C64, beta: C64) -> Result<ExhaustiveReport> {
        let target = self
            .target_basis
            .as_ref()
            .map(|(e, o)| e.scale(alpha).add(&o.scale(beta)))
            .transpose()?;
        let mut outcomes = Vec::with_capacity(4);
        for (outcome, (probability, bob)) in BellOutcome::ALL
            .into_iter()
            .zip(self.branches(alpha, beta)?)
        {
            let message = ClassicalMessage::encode(outcome);
            let correction = self.table.for_message(message);
            let report = match bob {
                None => OutcomeReport {
                    outcome,
                    message,
                    probability,
                    correction,
                    parity_fidelity_pre: None,
                    parity_fidelity_post: None,
                    parity_purity: None,
                    full_oam_fidelity_pre: None,
                    full_oam_fidelity_post: None,
                    swapped_polarization_fidelity: None,
                },
                Some(rho) => {
                    let pre = pairing_isometry(&rho).qubit;
                    let corrected = self.correction_op(correction).apply_density(&rho)?;
                    let post = pairing_isometry(&corrected).qubit;
                    let fid_post = post.fidelity(alpha, beta)?;
                    if self.strict && fid_post < 1.0 - FIDELITY_TOL {
                        return Err(Error::ProtocolIntegrity(format!(
                            "parity fidelity {fid_post} after {outcome} and {correction}"
                        )));
                    }
                    let swapped = self.swap.apply(&corrected)?;
                    OutcomeReport {
                        outcome,
                        message,
                        probability,
                        correction,
                        parity_fidelity_pre: Some(pre.fidelity(alpha, beta)?),
                        parity_fidelity_post: Some(fid_post),
                        parity_purity: Some(pre.purity()),
                        full_oam_fidelity_pre: target
                            .as_ref()
                            .map(|t| rho.fidelity(t))
                            .transpose()?,
                        full_oam_fidelity_post: target
                            .as_ref()
                            .map(|t| corrected.fidelity(t))
                            .transpose()?,
                        swapped_polarization_fidelity: Some(
                            swapped.polarization.fidelity(alpha, beta)?,
                        ),
                    }
                }
            };
            outcomes.push(report);
        }
        Ok(ExhaustiveReport {
            alpha: [alpha.re, alpha.im],
            beta: [beta.re, beta.im],
            outcomes,
        })
    }

    /// One trial drawn from a precomputed exhaustive report.
    pub fn trial(&self, report: &ExhaustiveReport, master_seed: u64, trial_id: u64) -> TrialRecord {
        let outcome = report
            .distribution()
            .sample(trial_uniform(master_seed, trial_id));
        let r = &report.outcomes[outcome.index()];
        TrialRecord {
            trial_id,
            outcome,
            message: r.message,
            correction: r.correction,
            parity_fidelity_pre: r.parity_fidelity_pre.unwrap_or(f64::NAN),
            parity_fidelity_post: r.parity_fidelity_post.unwrap_or(f64::NAN),
            full_oam_fidelity_pre: r.full_oam_fidelity_pre,
            full_oam_fidelity_post: r.full_oam_fidelity_post,
        }
    }
}

/// The uniform variate of trial `trial_id`: stream `trial_id` of the master seed.
pub fn trial_uniform(master_seed: u64, trial_id: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_id);
    rng.random::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub outcome: BellOutcome,
    pub message: ClassicalMessage,
    pub probability: f64,
    pub correction: Correction,
    pub parity_fidelity_pre: Option<f64>,
    pub parity_fidelity_post: Option<f64>,
    pub parity_purity: Option<f64>,
    /// Against `α|E⟩ + β|O⟩` in the full OAM space (`l = 1` only).
    pub full_oam_fidelity_pre: Option<f64>,
    pub full_oam_fidelity_post: Option<f64>,
    /// Polarization fidelity after swapping the corrected parity qubit.
    pub swapped_polarization_fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub outcomes: Vec<OutcomeReport>,
}

impl ExhaustiveReport {
    pub fn distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution(std::array::from_fn(|i| self.outcomes[i].probability))
    }

    pub fn get(&self, outcome: BellOutcome) -> &OutcomeReport {
        &self.outcomes[outcome.index()]
    }

    /// Probability-weighted post-correction parity fidelity.
    pub fn mean_parity_fidelity(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|r| r.parity_fidelity_post.map(|f| r.probability * f))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub outcome: BellOutcome,
    pub message: ClassicalMessage,
    pub correction: Correction,
    pub parity_fidelity_pre: f64,
    pub parity_fidelity_post: f64,
    pub full_oam_fidelity_pre: Option<f64>,
    pub full_oam_fidelity_post: Option<f64>,
}

/// Exhaustive run with the projector measurement.
pub fn teleport_exhaustive(profile: &Profile, alpha: C64, beta: C64) -> Result<ExhaustiveReport> {
    Session::new(profile, MeasurementMode::Projector, BsConvention::Symmetric)?
        .exhaustive(alpha, beta)
}

/// A single trial; for many trials build a [`Session`] once instead.
pub fn run_trial(
    profile: &Profile,
    alpha: C64,
    beta: C64,
    master_seed: u64,
    trial_id: u64,
    mode: MeasurementMode,
) -> Result<TrialRecord> {
    let session = Session::new(profile, mode, BsConvention::Symmetric)?;
    let report = session.exhaustive(alpha, beta)?;
    Ok(session.trial(&report, master_seed, trial_id))
}

/// Haar-random qubit `(α, β)`.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    loop {
        let x: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-9 {
            return (c64(x[0] / n, x[1] / n), c64(x[2] / n, x[3] / n));
        }
    }
}

/// The six Pauli eigenstates; averaging over them is exact for polynomials
/// of degree up to 3 in `(α, β)` and `(α*, β*)`.
pub fn octahedral_states() -> [(C64, C64); 6] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        (c64(1.0, 0.0), c64(0.0, 0.0)),
        (c64(0.0, 0.0), c64(1.0, 0.0)),
        (c64(s, 0.0), c64(s, 0.0)),
        (c64(s, 0.0), c64(-s, 0.0)),
        (c64(s, 0.0), c64(0.0, s)),
        (c64(s, 0.0), c64(0.0, -s)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlStats {
    pub pump_charge: i64,
    pub n_inputs: usize,
    /// Monte Carlo mean over Haar-random inputs.
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub min_fidelity: f64,
    pub max_fidelity: f64,
    /// Exact Haar mean from the octahedral design.
    pub haar_mean_exact: f64,
}

/// Runs the `l = 1` machinery unchanged on `profile` and scores the parity qubit.
pub fn pump_control<R: Rng + ?Sized>(
    profile: &Profile,
    n_inputs: usize,
    rng: &mut R,
) -> Result<ControlStats> {
    let reference = make_profile(&ProfileKind::Uniform, 1, profile.window().half_width())?;
    let table = derive_correction_table(profile.window(), &reference)?;
    let session = Session::with_table(
        profile,
        MeasurementMode::Projector,
        BsConvention::Symmetric,
        table,
        false,
    )?;
    let mut fids = Vec::with_capacity(n_inputs);
    for _ in 0..n_inputs {
        let (a, b) = haar_qubit(rng);
        fids.push(session.exhaustive(a, b)?.mean_parity_fidelity());
    }
    let exact = octahedral_states()
        .iter()
        .map(|&(a, b)| session.exhaustive(a, b).map(|r| r.mean_parity_fidelity()))
        .sum::<Result<f64>>()?
        / 6.0;
    let n = fids.len().max(1) as f64;
    let mean = fids.iter().sum::<f64>() / n;
    let var = fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(ControlStats {
        pump_charge: profile.pump_charge(),
        n_inputs,
        mean_fidelity: mean,
        std_error: (var / n).sqrt(),
        min_fidelity: fids.iter().copied().fold(f64::INFINITY, f64::min),
        max_fidelity: fids.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        haar_mean_exact: exact,
    })
}

/// The protocol with an unpumped (`l = 0`) source of the given shape.
pub fn l0_negative_control<R: Rng + ?Sized>(
    kind: &ProfileKind,
    half_width: i64,
    n_inputs: usize,
    rng: &mut R,
) -> Result<ControlStats> {
    pump_control(&make_profile(kind, 0, half_width)?, n_inputs, rng)
}

#[derive(Clone, Debug)]
pub struct SwapResult {
    pub polarization: Qubit,
    pub oam: OamDensity,
    pub state: DensityMatrix,
}

/// Elements of the parity-to-polarization swap on two paths.
pub fn swap_elements() -> Vec<Element> {
    let mut e = vec![Element::Sorter {
        input: 0,
        even: 0,
        odd: 1,
    }];
    e.extend(dp_sph_elements(Some(1)));
    e.push(Element::Hwp {
        theta: FRAC_PI_4,
        arm: Some(1),
    });
    e.push(Element::Pbs {
        input: 0,
        h: 0,
        v: 1,
    });
    e
}

/// The swap circuit on a fixed window.
#[derive(Clone, Debug)]
pub struct SwapCircuit {
    op: ElementOp,
    /// Indices of path 0 in the two-path space.
    on0: Vec<usize>,
}

impl SwapCircuit {
    pub fn new(window: OamWindow) -> Self {
        let two = PhotonSpace::new(window, 2).expect("two paths");
        let op = ElementOp::sequence(swap_elements(), two).expect("fixed wiring is valid");
        let on0 = two
            .modes()
            .filter(|(_, m)| m.path == 0)
            .map(|(i, _)| i)
            .collect();
        SwapCircuit { op, on0 }
    }

    pub fn operator(&self) -> &ElementOp {
        &self.op
    }

    /// Moves the OAM parity qubit of an `H`-polarized photon onto its polarization.
    pub fn apply(&self, bob: &DensityMatrix) -> Result<SwapResult> {
        let space = bob.space();
        if space.n_paths() != 1 || space.window() != self.op.space().window() {
            return Err(Error::ShapeMismatch(
                "swap expects a single-path photon on its own window".into(),
            ));
        }
        let v_weight: f64 = space
            .modes()
            .filter(|(_, m)| m.pol == Pol::V)
            .map(|(i, _)| bob.matrix()[(i, i)].re)
            .sum();
        if v_weight > TOL {
            return Err(Error::Precondition(format!(
                "input carries V polarization with weight {v_weight:.3e}"
            )));
        }
        let two = self.op.space();
        let mut big = nalgebra::DMatrix::zeros(two.dim(), two.dim());
        for (r, &i) in self.on0.iter().enumerate() {
            for (c, &j) in self.on0.iter().enumerate() {
                big[(i, j)] = bob.matrix()[(r, c)];
            }
        }
        let out = self.op.apply_density(&DensityMatrix::from_raw(two, big))?;
        let stray: f64 = two
            .modes()
            .filter(|(_, m)| m.path == 1)
            .map(|(i, _)| out.matrix()[(i, i)].re)
            .sum();
        if stray > TOL {
            return Err(Error::ProtocolIntegrity(format!(
                "swap left weight {stray:.3e} on the second path"
            )));
        }
        let state = DensityMatrix::from_raw(
            space,
            out.matrix()
                .select_rows(&self.on0)
                .select_columns(&self.on0),
        );
        Ok(SwapResult {
            polarization: state.polarization_marginal(),
            oam: state.oam_marginal(),
            state,
        })
    }
}

pub fn swap_parity_polarization(bob: &DensityMatrix) -> Result<SwapResult> {
    SwapCircuit::new(bob.space().window()).apply(bob)
}

pub fn swap_parity_polarization_pure(bob: &SinglePhotonState) -> Result<SwapResult> {
    swap_parity_polarization(&DensityMatrix::from_pure(bob))
}
