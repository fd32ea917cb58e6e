//! Spin-orbit Bell basis and the projective measurement on Alice's photon.
//!
//! `|φ±^q⟩ = (|q,H⟩ ± |1-q,V⟩)/√2`, `|ψ±^q⟩ = (|1-q,H⟩ ± |q,V⟩)/√2`. The
//! detectors do not resolve the pair label, so each outcome is the sum of the
//! rank-one projectors over all even `q` in the window.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c64, reduce_rows, DensityMatrix, OamWindow, PhotonSpace, Pol, SinglePhotonState,
    TwoPhotonState, C64, TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellOutcome {
    /// Fixed order used for distributions and inverse-CDF sampling.
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_phi(self) -> bool {
        matches!(self, BellOutcome::PhiPlus | BellOutcome::PhiMinus)
    }

    pub fn is_minus(self) -> bool {
        matches!(self, BellOutcome::PhiMinus | BellOutcome::PsiMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bell state for charge `q` on a single-path photon.
pub fn bell_state(window: OamWindow, q: i64, which: BellOutcome) -> Result<SinglePhotonState> {
    if !window.contains(q) || !window.contains(1 - q) {
        return Err(Error::InvalidArgument(format!(
            "q={q} and 1-q must both lie in the window"
        )));
    }
    let space = PhotonSpace::single(window);
    let sign = if which.is_minus() { -1.0 } else { 1.0 };
    let (h_mode, v_mode) = if which.is_phi() {
        (q, 1 - q)
    } else {
        (1 - q, q)
    };
    let h = SinglePhotonState::basis(space, h_mode, Pol::H, 0)?;
    let v = SinglePhotonState::basis(space, v_mode, Pol::V, 0)?;
    h.scale(c64(FRAC_1_SQRT_2, 0.0))
        .add(&v.scale(c64(sign * FRAC_1_SQRT_2, 0.0)))
}

/// The four measurement projectors on Alice's `(q, pol)` space.
#[derive(Clone, Debug, PartialEq)]
pub struct BellProjectors {
    window: OamWindow,
    projectors: [DMatrix<C64>; 4],
}

impl BellProjectors {
    pub fn window(&self) -> OamWindow {
        self.window
    }

    pub fn get(&self, outcome: BellOutcome) -> &DMatrix<C64> {
        &self.projectors[outcome.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellOutcome, &DMatrix<C64>)> {
        BellOutcome::ALL.into_iter().zip(self.projectors.iter())
    }
}

pub fn bell_projectors(window: OamWindow) -> BellProjectors {
    let dim = PhotonSpace::single(window).dim();
    let projectors = BellOutcome::ALL.map(|outcome| {
        window
            .even_modes()
            .map(|q| {
                let v = bell_state(window, q, outcome).expect("window is closed");
                v.amps() * v.amps().adjoint()
            })
            .fold(DMatrix::zeros(dim, dim), |acc, p| acc + p)
    });
    BellProjectors { window, projectors }
}

fn require_single_path(chi: &TwoPhotonState) -> Result<()> {
    if chi.space_a().n_paths() != 1 {
        return Err(Error::ShapeMismatch(
            "the Bell measurement acts on a single-path photon A".into(),
        ));
    }
    Ok(())
}

/// One term `|bell^q⟩_A ⊗ |bob⟩` of the Bell-basis expansion.
#[derive(Clone, Debug)]
pub struct BellBranch {
    pub outcome: BellOutcome,
    /// Even charge labelling the Bell state (`2m`).
    pub q: i64,
    /// Unnormalized factor `(⟨bell^q| ⊗ I)|χ⟩`.
    pub bob: SinglePhotonState,
}

#[derive(Clone, Debug)]
pub struct BellExpansion {
    pub branches: Vec<BellBranch>,
    space_b: PhotonSpace,
}

impl BellExpansion {
    pub fn branch(&self, outcome: BellOutcome, q: i64) -> Option<&BellBranch> {
        self.branches
            .iter()
            .find(|b| b.outcome == outcome && b.q == q)
    }

    /// `Σ |bell⟩ ⊗ |bob⟩`.
    pub fn reconstruct(&self, window: OamWindow) -> Result<TwoPhotonState> {
        let space_a = PhotonSpace::single(window);
        let mut amps = DMatrix::zeros(space_a.dim(), self.space_b.dim());
        for b in &self.branches {
            let bell = bell_state(window, b.q, b.outcome)?;
            amps += bell.amps() * b.bob.amps().transpose();
        }
        TwoPhotonState::new(space_a, self.space_b, amps)
    }
}

pub fn expand_in_bell(chi: &TwoPhotonState) -> Result<BellExpansion> {
    require_single_path(chi)?;
    let window = chi.window();
    let mut branches = Vec::with_capacity(2 * window.len());
    for outcome in BellOutcome::ALL {
        for q in window.even_modes() {
            let bell = bell_state(window, q, outcome)?;
            let bob = chi.amps().transpose() * bell.amps().conjugate();
            branches.push(BellBranch {
                outcome,
                q,
                bob: SinglePhotonState::new(chi.space_b(), bob)?,
            });
        }
    }
    Ok(BellExpansion {
        branches,
        space_b: chi.space_b(),
    })
}

/// Probabilities indexed in [`BellOutcome::ALL`] order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution(pub [f64; 4]);

impl OutcomeDistribution {
    pub fn get(&self, outcome: BellOutcome) -> f64 {
        self.0[outcome.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellOutcome, f64)> + '_ {
        BellOutcome::ALL.into_iter().zip(self.0.iter().copied())
    }

    /// Inverse CDF over the fixed outcome order, `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> BellOutcome {
        let mut acc = 0.0;
        for (outcome, p) in self.iter() {
            acc += p;
            if u < acc {
                return outcome;
            }
        }
        // u landed in the rounding slack above the last cumulative value.
        BellOutcome::ALL
            .into_iter()
            .rev()
            .find(|o| self.get(*o) > 0.0)
            .unwrap_or(BellOutcome::PsiMinus)
    }

    pub fn max_deviation_from(&self, value: f64) -> f64 {
        self.0.iter().map(|p| (p - value).abs()).fold(0.0, f64::max)
    }
}

impl BellProjectors {
    /// `⟨χ|(P ⊗ I)|χ⟩` for each outcome.
    pub fn probabilities(&self, chi: &TwoPhotonState) -> Result<OutcomeDistribution> {
        self.check(chi)?;
        Ok(OutcomeDistribution(
            BellOutcome::ALL.map(|o| (self.get(o) * chi.amps()).norm_squared()),
        ))
    }

    /// Bob's state after `outcome`: project A, renormalize, trace A out.
    pub fn collapse(&self, chi: &TwoPhotonState, outcome: BellOutcome) -> Result<DensityMatrix> {
        self.check(chi)?;
        let projected = self.get(outcome) * chi.amps();
        let p = projected.norm_squared();
        if p <= TOL {
            return Err(Error::ImpossibleOutcome {
                outcome: outcome.name().into(),
                probability: p,
            });
        }
        Ok(DensityMatrix::from_raw(
            chi.space_b(),
            reduce_rows(&projected) / c64(p, 0.0),
        ))
    }

    fn check(&self, chi: &TwoPhotonState) -> Result<()> {
        require_single_path(chi)?;
        if chi.window() != self.window {
            return Err(Error::ShapeMismatch(
                "state and projectors use different windows".into(),
            ));
        }
        Ok(())
    }
}

pub fn outcome_probabilities(chi: &TwoPhotonState) -> Result<OutcomeDistribution> {
    bell_projectors(chi.window()).probabilities(chi)
}

pub fn collapse(chi: &TwoPhotonState, outcome: BellOutcome) -> Result<DensityMatrix> {
    bell_projectors(chi.window()).collapse(chi, outcome)
}
