//! Down-converted two-photon resource state.
//!
//! Type-I phase matching leaves both photons `H`-polarized and conserves OAM,
//! so the pair state is `Σ c_m |m,H⟩_A |l-m,H⟩_B` with `c_m = c_{l-m}`. Only
//! that symmetry matters to the protocol; the shape families here are
//! convenient ways to generate symmetric coefficients.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::elements::{Element, ElementOp};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, OamWindow, Photon, PhotonSpace, Pol, SinglePhotonState, TwoPhotonState, C64, TOL,
};

/// Coefficient shape family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    Uniform,
    /// `exp(-(m - l/2)² / (2 w²))`, centered so the symmetry is automatic.
    Gaussian {
        width: f64,
    },
    /// `(m, c_m)` pairs; symmetrized unless built strictly.
    Explicit {
        coeffs: Vec<(i64, C64)>,
    },
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Uniform => "uniform",
            ProfileKind::Gaussian { .. } => "gaussian",
            ProfileKind::Explicit { .. } => "explicit",
        }
    }
}

/// Symmetric, normalized coefficient family `c_m` on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    window: OamWindow,
    pump_charge: i64,
    kind: ProfileKind,
    /// Indexed by window position.
    coeffs: Vec<C64>,
}

impl Profile {
    pub fn window(&self) -> OamWindow {
        self.window
    }

    pub fn pump_charge(&self) -> i64 {
        self.pump_charge
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// `c_m`, zero outside the window.
    pub fn coeff(&self, m: i64) -> C64 {
        self.window
            .index_of(m)
            .map_or(c64(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `(m, c_m)` for every window mode.
    pub fn coeffs(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.window.modes().zip(self.coeffs.iter().copied())
    }

    /// `Σ |c_{2m}|²`.
    pub fn even_weight(&self) -> f64 {
        self.coeffs()
            .filter(|(m, _)| m.rem_euclid(2) == 0)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn require_parity_pump(&self) -> Result<()> {
        if self.pump_charge != 1 {
            return Err(Error::UnsupportedPump(self.pump_charge));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let params = match self.kind {
            ProfileKind::Gaussian { width } => serde_json::json!({ "width": width }),
            _ => serde_json::json!({}),
        };
        let wire = serde_json::json!({
            "l": self.pump_charge,
            "K": self.window.half_width(),
            "kind": self.kind.name(),
            "params": params,
            "coeffs": self
                .coeffs()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(m, c)| serde_json::json!([m, c.re, c.im]))
                .collect::<Vec<_>>(),
        });
        serde_json::to_string(&wire).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Rebuilds a profile from its JSON form. Coefficients are taken as
    /// given (strictly symmetric), the recorded kind is kept for reporting.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            l: i64,
            #[serde(rename = "K")]
            k: i64,
            kind: String,
            #[serde(default)]
            params: serde_json::Value,
            coeffs: Vec<(i64, f64, f64)>,
        }
        let wire: Wire =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let explicit = ProfileKind::Explicit {
            coeffs: wire
                .coeffs
                .iter()
                .map(|&(m, re, im)| (m, c64(re, im)))
                .collect(),
        };
        let mut profile = make_profile_strict(&explicit, wire.l, wire.k)?;
        profile.kind = match wire.kind.as_str() {
            "uniform" => ProfileKind::Uniform,
            "gaussian" => ProfileKind::Gaussian {
                width: wire.params["width"]
                    .as_f64()
                    .ok_or_else(|| Error::Serialization("gaussian profile without width".into()))?,
            },
            "explicit" => explicit,
            other => {
                return Err(Error::Serialization(format!(
                    "unknown profile kind {other}"
                )))
            }
        };
        Ok(profile)
    }
}

fn build(kind: &ProfileKind, l: i64, half_width: i64, strict: bool) -> Result<Profile> {
    let window = OamWindow::new(half_width)?;
    let in_support = |m: i64| window.contains(m) && window.contains(l - m);
    let mut raw = vec![c64(0.0, 0.0); window.len()];
    match kind {
        ProfileKind::Uniform => {
            for (i, m) in window.modes().enumerate() {
                if in_support(m) {
                    raw[i] = c64(1.0, 0.0);
                }
            }
        }
        ProfileKind::Gaussian { width } => {
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "gaussian width must be positive, got {width}"
                )));
            }
            let center = l as f64 / 2.0;
            for (i, m) in window.modes().enumerate() {
                if in_support(m) {
                    let x = (m as f64 - center) / width;
                    raw[i] = c64((-0.5 * x * x).exp(), 0.0);
                }
            }
        }
        ProfileKind::Explicit { coeffs } => {
            for &(m, c) in coeffs {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient c({m}) is not finite"
                    )));
                }
                if in_support(m) {
                    raw[window.index_of(m).unwrap()] += c;
                }
            }
        }
    }

    let mut sym = vec![c64(0.0, 0.0); window.len()];
    for (i, m) in window.modes().enumerate() {
        if !in_support(m) {
            continue;
        }
        let j = window.index_of(l - m).unwrap();
        if strict && (raw[i] - raw[j]).norm() > TOL {
            return Err(Error::AsymmetricProfile { m, partner: l - m });
        }
        sym[i] = (raw[i] + raw[j]) / 2.0;
    }
    let norm = sym.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm <= TOL {
        return Err(Error::DegenerateProfile);
    }
    for c in &mut sym {
        *c /= norm;
    }
    Ok(Profile {
        window,
        pump_charge: l,
        kind: kind.clone(),
        coeffs: sym,
    })
}

/// Clip to the window, symmetrize `c_m <- (c_m + c_{l-m})/2`, normalize.
pub fn make_profile(kind: &ProfileKind, l: i64, half_width: i64) -> Result<Profile> {
    build(kind, l, half_width, false)
}

/// As [`make_profile`] but rejects explicit input that is not already symmetric.
pub fn make_profile_strict(kind: &ProfileKind, l: i64, half_width: i64) -> Result<Profile> {
    build(kind, l, half_width, true)
}

/// Profile with independent complex Gaussian coefficients, symmetrized.
pub fn random_profile<R: Rng + ?Sized>(l: i64, half_width: i64, rng: &mut R) -> Result<Profile> {
    let window = OamWindow::new(half_width)?;
    let coeffs = window
        .modes()
        .map(|m| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (m, c64(re, im))
        })
        .collect();
    make_profile(&ProfileKind::Explicit { coeffs }, l, half_width)
}

/// `|χ₀⟩ = Σ c_m |m,H⟩_A |l-m,H⟩_B`.
pub fn make_chi0(profile: &Profile) -> TwoPhotonState {
    let space = PhotonSpace::single(profile.window);
    let mut amps = DMatrix::zeros(space.dim(), space.dim());
    for (m, c) in profile.coeffs() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let a = space.index(m, Pol::H, 0).unwrap();
        let b = space
            .index(profile.pump_charge - m, Pol::H, 0)
            .expect("support clipped to window pairs");
        amps[(a, b)] = c;
    }
    TwoPhotonState::new(space, space, amps).expect("shape fixed by construction")
}

/// `|E⟩ = √2 Σ c_{2m}|2m⟩`, `|O⟩ = √2 Σ c_{2m}|1-2m⟩`, both `H`-polarized.
pub fn parity_states(profile: &Profile) -> Result<(SinglePhotonState, SinglePhotonState)> {
    profile.require_parity_pump()?;
    let space = PhotonSpace::single(profile.window);
    let mut e = SinglePhotonState::zero(space);
    let mut o = SinglePhotonState::zero(space);
    for q in profile.window.even_modes() {
        let c = profile.coeff(q) * SQRT_2;
        e = e.add(&SinglePhotonState::basis(space, q, Pol::H, 0)?.scale(c))?;
        o = o.add(&SinglePhotonState::basis(space, 1 - q, Pol::H, 0)?.scale(c))?;
    }
    Ok((e, o))
}

fn check_qubit(alpha: C64, beta: C64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > TOL {
        return Err(Error::InvalidArgument(format!(
            "|alpha|² + |beta|² = {n}, expected 1"
        )));
    }
    Ok(())
}

/// Unitary completion of `H -> α|H⟩ + β|V⟩`.
pub fn preparation_matrix(alpha: C64, beta: C64) -> Matrix2<C64> {
    Matrix2::new(alpha, -beta.conj(), beta, alpha.conj())
}

/// Rotates photon A's polarization `H -> α|H⟩ + β|V⟩` on every OAM mode.
pub fn prepare_polarization(
    chi0: &TwoPhotonState,
    alpha: C64,
    beta: C64,
) -> Result<TwoPhotonState> {
    check_qubit(alpha, beta)?;
    let space = chi0.space_a();
    let u = preparation_matrix(alpha, beta);
    let mut full = DMatrix::zeros(space.dim(), space.dim());
    for (i, m) in space.modes() {
        for pol in Pol::BOTH {
            let j = space.index(m.q, pol, m.path).unwrap();
            full[(j, i)] = u[(pol.index(), m.pol.index())];
        }
    }
    TwoPhotonState::new(space, chi0.space_b(), full * chi0.amps())
}

/// Wave-plate angles `(hwp, qwp)` such that `QWP(qwp)·HWP(hwp)|H⟩` equals
/// `α|H⟩ + β|V⟩` up to a global phase.
pub fn waveplate_angles(alpha: C64, beta: C64) -> Result<(f64, f64)> {
    check_qubit(alpha, beta)?;
    let s1 = alpha.norm_sqr() - beta.norm_sqr();
    let cross = alpha.conj() * beta;
    let (s2, s3) = (2.0 * cross.re, 2.0 * cross.im);
    let azimuth = 0.5 * s2.atan2(s1);
    let ellipticity = 0.5 * s3.clamp(-1.0, 1.0).asin();
    Ok((0.5 * (azimuth + ellipticity), azimuth))
}

/// Wave-plate route to the same preparation, exact up to a global phase.
pub fn prepare_polarization_waveplates(
    chi0: &TwoPhotonState,
    alpha: C64,
    beta: C64,
) -> Result<TwoPhotonState> {
    let (h, q) = waveplate_angles(alpha, beta)?;
    let op = ElementOp::sequence(
        vec![
            Element::Hwp {
                theta: h,
                arm: None,
            },
            Element::Qwp {
                theta: q,
                arm: None,
            },
        ],
        chi0.space_a(),
    )?;
    op.apply_to_photon(Photon::A, chi0)
}
