use std::path::Path;

use parity_teleport::dsl::{lower, parse, pretty_print};
use parity_teleport::elements::BsConvention;
use parity_teleport::hilbert::{c64, C64};
use parity_teleport::protocol::MeasurementMode;
use parity_teleport::spdc::ProfileKind;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, CliError, Result};
use crate::Plan;

/// The input qubit: a fixed state or `n` Haar-random ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    State { alpha: [f64; 2], beta: [f64; 2] },
    Haar { haar: usize },
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::State {
            alpha: [1.0, 0.0],
            beta: [0.0, 0.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Window half-width `K`.
    HalfWidth,
    /// Width of a Gaussian profile.
    Width,
    /// Pump charge.
    L,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileKind,
    #[serde(default = "default_l")]
    pub l: i64,
    #[serde(alias = "K")]
    pub half_width: i64,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_mode")]
    pub mode: MeasurementMode,
    #[serde(default = "default_convention")]
    pub convention: BsConvention,
    /// Keep every trial record in the report, not only the summary.
    #[serde(default)]
    pub records: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_l() -> i64 {
    1
}

fn default_mode() -> MeasurementMode {
    MeasurementMode::Projector
}

fn default_convention() -> BsConvention {
    BsConvention::Symmetric
}

/// Command-line overrides applied on top of a config or bench file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<MeasurementMode>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.half_width < 1 {
            return bad(format!(
                "half_width must be at least 1, got {}",
                self.half_width
            ));
        }
        if self.trials > 0 && self.seed.is_none() {
            return bad("a seed is required when trials > 0".into());
        }
        match &self.input {
            InputSpec::State { alpha, beta } => {
                let n = alpha[0].powi(2) + alpha[1].powi(2) + beta[0].powi(2) + beta[1].powi(2);
                if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
                    return bad(format!("|alpha|² + |beta|² = {n}, expected 1"));
                }
            }
            InputSpec::Haar { haar } if *haar == 0 => {
                return bad("haar input count must be positive".into())
            }
            InputSpec::Haar { .. } => {}
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep values are empty".into());
            }
            for &v in &s.values {
                match s.parameter {
                    SweepParameter::HalfWidth | SweepParameter::L if v.fract() != 0.0 => {
                        return bad(format!("sweep value {v} must be an integer"));
                    }
                    SweepParameter::HalfWidth if v < 1.0 => {
                        return bad(format!("half_width {v} < 1"))
                    }
                    SweepParameter::Width if !(v > 0.0 && v.is_finite()) => {
                        return bad(format!("gaussian width {v} must be positive"));
                    }
                    SweepParameter::Width
                        if !matches!(self.profile, ProfileKind::Gaussian { .. }) =>
                    {
                        return bad("a width sweep needs a gaussian profile".into());
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// The config with one sweep value substituted.
    pub fn at(&self, parameter: SweepParameter, value: f64) -> RunConfig {
        let mut c = self.clone();
        c.sweep = None;
        match parameter {
            SweepParameter::HalfWidth => c.half_width = value as i64,
            SweepParameter::L => c.l = value as i64,
            SweepParameter::Width => c.profile = ProfileKind::Gaussian { width: value },
        }
        c
    }

    pub(crate) fn inputs_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub(crate) fn fixed_input(&self) -> Option<(C64, C64)> {
        match self.input {
            InputSpec::State { alpha, beta } => {
                Some((c64(alpha[0], alpha[1]), c64(beta[0], beta[1])))
            }
            InputSpec::Haar { .. } => None,
        }
    }
}

/// Reads a `.bench` file into a plan, applying command-line overrides.
pub fn load_bench(path: &Path, overrides: Overrides) -> Result<Plan> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let program = parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let lowered = lower(&program).map_err(config_error)?;
    let run = program.run_directive();
    let source = program.source();
    let mut config = RunConfig {
        profile: source.profile.clone(),
        l: source.l,
        half_width: source.half_width,
        input: InputSpec::State {
            alpha: [lowered.alpha.re, lowered.alpha.im],
            beta: [lowered.beta.re, lowered.beta.im],
        },
        trials: run.map_or(0, |r| r.trials),
        seed: run.map(|r| r.seed),
        mode: run.map_or(MeasurementMode::Apparatus, |r| r.mode),
        convention: BsConvention::Symmetric,
        records: false,
        sweep: None,
    };
    config.apply(overrides);
    config.validate()?;
    let layout = (config.mode == MeasurementMode::Apparatus).then(|| lowered.photon_a.clone());
    Plan::new(config, layout, Some(pretty_print(&program)))
}
