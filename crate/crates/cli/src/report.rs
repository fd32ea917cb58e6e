use std::collections::BTreeMap;
use std::path::Path;

use parity_teleport::bell::BellOutcome;
use parity_teleport::protocol::{Correction, ExhaustiveReport, MeasurementMode, TrialRecord};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Stat {
    /// Min and max over branches, mean over inputs of the probability-weighted average.
    fn over(
        reports: &[ExhaustiveReport],
        pick: impl Fn(&parity_teleport::protocol::OutcomeReport) -> Option<f64>,
    ) -> Option<Stat> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut mean = 0.0;
        for r in reports {
            let mut weighted = 0.0;
            for o in &r.outcomes {
                if let Some(f) = pick(o) {
                    min = min.min(f);
                    max = max.max(f);
                    weighted += o.probability * f;
                } else if o.probability > 0.0 && o.parity_fidelity_post.is_some() {
                    // The value exists for some branches but not this one.
                    return None;
                }
            }
            mean += weighted;
        }
        (min <= max).then(|| Stat {
            min,
            mean: mean / reports.len() as f64,
            max,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub parity_pre: Stat,
    pub parity_post: Stat,
    /// Present only for `l = 1`, where `|E⟩` and `|O⟩` exist.
    pub full_oam_pre: Option<Stat>,
    pub full_oam_post: Option<Stat>,
    pub max_probability_deviation: f64,
}

impl FidelityStats {
    pub fn from_reports(reports: &[ExhaustiveReport]) -> Self {
        let nan = Stat {
            min: f64::NAN,
            mean: f64::NAN,
            max: f64::NAN,
        };
        FidelityStats {
            parity_pre: Stat::over(reports, |o| o.parity_fidelity_pre).unwrap_or(nan),
            parity_post: Stat::over(reports, |o| o.parity_fidelity_post).unwrap_or(nan),
            full_oam_pre: Stat::over(reports, |o| o.full_oam_fidelity_pre),
            full_oam_post: Stat::over(reports, |o| o.full_oam_fidelity_post),
            max_probability_deviation: reports
                .iter()
                .map(|r| r.distribution().max_deviation_from(0.25))
                .fold(0.0, f64::max),
        }
    }
}

/// Running counts of a batch of trials.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tally {
    counts: [u64; 4],
    fidelity_sum: f64,
    fidelity_min: Option<f64>,
}

impl Tally {
    pub(crate) fn add(&mut self, t: &TrialRecord) {
        self.counts[t.outcome.index()] += 1;
        self.fidelity_sum += t.parity_fidelity_post;
        self.fidelity_min = Some(
            self.fidelity_min
                .map_or(t.parity_fidelity_post, |m| m.min(t.parity_fidelity_post)),
        );
    }

    pub(crate) fn merge(&mut self, other: &Tally) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.fidelity_sum += other.fidelity_sum;
        self.fidelity_min = match (self.fidelity_min, other.fidelity_min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials_per_input: u64,
    pub total_trials: u64,
    pub seed: u64,
    pub counts: BTreeMap<BellOutcome, u64>,
    pub frequencies: BTreeMap<BellOutcome, f64>,
    /// Exact probabilities averaged over the inputs.
    pub expected: BTreeMap<BellOutcome, f64>,
    pub max_deviation: f64,
    /// `4 √(p(1-p)/N)` at `p = 1/4`.
    pub four_sigma: f64,
    pub within_four_sigma: bool,
    pub mean_parity_fidelity: f64,
    pub min_parity_fidelity: f64,
}

impl MonteCarloSummary {
    pub(crate) fn new(
        per_input: u64,
        seed: u64,
        tally: &Tally,
        reports: &[ExhaustiveReport],
    ) -> Self {
        let total = per_input * reports.len() as u64;
        let n = total as f64;
        let expected: BTreeMap<_, _> = BellOutcome::ALL
            .iter()
            .map(|&o| {
                let p = reports.iter().map(|r| r.get(o).probability).sum::<f64>()
                    / reports.len() as f64;
                (o, p)
            })
            .collect();
        let frequencies: BTreeMap<_, _> = BellOutcome::ALL
            .iter()
            .map(|&o| (o, tally.counts[o.index()] as f64 / n))
            .collect();
        let max_deviation = BellOutcome::ALL
            .iter()
            .map(|o| (frequencies[o] - expected[o]).abs())
            .fold(0.0, f64::max);
        let four_sigma = 4.0 * (0.25f64 * 0.75 / n).sqrt();
        MonteCarloSummary {
            trials_per_input: per_input,
            total_trials: total,
            seed,
            counts: BellOutcome::ALL
                .iter()
                .map(|&o| (o, tally.counts[o.index()]))
                .collect(),
            frequencies,
            expected,
            max_deviation,
            four_sigma,
            within_four_sigma: max_deviation <= four_sigma,
            mean_parity_fidelity: tally.fidelity_sum / n,
            min_parity_fidelity: tally.fidelity_min.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub version: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
    /// Canonical text of the bench the run was loaded from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench_program: Option<String>,
    /// Set when the pump charge is not 1 and no teleportation is expected.
    pub negative_control: bool,
    pub mode: MeasurementMode,
    pub detector_map: Option<BTreeMap<String, BellOutcome>>,
    pub correction_table: BTreeMap<BellOutcome, Correction>,
    /// One exhaustive report per input state.
    pub exact: Vec<ExhaustiveReport>,
    pub fidelity: FidelityStats,
    pub monte_carlo: Option<MonteCarloSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

impl SimReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub min_parity_fidelity: f64,
    pub mean_parity_fidelity: f64,
    pub mean_full_oam_fidelity: Option<f64>,
    pub max_probability_deviation: f64,
}

impl SweepRow {
    pub fn new(value: f64, report: &SimReport) -> Self {
        let f = &report.fidelity;
        SweepRow {
            value,
            min_parity_fidelity: f.parity_post.min,
            mean_parity_fidelity: f.parity_post.mean,
            mean_full_oam_fidelity: f.full_oam_post.map(|s| s.mean),
            max_probability_deviation: f.max_probability_deviation,
        }
    }
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
