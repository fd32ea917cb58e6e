//! Batch runner for the parity teleportation simulator: JSON reports and CSV sweeps.

pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

use parity_teleport::apparatus::BenchLayout;
use parity_teleport::hilbert::C64;
use parity_teleport::protocol::{
    derive_correction_table, haar_qubit, ExhaustiveReport, Session, TrialRecord, FIDELITY_TOL,
};
use parity_teleport::spdc::{make_profile, ProfileKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{load_bench, InputSpec, Overrides, RunConfig, SweepParameter, SweepSpec};
pub use error::{CliError, Result};
pub use report::{FidelityStats, MonteCarloSummary, SimReport, Stat, SweepRow};

use crate::error::config_error;

/// Trials per work unit; fixed so sums do not depend on the thread count.
const CHUNK: u64 = 4096;

/// A validated run: the session plus the concrete input states.
pub struct Plan {
    config: RunConfig,
    session: Session,
    inputs: Vec<(C64, C64)>,
    bench_program: Option<String>,
}

impl Plan {
    pub fn new(
        config: RunConfig,
        layout: Option<BenchLayout>,
        bench_program: Option<String>,
    ) -> Result<Self> {
        config.validate()?;
        let profile =
            make_profile(&config.profile, config.l, config.half_width).map_err(config_error)?;
        let session = match (config.l, layout) {
            (1, Some(layout)) => Session::with_layout(&profile, layout).map_err(config_error)?,
            (1, None) => Session::new(&profile, config.mode, config.convention)?,
            (l, Some(_)) => {
                return Err(CliError::Config(format!(
                    "bench runs need l = 1, got l = {l}"
                )))
            }
            (_, None) => {
                let reference = make_profile(&ProfileKind::Uniform, 1, config.half_width)
                    .map_err(config_error)?;
                let table = derive_correction_table(reference.window(), &reference)?;
                Session::with_table(&profile, config.mode, config.convention, table, false)?
            }
        };
        let inputs = match config.fixed_input() {
            Some(input) => vec![input],
            None => {
                let InputSpec::Haar { haar } = config.input else {
                    unreachable!("fixed_input covers the state form")
                };
                let mut rng = ChaCha8Rng::seed_from_u64(config.inputs_seed());
                // Trials use streams 0, 1, ...; inputs take the last one.
                rng.set_stream(u64::MAX);
                (0..haar).map(|_| haar_qubit(&mut rng)).collect()
            }
        };
        Ok(Plan {
            config,
            session,
            inputs,
            bench_program,
        })
    }

    pub fn from_config(config: RunConfig) -> Result<Self> {
        Plan::new(config, None, None)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn negative_control(&self) -> bool {
        self.config.l != 1
    }

    fn exhaustive(&self) -> Result<Vec<ExhaustiveReport>> {
        let reports = self
            .inputs
            .par_iter()
            .map(|&(a, b)| self.session.exhaustive(a, b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(reports)
    }

    /// Runs every trial; records are kept only when asked for.
    fn monte_carlo(
        &self,
        reports: &[ExhaustiveReport],
    ) -> (MonteCarloSummary, Option<Vec<TrialRecord>>) {
        let per_input = self.config.trials;
        let total = per_input * reports.len() as u64;
        let seed = self
            .config
            .seed
            .expect("validated: seed present when trials > 0");
        let keep = self.config.records;
        let chunks: Vec<(report::Tally, Vec<TrialRecord>)> = (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut tally = report::Tally::default();
                let mut kept = Vec::new();
                for id in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let t = self
                        .session
                        .trial(&reports[(id / per_input) as usize], seed, id);
                    tally.add(&t);
                    if keep {
                        kept.push(t);
                    }
                }
                (tally, kept)
            })
            .collect();
        let mut tally = report::Tally::default();
        let mut records = keep.then(Vec::new);
        for (t, kept) in chunks {
            tally.merge(&t);
            if let Some(r) = records.as_mut() {
                r.extend(kept);
            }
        }
        (
            MonteCarloSummary::new(per_input, seed, &tally, reports),
            records,
        )
    }

    pub fn execute(&self) -> Result<SimReport> {
        log::info!(
            "running {} input(s), K={}, l={}, mode={:?}",
            self.inputs.len(),
            self.config.half_width,
            self.config.l,
            self.session.mode()
        );
        let exact = self.exhaustive()?;
        let fidelity = FidelityStats::from_reports(&exact);
        if !self.negative_control() && fidelity.parity_post.min < 1.0 - FIDELITY_TOL {
            return Err(CliError::Integrity(format!(
                "post-correction parity fidelity {} in an l = 1 run",
                fidelity.parity_post.min
            )));
        }
        let (monte_carlo, records) = if self.config.trials > 0 {
            let (s, r) = self.monte_carlo(&exact);
            (Some(s), r)
        } else {
            (None, None)
        };
        Ok(SimReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.config.seed,
            config: self.config.clone(),
            bench_program: self.bench_program.clone(),
            negative_control: self.negative_control(),
            mode: self.session.mode(),
            detector_map: self.session.detector_map().map(|m| m.to_map()),
            correction_table: self.session.table().iter().collect(),
            exact,
            fidelity,
            monte_carlo,
            records,
        })
    }
}

/// Where a run reads its description from.
#[derive(Clone, Copy, Debug)]
pub enum RunSource<'a> {
    Config(&'a Path),
    Bench(&'a Path),
}

/// Loads, runs and writes the report; nothing is written on failure.
pub fn run(source: RunSource<'_>, overrides: Overrides, out: &Path) -> Result<SimReport> {
    let plan = match source {
        RunSource::Config(path) => {
            let mut config = RunConfig::load(path)?;
            config.apply(overrides);
            Plan::from_config(config)?
        }
        RunSource::Bench(path) => load_bench(path, overrides)?,
    };
    let report = plan.execute()?;
    report.write(out)?;
    Ok(report)
}

/// One exhaustive run per sweep value (trials are not used).
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no sweep section".into()))?;
    spec.values
        .par_iter()
        .map(|&value| {
            let mut point = config.at(spec.parameter, value);
            point.trials = 0;
            let report = Plan::from_config(point)?.execute()?;
            Ok(SweepRow::new(value, &report))
        })
        .collect()
}

pub fn sweep(config_path: &Path, out: &Path) -> Result<Vec<SweepRow>> {
    let config = RunConfig::load(config_path)?;
    let rows = sweep_rows(&config)?;
    report::write_csv(out, &rows)?;
    Ok(rows)
}
