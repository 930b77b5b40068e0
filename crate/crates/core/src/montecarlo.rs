//! Monte Carlo calibration of KS cutoffs under re-estimation.
//!
//! One replicate draws a sample from the generating model, re-estimates the
//! exponent from that sample and measures the KS distance to the *re-fitted*
//! model. Cutoffs are order statistics of the replicate distances, averaged
//! over independent repetitions.
//!
//! Every replicate owns a random stream addressed by
//! `(base_seed, repetition, replicate index)`, so results do not depend on how
//! work is spread over threads.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::estimator::{self, MleSettings};
use crate::gof::{self, KsScratch};
use crate::logtable::{LogTable, MAX_FINITE_LIMIT};
use crate::sampling::{ChaChaStream, Sampler};
use crate::table::{CutoffTable, TableRow};
use crate::zipf::{SupportSpec, ZipfModel};

pub const DEFAULT_LEVELS: [f64; 4] = [0.9, 0.95, 0.99, 0.999];
pub const DEFAULT_REPLICATES: usize = 50_000;
pub const DEFAULT_REPETITIONS: u32 = 10;
pub const MIN_REPLICATES: usize = 100;

/// Stream offset for the single retry of a replicate whose fit failed.
pub const RETRY_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Sample size N.
    pub n: usize,
    pub support: SupportSpec,
    /// Exponent of the generating model.
    pub gamma: f64,
    pub replicates: usize,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Strictly increasing quantile levels in (0, 1).
    pub levels: Vec<f64>,
    pub mle: MleSettings,
    /// Unbounded support only: draw replicates from the model truncated at
    /// this value while still fitting and testing against the unbounded one.
    pub generation_cap: Option<u32>,
}

impl SimulationConfig {
    pub fn new(n: usize, support: SupportSpec, gamma: f64, base_seed: u64) -> Self {
        SimulationConfig {
            n,
            support,
            gamma,
            replicates: DEFAULT_REPLICATES,
            repetitions: DEFAULT_REPETITIONS,
            base_seed,
            levels: DEFAULT_LEVELS.to_vec(),
            mle: MleSettings::default(),
            generation_cap: None,
        }
    }

    pub fn with_replicates(mut self, replicates: usize, repetitions: u32) -> Self {
        self.replicates = replicates;
        self.repetitions = repetitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample size must be positive".into()));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_REPLICATES} replicates required, got {}",
                self.replicates
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be positive".into()));
        }
        if self.replicates as u64 >= RETRY_STREAM_OFFSET {
            return Err(Error::InvalidArgument("too many replicates".into()));
        }
        self.support.check_gamma(self.gamma)?;
        self.mle.validate()?;
        match (self.generation_cap, self.support) {
            (None, _) => {}
            (Some(_), SupportSpec::Finite(_)) => {
                return Err(Error::InvalidArgument(
                    "a generation cap applies only to the unbounded support".into(),
                ))
            }
            (Some(cap), SupportSpec::Unbounded) if cap < 2 => {
                return Err(Error::InvalidArgument(format!("generation cap {cap} below 2")))
            }
            _ => {}
        }
        validate_levels(&self.levels, self.replicates)
    }
}

fn validate_levels(levels: &[f64], replicates: usize) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no quantile levels".into()));
    }
    for pair in levels.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::InvalidArgument(format!(
                "quantile levels must increase strictly: {levels:?}"
            )));
        }
    }
    for &q in levels {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level {q} outside (0, 1)")));
        }
        quantile_index(replicates, q)?;
    }
    Ok(())
}

/// Zero-based order-statistic index `floor(R q)` used for level `q`.
pub fn quantile_index(replicates: usize, q: f64) -> Result<usize> {
    // the product is computed in floating point; nudge it so that levels
    // like 0.29 * 100 = 28.999999999999996 land on the intended integer
    let x = replicates as f64 * q;
    let idx = (x + x * 1e-12).floor();
    if !(idx >= 0.0) || idx as usize >= replicates {
        return Err(Error::InvalidArgument(format!(
            "level {q} selects index {idx} of {replicates} values"
        )));
    }
    Ok(idx as usize)
}

/// Order statistics at `levels`: element `floor(R q)` of the ascending sort.
pub fn quantiles(stats: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if stats.is_empty() {
        return Err(Error::InvalidArgument("no statistics to summarize".into()));
    }
    let mut sorted = stats.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    levels
        .iter()
        .map(|&q| quantile_index(sorted.len(), q).map(|i| sorted[i]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub ks: f64,
    pub gamma_hat: f64,
    pub replicate_index: u64,
    /// The first fit failed and the replicate was redrawn.
    pub retried: bool,
}

/// Worker pool configuration.
#[derive(Debug)]
pub struct Engine {
    pool: Option<ThreadPool>,
}

impl Engine {
    /// `None` uses all available parallelism.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let pool = match workers {
            None => None,
            Some(0) => return Err(Error::InvalidArgument("worker count must be positive".into())),
            Some(w) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
            ),
        };
        Ok(Engine { pool })
    }

    pub fn workers(&self) -> usize {
        match &self.pool {
            Some(p) => p.current_num_threads(),
            None => rayon::current_num_threads(),
        }
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine { pool: None }
    }
}

#[derive(Debug, Default)]
struct Scratch {
    sample: Vec<u32>,
    ks: KsScratch,
}

/// Shared read-only state for one configuration.
#[derive(Debug)]
pub struct Simulator {
    config: SimulationConfig,
    sampler: Sampler,
    logs: LogTable,
}

impl Simulator {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let model = ZipfModel::new(config.gamma, config.support)?;
        let logs = match config.support {
            SupportSpec::Finite(k) => LogTable::new(k as usize)?,
            SupportSpec::Unbounded => LogTable::new(MAX_FINITE_LIMIT)?,
        };
        let sampler = match config.generation_cap {
            Some(cap) => Sampler::truncated(&model, cap)?,
            None => Sampler::new(&model),
        };
        Ok(Simulator {
            sampler,
            config,
            logs,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Sample, re-fit, and measure one replicate. A fit without a root is
    /// retried once on the stream `index + 2^32`.
    pub fn run_replicate(&self, repetition: u32, index: u64) -> Result<ReplicateOutcome> {
        self.replicate_with(repetition, index, &mut Scratch::default())
    }

    fn replicate_with(&self, repetition: u32, index: u64, scratch: &mut Scratch) -> Result<ReplicateOutcome> {
        match self.attempt(repetition, index, scratch) {
            Ok((ks, gamma_hat)) => Ok(ReplicateOutcome {
                ks,
                gamma_hat,
                replicate_index: index,
                retried: false,
            }),
            Err(Error::NoRoot { .. }) => {
                let (ks, gamma_hat) = self
                    .attempt(repetition, index + RETRY_STREAM_OFFSET, scratch)
                    .map_err(|e| Error::Replicate {
                        repetition,
                        index,
                        source: Box::new(e),
                    })?;
                Ok(ReplicateOutcome {
                    ks,
                    gamma_hat,
                    replicate_index: index,
                    retried: true,
                })
            }
            Err(e) => Err(e),
        }
    }

    fn attempt(&self, repetition: u32, stream_id: u64, scratch: &mut Scratch) -> Result<(f64, f64)> {
        let cfg = &self.config;
        let mut stream = ChaChaStream::new(cfg.base_seed, repetition, stream_id);
        let mut sample = std::mem::take(&mut scratch.sample);
        self.sampler.fill(cfg.n, &mut stream, &mut sample);
        let result = self.refit_ks(&sample, &mut scratch.ks);
        scratch.sample = sample;
        result
    }

    /// Re-fits the exponent to `observations` and returns the KS distance to
    /// the fitted model together with the fitted exponent.
    pub fn measure(&self, observations: &[u32]) -> Result<(f64, f64)> {
        let sample = crate::estimator::Sample::new(observations.to_vec())?;
        sample.check_support(self.config.support)?;
        self.refit_ks(observations, &mut KsScratch::default())
    }

    fn refit_ks(&self, observations: &[u32], ks_scratch: &mut KsScratch) -> Result<(f64, f64)> {
        let cfg = &self.config;
        let log_mean = estimator::log_mean_with(observations, &self.logs);
        let table = match cfg.support {
            SupportSpec::Finite(_) => Some(&self.logs),
            SupportSpec::Unbounded => None,
        };
        let fit = estimator::solve(log_mean, cfg.support, &cfg.mle, table)?;
        let fitted = ZipfModel::fitted(fit.gamma, cfg.support, table)?;
        let ks = gof::ks_with(observations, &fitted, table, ks_scratch);
        Ok((ks.statistic, fit.gamma))
    }

    /// All replicates of one repetition, in index order.
    pub fn run_repetition(&self, repetition: u32, engine: &Engine) -> Result<Vec<ReplicateOutcome>> {
        let r = self.config.replicates as u64;
        engine.install(|| {
            (0..r)
                .into_par_iter()
                .map_init(Scratch::default, |scratch, i| self.replicate_with(repetition, i, scratch))
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub levels: Vec<f64>,
    /// Per-level mean over repetitions.
    pub cutoffs: Vec<f64>,
    /// `per_repetition[r][j]`: quantile at `levels[j]` from repetition `r`.
    pub per_repetition: Vec<Vec<f64>>,
    /// Replicates whose first fit failed.
    pub retried: usize,
}

pub fn run_simulation(config: &SimulationConfig, engine: &Engine) -> Result<SimulationResult> {
    let sim = Simulator::new(config.clone())?;
    let mut per_repetition = Vec::with_capacity(config.repetitions as usize);
    let mut retried = 0;
    for rep in 0..config.repetitions {
        let outcomes = sim.run_repetition(rep, engine)?;
        retried += outcomes.iter().filter(|o| o.retried).count();
        let stats: Vec<f64> = outcomes.iter().map(|o| o.ks).collect();
        per_repetition.push(quantiles(&stats, &config.levels)?);
    }
    let reps = per_repetition.len() as f64;
    let cutoffs = (0..config.levels.len())
        .map(|j| per_repetition.iter().map(|q| q[j]).sum::<f64>() / reps)
        .collect();
    Ok(SimulationResult {
        levels: config.levels.clone(),
        cutoffs,
        per_repetition,
        retried,
    })
}

/// Progress record passed to the [`build_table`] observer after each cell.
#[derive(Debug, Clone)]
pub struct CellReport {
    pub gamma: f64,
    pub n: usize,
    pub result: SimulationResult,
    pub elapsed: Duration,
}

/// Fills a cutoff table over `gammas × ns` (gamma-major), every cell using
/// `template`'s replicate counts, levels, seed and estimator settings.
pub fn build_table(
    ns: &[usize],
    gammas: &[f64],
    template: &SimulationConfig,
    engine: &Engine,
    mut observer: impl FnMut(&CellReport),
) -> Result<CutoffTable> {
    if ns.is_empty() || gammas.is_empty() {
        return Err(Error::InvalidArgument("empty simulation grid".into()));
    }
    let mut rows = Vec::with_capacity(ns.len() * gammas.len());
    for &gamma in gammas {
        for &n in ns {
            let config = SimulationConfig {
                n,
                gamma,
                ..template.clone()
            };
            let start = Instant::now();
            let result = run_simulation(&config, engine).map_err(|e| Error::Cell {
                gamma,
                n,
                source: Box::new(e),
            })?;
            let report = CellReport {
                gamma,
                n,
                result,
                elapsed: start.elapsed(),
            };
            observer(&report);
            rows.push(TableRow {
                gamma,
                n,
                cutoffs: report.result.cutoffs,
            });
        }
    }
    Ok(CutoffTable {
        support: template.support,
        levels: template.levels.clone(),
        rows,
        replicates: template.replicates,
        repetitions: template.repetitions,
        base_seed: Some(template.base_seed),
        generation_cap: template.generation_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_indexing() {
        let stats: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(quantiles(&stats, &[0.9]).unwrap(), vec![1.0]);
        assert_eq!(quantile_index(50_000, 0.9).unwrap(), 45_000);
        assert_eq!(quantile_index(50_000, 0.95).unwrap(), 47_500);
        assert_eq!(quantile_index(50_000, 0.99).unwrap(), 49_500);
        assert_eq!(quantile_index(50_000, 0.999).unwrap(), 49_950);
        assert_eq!(quantile_index(100, 0.29).unwrap(), 29);
        assert!(quantile_index(100, 0.999).is_ok());
        assert!(quantile_index(10, 0.9999).is_ok());
        assert!(quantiles(&[], &[0.5]).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SimulationConfig::new(10, SupportSpec::Finite(20), 1.0, 1);
        assert!(ok.validate().is_ok());
        let mut c = ok.clone().with_replicates(99, 1);
        assert!(c.validate().is_err());
        c = ok.clone();
        c.levels = vec![0.95, 0.9];
        assert!(c.validate().is_err());
        c.levels = vec![0.9, 1.0];
        assert!(c.validate().is_err());
        c = ok.clone();
        c.support = SupportSpec::Unbounded;
        assert!(c.validate().is_err());
    }

    #[test]
    fn forced_two_point_sample_fits_exactly() {
        let config = SimulationConfig::new(3, SupportSpec::Finite(2), 1.0, 5).with_replicates(100, 1);
        let sim = Simulator::new(config).unwrap();
        let (ks, gamma_hat) = sim.measure(&[1, 1, 2]).unwrap();
        assert!((gamma_hat - 1.0).abs() < 1e-5);
        assert!(ks < 1e-12);
        // all ones: shifted by ln 2 to the same fit, leaving S(1) - F(1) = 1/3
        let (ks, _) = sim.measure(&[1, 1, 1]).unwrap();
        assert!((ks - 1.0 / 3.0).abs() < 1e-6);
        assert!(matches!(sim.measure(&[2, 2, 2]), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn replicates_are_reproducible() {
        let config = SimulationConfig::new(100, SupportSpec::Finite(20), 2.0, 11).with_replicates(100, 1);
        let sim = Simulator::new(config.clone()).unwrap();
        let a = sim.run_replicate(0, 7).unwrap();
        let b = Simulator::new(config).unwrap().run_replicate(0, 7).unwrap();
        assert_eq!(a.ks.to_bits(), b.ks.to_bits());
        assert_eq!(a.gamma_hat.to_bits(), b.gamma_hat.to_bits());
    }
}
