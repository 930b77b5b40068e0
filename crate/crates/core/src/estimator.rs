//! Maximum-likelihood estimation of the Zipf exponent.
//!
//! The likelihood equation is `d/dγ ln Z(γ) + mean(ln x) = 0` where `Z` is the
//! normalizing sum over the support. Its left side is the model mean of
//! `-ln k` plus the sample mean of `ln x`, increasing in γ, and is solved by
//! Newton's method from a fixed starting point with bisection as fallback.

use crate::error::{Error, Result};
use crate::logtable::{LogTable, MAX_FINITE_LIMIT};
use crate::series::{self, PowerSums};
use crate::zipf::{SupportSpec, UNBOUNDED_MIN_GAMMA};

/// Observed positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    observations: Vec<u32>,
}

impl Sample {
    pub fn new(observations: Vec<u32>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        if let Some(pos) = observations.iter().position(|&x| x == 0) {
            return Err(Error::InvalidArgument(format!(
                "observation {} is zero; values must be positive",
                pos + 1
            )));
        }
        Ok(Sample { observations })
    }

    pub(crate) fn from_vec_unchecked(observations: Vec<u32>) -> Self {
        Sample { observations }
    }

    pub fn observations(&self) -> &[u32] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn max(&self) -> u32 {
        self.observations.iter().copied().max().unwrap_or(0)
    }

    pub fn check_support(&self, support: SupportSpec) -> Result<()> {
        match self.observations.iter().find(|&&x| !support.contains(x)) {
            Some(x) => Err(Error::Domain(format!(
                "observation {x} outside the support 1..={support}"
            ))),
            None => Ok(()),
        }
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.observations
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleSettings {
    pub initial_guess: f64,
    /// Newton stops once successive iterates differ by at most this much.
    pub absolute_tolerance: f64,
    pub max_iterations: u32,
    /// Search interval `(low, high)` for the bisection fallback. An unbounded
    /// support raises `low` to [`UNBOUNDED_MIN_GAMMA`].
    pub bracket: (f64, f64),
}

impl Default for MleSettings {
    fn default() -> Self {
        MleSettings {
            initial_guess: 0.5,
            absolute_tolerance: 1e-5,
            max_iterations: 200,
            bracket: (-20.0, 20.0),
        }
    }
}

impl MleSettings {
    pub fn validate(&self) -> Result<()> {
        let (low, high) = self.bracket;
        if !(self.absolute_tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if !(low < self.initial_guess && self.initial_guess < high) {
            return Err(Error::InvalidArgument(format!(
                "initial guess {} outside the bracket ({low}, {high})",
                self.initial_guess
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }

    fn bracket_for(&self, support: SupportSpec) -> (f64, f64) {
        match support {
            SupportSpec::Finite(_) => self.bracket,
            SupportSpec::Unbounded => (self.bracket.0.max(UNBOUNDED_MIN_GAMMA), self.bracket.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub gamma: f64,
    pub log_mean: f64,
    pub iterations: u32,
    pub method: SolveMethod,
}

/// `Σ ln x_i / N`, with the all-ones sample shifted by `ln 2` (as if one
/// observation were 2) so the estimate stays finite.
pub fn log_mean(sample: &Sample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let sum: f64 = sample.observations.iter().map(|&x| (x as f64).ln()).sum();
    Ok(adjust_log_sum(sum) / sample.len() as f64)
}

/// [`log_mean`] through a log table; values beyond the table fall back to
/// `ln`. Bitwise identical to [`log_mean`].
pub(crate) fn log_mean_with(observations: &[u32], logs: &LogTable) -> f64 {
    let limit = logs.limit();
    let sum: f64 = observations
        .iter()
        .map(|&x| {
            let x = x as usize;
            if x <= limit {
                logs.ln(x)
            } else {
                (x as f64).ln()
            }
        })
        .sum();
    adjust_log_sum(sum) / observations.len() as f64
}

#[inline]
fn adjust_log_sum(sum: f64) -> f64 {
    if sum <= 0.0 {
        sum + std::f64::consts::LN_2
    } else {
        sum
    }
}

/// Maximum-likelihood exponent of `sample` on `support`.
pub fn mle_gamma(sample: &Sample, support: SupportSpec, settings: &MleSettings) -> Result<f64> {
    sample.check_support(support)?;
    let lm = log_mean(sample)?;
    let logs = log_table_for(support)?;
    Ok(solve(lm, support, settings, logs.as_ref())?.gamma)
}

pub(crate) fn log_table_for(support: SupportSpec) -> Result<Option<LogTable>> {
    match support {
        SupportSpec::Finite(k) => Ok(Some(LogTable::new(k as usize)?)),
        SupportSpec::Unbounded => Ok(None),
    }
}

fn sums_at(gamma: f64, support: SupportSpec, logs: Option<&LogTable>) -> PowerSums {
    match (support, logs) {
        (SupportSpec::Finite(k), Some(t)) => series::finite_power_sums(gamma, &t.as_slice()[..k as usize]),
        (SupportSpec::Finite(k), None) => {
            let t: Vec<f64> = (1..=k).map(|j| (j as f64).ln()).collect();
            series::finite_power_sums(gamma, &t)
        }
        (SupportSpec::Unbounded, _) => series::zeta_power_sums(gamma),
    }
}

/// The likelihood-equation residual at `gamma`.
pub fn score(gamma: f64, log_mean: f64, support: SupportSpec) -> f64 {
    sums_at(gamma, support, None).log_derivative() + log_mean
}

/// Log-likelihood per observation, `-γ·mean(ln x) - ln Z(γ)`.
pub fn mean_log_likelihood(gamma: f64, log_mean: f64, support: SupportSpec) -> f64 {
    -gamma * log_mean - sums_at(gamma, support, None).norm.ln()
}

/// Solves the likelihood equation for a given mean log observation.
///
/// `logs`, when given, must cover a finite support.
pub fn solve(
    log_mean: f64,
    support: SupportSpec,
    settings: &MleSettings,
    logs: Option<&LogTable>,
) -> Result<MleFit> {
    settings.validate()?;
    if let (SupportSpec::Finite(k), Some(t)) = (support, logs) {
        debug_assert!(t.limit() >= k as usize && k as usize <= MAX_FINITE_LIMIT);
    }
    let (low, high) = settings.bracket_for(support);
    let mut x = settings.initial_guess.max(low);
    for iteration in 1..=settings.max_iterations {
        let sums = sums_at(x, support, logs);
        let f = sums.log_derivative() + log_mean;
        let slope = sums.log_second_derivative();
        let next = x - f / slope;
        if !next.is_finite() || next < low || next > high {
            break;
        }
        if (x - next).abs() <= settings.absolute_tolerance {
            return Ok(MleFit {
                gamma: next,
                log_mean,
                iterations: iteration,
                method: SolveMethod::Newton,
            });
        }
        x = next;
    }
    solve_bisection(log_mean, support, settings, logs)
}

/// Bisection on the settings' bracket; also the fallback for [`solve`].
pub fn solve_bisection(
    log_mean: f64,
    support: SupportSpec,
    settings: &MleSettings,
    logs: Option<&LogTable>,
) -> Result<MleFit> {
    let (low, high) = settings.bracket_for(support);
    let f = |g: f64| sums_at(g, support, logs).log_derivative() + log_mean;
    let no_root = || Error::NoRoot {
        low,
        high,
        log_mean,
    };
    let (f_low, f_high) = (f(low), f(high));
    if !(f_low <= 0.0 && f_high >= 0.0) {
        return Err(no_root());
    }
    let (mut lo, mut hi) = (low, high);
    let mut iterations = 0;
    while hi - lo > 1e-12 && iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MleFit {
        gamma: 0.5 * (lo + hi),
        log_mean,
        iterations,
        method: SolveMethod::Bisection,
    })
}
