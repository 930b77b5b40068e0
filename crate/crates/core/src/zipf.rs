//! Pure and truncated Zipf distributions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logtable::{LogTable, MAX_FINITE_LIMIT};
use crate::series;

/// Smallest exponent accepted for an unbounded support. Below this the
/// series converge too slowly to be useful and heavy tails dominate sampling.
pub const UNBOUNDED_MIN_GAMMA: f64 = 1.05;

/// Partial sums up to this index are accumulated term by term; beyond it an
/// unbounded CDF is evaluated as `1 - tail / norm`.
const DIRECT_CDF_LIMIT: u64 = 256;

/// Which integers carry probability mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupportSpec {
    /// `1..=K`, `2 <= K <= 32766`.
    Finite(u32),
    /// All positive integers.
    Unbounded,
}

impl SupportSpec {
    pub fn finite(k: u32) -> Result<Self> {
        if !(2..=MAX_FINITE_LIMIT as u32).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "support size K={k} outside 2..={MAX_FINITE_LIMIT}"
            )));
        }
        Ok(SupportSpec::Finite(k))
    }

    /// Upper end of the support, if any.
    pub fn max(&self) -> Option<u32> {
        match *self {
            SupportSpec::Finite(k) => Some(k),
            SupportSpec::Unbounded => None,
        }
    }

    pub fn contains(&self, k: u32) -> bool {
        k >= 1 && self.max().is_none_or(|max| k <= max)
    }

    /// Checks that `gamma` gives a proper distribution on this support.
    pub fn check_gamma(&self, gamma: f64) -> Result<()> {
        match self {
            SupportSpec::Finite(_) if !(gamma > 0.0 && gamma.is_finite()) => Err(Error::Domain(
                format!("exponent {gamma} must be positive for a finite support"),
            )),
            SupportSpec::Unbounded if !(gamma >= UNBOUNDED_MIN_GAMMA && gamma.is_finite()) => {
                Err(Error::Domain(format!(
                    "exponent {gamma} must be at least {UNBOUNDED_MIN_GAMMA} for an unbounded support"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SupportSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportSpec::Finite(k) => write!(f, "{k}"),
            SupportSpec::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for SupportSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(SupportSpec::Unbounded);
        }
        let k = s
            .parse::<u32>()
            .map_err(|_| Error::InvalidArgument(format!("support '{s}' is neither an integer nor 'inf'")))?;
        SupportSpec::finite(k)
    }
}

/// `Σ k^-γ` over the support, each term evaluated as `exp(-γ ln k)`.
pub fn normalization(gamma: f64, support: SupportSpec) -> Result<f64> {
    match support {
        SupportSpec::Finite(k) => {
            support.check_gamma(gamma)?;
            Ok(finite_norm_direct(gamma, k))
        }
        SupportSpec::Unbounded => {
            if !(gamma > 1.0 && gamma.is_finite()) {
                return Err(Error::Domain(format!(
                    "zeta({gamma}) diverges; the exponent must exceed 1"
                )));
            }
            Ok(series::zeta(gamma))
        }
    }
}

fn finite_norm_direct(gamma: f64, k: u32) -> f64 {
    (1..=k).map(|j| (-gamma * (j as f64).ln()).exp()).sum()
}

/// A Zipf distribution with `p(k) = k^-γ / norm`.
///
/// Probabilities are computed as `exp(-γ ln k) * (1 / norm)`, so every
/// consumer (PMF, CDF, sampler, KS statistic) accumulates bitwise identical
/// partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfModel {
    gamma: f64,
    support: SupportSpec,
    norm: f64,
    inv_norm: f64,
    // unbounded only: CDF at DIRECT_CDF_LIMIT, the floor for tail evaluation
    direct_cdf_floor: f64,
}

impl ZipfModel {
    pub fn new(gamma: f64, support: SupportSpec) -> Result<Self> {
        support.check_gamma(gamma)?;
        let norm = normalization(gamma, support)?;
        Ok(Self::from_norm(gamma, support, norm))
    }

    /// Like [`new`](Self::new) but reuses precomputed logarithms, which must
    /// cover a finite support.
    pub fn with_log_table(gamma: f64, support: SupportSpec, logs: &LogTable) -> Result<Self> {
        support.check_gamma(gamma)?;
        let norm = match support {
            SupportSpec::Finite(k) => series::finite_norm(gamma, &logs.as_slice()[..k as usize]),
            SupportSpec::Unbounded => series::zeta(gamma),
        };
        Ok(Self::from_norm(gamma, support, norm))
    }

    /// A model at a fitted exponent. On a finite support any real exponent
    /// yields a proper distribution (γ <= 0 puts more mass on large values),
    /// and maximum likelihood can land there for small samples.
    pub fn fitted(gamma: f64, support: SupportSpec, logs: Option<&LogTable>) -> Result<Self> {
        match support {
            SupportSpec::Finite(k) if gamma.is_finite() => {
                let norm = match logs {
                    Some(t) => series::finite_norm(gamma, &t.as_slice()[..k as usize]),
                    None => finite_norm_direct(gamma, k),
                };
                Ok(Self::from_norm(gamma, support, norm))
            }
            SupportSpec::Finite(_) => Err(Error::Domain(format!("exponent {gamma} is not finite"))),
            SupportSpec::Unbounded => Self::new(gamma, support),
        }
    }

    fn from_norm(gamma: f64, support: SupportSpec, norm: f64) -> Self {
        let inv_norm = 1.0 / norm;
        let mut model = ZipfModel {
            gamma,
            support,
            norm,
            inv_norm,
            direct_cdf_floor: 0.0,
        };
        if support == SupportSpec::Unbounded {
            model.direct_cdf_floor = (1..=DIRECT_CDF_LIMIT).map(|k| model.term(k)).sum();
        }
        model
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support(&self) -> SupportSpec {
        self.support
    }

    /// The normalizing constant `Σ k^-γ`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    #[inline]
    pub(crate) fn inv_norm(&self) -> f64 {
        self.inv_norm
    }

    /// Unnormalized-then-scaled mass at `k` without a support check.
    #[inline]
    pub(crate) fn term(&self, k: u64) -> f64 {
        (-self.gamma * (k as f64).ln()).exp() * self.inv_norm
    }

    fn check(&self, k: u64) -> Result<()> {
        let ok = k >= 1 && self.support.max().is_none_or(|max| k <= max as u64);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "value {k} outside the support 1..={}",
                self.support
            )))
        }
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        self.check(k)?;
        Ok(self.term(k))
    }

    pub fn cdf(&self, k: u64) -> Result<f64> {
        self.check(k)?;
        let mut walker = CdfWalker::new(self);
        Ok(walker.at(k))
    }

    /// CDF of an unbounded model at `k`, from the series remainder.
    pub(crate) fn unbounded_cdf_from_tail(&self, k: u64) -> f64 {
        let tail = series::zeta_tail(self.gamma, k + 1) * self.inv_norm;
        (1.0 - tail).max(self.direct_cdf_floor)
    }
}

/// Evaluates the CDF at a nondecreasing sequence of points, reusing the
/// running partial sum between calls.
pub(crate) struct CdfWalker<'a> {
    model: &'a ZipfModel,
    k: u64,
    partial: f64,
}

impl<'a> CdfWalker<'a> {
    pub(crate) fn new(model: &'a ZipfModel) -> Self {
        CdfWalker {
            model,
            k: 0,
            partial: 0.0,
        }
    }

    /// CDF at `k`; `k` must not decrease between calls.
    pub(crate) fn at(&mut self, k: u64) -> f64 {
        debug_assert!(k >= self.k);
        let direct_to = match self.model.support {
            SupportSpec::Finite(_) => k,
            SupportSpec::Unbounded => k.min(DIRECT_CDF_LIMIT),
        };
        while self.k < direct_to {
            self.k += 1;
            self.partial += self.model.term(self.k);
        }
        if k <= direct_to {
            self.partial
        } else {
            self.model.unbounded_cdf_from_tail(k)
        }
    }
}
