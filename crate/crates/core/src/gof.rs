//! Discrete Kolmogorov–Smirnov statistic against a fitted Zipf model.

use crate::error::Result;
use crate::estimator::Sample;
use crate::logtable::LogTable;
use crate::zipf::{CdfWalker, SupportSpec, ZipfModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `max_k |F(k) - S(k)|` over `k = 1..=max observation`.
    pub statistic: f64,
    /// First `k` attaining the maximum.
    pub argmax_k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    /// Quantile level of the cutoff, e.g. 0.95.
    pub level: f64,
    pub cutoff: f64,
    pub rejected: bool,
}

/// Rejects only when the statistic strictly exceeds the cutoff.
pub fn judge(statistic: f64, cutoff: f64, level: f64) -> Verdict {
    Verdict {
        level,
        cutoff,
        rejected: statistic > cutoff,
    }
}

/// KS distance between the sample's empirical CDF and `model`, evaluated at
/// the integers `1..=max(sample)`. Past the largest observation the empirical
/// CDF is 1 and `1 - F` only shrinks, so those points never matter.
pub fn ks_statistic(sample: &Sample, model: &ZipfModel) -> Result<KsResult> {
    sample.check_support(model.support())?;
    let mut scratch = KsScratch::default();
    Ok(ks_with(sample.observations(), model, None, &mut scratch))
}

/// Reusable buffers for [`ks_with`].
#[derive(Debug, Default, Clone)]
pub(crate) struct KsScratch {
    counts: Vec<u32>,
    sorted: Vec<u32>,
}

/// `observations` must lie in the model's support; `logs`, if given, must
/// cover the largest observation.
pub(crate) fn ks_with(
    observations: &[u32],
    model: &ZipfModel,
    logs: Option<&LogTable>,
    scratch: &mut KsScratch,
) -> KsResult {
    match model.support() {
        SupportSpec::Finite(_) => ks_counting(observations, model, logs, scratch),
        SupportSpec::Unbounded => ks_sorted(observations, model, scratch),
    }
}

/// One counting pass, then cumulative sums over `1..=max`.
fn ks_counting(
    observations: &[u32],
    model: &ZipfModel,
    logs: Option<&LogTable>,
    scratch: &mut KsScratch,
) -> KsResult {
    let max = observations.iter().copied().max().unwrap_or(0) as usize;
    let counts = &mut scratch.counts;
    counts.clear();
    counts.resize(max + 1, 0);
    for &x in observations {
        counts[x as usize] += 1;
    }

    let n = observations.len() as f64;
    let (gamma, inv_norm) = (model.gamma(), model.inv_norm());
    let mut cum = 0u64;
    let mut theoretical = 0.0;
    let mut best = KsResult {
        statistic: 0.0,
        argmax_k: 1,
    };
    for k in 1..=max {
        let ln_k = match logs {
            Some(t) => t.ln(k),
            None => (k as f64).ln(),
        };
        theoretical += (-gamma * ln_k).exp() * inv_norm;
        cum += counts[k] as u64;
        let d = (theoretical - cum as f64 / n).abs();
        if d > best.statistic {
            best = KsResult {
                statistic: d,
                argmax_k: k as u32,
            };
        }
    }
    best
}

/// For supports too wide to tabulate: between consecutive distinct
/// observations the empirical CDF is flat and the model CDF increasing, so
/// only the two ends of each gap can attain the maximum.
fn ks_sorted(observations: &[u32], model: &ZipfModel, scratch: &mut KsScratch) -> KsResult {
    let sorted = &mut scratch.sorted;
    sorted.clear();
    sorted.extend_from_slice(observations);
    sorted.sort_unstable();

    let n = observations.len() as f64;
    let mut walker = CdfWalker::new(model);
    let mut best = KsResult {
        statistic: 0.0,
        argmax_k: 1,
    };
    let mut consider = |k: u64, empirical: f64, best: &mut KsResult| {
        let d = (walker.at(k) - empirical).abs();
        if d > best.statistic {
            *best = KsResult {
                statistic: d,
                argmax_k: k as u32,
            };
        }
    };

    let mut prev_end = 0u64; // last k already evaluated
    let mut cum = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i] as u64;
        let run = sorted[i..].iter().take_while(|&&x| x as u64 == v).count();
        let below = cum as f64 / n;
        // gap (prev_end, v): left end then right end
        if v > prev_end + 1 {
            consider(prev_end + 1, below, &mut best);
            if v - 1 > prev_end + 1 {
                consider(v - 1, below, &mut best);
            }
        }
        cum += run;
        consider(v, cum as f64 / n, &mut best);
        prev_end = v;
        i += run;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[u32]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn exact_small_cases() {
        let m = ZipfModel::new(1.0, SupportSpec::Finite(2)).unwrap();
        let r = ks_statistic(&sample(&[1, 1, 2]), &m).unwrap();
        assert!(r.statistic < 1e-15);

        let r = ks_statistic(&sample(&[2, 2, 2]), &m).unwrap();
        assert!((r.statistic - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.argmax_k, 1);
    }

    #[test]
    fn outside_support_is_rejected() {
        let m = ZipfModel::new(1.0, SupportSpec::Finite(2)).unwrap();
        assert!(ks_statistic(&sample(&[1, 3]), &m).is_err());
    }

    #[test]
    fn verdicts() {
        assert!(!judge(0.050, 0.0576, 0.9).rejected);
        assert!(!judge(0.0576, 0.0576, 0.9).rejected);
        assert!(judge(0.10, 0.0576, 0.9).rejected);
    }

    #[test]
    fn unbounded_gap_endpoints_match_full_scan() {
        let m = ZipfModel::new(1.5, SupportSpec::Unbounded).unwrap();
        let obs = [1u32, 1, 3, 9, 9, 40, 41, 300, 1000];
        let fast = ks_statistic(&sample(&obs), &m).unwrap();
        let mut best = 0.0f64;
        for k in 1..=1000u64 {
            let s = obs.iter().filter(|&&x| x as u64 <= k).count() as f64 / obs.len() as f64;
            best = best.max((m.cdf(k).unwrap() - s).abs());
        }
        assert!((fast.statistic - best).abs() < 1e-14);
    }
}
