//! Random streams and inverse-CDF sampling.

use rand::distr::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::Sample;
use crate::series;
use crate::zipf::{SupportSpec, ZipfModel};

/// Largest value an unbounded sampler emits.
pub const UNBOUNDED_SAMPLE_CAP: u64 = 10_000_000;

/// Cumulative probabilities tabulated for unbounded sampling; draws beyond
/// the table are located with the series remainder.
const UNBOUNDED_TABLE_LEN: usize = 1 << 16;

/// A source of uniform deviates on `(0, 1]`.
pub trait RandomStream {
    fn next_uniform(&mut self) -> f64;
}

/// ChaCha8 keyed by `(base_seed, repetition)` with `replicate` as the stream
/// number, so every replicate owns an independent, addressable sequence.
#[derive(Debug, Clone)]
pub struct ChaChaStream(ChaCha8Rng);

impl ChaChaStream {
    pub fn new(base_seed: u64, repetition: u32, replicate: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&base_seed.to_le_bytes());
        key[8..12].copy_from_slice(&repetition.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(replicate);
        ChaChaStream(rng)
    }
}

impl RandomStream for ChaChaStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        self.0.sample(OpenClosed01)
    }
}

/// Inverse-CDF sampler: each draw is the smallest `k` with `CDF(k) >= u`.
///
/// The cumulative table is built once per model and then shared read-only.
#[derive(Debug, Clone)]
pub struct Sampler {
    model: ZipfModel,
    // cumulative[i] = CDF(i + 1), accumulated term by term
    cumulative: Vec<f64>,
    // draws past the table continue into the series remainder
    tail: bool,
}

impl Sampler {
    pub fn new(model: &ZipfModel) -> Self {
        let len = match model.support() {
            SupportSpec::Finite(k) => k as usize,
            SupportSpec::Unbounded => UNBOUNDED_TABLE_LEN,
        };
        let mut cumulative = Vec::with_capacity(len);
        let mut sum = 0.0;
        for k in 1..=len as u64 {
            sum += model.term(k);
            cumulative.push(sum);
        }
        Sampler {
            model: model.clone(),
            cumulative,
            tail: model.support() == SupportSpec::Unbounded,
        }
    }

    /// Draws from `model` conditioned on `k <= cap`.
    pub fn truncated(model: &ZipfModel, cap: u32) -> Result<Self> {
        if cap < 2 {
            return Err(Error::InvalidArgument(format!("generation cap {cap} below 2")));
        }
        let len = cap.min(model.support().max().unwrap_or(u32::MAX)) as usize;
        let mut cumulative = Vec::with_capacity(len);
        let mut sum = 0.0;
        for k in 1..=len as u64 {
            sum += model.term(k);
            cumulative.push(sum);
        }
        for c in &mut cumulative {
            *c /= sum;
        }
        Ok(Sampler {
            model: model.clone(),
            cumulative,
            tail: false,
        })
    }

    pub fn model(&self) -> &ZipfModel {
        &self.model
    }

    /// One draw for the uniform deviate `u`.
    #[inline]
    pub fn draw(&self, u: f64) -> u32 {
        let idx = self.cumulative.partition_point(|&c| c < u);
        if idx < self.cumulative.len() {
            return idx as u32 + 1;
        }
        if self.tail {
            self.draw_tail(u)
        } else {
            // rounding left the last partial sum just below u
            self.cumulative.len() as u32
        }
    }

    /// Exponential then binary search over `CDF(k) = 1 - tail(k + 1) / norm`.
    fn draw_tail(&self, u: f64) -> u32 {
        let cdf = |k: u64| {
            1.0 - series::zeta_tail(self.model.gamma(), k + 1) * self.model.inv_norm()
        };
        // invariant: cdf(lo) < u <= cdf(hi), or hi is the cap
        let mut lo = self.cumulative.len() as u64;
        let mut hi = lo;
        loop {
            hi = (hi * 2).min(UNBOUNDED_SAMPLE_CAP);
            if cdf(hi) >= u {
                break;
            }
            if hi == UNBOUNDED_SAMPLE_CAP {
                return UNBOUNDED_SAMPLE_CAP as u32;
            }
            lo = hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi as u32
    }

    /// Replaces the contents of `out` with `n` draws.
    pub fn fill<S: RandomStream + ?Sized>(&self, n: usize, stream: &mut S, out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..n).map(|_| self.draw(stream.next_uniform())));
    }

    pub fn sample<S: RandomStream + ?Sized>(&self, n: usize, stream: &mut S) -> Sample {
        let mut obs = Vec::with_capacity(n);
        self.fill(n, stream, &mut obs);
        Sample::from_vec_unchecked(obs)
    }
}

/// Draws `n` observations from `model`.
pub fn sample<S: RandomStream + ?Sized>(model: &ZipfModel, n: usize, stream: &mut S) -> Sample {
    assert!(n >= 1, "sample size must be positive");
    Sampler::new(model).sample(n, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Replays fixed deviates.
    struct Replay(Vec<f64>, usize);

    impl RandomStream for Replay {
        fn next_uniform(&mut self) -> f64 {
            let u = self.0[self.1 % self.0.len()];
            self.1 += 1;
            u
        }
    }

    #[test]
    fn first_cell_and_two_point_support() {
        let m = ZipfModel::new(1.0, SupportSpec::Finite(2)).unwrap();
        let s = sample(&m, 2, &mut Replay(vec![0.5, 0.9], 0));
        assert_eq!(s.observations(), &[1, 2]);
        // exactly on the boundary the smaller value wins
        let at = m.cdf(1).unwrap();
        assert_eq!(Sampler::new(&m).draw(at), 1);
        assert_eq!(Sampler::new(&m).draw(1.0), 2);
    }

    #[test]
    fn finite_draws_never_overshoot() {
        let m = ZipfModel::new(0.25, SupportSpec::Finite(1000)).unwrap();
        let s = Sampler::new(&m);
        assert_eq!(s.draw(1.0), 1000);
        assert_eq!(s.draw(f64::from_bits(1.0f64.to_bits() - 1)), 1000);
        let mut rng = ChaChaStream::new(3, 0, 0);
        for _ in 0..20_000 {
            let v = s.draw(rng.next_uniform());
            assert!((1..=1000).contains(&v));
        }
    }

    #[test]
    fn unbounded_tail_draws_are_exact_inversions() {
        let m = ZipfModel::new(1.25, SupportSpec::Unbounded).unwrap();
        let s = Sampler::new(&m);
        for u in [0.95, 0.97, 0.98, 0.984] {
            let k = s.draw(u) as u64;
            assert!(k > UNBOUNDED_TABLE_LEN as u64, "u={u} gave {k}");
            assert!(m.cdf(k).unwrap() >= u);
            assert!(m.cdf(k - 1).unwrap() < u);
        }
        // about 1.5% of the mass lies beyond the cap at this exponent
        let at_cap = m.cdf(UNBOUNDED_SAMPLE_CAP).unwrap();
        assert!(at_cap > 0.98 && at_cap < 0.99);
        assert_eq!(s.draw(0.99), UNBOUNDED_SAMPLE_CAP as u32);
        assert_eq!(s.draw(1.0), UNBOUNDED_SAMPLE_CAP as u32);
    }

    #[test]
    fn truncated_draws_renormalize() {
        let m = ZipfModel::new(1.25, SupportSpec::Unbounded).unwrap();
        let s = Sampler::truncated(&m, 100).unwrap();
        assert_eq!(s.draw(1.0), 100);
        let total: f64 = (1..=100).map(|k| m.term(k)).sum();
        let u = m.term(1) / total;
        assert_eq!(s.draw(u), 1);
        assert_eq!(s.draw(u * (1.0 + 1e-12)), 2);
        assert!(Sampler::truncated(&m, 1).is_err());
        // a cap above a finite support changes nothing
        let f = ZipfModel::new(2.0, SupportSpec::Finite(20)).unwrap();
        let (a, b) = (Sampler::new(&f), Sampler::truncated(&f, 1000).unwrap());
        for u in [0.1, 0.61, 0.9, 0.999, 1.0] {
            assert_eq!(a.draw(u), b.draw(u));
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let m = ZipfModel::new(2.0, SupportSpec::Finite(20)).unwrap();
        let a = sample(&m, 100, &mut ChaChaStream::new(9, 1, 7));
        let b = sample(&m, 100, &mut ChaChaStream::new(9, 1, 7));
        let c = sample(&m, 100, &mut ChaChaStream::new(9, 1, 8));
        let d = sample(&m, 100, &mut ChaChaStream::new(9, 2, 7));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn frequencies_pass_chi_square() {
        let m = ZipfModel::new(2.0, SupportSpec::Finite(20)).unwrap();
        let n = 100_000;
        let s = sample(&m, n, &mut ChaChaStream::new(2024, 0, 0));
        let mut counts = [0u64; 21];
        for &v in s.observations() {
            counts[v as usize] += 1;
        }
        let chi2: f64 = (1..=20)
            .map(|k| {
                let e = n as f64 * m.pmf(k as u64).unwrap();
                (counts[k] as f64 - e).powi(2) / e
            })
            .sum();
        // chi-square, 19 degrees of freedom: P(X > 43.82) = 0.001
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }
}
