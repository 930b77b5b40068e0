//! Power sums `Σ k^-s` and their first two derivatives in `s`.
//!
//! Finite supports are summed term by term. The unbounded series (the Riemann
//! zeta function and its derivatives) are summed directly up to
//! [`EM_START`] and the remainder is closed with an Euler–Maclaurin expansion,
//! differentiated in `s` through second-order dual numbers.

use std::ops::{Add, Mul, Sub};

/// First index handled by the Euler–Maclaurin remainder.
pub const EM_START: u64 = 32;

/// `B_2j / (2j)!` for `j = 1..=7`.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// The three sums the likelihood equation needs, evaluated at one exponent:
/// `norm = Σ k^-s`, `dnorm = -Σ k^-s ln k`, `d2norm = Σ k^-s (ln k)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSums {
    pub norm: f64,
    pub dnorm: f64,
    pub d2norm: f64,
}

impl PowerSums {
    /// `d/ds ln Σ k^-s`, the negated model mean of `ln k`.
    #[inline]
    pub fn log_derivative(&self) -> f64 {
        self.dnorm / self.norm
    }

    /// Derivative of [`log_derivative`](Self::log_derivative); the model
    /// variance of `ln k`.
    #[inline]
    pub fn log_second_derivative(&self) -> f64 {
        let r = self.dnorm / self.norm;
        self.d2norm / self.norm - r * r
    }
}

/// Sums over `k = 1..=K` given `logs[i] = ln(i + 1)`.
pub fn finite_power_sums(s: f64, logs: &[f64]) -> PowerSums {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &l in logs {
        let p = (-s * l).exp();
        a += -p * l;
        b += p;
        c += p * l * l;
    }
    PowerSums {
        norm: b,
        dnorm: a,
        d2norm: c,
    }
}

/// `Σ_{k=1..K} k^-s` given `logs[i] = ln(i + 1)`.
pub fn finite_norm(s: f64, logs: &[f64]) -> f64 {
    logs.iter().map(|&l| (-s * l).exp()).sum()
}

/// ζ(s), ζ'(s) and ζ''(s) for `s > 1`.
pub fn zeta_power_sums(s: f64) -> PowerSums {
    debug_assert!(s > 1.0);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for k in 1..EM_START {
        let l = (k as f64).ln();
        let p = (-s * l).exp();
        a += -p * l;
        b += p;
        c += p * l * l;
    }
    let tail = em_tail(Jet::variable(s), EM_START as f64);
    PowerSums {
        norm: b + tail.v,
        dnorm: a + tail.d1,
        d2norm: c + tail.d2,
    }
}

/// ζ(s) for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    zeta_power_sums(s).norm
}

/// `Σ_{k >= start} k^-s` for `s > 1`, `start >= 1`.
pub fn zeta_tail(s: f64, start: u64) -> f64 {
    debug_assert!(s > 1.0 && start >= 1);
    if start >= EM_START {
        return em_tail(Jet::constant(s), start as f64).v;
    }
    let head: f64 = (start..EM_START)
        .map(|k| (-s * (k as f64).ln()).exp())
        .sum();
    head + em_tail(Jet::constant(s), EM_START as f64).v
}

/// Euler–Maclaurin remainder `Σ_{k >= m} k^-s`:
/// `m^-s [m/(s-1) + 1/2 + Σ_j B_2j/(2j)! (s)_{2j-1} m^{1-2j}]`.
fn em_tail(s: Jet, m: f64) -> Jet {
    let ln_m = m.ln();
    let m_pow = (s * -ln_m).exp();
    let inv_m2 = 1.0 / (m * m);

    let mut bracket = (s - 1.0).recip() * m + 0.5;
    // rising factorial (s)_{2j-1} / m^{2j-1}
    let mut rising = s * (1.0 / m);
    for (j, &coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        bracket = bracket + rising * coef;
        let next = 2.0 * j as f64 + 1.0;
        rising = rising * (s + next) * (s + (next + 1.0)) * inv_m2;
    }
    m_pow * bracket
}

/// A value with its first and second derivative in one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Jet {
    fn variable(x: f64) -> Self {
        Jet {
            v: x,
            d1: 1.0,
            d2: 0.0,
        }
    }

    fn constant(x: f64) -> Self {
        Jet {
            v: x,
            d1: 0.0,
            d2: 0.0,
        }
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        Jet {
            v: e,
            d1: self.d1 * e,
            d2: (self.d2 + self.d1 * self.d1) * e,
        }
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        Jet {
            v: r,
            d1: -self.d1 * r * r,
            d2: (2.0 * self.d1 * self.d1 * r - self.d2) * r * r,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        Jet {
            v: self.v + rhs,
            ..self
        }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + -rhs
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet {
            v: self.v + rhs.v,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        Jet {
            v: self.v * rhs,
            d1: self.d1 * rhs,
            d2: self.d2 * rhs,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet {
            v: self.v * rhs.v,
            d1: self.d1 * rhs.v + self.v * rhs.d1,
            d2: self.d2 * rhs.v + 2.0 * self.d1 * rhs.d1 + self.v * rhs.d2,
        }
    }
}
