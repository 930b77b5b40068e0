//! Precomputed natural logarithms of the leading positive integers.
//!
//! Every `k^-γ` term is evaluated as `exp(-γ ln k)`, so the logarithms are
//! computed once and looked up afterwards.

use crate::error::{Error, Result};

/// Largest limit accepted for a finite support.
pub const MAX_FINITE_LIMIT: usize = 32_766;

/// `ln k` for `k = 1..=limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    // index 0 holds ln 0 = -inf and is never read through `ln`
    logs: Vec<f64>,
}

impl LogTable {
    pub fn new(limit: usize) -> Result<Self> {
        if limit == 0 || limit > MAX_FINITE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "log table limit {limit} outside 1..={MAX_FINITE_LIMIT}"
            )));
        }
        let mut table = LogTable { logs: Vec::new() };
        table.fill_to(limit);
        Ok(table)
    }

    /// Largest integer covered.
    pub fn limit(&self) -> usize {
        self.logs.len() - 1
    }

    /// `ln k`. Panics when `k` is zero or beyond [`limit`](Self::limit).
    #[inline]
    pub fn ln(&self, k: usize) -> f64 {
        assert!(k >= 1, "ln(0) requested from log table");
        self.logs[k]
    }

    /// Logs of `1..=limit` as a slice, entry `i` holding `ln(i + 1)`.
    pub fn as_slice(&self) -> &[f64] {
        &self.logs[1..]
    }

    /// Grows the table geometrically until it covers `k`. Used for unbounded
    /// supports, where no fixed ceiling exists.
    pub fn ensure(&mut self, k: usize) {
        if k <= self.limit() {
            return;
        }
        let target = k.max(2 * self.limit());
        self.fill_to(target);
    }

    fn fill_to(&mut self, limit: usize) {
        let start = self.logs.len();
        self.logs.reserve(limit + 1 - start);
        for k in start..=limit {
            self.logs.push((k as f64).ln());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        let t = LogTable::new(3).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 2f64.ln(), 3f64.ln()]);
        assert_eq!(t.ln(1), 0.0);
        assert!((t.ln(2) - 0.693_147_180_559_945_3).abs() < 1e-15);
        assert!((t.ln(3) - 1.098_612_288_668_109_8).abs() < 1e-15);

        let one = LogTable::new(1).unwrap();
        assert_eq!(one.as_slice(), &[0.0]);
    }

    #[test]
    fn entry_twenty_matches_high_precision_value() {
        // ln 20 to 30 digits: 2.99573227355399099343522357614
        let t = LogTable::new(20).unwrap();
        assert!((t.ln(20) - 2.995_732_273_553_991).abs() < 4e-16);
    }

    #[test]
    fn limits_are_checked() {
        assert!(LogTable::new(0).is_err());
        assert!(LogTable::new(MAX_FINITE_LIMIT).is_ok());
        assert!(LogTable::new(MAX_FINITE_LIMIT + 1).is_err());
    }

    #[test]
    fn grows_geometrically() {
        let mut t = LogTable::new(10).unwrap();
        t.ensure(5);
        assert_eq!(t.limit(), 10);
        t.ensure(11);
        assert_eq!(t.limit(), 20);
        t.ensure(100);
        assert_eq!(t.limit(), 100);
        assert_eq!(t.ln(77), 77f64.ln());
    }
}
