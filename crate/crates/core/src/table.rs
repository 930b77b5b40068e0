//! Cutoff tables and their CSV form.
//!
//! ```text
//! # replicates=50000
//! # repetitions=10
//! # seed=1
//! k_support,gamma,n,q90,q95,q99,q999
//! 20,0.25,10,0.2486,0.2751,0.3286,0.3915
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! table reads back bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::montecarlo::DEFAULT_LEVELS;
use crate::zipf::SupportSpec;

pub const TABLE_HEADER: &str = "k_support,gamma,n,q90,q95,q99,q999";

/// Largest distance between a fitted exponent and a tabulated one for the
/// row to apply. Cutoffs move too quickly with γ to interpolate.
pub const LOOKUP_GAMMA_WINDOW: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub gamma: f64,
    pub n: usize,
    /// One cutoff per level of the owning table.
    pub cutoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffTable {
    pub support: SupportSpec,
    pub levels: Vec<f64>,
    pub rows: Vec<TableRow>,
    pub replicates: usize,
    pub repetitions: u32,
    /// Absent for tables of unknown provenance.
    pub base_seed: Option<u64>,
    /// See [`SimulationConfig::generation_cap`](crate::SimulationConfig::generation_cap).
    pub generation_cap: Option<u32>,
}

impl CutoffTable {
    /// Row for sample size `n` whose exponent is nearest `gamma`, if within
    /// [`LOOKUP_GAMMA_WINDOW`].
    pub fn lookup(&self, gamma: f64, n: usize) -> Option<&TableRow> {
        self.rows
            .iter()
            .filter(|r| r.n == n && (r.gamma - gamma).abs() <= LOOKUP_GAMMA_WINDOW + 1e-12)
            .min_by(|a, b| (a.gamma - gamma).abs().total_cmp(&(b.gamma - gamma).abs()))
    }

    /// Cutoff at one level for an exactly tabulated `(gamma, n)`.
    pub fn cutoff(&self, gamma: f64, n: usize, level: f64) -> Option<f64> {
        let j = self.levels.iter().position(|&q| q == level)?;
        let row = self.lookup(gamma, n)?;
        Some(row.cutoffs[j])
    }

    pub fn to_csv(&self) -> Result<String> {
        if self.levels != DEFAULT_LEVELS {
            return Err(Error::Format(format!(
                "the table file holds exactly the levels {DEFAULT_LEVELS:?}, not {:?}",
                self.levels
            )));
        }
        let mut out = String::new();
        let _ = writeln!(out, "# replicates={}", self.replicates);
        let _ = writeln!(out, "# repetitions={}", self.repetitions);
        if let Some(seed) = self.base_seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        if let Some(cap) = self.generation_cap {
            let _ = writeln!(out, "# generation_cap={cap}");
        }
        out.push_str(TABLE_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{},{}", self.support, row.gamma, row.n);
            for c in &row.cutoffs {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut replicates = None;
        let mut repetitions = None;
        let mut base_seed = None;
        let mut generation_cap = None;
        let mut support = None;
        let mut header_seen = false;
        let mut rows = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.trim().split_once('=') {
                    let value = value.trim();
                    let parse = |what: &str| {
                        value
                            .parse::<u64>()
                            .map_err(|_| Error::Format(format!("line {lineno}: bad {what} '{value}'")))
                    };
                    match key.trim() {
                        "replicates" => replicates = Some(parse("replicates")? as usize),
                        "repetitions" => repetitions = Some(parse("repetitions")? as u32),
                        "seed" => base_seed = Some(parse("seed")?),
                        "generation_cap" => {
                            generation_cap = Some(
                                u32::try_from(parse("generation_cap")?)
                                    .map_err(|_| Error::Format(format!("line {lineno}: generation cap too large")))?,
                            )
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != TABLE_HEADER {
                    return Err(Error::Format(format!(
                        "line {lineno}: expected header '{TABLE_HEADER}', found '{line}'"
                    )));
                }
                header_seen = true;
                continue;
            }

            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::Format(format!(
                    "line {lineno}: expected 7 fields, found {}",
                    fields.len()
                )));
            }
            let row_support: SupportSpec = fields[0]
                .parse()
                .map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
            match support {
                None => support = Some(row_support),
                Some(s) if s != row_support => {
                    return Err(Error::Format(format!(
                        "line {lineno}: support {row_support} differs from {s}"
                    )))
                }
                _ => {}
            }
            let number = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format(format!("line {lineno}: bad number '{s}'")))
            };
            let gamma = number(fields[1])?;
            let n = fields[2]
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Format(format!("line {lineno}: bad sample size '{}'", fields[2])))?;
            let cutoffs = fields[3..].iter().map(|s| number(s)).collect::<Result<Vec<_>>>()?;
            if cutoffs.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::Format(format!("line {lineno}: cutoff outside [0, 1]")));
            }
            if cutoffs.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Format(format!(
                    "line {lineno}: cutoffs decrease across quantile levels"
                )));
            }
            rows.push(TableRow { gamma, n, cutoffs });
        }

        if !header_seen {
            return Err(Error::Format(format!("missing header '{TABLE_HEADER}'")));
        }
        let support = support.ok_or_else(|| Error::Format("table has no rows".into()))?;
        Ok(CutoffTable {
            support,
            levels: DEFAULT_LEVELS.to_vec(),
            rows,
            replicates: replicates.ok_or_else(|| Error::Format("missing '# replicates='".into()))?,
            repetitions: repetitions.ok_or_else(|| Error::Format("missing '# repetitions='".into()))?,
            base_seed,
            generation_cap,
        })
    }
}

pub fn load_table(path: impl AsRef<Path>) -> Result<CutoffTable> {
    let text = std::fs::read_to_string(path)?;
    CutoffTable::from_csv(&text)
}

/// Published-scale reference tables (50,000 replicates, 10 repetitions) for
/// the supports `K = 20, 50, 100, 500, 1000` and unbounded.
pub mod reference {
    use super::CutoffTable;
    use crate::zipf::SupportSpec;

    const K20: &str = include_str!("../data/reference_k20.csv");
    const K50: &str = include_str!("../data/reference_k50.csv");
    const K100: &str = include_str!("../data/reference_k100.csv");
    const K500: &str = include_str!("../data/reference_k500.csv");
    const K1000: &str = include_str!("../data/reference_k1000.csv");
    const KINF: &str = include_str!("../data/reference_kinf.csv");

    /// Sample sizes tabulated for every support.
    pub const SAMPLE_SIZES: [usize; 15] = [
        10, 20, 30, 40, 50, 100, 500, 1000, 2000, 3000, 4000, 5000, 10_000, 20_000, 50_000,
    ];
    /// Exponents tabulated for finite supports.
    pub const FINITE_GAMMAS: [f64; 12] = [
        0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0,
    ];
    /// Exponents tabulated for the unbounded support.
    pub const UNBOUNDED_GAMMAS: [f64; 8] = [1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0];

    pub fn gammas(support: SupportSpec) -> &'static [f64] {
        match support {
            SupportSpec::Finite(_) => &FINITE_GAMMAS,
            SupportSpec::Unbounded => &UNBOUNDED_GAMMAS,
        }
    }

    /// The reference table for `support`, if one exists.
    pub fn table(support: SupportSpec) -> Option<CutoffTable> {
        let text = match support {
            SupportSpec::Finite(20) => K20,
            SupportSpec::Finite(50) => K50,
            SupportSpec::Finite(100) => K100,
            SupportSpec::Finite(500) => K500,
            SupportSpec::Finite(1000) => K1000,
            SupportSpec::Unbounded => KINF,
            SupportSpec::Finite(_) => return None,
        };
        Some(CutoffTable::from_csv(text).expect("embedded reference table is well formed"))
    }
}
