//! Observation files and fit reports.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{self, MleSettings, Sample};
use crate::gof::{self, KsResult, Verdict};
use crate::montecarlo::{self, Engine, SimulationConfig};
use crate::table::CutoffTable;
use crate::zipf::{SupportSpec, ZipfModel};

/// Reads whitespace-separated positive integers.
pub fn parse_observations(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_observations_str(&text, path)
}

/// Parses observation text; `origin` only labels diagnostics.
pub fn parse_observations_str(text: &str, origin: &Path) -> Result<Sample> {
    let mut values = Vec::new();
    let mut token_no = 0usize;
    for (i, line) in text.lines().enumerate() {
        let mut rest = line;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let token_len = rest[start..]
                .find(char::is_whitespace)
                .unwrap_or(rest.len() - start);
            let token = &rest[start..start + token_len];
            token_no += 1;
            let column = line[..offset + start].chars().count() + 1;
            match token.parse::<u32>() {
                Ok(v) if v >= 1 => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        path: origin.to_path_buf(),
                        line: i + 1,
                        column,
                        message: format!("token {token_no}: '{token}' is not a positive integer"),
                    })
                }
            }
            offset += start + token_len;
            rest = &rest[start + token_len..];
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            column: 1,
            message: "no observations".into(),
        });
    }
    Sample::new(values)
}

/// One observation per line.
pub fn write_observations(sample: &Sample, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(sample.len() * 4);
    for v in sample.observations() {
        let _ = writeln!(out, "{v}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `q90` for 0.9, `q999` for 0.999, `q05` for 0.05.
pub fn level_label(level: f64) -> String {
    let s = format!("{level}");
    let digits = s.strip_prefix("0.").unwrap_or(&s);
    format!("q{digits:0<2}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutoffSource {
    Table { label: String },
    Bespoke { replicates: usize, repetitions: u32, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub n: usize,
    pub support: SupportSpec,
    pub gamma_hat: f64,
    pub ks: KsResult,
    pub source: CutoffSource,
    pub verdicts: Vec<Verdict>,
}

impl FitReport {
    /// Verdict at `level`, if that level was evaluated.
    pub fn verdict(&self, level: f64) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.level == level)
    }

    /// Rejected at the least strict level evaluated.
    pub fn rejected(&self) -> bool {
        self.verdicts.first().is_some_and(|v| v.rejected)
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "observations  N = {}, K = {}", self.n, self.support);
        let _ = writeln!(out, "exponent      gamma_hat = {:.4}", self.gamma_hat);
        let _ = writeln!(
            out,
            "KS statistic  {:.4} (at k = {})",
            self.ks.statistic, self.ks.argmax_k
        );
        match &self.source {
            CutoffSource::Table { label } => {
                let _ = writeln!(out, "cutoffs       from table {label}");
            }
            CutoffSource::Bespoke {
                replicates,
                repetitions,
                seed,
            } => {
                let _ = writeln!(
                    out,
                    "cutoffs       bespoke simulation, {replicates} replicates x {repetitions} repetitions, seed {seed}"
                );
            }
        }
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "  {:<6} {:.4}  {}",
                level_label(v.level),
                v.cutoff,
                if v.rejected { "rejected" } else { "not rejected" }
            );
        }
        out
    }

    /// Flat `key=value` lines.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "k_support={}", self.support);
        let _ = writeln!(out, "gamma_hat={}", self.gamma_hat);
        let _ = writeln!(out, "ks={}", self.ks.statistic);
        let _ = writeln!(out, "ks_argmax={}", self.ks.argmax_k);
        match &self.source {
            CutoffSource::Table { label } => {
                let _ = writeln!(out, "source=table");
                let _ = writeln!(out, "table={label}");
            }
            CutoffSource::Bespoke {
                replicates,
                repetitions,
                seed,
            } => {
                let _ = writeln!(out, "source=bespoke");
                let _ = writeln!(out, "replicates={replicates}");
                let _ = writeln!(out, "repetitions={repetitions}");
                let _ = writeln!(out, "seed={seed}");
            }
        }
        for v in &self.verdicts {
            let label = level_label(v.level);
            let _ = writeln!(out, "cutoff_{label}={}", v.cutoff);
            let _ = writeln!(out, "rejected_{label}={}", v.rejected);
        }
        out
    }
}

/// Fitted exponent and KS distance for a sample on a declared support.
pub fn fit_sample(sample: &Sample, support: SupportSpec, settings: &MleSettings) -> Result<(f64, KsResult)> {
    sample.check_support(support)?;
    let gamma_hat = estimator::mle_gamma(sample, support, settings)?;
    let model = ZipfModel::fitted(gamma_hat, support, None)?;
    let ks = gof::ks_statistic(sample, &model)?;
    Ok((gamma_hat, ks))
}

/// Judges the fit against a tabulated row matching `(K, N, γ̂)`.
pub fn fit_with_table(
    sample: &Sample,
    support: SupportSpec,
    table: &CutoffTable,
    label: &str,
) -> Result<FitReport> {
    if table.support != support {
        return Err(Error::NoTableMatch(format!(
            "K = {support} (table {label} is for K = {})",
            table.support
        )));
    }
    let (gamma_hat, ks) = fit_sample(sample, support, &MleSettings::default())?;
    let row = table.lookup(gamma_hat, sample.len()).ok_or_else(|| {
        Error::NoTableMatch(format!(
            "N = {}, gamma_hat = {gamma_hat:.4} in table {label}",
            sample.len()
        ))
    })?;
    let verdicts = table
        .levels
        .iter()
        .zip(&row.cutoffs)
        .map(|(&q, &c)| gof::judge(ks.statistic, c, q))
        .collect();
    Ok(FitReport {
        n: sample.len(),
        support,
        gamma_hat,
        ks,
        source: CutoffSource::Table { label: label.into() },
        verdicts,
    })
}

/// Judges the fit against cutoffs simulated at exactly `(K, N, γ̂)`.
pub fn fit_bespoke(
    sample: &Sample,
    support: SupportSpec,
    replicates: usize,
    repetitions: u32,
    seed: u64,
    engine: &Engine,
) -> Result<FitReport> {
    let (gamma_hat, ks) = fit_sample(sample, support, &MleSettings::default())?;
    let config = SimulationConfig::new(sample.len(), support, gamma_hat, seed)
        .with_replicates(replicates, repetitions);
    let sim = montecarlo::run_simulation(&config, engine)?;
    let verdicts = sim
        .levels
        .iter()
        .zip(&sim.cutoffs)
        .map(|(&q, &c)| gof::judge(ks.statistic, c, q))
        .collect();
    Ok(FitReport {
        n: sample.len(),
        support,
        gamma_hat,
        ks,
        source: CutoffSource::Bespoke {
            replicates,
            repetitions,
            seed,
        },
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::reference;

    fn parse(text: &str) -> Result<Sample> {
        parse_observations_str(text, Path::new("obs.txt"))
    }

    #[test]
    fn parses_whitespace_separated_values() {
        assert_eq!(parse("1 2 3\n4").unwrap().observations(), &[1, 2, 3, 4]);
        assert_eq!(parse("\t7\r\n\n  8  \n").unwrap().observations(), &[7, 8]);
    }

    #[test]
    fn diagnostics_name_the_token() {
        let err = parse("1 0 2").unwrap_err();
        match err {
            Error::Parse {
                line,
                column,
                message,
                ..
            } => {
                assert_eq!((line, column), (1, 3));
                assert!(message.contains("token 2"), "{message}");
                assert!(message.contains("'0'"));
            }
            other => panic!("unexpected {other:?}"),
        }
        for bad in ["1\n-3", "2 1.5", "abc", "99999999999"] {
            assert!(matches!(parse(bad), Err(Error::Parse { .. })), "{bad}");
        }
        assert!(matches!(parse(" \n "), Err(Error::Parse { .. })));
        let Err(Error::Parse { line, column, .. }) = parse("5 6\n  7 x") else {
            panic!()
        };
        assert_eq!((line, column), (2, 5));
    }

    #[test]
    fn level_labels() {
        assert_eq!(level_label(0.9), "q90");
        assert_eq!(level_label(0.95), "q95");
        assert_eq!(level_label(0.99), "q99");
        assert_eq!(level_label(0.999), "q999");
        assert_eq!(level_label(0.05), "q05");
    }

    #[test]
    fn table_fit_requires_matching_row() {
        let t = reference::table(SupportSpec::Finite(20)).unwrap();
        // N = 7 is never tabulated
        let s = Sample::new(vec![1, 1, 2, 3, 1, 1, 5]).unwrap();
        assert!(matches!(
            fit_with_table(&s, SupportSpec::Finite(20), &t, "ref"),
            Err(Error::NoTableMatch(_))
        ));
        assert!(matches!(
            fit_with_table(&s, SupportSpec::Finite(50), &t, "ref"),
            Err(Error::NoTableMatch(_))
        ));
    }

    #[test]
    fn machine_output_is_flat() {
        let report = FitReport {
            n: 3,
            support: SupportSpec::Finite(2),
            gamma_hat: 1.0,
            ks: KsResult {
                statistic: 0.0,
                argmax_k: 1,
            },
            source: CutoffSource::Bespoke {
                replicates: 100,
                repetitions: 1,
                seed: 4,
            },
            verdicts: vec![gof::judge(0.0, 0.1, 0.9), gof::judge(0.0, 0.2, 0.999)],
        };
        let text = report.render_machine();
        assert!(text.lines().all(|l| l.split_once('=').is_some()));
        assert!(text.contains("rejected_q90=false\n"));
        assert!(text.contains("cutoff_q999=0.2\n"));
        assert!(!report.rejected());
        assert!(report.render_human().contains("not rejected"));
    }
}
