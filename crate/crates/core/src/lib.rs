//! Fitting discrete power laws (Zipf distributions) and judging the fit.
//!
//! The exponent is estimated by maximum likelihood on either a truncated
//! support `1..=K` or all positive integers. Goodness of fit is measured with
//! the discrete Kolmogorov–Smirnov distance to the fitted model, and because
//! the model was fitted to the same data, its critical values come from a
//! Monte Carlo simulation that re-fits every simulated sample.
//!
//! ```
//! use zipfks::{mle_gamma, ks_statistic, MleSettings, Sample, SupportSpec, ZipfModel};
//!
//! let sample = Sample::new(vec![1, 1, 2]).unwrap();
//! let support = SupportSpec::Finite(2);
//! let gamma = mle_gamma(&sample, support, &MleSettings::default()).unwrap();
//! assert!((gamma - 1.0).abs() < 1e-5);
//!
//! let ks = ks_statistic(&sample, &ZipfModel::new(gamma, support).unwrap()).unwrap();
//! assert!(ks.statistic < 1e-9);
//! ```

pub mod error;
pub mod estimator;
pub mod gof;
pub mod io;
pub mod logtable;
pub mod montecarlo;
pub mod sampling;
pub mod series;
pub mod table;
pub mod zipf;

pub use error::{Error, Result};
pub use estimator::{log_mean, mle_gamma, MleFit, MleSettings, Sample, SolveMethod};
pub use gof::{judge, ks_statistic, KsResult, Verdict};
pub use io::{fit_bespoke, fit_with_table, parse_observations, CutoffSource, FitReport};
pub use logtable::LogTable;
pub use montecarlo::{
    build_table, quantiles, run_simulation, Engine, ReplicateOutcome, SimulationConfig,
    SimulationResult, Simulator, DEFAULT_LEVELS,
};
pub use sampling::{sample, ChaChaStream, RandomStream, Sampler};
pub use table::{load_table, CutoffTable, TableRow};
pub use zipf::{normalization, SupportSpec, ZipfModel};
