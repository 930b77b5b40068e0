//! Shared workloads for the benchmarks.

use zipfks::{sample, ChaChaStream, Sample, SupportSpec, ZipfModel};

/// A reproducible sample of `n` draws from Zipf(`gamma`) on `support`.
pub fn fixture(gamma: f64, support: SupportSpec, n: usize) -> (ZipfModel, Sample) {
    let model = ZipfModel::new(gamma, support).expect("valid benchmark model");
    let s = sample(&model, n, &mut ChaChaStream::new(0xbe7c, 0, 0));
    (model, s)
}

/// `(label, support, gamma)` triples covering the small, large and
/// unbounded cases.
pub const CASES: [(&str, SupportSpec, f64); 3] = [
    ("k20", SupportSpec::Finite(20), 1.0),
    ("k1000", SupportSpec::Finite(1000), 2.0),
    ("inf", SupportSpec::Unbounded, 2.0),
];
