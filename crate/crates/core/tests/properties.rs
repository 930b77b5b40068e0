use proptest::prelude::*;

use zipfks::estimator::{self, solve, solve_bisection};
use zipfks::*;

fn finite_k() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(20), Just(50), Just(100), Just(1000), 2u32..=300]
}

/// A support and a sample lying inside it.
fn sample_on_support(max_k: u32) -> impl Strategy<Value = (u32, Vec<u32>)> {
    (2u32..=max_k).prop_flat_map(|k| (Just(k), prop::collection::vec(1u32..=k, 1..200)))
}

fn brute_force_ks(obs: &[u32], model: &ZipfModel, upto: u32) -> f64 {
    let n = obs.len() as f64;
    let mut best = 0.0f64;
    for k in 1..=upto {
        let below = obs.iter().filter(|&&x| x <= k).count() as f64 / n;
        best = best.max((model.cdf(k as u64).unwrap() - below).abs());
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn finite_pmf_sums_to_one(gamma in 0.25f64..=4.0, k in finite_k()) {
        let m = ZipfModel::new(gamma, SupportSpec::Finite(k)).unwrap();
        let total: f64 = (1..=k as u64).map(|j| m.pmf(j).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((m.cdf(k as u64).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exp_log_term_matches_power(gamma in 0.0f64..=4.0, k in 1u64..=1000) {
        let via_log = (-gamma * (k as f64).ln()).exp();
        let direct = (k as f64).powf(-gamma);
        prop_assert!((via_log - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn cdf_is_monotone(gamma in 1.05f64..=4.0, finite in any::<bool>(), k in 1u64..400) {
        let support = if finite { SupportSpec::Finite(400) } else { SupportSpec::Unbounded };
        let m = ZipfModel::new(gamma, support).unwrap();
        prop_assert!(m.cdf(k + 1).unwrap() >= m.cdf(k).unwrap());
    }

    #[test]
    fn sampler_stays_in_support(gamma in 0.1f64..=4.0, k in finite_k(), seed in any::<u64>()) {
        let m = ZipfModel::new(gamma, SupportSpec::Finite(k)).unwrap();
        let a = sample(&m, 300, &mut ChaChaStream::new(seed, 0, 0));
        prop_assert!(a.observations().iter().all(|&v| (1..=k).contains(&v)));
        let b = sample(&m, 300, &mut ChaChaStream::new(seed, 0, 0));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ks_is_bounded_and_order_free(
        (k, obs) in sample_on_support(60),
        gamma in -1.0f64..=4.0,
        seed in any::<u64>(),
    ) {
        let m = ZipfModel::fitted(gamma, SupportSpec::Finite(k), None).unwrap();
        let r = ks_statistic(&Sample::new(obs.clone()).unwrap(), &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.statistic));
        prop_assert!(r.argmax_k >= 1 && r.argmax_k <= k);

        // a deterministic shuffle driven by the seed
        let mut shuffled = obs.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let s = ks_statistic(&Sample::new(shuffled).unwrap(), &m).unwrap();
        prop_assert_eq!(r.statistic.to_bits(), s.statistic.to_bits());
    }

    #[test]
    fn ks_matches_brute_force((k, obs) in sample_on_support(50), gamma in 0.1f64..=4.0) {
        let m = ZipfModel::new(gamma, SupportSpec::Finite(k)).unwrap();
        let sample = Sample::new(obs.clone()).unwrap();
        let fast = ks_statistic(&sample, &m).unwrap().statistic;
        prop_assert_eq!(fast, brute_force_ks(&obs, &m, sample.max()));
        prop_assert!((fast - brute_force_ks(&obs, &m, k)).abs() < 1e-12);
    }

    #[test]
    fn mle_is_a_stationary_maximum((k, obs) in sample_on_support(1000)) {
        let support = SupportSpec::Finite(k);
        let sample = Sample::new(obs).unwrap();
        let lm = log_mean(&sample).unwrap();
        let fit = solve(lm, support, &MleSettings::default(), None).unwrap();
        prop_assert!(estimator::score(fit.gamma, lm, support).abs() < 1e-6);
        let ll = |g: f64| estimator::mean_log_likelihood(g, lm, support);
        prop_assert!(ll(fit.gamma) >= ll(fit.gamma - 0.01));
        prop_assert!(ll(fit.gamma) >= ll(fit.gamma + 0.01));
        let bisected = solve_bisection(lm, support, &MleSettings::default(), None).unwrap();
        prop_assert!((bisected.gamma - fit.gamma).abs() < 1e-4);
        prop_assert_eq!(
            mle_gamma(&sample, support, &MleSettings::default()).unwrap().to_bits(),
            fit.gamma.to_bits()
        );
    }

    #[test]
    fn heavier_tails_fit_smaller_exponents(k in finite_k(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        prop_assume!((a - b).abs() > 1e-3);
        let support = SupportSpec::Finite(k);
        // mean logs strictly inside (0, ln K)
        let top = (k as f64).ln();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let settings = MleSettings::default();
        let g_lo = solve(lo * top, support, &settings, None).unwrap().gamma;
        let g_hi = solve(hi * top, support, &settings, None).unwrap().gamma;
        prop_assert!(g_hi < g_lo, "{} -> {}, {} -> {}", lo, g_lo, hi, g_hi);
    }

    #[test]
    fn quantiles_match_selection(
        stats in prop::collection::vec(0.0f64..1.0, 100..2000),
        q in prop::collection::btree_set(1u32..999, 1..6),
    ) {
        let levels: Vec<f64> = q.iter().map(|&x| x as f64 / 1000.0).collect();
        let got = quantiles(&stats, &levels).unwrap();
        for (&level, &value) in levels.iter().zip(&got) {
            let idx = montecarlo::quantile_index(stats.len(), level).unwrap();
            let mut copy = stats.clone();
            let (_, nth, _) = copy.select_nth_unstable_by(idx, f64::total_cmp);
            prop_assert_eq!(*nth, value);
        }
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn table_csv_round_trips(
        finite in any::<bool>(),
        seed in prop::option::of(any::<u64>()),
        rows in prop::collection::vec(
            (0.0f64..5.0, 1usize..100_000, prop::collection::vec(0.0f64..=1.0, 4)),
            1..20,
        ),
    ) {
        let rows = rows
            .into_iter()
            .map(|(gamma, n, mut cutoffs)| {
                cutoffs.sort_by(f64::total_cmp);
                TableRow { gamma, n, cutoffs }
            })
            .collect();
        let table = CutoffTable {
            support: if finite { SupportSpec::Finite(500) } else { SupportSpec::Unbounded },
            levels: montecarlo::DEFAULT_LEVELS.to_vec(),
            rows,
            replicates: 50_000,
            repetitions: 10,
            base_seed: seed,
            generation_cap: None,
        };
        let text = table.to_csv().unwrap();
        prop_assert_eq!(CutoffTable::from_csv(&text).unwrap(), table);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equal_log_sums_give_equal_exponents(obs in prop::collection::vec(1u32..=100, 2..50)) {
        let support = SupportSpec::Finite(100);
        let settings = MleSettings::default();
        let mut reversed = obs.clone();
        reversed.reverse();
        let (a, b) = (Sample::new(obs).unwrap(), Sample::new(reversed).unwrap());
        let (la, lb) = (log_mean(&a).unwrap(), log_mean(&b).unwrap());
        prop_assume!(la.to_bits() == lb.to_bits());
        prop_assert_eq!(
            mle_gamma(&a, support, &settings).unwrap().to_bits(),
            mle_gamma(&b, support, &settings).unwrap().to_bits()
        );
    }
}
