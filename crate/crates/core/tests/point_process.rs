use lsbec::point_process::{
    extend_configuration, interval_lengths, largest_lengths, sample_configuration,
    sample_on_window, sample_window_extremes, top_two_gap_samples,
};
use lsbec::seed::derive_seed;
use lsbec::stats::{bernoulli_std_error, jackknife_std_error, mean};
use lsbec::{Configuration, ModelParams};
use proptest::prelude::*;

#[test]
fn mean_count_is_intensity_times_length() {
    let counts: Vec<f64> = (0..100_000)
        .map(|i| sample_on_window(10.0, 1.0, derive_seed(11, "count", i)).count() as f64)
        .collect();
    let m = mean(&counts);
    assert!((m - 10.0).abs() < 0.1, "mean count {m}");
}

#[test]
fn count_concentrates_around_mean() {
    let inside = (0..10_000)
        .filter(|&i| {
            let k = sample_on_window(1000.0, 1.0, derive_seed(12, "count", i)).count() as f64;
            k > 800.0 && k < 1200.0
        })
        .count();
    assert!(
        inside as f64 / 10_000.0 >= 0.999,
        "{inside} of 10000 inside"
    );
}

#[test]
fn extension_adds_poisson_mean() {
    let added: Vec<f64> = (0..100_000)
        .map(|i| {
            let base = sample_on_window(10.0, 1.0, derive_seed(13, "base", i));
            let wide = extend_configuration(&base, 20.0, derive_seed(13, "wide", i)).unwrap();
            (wide.count() - base.count()) as f64
        })
        .collect();
    let m = mean(&added);
    assert!((m - 10.0).abs() < 0.1, "mean added count {m}");
}

#[test]
fn iterated_extension_has_the_law_of_direct_extension() {
    let trials = 10_000;
    let (mut direct, mut iterated) = (Vec::new(), Vec::new());
    for i in 0..trials {
        let base = sample_on_window(10.0, 1.0, derive_seed(14, "base", i));
        let s1 = derive_seed(14, "first", i);
        let s2 = derive_seed(14, "second", i);
        let once = extend_configuration(&base, 40.0, s1).unwrap();
        let twice = extend_configuration(&extend_configuration(&base, 20.0, s1).unwrap(), 40.0, s2)
            .unwrap();
        direct.push((once.count() - base.count()) as f64);
        iterated.push((twice.count() - base.count()) as f64);
    }
    let pooled =
        (jackknife_std_error(&direct).powi(2) + jackknife_std_error(&iterated).powi(2)).sqrt();
    let diff = (mean(&direct) - mean(&iterated)).abs();
    assert!(
        diff <= 3.0 * pooled,
        "difference {diff} vs pooled SE {pooled}"
    );
    assert!((mean(&direct) - 30.0).abs() < 0.5);
}

#[test]
fn largest_length_bound_holds_more_often_on_longer_windows() {
    let samples = 4000;
    let mut freqs = Vec::new();
    for n in [100u64, 1_000, 10_000] {
        let params = ModelParams::new(1.0, 1.0, 1.0, n).unwrap();
        let ln_l = params.window_length().ln();
        let bound = ln_l - 1.5 * ln_l.ln();
        let hits = (0..samples)
            .filter(|&i| {
                sample_window_extremes(&params, derive_seed(15, "largest", i)).largest >= bound
            })
            .count();
        let p = hits as f64 / samples as f64;
        freqs.push((p, bernoulli_std_error(p, samples as usize)));
    }
    for w in freqs.windows(2) {
        assert!(
            w[1].0 >= w[0].0 - 2.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt(),
            "{freqs:?}"
        );
    }
    assert!(freqs[2].0 > 0.99, "{freqs:?}");
}

#[test]
fn window_extremes_match_full_configuration_in_law() {
    let params = ModelParams::new(1.0, 1.0, 1.0, 200).unwrap();
    let trials = 20_000;
    let streamed: Vec<f64> = (0..trials)
        .map(|i| sample_window_extremes(&params, derive_seed(16, "stream", i)).largest)
        .collect();
    let full: Vec<f64> = (0..trials)
        .map(|i| sample_configuration(&params, derive_seed(16, "full", i)).max_length())
        .collect();
    let pooled =
        (jackknife_std_error(&streamed).powi(2) + jackknife_std_error(&full).powi(2)).sqrt();
    assert!((mean(&streamed) - mean(&full)).abs() <= 3.0 * pooled);
}

/// `P(X₍₁₎ − X₍₂₎ ≥ t)` for `k` unit exponentials by direct integration of the
/// joint density of the two largest order statistics.
fn top_two_survival_oracle(k: usize, t: f64) -> f64 {
    let steps = 200_000;
    let upper = 60.0;
    let h = upper / steps as f64;
    let kf = k as f64;
    let density = |x: f64| {
        kf * (kf - 1.0) * (-x).exp() * (-(-x).exp_m1()).powi(k as i32 - 2) * (-(x + t)).exp()
    };
    let mut sum = 0.5 * (density(0.0) + density(upper));
    for i in 1..steps {
        sum += density(i as f64 * h);
    }
    sum * h
}

#[test]
fn top_two_gap_is_exponential() {
    for k in [2, 3, 5] {
        for t in [0.1, 0.5, 1.0, 2.5] {
            let oracle = top_two_survival_oracle(k, t);
            assert!((oracle - (-t).exp()).abs() < 1e-6, "k={k} t={t}: {oracle}");
        }
    }
    let trials = 100_000;
    let gaps = top_two_gap_samples(5, 1.0, trials, 17).unwrap();
    for j in 1..=10 {
        let t = 0.3 * j as f64;
        let p = gaps.iter().filter(|&&g| g >= t).count() as f64 / trials as f64;
        let se = bernoulli_std_error(p, trials);
        assert!((p - (-t).exp()).abs() <= 3.0 * se, "t={t}: {p}");
    }
    let half = top_two_gap_samples(40, 1.0, trials, 18).unwrap();
    let p = half.iter().filter(|&&g| g >= 0.5).count() as f64 / trials as f64;
    assert!((p - 0.6065).abs() <= 3.0 * bernoulli_std_error(p, trials) + 1e-4);
}

fn sorted_points(length: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.4999..0.4999f64, 0..40).prop_map(move |mut xs| {
        for x in &mut xs {
            *x *= length;
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    })
}

proptest! {
    #[test]
    fn lengths_partition_the_window(length in 0.5..1e4f64, unit in sorted_points(1.0)) {
        let points: Vec<f64> = unit.iter().map(|x| x * length).collect();
        let lengths = interval_lengths(length, &points).unwrap();
        prop_assert_eq!(lengths.len(), points.len() + 1);
        prop_assert!(lengths.iter().all(|&l| l >= 0.0));
        let total: f64 = lengths.iter().sum();
        prop_assert!((total - length).abs() <= 1e-12 * length);
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), length in 1.0..500.0f64, nu in 0.1..3.0f64) {
        let a = sample_on_window(length, nu, seed);
        let b = sample_on_window(length, nu, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.points().iter().all(|&x| x > -0.5 * length && x < 0.5 * length));
        prop_assert!(a.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn largest_length_beats_the_average(seed in any::<u64>(), length in 1.0..500.0f64) {
        let c = sample_on_window(length, 1.0, seed);
        let top = largest_lengths(&c, 1)[0];
        prop_assert!(top >= length / (c.count() + 1) as f64);
        let three = largest_lengths(&c, 3);
        prop_assert!(three.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn extension_restricts_to_the_original(seed in any::<u64>(), length in 1.0..200.0f64, grow in 1.0..3.0f64) {
        let base = sample_on_window(length, 1.0, seed);
        let wide = extend_configuration(&base, length * grow, seed ^ 1).unwrap();
        let restricted: Vec<f64> = wide
            .points()
            .iter()
            .copied()
            .filter(|&x| x > -0.5 * length && x < 0.5 * length)
            .collect();
        prop_assert_eq!(restricted.as_slice(), base.points());
        let again = Configuration::from_points(length, 1.0, restricted).unwrap();
        prop_assert_eq!(again.lengths(), base.lengths());
    }

    #[test]
    fn top_two_gap_is_nonnegative(k in 2usize..50, seed in any::<u64>()) {
        let gaps = top_two_gap_samples(k, 1.5, 20, seed).unwrap();
        prop_assert!(gaps.iter().all(|&g| g >= 0.0));
    }
}
