mod common;

use mlsmoke::catalog::{find_test, generate_dataset, Mode, SmokeTestId};
use mlsmoke::datagen::{
    apply_label_noise, empirical_quantile, rectangle_labels, sample_gamma, sample_uniform,
    FeatureColumn, GammaSpec, Label, LabelVector, RandomStream,
};
use proptest::prelude::*;

/// Nearest-rank quantile computed from a sorted copy.
fn oracle_quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p * values.len() as f64).ceil().max(1.0) as usize;
    sorted[rank - 1]
}

proptest! {
    #[test]
    fn quantile_sandwich(
        values in prop::collection::vec(-1e6f64..1e6, 1..300),
        p in 0.001f64..=1.0,
    ) {
        let q = empirical_quantile(&values, p).unwrap();
        let at_or_below = values.iter().filter(|v| **v <= q).count();
        prop_assert!(at_or_below as f64 >= (p * values.len() as f64).ceil());
        prop_assert!(values.contains(&q));
        prop_assert_eq!(q, oracle_quantile(&values, p));
    }

    #[test]
    fn rectangle_matches_definition(
        seed in any::<u64>(),
        n in 1usize..200,
        m in 1usize..6,
    ) {
        let mut s = RandomStream::new(seed);
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| s.next_f64()).collect())
            .collect();
        let labels = rectangle_labels(&cols).unwrap();
        let p = 0.5f64.powf(1.0 / m as f64);
        let q: Vec<f64> = cols.iter().map(|c| oracle_quantile(c, p)).collect();
        for (i, label) in labels.0.iter().enumerate() {
            let inside = cols.iter().zip(&q).all(|(c, qj)| c[i] < *qj);
            prop_assert_eq!(*label == Label::Class1, inside);
        }
    }

    #[test]
    fn uniform_stays_in_range(seed in any::<u64>(), lo in -1e3f64..1e3, width in 1e-12f64..1e3) {
        let mut s = RandomStream::new(seed);
        let hi = lo + width;
        let col = sample_uniform(&mut s, 500, lo, hi).unwrap();
        for v in col.as_numeric().unwrap() {
            prop_assert!(*v >= lo && *v < hi);
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), idx in 0usize..22) {
        let id = SmokeTestId::ALL[idx];
        let spec = find_test(Mode::Classification, id).unwrap();
        let a = generate_dataset(&spec, seed, 20, 3).unwrap();
        let b = generate_dataset(&spec, seed, 20, 3).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn noise_flip_count_is_binomial() {
    let n = 10_000;
    let p = 0.1;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for seed in 0..20u64 {
        let clean = LabelVector(vec![Label::Class0; n]);
        let mut s = RandomStream::new(seed);
        let noisy = apply_label_noise(&mut s, &clean, p).unwrap();
        let flips = noisy.count(Label::Class1) as f64;
        assert!(
            (flips - n as f64 * p).abs() <= 4.0 * sigma,
            "seed {seed}: {flips} flips"
        );
    }
}

#[test]
fn seeds_change_output() {
    let spec = find_test(Mode::Classification, SmokeTestId::UNIFORM).unwrap();
    let a = generate_dataset(&spec, 1, 50, 2).unwrap();
    let b = generate_dataset(&spec, 2, 50, 2).unwrap();
    assert_ne!(a.train.features, b.train.features);
}

#[test]
fn rectangle_informative_on_catalog_data() {
    use SmokeTestId::*;
    for id in [
        UNIFORM, MINFLOAT, VERYSMALL, MINDOUBLE, MAXFLOAT, VERYLARGE, MAXDOUBLE, LEFTSKEW,
        RIGHTSKEW, ZEROS, DISJNUM,
    ] {
        let spec = find_test(Mode::Classification, id).unwrap();
        for m in [1, 3, 5] {
            let d = generate_dataset(&spec, 7, 500, m).unwrap();
            let clean = d.train_clean_labels.as_ref().unwrap();
            let cols: Vec<&[f64]> = d
                .train
                .features
                .iter()
                .map(|c| c.as_numeric().unwrap())
                .collect();
            let p = 0.5f64.powf(1.0 / m as f64);
            let q: Vec<f64> = cols.iter().map(|c| oracle_quantile(c, p)).collect();
            for (i, label) in clean.0.iter().enumerate() {
                if *label == Label::Class1 {
                    assert!((0..m).all(|j| cols[j][i] < q[j]), "{id} m={m} row {i}");
                }
            }
        }
    }
}

#[test]
fn gamma_sampler_moments() {
    let spec = GammaSpec::new(0.1, 4.0).unwrap();
    let mut s = RandomStream::new(11);
    let col = sample_gamma(&mut s, 100_000, spec).unwrap();
    let FeatureColumn::Numeric(v) = col else {
        panic!("numeric expected")
    };
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    assert!((mean - 0.4).abs() <= 0.02, "mean {mean}");
    assert!((var - 1.6).abs() <= 0.4, "variance {var}");
    assert!(v.iter().all(|x| *x >= 0.0 && x.is_finite()));
}
