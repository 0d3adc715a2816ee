//! Frozen outputs, each first checked against an independent computation.

use approx::assert_abs_diff_eq;

use tracerec::eval::{run_cell, Algorithm, ExperimentConfig};
use tracerec::multi::smap_sequential_posterior;
use tracerec::oracle::{posterior_brute, Prior};
use tracerec::BitSeq;

fn b(s: &str) -> BitSeq {
    BitSeq::parse_binary(s).unwrap()
}

/// Two copies of "1010" at n = 6, chained through the posterior.
const SEQ_1010_TWICE: [f64; 6] = [
    0.962_942_534_675_637_5,
    0.348_848_341_499_127_13,
    0.375_204_144_844_286_77,
    0.624_795_855_155_713_2,
    0.651_151_658_500_873,
    0.037_057_465_324_362_555,
];

#[test]
fn sequential_two_equal_traces() {
    let y = b("1010");
    let q = smap_sequential_posterior(6, &[y.clone(), y.clone()]).unwrap();
    // oracle: enumerate the first posterior, then use it as the prior
    let first = posterior_brute(Prior::Uniform, std::slice::from_ref(&y), 6).unwrap();
    let second = posterior_brute(Prior::Bernoulli(&first), std::slice::from_ref(&y), 6).unwrap();
    for (a, c) in q.probs().iter().zip(&second) {
        assert_abs_diff_eq!(a, c, epsilon = 1e-12);
    }
    for (a, c) in q.probs().iter().zip(SEQ_1010_TWICE) {
        assert_abs_diff_eq!(*a, c, epsilon = 1e-12);
    }
    // "1010" is its own reversed complement, so the profile is antisymmetric
    for i in 0..6 {
        assert_abs_diff_eq!(q.probs()[i] + q.probs()[5 - i], 1.0, epsilon = 1e-12);
    }
}

/// Mean Hamming error of sequential MAP, n = 100, t = 2, delta = 0.1,
/// 500 trials, seed 2024, first cell.
const SEQ_HAMMING_N100: f64 = 0.2732;

#[test]
fn sequential_benchmark_value() {
    let cfg = ExperimentConfig {
        n: 100,
        trials: 500,
        seed: 2024,
        ..Default::default()
    };
    let records = run_cell(&cfg, 0, 0.1, 2, &[Algorithm::SmapSeq]).unwrap();
    let mean = records.iter().map(|r| r.errors[0].0).sum::<f64>() / records.len() as f64;
    assert_abs_diff_eq!(mean, SEQ_HAMMING_N100, epsilon = 1e-12);
}
