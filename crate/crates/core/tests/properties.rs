use approx::assert_abs_diff_eq;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracerec::bma::bma;
use tracerec::channel::{likelihood, transmit};
use tracerec::graph::{build_edit_graph, forward_potentials, infiltration, infiltration_many, InfiltrationPoly};
use tracerec::multi::{ml_exhaustive_traces, smap_exact, smap_exact_counts, SmapWeights};
use tracerec::oracle::{binomial_brute, fill_count_brute, posterior_brute, Prior};
use tracerec::relaxed::{f_decompose, f_tables, f_value};
use tracerec::seq::binomial_coeff;
use tracerec::single::{coordinate_switch, grad_ascent_single, ml_exhaustive, posterior_single};
use tracerec::{BigCount, BitSeq, GradAscentConfig, PriorVec};

fn bits(max: usize) -> impl Strategy<Value = BitSeq> {
    prop::collection::vec(0u8..2, 0..=max).prop_map(BitSeq::from_symbols)
}

fn bits_exact(n: usize) -> impl Strategy<Value = BitSeq> {
    prop::collection::vec(0u8..2, n).prop_map(BitSeq::from_symbols)
}

fn priors(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.99, n)
}

fn random_seq(rng: &mut ChaCha8Rng, n: usize) -> BitSeq {
    BitSeq::from_symbols((0..n).map(|_| rng.gen_range(0..2)).collect())
}

fn all_binary(n: usize) -> impl Iterator<Item = BitSeq> {
    (0..1u64 << n).map(move |b| BitSeq::from_bits(b, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn binomial_matches_enumeration(f in bits(10), g in bits(10)) {
        let c = binomial_coeff(&f, &g);
        if g.len() > f.len() {
            prop_assert!(c.is_zero());
        } else {
            prop_assert_eq!(c, binomial_brute(&f, &g).unwrap());
        }
    }

    #[test]
    fn integral_priors_collapse(x in bits(10), v in bits(10)) {
        let f = f_value(&PriorVec::from_seq(&x), &v);
        prop_assert_eq!(f, binomial_coeff(&x, &v).to_f64().unwrap());
    }

    #[test]
    fn relaxed_value_is_an_expectation((p, v) in (1usize..=9).prop_flat_map(|n| (priors(n), bits(n)))) {
        let n = p.len();
        let mut expect = 0.0;
        for z in all_binary(n) {
            let pr: f64 = z.symbols().iter().zip(&p).map(|(&s, &pi)| if s == 1 { pi } else { 1.0 - pi }).product();
            expect += pr * binomial_coeff(&z, &v).to_f64().unwrap();
        }
        assert_abs_diff_eq!(f_value(&PriorVec::new(p).unwrap(), &v), expect, epsilon = 1e-10);
    }

    #[test]
    fn affine_in_each_coordinate((p, v, i) in (1usize..=12).prop_flat_map(|n| (priors(n), bits(n), 1..=n))) {
        prop_assume!(!v.is_empty());
        let pv = PriorVec::new(p).unwrap();
        let (base, c1, c0) = f_decompose(&pv, &v, i).unwrap();
        for s in [0.0, 0.37, 1.0] {
            let moved = pv.substitute(i, s).unwrap();
            let lhs = f_value(&moved, &v);
            let rhs = base + s * c1 + (1.0 - s) * c0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_central_differences((p, v) in (1usize..=20).prop_flat_map(|n| (priors(n), bits(n)))) {
        prop_assume!(!v.is_empty());
        let pv = PriorVec::new(p.clone()).unwrap();
        let grad = f_tables(&pv, &v).gradient();
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        prop_assume!(scale > 0.0);
        let h = 1e-6;
        for i in 1..=p.len() {
            let up = f_value(&pv.substitute(i, p[i - 1] + h).unwrap(), &v);
            let down = f_value(&pv.substitute(i, p[i - 1] - h).unwrap(), &v);
            let fd = (up - down) / (2.0 * h);
            prop_assert!((fd - grad[i - 1]).abs() <= 1e-6 * scale, "i={} fd={} grad={}", i, fd, grad[i - 1]);
        }
    }

    #[test]
    fn posteriors_of_both_symbols_sum_to_one((p, y) in (1usize..=10).prop_flat_map(|n| (priors(n), bits(n)))) {
        let q1 = posterior_single(&PriorVec::new(p.clone()).unwrap(), &y).unwrap();
        let flipped: Vec<f64> = p.iter().map(|pi| 1.0 - pi).collect();
        let q0 = posterior_single(&PriorVec::new(flipped).unwrap(), &y.complemented()).unwrap();
        for (a, b) in q1.probs().iter().zip(q0.probs()) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_rises_with_prior((p, y, i) in (2usize..=10).prop_flat_map(|n| (priors(n), bits(n), 1..=n))) {
        let pv = PriorVec::new(p.clone()).unwrap();
        // q_i = p·A / (p·A + (1-p)·B), strictly increasing in p when A, B > 0
        let (a, b) = if y.is_empty() {
            (1.0, 1.0)
        } else {
            let (base, c1, c0) = f_decompose(&pv, &y, i).unwrap();
            (base + c1, base + c0)
        };
        let lo = posterior_single(&pv, &y).unwrap().at(i);
        let hi = posterior_single(&pv.substitute(i, p[i - 1] + 0.005).unwrap(), &y).unwrap().at(i);
        if a > 0.0 && b > 0.0 {
            prop_assert!(hi > lo);
        } else {
            prop_assert!(hi >= lo);
        }
    }

    #[test]
    fn single_trace_posterior_matches_enumeration((p, y) in (1usize..=10).prop_flat_map(|n| (priors(n), bits(n)))) {
        let q = posterior_single(&PriorVec::new(p.clone()).unwrap(), &y).unwrap();
        let r = posterior_brute(Prior::Bernoulli(&p), std::slice::from_ref(&y), p.len()).unwrap();
        for (a, b) in q.probs().iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn infiltration_commutes(f in bits(5), g in bits(5)) {
        prop_assert_eq!(infiltration(&f, &g).unwrap(), infiltration(&g, &f).unwrap());
    }

    #[test]
    fn infiltration_associates(f in bits(3), g in bits(3), h in bits(3)) {
        let left = infiltration(&f, &g).unwrap().infiltrate(&h).unwrap();
        let right = InfiltrationPoly::monomial(f.clone())
            .infiltrate_poly(&infiltration(&g, &h).unwrap())
            .unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn infiltration_degree_bounds(f in bits(6), g in bits(6)) {
        let lo = f.len().max(g.len());
        let hi = f.len() + g.len();
        for (w, c) in infiltration(&f, &g).unwrap().terms() {
            prop_assert!(!c.is_zero());
            prop_assert!(w.len() >= lo && w.len() <= hi);
        }
    }

    #[test]
    fn path_lengths_match_infiltration(traces in prop::collection::vec(bits(3), 1..=3)) {
        let cap: usize = traces.iter().map(BitSeq::len).sum();
        let g = build_edit_graph(&traces).unwrap();
        let fwd = forward_potentials(&g, cap);
        let poly = infiltration_many(&traces).unwrap();
        for k in 0..=cap {
            let mut by_len = BigCount::zero();
            for (w, c) in poly.terms() {
                if w.len() == k {
                    by_len += c;
                }
            }
            prop_assert_eq!(fwd.at(g.destination()).coeff(k), by_len);
        }
    }

    #[test]
    fn binomial_product_expands_through_infiltration(h in bits(8), fs in prop::collection::vec(bits(4), 1..=3)) {
        let mut lhs = BigUint::one();
        for f in &fs {
            lhs *= binomial_coeff(&h, f);
        }
        let mut rhs = BigUint::zero();
        for (w, c) in infiltration_many(&fs).unwrap().terms() {
            rhs += c * binomial_coeff(&h, w);
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fill_count_closed_form((n, i, g) in (1usize..=9).prop_flat_map(|n| (Just(n), 1..=n, bits(n))), a in 0u8..2) {
        let w = SmapWeights::new(n);
        let k = g.len();
        let mut closed = w.half(k);
        for j in 1..=k {
            if g.at(j) == a {
                closed += w.pos(i, j, k);
            }
        }
        prop_assert_eq!(fill_count_brute(n, i, a, &g).unwrap(), closed);
    }

    #[test]
    fn smap_reversal_symmetry(x in bits_exact(8), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traces: Vec<BitSeq> = (0..2).map(|_| transmit(&x, 0.3, &mut rng)).collect();
        let rev: Vec<BitSeq> = traces.iter().map(BitSeq::reversed).collect();
        let a = smap_exact_counts(8, &traces).unwrap();
        let b = smap_exact_counts(8, &rev).unwrap();
        prop_assert_eq!(&a.denominator, &b.denominator);
        for i in 1..=8 {
            prop_assert_eq!(&a.numerators[i - 1], &b.numerators[8 - i]);
        }
    }

    #[test]
    fn smap_bit_flip_equivariance(x in bits_exact(8), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traces: Vec<BitSeq> = (0..2).map(|_| transmit(&x, 0.3, &mut rng)).collect();
        let flipped: Vec<BitSeq> = traces.iter().map(BitSeq::complemented).collect();
        let a = smap_exact_counts(8, &traces).unwrap();
        let b = smap_exact_counts(8, &flipped).unwrap();
        prop_assert_eq!(&a.denominator, &b.denominator);
        for i in 0..8 {
            prop_assert_eq!(&a.numerators[i] + &b.numerators[i], a.denominator.clone());
        }
    }

    #[test]
    fn smap_denominator_counts_all_inputs(traces in prop::collection::vec(bits(5), 1..=3), extra in 0usize..3) {
        let n = traces.iter().map(BitSeq::len).max().unwrap() + extra;
        prop_assume!(n > 0);
        let mut brute = BigUint::zero();
        for x in all_binary(n) {
            let mut prod = BigUint::one();
            for y in &traces {
                prod *= binomial_brute(&x, y).unwrap();
            }
            brute += prod;
        }
        match smap_exact_counts(n, &traces) {
            Ok(counts) => prop_assert_eq!(counts.denominator, brute),
            Err(e) => {
                prop_assert_eq!(e, tracerec::Error::UnreachableLength { n });
                prop_assert!(brute.is_zero());
            }
        }
    }

    #[test]
    fn bma_length_and_identity(x in bits(20), t in prop::sample::select(vec![1usize, 3, 5]), n in 0usize..25) {
        let traces = vec![x.clone(); t];
        prop_assert_eq!(bma(x.len(), &traces), x.clone());
        prop_assert_eq!(bma(n, &traces).len(), n);
        prop_assert_eq!(bma(n, &traces), bma(n, &traces));
    }
}

#[test]
fn likelihoods_sum_to_one() {
    for n in 0..=8 {
        for x in all_binary(n) {
            for delta in [0.1, 0.5, 0.9] {
                let mut total = 0.0;
                for m in 0..=n {
                    for y in all_binary(m) {
                        total += likelihood(&x, &y, delta);
                    }
                }
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn trace_length_mean_concentrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_seq(&mut rng, 50);
    let delta = 0.3;
    let trials = 10_000;
    let total: usize = (0..trials).map(|_| transmit(&x, delta, &mut rng).len()).sum();
    let mean = total as f64 / trials as f64;
    let sigma = (50.0 * delta * (1.0 - delta) / trials as f64).sqrt();
    assert!((mean - 35.0).abs() < 4.0 * sigma, "mean {mean}");
}

#[test]
fn lattice_maximum_bounds_interior_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(1..=n);
        let y = random_seq(&mut rng, m);
        let best = ml_exhaustive(n, &y).unwrap().max.to_f64().unwrap();
        let mut attained = false;
        for _ in 0..200 {
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.99)).collect();
            let pv = PriorVec::new(p).unwrap();
            assert!(f_value(&pv, &y) <= best * (1.0 + 1e-12));
            let tables = f_tables(&pv, &y);
            for i in 1..=n {
                let (one, zero) = tables.endpoint_values(i);
                assert!(one.max(zero) >= f_value(&pv, &y) * (1.0 - 1e-12));
            }
            let x = coordinate_switch(&pv, &y).unwrap();
            let got = binomial_coeff(&x, &y).to_f64().unwrap();
            assert!(got <= best);
            attained |= got == best;
        }
        assert!(attained, "y={y} n={n}");
    }
}

#[test]
fn ascent_reaches_most_of_the_maximum() {
    let y = BitSeq::parse_binary("10111").unwrap();
    let best = ml_exhaustive(10, &y).unwrap().max.to_f64().unwrap();
    let mut good = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p0 = PriorVec::new((0..10).map(|_| rng.gen_range(0.3..0.7)).collect()).unwrap();
        let x = grad_ascent_single(10, &y, &GradAscentConfig::default(), Some(&p0)).unwrap();
        if binomial_coeff(&x, &y).to_f64().unwrap() >= 0.8 * best {
            good += 1;
        }
    }
    assert!(good >= 40, "{good}/50");
}

#[test]
fn interior_start_beats_lattice_start_on_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let n = 10;
    let (mut interior, mut lattice) = (0.0, 0.0);
    for _ in 0..100 {
        let x = random_seq(&mut rng, n);
        let y = transmit(&x, 0.3, &mut rng);
        let mut padded = y.symbols().to_vec();
        padded.resize(n, 0);
        let a = coordinate_switch(&PriorVec::uniform(n), &y).unwrap();
        let b = coordinate_switch(&PriorVec::from_seq(&BitSeq::from_symbols(padded)), &y).unwrap();
        interior += binomial_coeff(&a, &y).to_f64().unwrap();
        lattice += binomial_coeff(&b, &y).to_f64().unwrap();
    }
    assert!(interior >= lattice, "{interior} < {lattice}");
}

#[test]
fn ml_traces_agree_with_infiltration_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let x = random_seq(&mut rng, 8);
        let traces: Vec<BitSeq> = (0..2).map(|_| transmit(&x, 0.3, &mut rng)).collect();
        let set = ml_exhaustive_traces(8, &traces).unwrap();
        let poly = infiltration_many(&traces).unwrap();
        let mut best = BigUint::zero();
        let mut argmax = Vec::new();
        for z in all_binary(8) {
            let mut v = BigUint::zero();
            for (w, c) in poly.terms() {
                v += c * binomial_coeff(&z, w);
            }
            if v > best {
                best = v;
                argmax = vec![z];
            } else if v == best && !v.is_zero() {
                argmax.push(z);
            }
        }
        assert_eq!(set.max, best);
        assert_eq!(set.argmax, argmax);
    }
}

#[test]
fn ml_single_matches_ml_traces() {
    for y in ["000100", "10111", "1010"] {
        let y = BitSeq::parse_binary(y).unwrap();
        assert_eq!(ml_exhaustive(10, &y).unwrap(), ml_exhaustive_traces(10, &[y]).unwrap());
    }
}

#[test]
fn smap_exact_single_trace_equals_posterior_single() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let n = rng.gen_range(1..=30);
        let x = random_seq(&mut rng, n);
        let y = transmit(&x, 0.4, &mut rng);
        let (q, _) = smap_exact(n, std::slice::from_ref(&y)).unwrap();
        let r = posterior_single(&PriorVec::uniform(n), &y).unwrap();
        for (a, b) in q.probs().iter().zip(r.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
