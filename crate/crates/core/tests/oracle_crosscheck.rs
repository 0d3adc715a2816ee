use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracerec::channel::transmit;
use tracerec::graph::{build_edit_graph, forward_potentials, marked_path_counts, reverse_potentials};
use tracerec::multi::{remnant_posterior, smap_exact, smap_exact_counts};
use tracerec::oracle::{marked_paths_brute, path_lengths_brute, posterior_brute, Prior};
use tracerec::{BigCount, BitSeq};

fn random_seq(rng: &mut ChaCha8Rng, n: usize) -> BitSeq {
    BitSeq::from_symbols((0..n).map(|_| rng.gen_range(0..2)).collect())
}

#[test]
fn smap_exact_two_traces_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(1..=8);
        let x = random_seq(&mut rng, n);
        let traces = vec![transmit(&x, 0.3, &mut rng), transmit(&x, 0.3, &mut rng)];
        let (q, _) = smap_exact(n, &traces).unwrap();
        let r = posterior_brute(Prior::Uniform, &traces, n).unwrap();
        for (a, b) in q.probs().iter().zip(&r) {
            assert!((a - b).abs() < 1e-9, "{traces:?} n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn potentials_match_dfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let t = rng.gen_range(1..=3);
        let traces: Vec<BitSeq> = (0..t)
            .map(|_| {
                let m = rng.gen_range(0..=4);
                random_seq(&mut rng, m)
            })
            .collect();
        let cap: usize = traces.iter().map(BitSeq::len).sum();
        let g = build_edit_graph(&traces).unwrap();
        let fwd = forward_potentials(&g, cap);
        let rev = reverse_potentials(&g, cap);
        let lengths = path_lengths_brute(&traces).unwrap();
        for k in 0..=cap {
            let want = lengths.get(k).cloned().unwrap_or_default();
            assert_eq!(fwd.at(g.destination()).coeff(k), want);
            assert_eq!(rev.at(g.origin()).coeff(k), want);
        }
        let marked = marked_path_counts(&g, &fwd, &rev, cap);
        let brute = marked_paths_brute(&traces, 1).unwrap();
        for k in 1..=cap {
            for j in 1..=k {
                let want = brute.get(k).map(|r| r[j].clone()).unwrap_or_else(BigCount::zero);
                assert_eq!(marked.get(j, k), &want, "{traces:?} j={j} k={k}");
            }
        }
    }
}

#[test]
fn remnant_small() {
    let traces = [BitSeq::parse_binary("001").unwrap(), BitSeq::parse_binary("101").unwrap()];
    let q = remnant_posterior(4, &traces).unwrap();
    let marked = marked_paths_brute(&traces, 1).unwrap();
    let total = &path_lengths_brute(&traces).unwrap()[4];
    let want = tracerec::seq::count_ratio(&marked[4][2], total);
    assert!((q.at(2) - want).abs() < 1e-15);
    let _ = smap_exact_counts(4, &traces).unwrap();
}
