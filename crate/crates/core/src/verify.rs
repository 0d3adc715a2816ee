//! Oracle-equivalence suites: each production routine against its
//! brute-force counterpart on small instances.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{joint_trace_distribution, rational, transmit, JointMode};
use crate::error::{Error, Result};
use crate::graph::{build_edit_graph, forward_potentials, infiltration, infiltration_many};
use crate::multi::smap_exact;
use crate::oracle::{all_paths_brute, binomial_brute, path_lengths_brute, posterior_brute, Prior};
use crate::relaxed::PriorVec;
use crate::seq::{binomial_coeff, choose, BitSeq};
use crate::single::posterior_single;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Binomial,
    Posterior,
    Infiltration,
    Equivalence,
    All,
}

impl Suite {
    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Binomial, Suite::Posterior, Suite::Infiltration, Suite::Equivalence],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(Suite::Binomial),
            "posterior" => Ok(Suite::Posterior),
            "infiltration" => Ok(Suite::Infiltration),
            "equivalence" => Ok(Suite::Equivalence),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    /// Largest absolute difference, or the number of mismatches for exact checks.
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} cases={:<8} max_dev={:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_deviation,
            self.tolerance
        )
    }
}

fn all_binary(n: usize) -> impl Iterator<Item = BitSeq> {
    (0..1u64 << n).map(move |bits| BitSeq::from_bits(bits, n))
}

fn random_seq(rng: &mut ChaCha8Rng, n: usize) -> BitSeq {
    BitSeq::from_symbols((0..n).map(|_| rng.gen_range(0..2)).collect())
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for part in suite.parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match part {
            Suite::Binomial => {
                out.push(binomial_exhaustive(8)?);
                out.push(binomial_unary()?);
            }
            Suite::Posterior => {
                out.push(posterior_single_check(&mut rng, 40, 10)?);
                out.push(smap_check(&mut rng, 30, 8, 2)?);
                out.push(smap_check(&mut rng, 15, 6, 3)?);
            }
            Suite::Infiltration => {
                out.push(path_duality(&mut rng, 40)?);
                out.push(lemma4(&mut rng, 100)?);
                out.push(path_lengths(&mut rng, 40)?);
            }
            Suite::Equivalence => {
                out.push(channel_equivalence(4, 2)?);
                out.push(channel_equivalence(2, 3)?);
            }
            Suite::All => unreachable!(),
        }
    }
    Ok(out)
}

/// Word binomial against subset enumeration for every binary `f` up to
/// `max_len` and every `g` no longer than `f`.
pub fn binomial_exhaustive(max_len: usize) -> Result<CheckResult> {
    let mut cases = 0;
    let mut bad = 0;
    for nf in 0..=max_len {
        for f in all_binary(nf) {
            for ng in 0..=nf {
                for g in all_binary(ng) {
                    cases += 1;
                    if binomial_coeff(&f, &g) != binomial_brute(&f, &g)? {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok(CheckResult {
        name: "word binomial vs subset enumeration",
        cases,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

fn binomial_unary() -> Result<CheckResult> {
    let mut cases = 0;
    let mut bad = 0;
    for n in 0..=12 {
        let f = BitSeq::from_symbols(vec![0; n]);
        for k in 0..=n {
            cases += 1;
            if binomial_coeff(&f, &BitSeq::from_symbols(vec![0; k])) != choose(n, k) {
                bad += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "unary word binomial vs classical binomial",
        cases,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

/// Single-trace posteriors under random priors against full enumeration.
pub fn posterior_single_check(rng: &mut ChaCha8Rng, instances: usize, max_n: usize) -> Result<CheckResult> {
    let mut dev = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range(1..=max_n);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..0.98)).collect();
        let m = rng.gen_range(0..=n);
        let y = random_seq(rng, m);
        let q = posterior_single(&PriorVec::new(p.clone())?, &y)?;
        let r = posterior_brute(Prior::Bernoulli(&p), std::slice::from_ref(&y), n)?;
        for (a, b) in q.probs().iter().zip(&r) {
            dev = dev.max((a - b).abs());
        }
    }
    Ok(CheckResult {
        name: "single-trace posterior vs enumeration",
        cases: instances,
        max_deviation: dev,
        tolerance: 1e-9,
    })
}

/// Exact t-trace posteriors against full enumeration, traces drawn from the channel.
pub fn smap_check(rng: &mut ChaCha8Rng, instances: usize, max_n: usize, t: usize) -> Result<CheckResult> {
    let mut dev = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range(1..=max_n);
        let x = random_seq(rng, n);
        let delta = rng.gen_range(0.1..0.6);
        let traces: Vec<BitSeq> = (0..t).map(|_| transmit(&x, delta, rng)).collect();
        let (q, _) = smap_exact(n, &traces)?;
        let r = posterior_brute(Prior::Uniform, &traces, n)?;
        for (a, b) in q.probs().iter().zip(&r) {
            dev = dev.max((a - b).abs());
        }
    }
    Ok(CheckResult {
        name: if t == 2 {
            "exact MAP, two traces, vs enumeration"
        } else {
            "exact MAP, three traces, vs enumeration"
        },
        cases: instances,
        max_deviation: dev,
        tolerance: 1e-9,
    })
}

fn path_duality(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..instances {
        let nf = rng.gen_range(0..=6);
        let ng = rng.gen_range(0..=6);
        let f = random_seq(rng, nf);
        let g = random_seq(rng, ng);
        let prod = infiltration(&f, &g)?;
        let paths = all_paths_brute(&[f, g])?;
        let same = prod.len() == paths.len() && prod.terms().all(|(w, c)| paths.get(w) == Some(c));
        if !same {
            bad += 1;
        }
    }
    Ok(CheckResult {
        name: "infiltration vs edit-graph path spelling",
        cases: instances,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

/// `∏_j ⟨h choose f_j⟩ = Σ_w ⟨f_1 ↑ … ↑ f_m, w⟩ ⟨h choose w⟩` on random instances.
pub fn lemma4(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..instances {
        let nh = rng.gen_range(0..=8);
        let h = random_seq(rng, nh);
        let m = rng.gen_range(1..=3);
        let fs: Vec<BitSeq> = (0..m)
            .map(|_| {
                let k = rng.gen_range(0..=4);
                random_seq(rng, k)
            })
            .collect();
        let mut lhs = BigUint::one();
        for f in &fs {
            lhs *= binomial_brute(&h, f)?;
        }
        let mut rhs = BigUint::zero();
        for (w, c) in infiltration_many(&fs)?.terms() {
            if w.len() <= h.len() {
                rhs += c * binomial_brute(&h, w)?;
            }
        }
        if lhs != rhs {
            bad += 1;
        }
    }
    Ok(CheckResult {
        name: "binomial product vs infiltration expansion",
        cases: instances,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

fn path_lengths(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..instances {
        let t = rng.gen_range(1..=3);
        let traces: Vec<BitSeq> = (0..t)
            .map(|_| {
                let k = rng.gen_range(0..=4);
                random_seq(rng, k)
            })
            .collect();
        let cap: usize = traces.iter().map(BitSeq::len).sum();
        let g = build_edit_graph(&traces)?;
        let fwd = forward_potentials(&g, cap);
        let brute = path_lengths_brute(&traces)?;
        for k in 0..=cap {
            if fwd.at(g.destination()).coeff(k) != brute.get(k).cloned().unwrap_or_default() {
                bad += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "forward potentials vs path enumeration",
        cases: instances,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

/// Independent and cascade trace laws for every binary input up to `max_len`.
pub fn channel_equivalence(max_len: usize, t: usize) -> Result<CheckResult> {
    let mut cases = 0;
    let mut bad = 0;
    for delta in [rational(1, 10), rational(1, 2), rational(9, 10)] {
        for n in 0..=max_len {
            for x in all_binary(n) {
                cases += 1;
                let a = joint_trace_distribution(&x, &delta, t, JointMode::Independent)?;
                let b = joint_trace_distribution(&x, &delta, t, JointMode::Cascade)?;
                if a != b {
                    bad += 1;
                }
            }
        }
    }
    Ok(CheckResult {
        name: if t == 2 {
            "two-trace channel vs cascade, exact"
        } else {
            "three-trace channel vs cascade, exact"
        },
        cases,
        max_deviation: bad as f64,
        tolerance: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("some".parse::<Suite>().is_err());
    }

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::Infiltration, Suite::Equivalence] {
            for check in run_suite(suite, 1).unwrap() {
                assert!(check.passed(), "{check}");
            }
        }
    }
}
