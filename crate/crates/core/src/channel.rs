//! Deletion-channel samplers, exact likelihoods and the remnant-channel cascade.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{guard, Error, Result};
use crate::seq::{binomial_coeff, ln_count, BitSeq, Symbol};

/// Deletion probability, trace count and RNG seed of one channel setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    delta: f64,
    t: usize,
    seed: u64,
}

impl ChannelConfig {
    /// `delta` must lie in `[0, 1)` and `t >= 1`.
    pub fn new(delta: f64, t: usize, seed: u64) -> Result<Self> {
        check_delta(delta)?;
        if t == 0 {
            return Err(Error::NoTraces);
        }
        Ok(Self { delta, t, seed })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidDeletionProbability(delta))
    }
}

/// For each input symbol, the set of traces (bit `l` = trace `l`) in which it
/// survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionPattern {
    kept: Vec<u32>,
    t: usize,
}

impl DeletionPattern {
    pub fn new(kept: Vec<u32>, t: usize) -> Self {
        debug_assert!(t <= 32);
        Self { kept, t }
    }

    pub fn kept(&self) -> &[u32] {
        &self.kept
    }

    /// True when every symbol survives in at least one trace, as the remnant
    /// channel requires.
    pub fn is_remnant(&self) -> bool {
        self.kept.iter().all(|&s| s != 0)
    }

    pub fn apply(&self, x: &BitSeq) -> Vec<BitSeq> {
        assert_eq!(x.len(), self.kept.len());
        (0..self.t)
            .map(|l| {
                let bit = 1u32 << l;
                x.symbols()
                    .iter()
                    .zip(&self.kept)
                    .filter(|(_, &k)| k & bit != 0)
                    .map(|(&s, _)| s)
                    .collect::<Vec<Symbol>>()
                    .into()
            })
            .collect()
    }
}

/// One pass through the deletion channel.
pub fn transmit<R: Rng + ?Sized>(x: &BitSeq, delta: f64, rng: &mut R) -> BitSeq {
    x.symbols()
        .iter()
        .copied()
        .filter(|_| !rng.gen_bool(delta))
        .collect::<Vec<_>>()
        .into()
}

/// `t` independent passes of the same input.
pub fn transmit_t<R: Rng + ?Sized>(x: &BitSeq, cfg: &ChannelConfig, rng: &mut R) -> Vec<BitSeq> {
    (0..cfg.t).map(|_| transmit(x, cfg.delta, rng)).collect()
}

/// Draws a nonempty subset of `[t]` with `Pr(S) ∝ δ^(t-|S|) (1-δ)^|S|`.
fn remnant_subset<R: Rng + ?Sized>(delta: f64, t: usize, rng: &mut R) -> u32 {
    // rejection of the empty set gives exactly the normalized law
    loop {
        let mut s = 0u32;
        for l in 0..t {
            if !rng.gen_bool(delta) {
                s |= 1 << l;
            }
        }
        if s != 0 {
            return s;
        }
    }
}

/// The remnant channel: every symbol of `z` lands in a nonempty random subset
/// of the `t` outputs.
pub fn transmit_remnant<R: Rng + ?Sized>(z: &BitSeq, cfg: &ChannelConfig, rng: &mut R) -> Vec<BitSeq> {
    let kept = (0..z.len())
        .map(|_| remnant_subset(cfg.delta, cfg.t, rng))
        .collect();
    DeletionPattern::new(kept, cfg.t).apply(z)
}

/// Deletion channel with parameter `δ^t` followed by the remnant channel.
pub fn transmit_cascade<R: Rng + ?Sized>(x: &BitSeq, cfg: &ChannelConfig, rng: &mut R) -> Vec<BitSeq> {
    let z = transmit(x, cfg.delta.powi(cfg.t as i32), rng);
    transmit_remnant(&z, cfg, rng)
}

/// `Pr(Y = y | X = x) = binom(x, y) δ^(|x|-|y|) (1-δ)^|y|`.
pub fn likelihood(x: &BitSeq, y: &BitSeq, delta: f64) -> f64 {
    if y.len() > x.len() {
        return 0.0;
    }
    let count = binomial_coeff(x, y);
    if count.is_zero() {
        return 0.0;
    }
    let del = (x.len() - y.len()) as i32;
    let keep = y.len() as i32;
    match count.to_f64() {
        Some(c) if c.is_finite() => c * delta.powi(del) * (1.0 - delta).powi(keep),
        _ => (ln_count(&count) + f64::from(del) * delta.ln() + f64::from(keep) * (1.0 - delta).ln()).exp(),
    }
}

/// How the joint trace law is generated in [`joint_trace_distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    /// `t` independent deletion channels.
    Independent,
    /// Deletion channel with `δ^t` followed by the remnant channel.
    Cascade,
}

/// Exact joint law of the `t` traces, keyed by the trace tuple.
pub type TraceDistribution = BTreeMap<Vec<BitSeq>, BigRational>;

pub const JOINT_PATTERN_LIMIT: u128 = 1 << 24;

/// Exact rational joint distribution of the traces given `x`, by enumerating
/// deletion patterns.
pub fn joint_trace_distribution(
    x: &BitSeq,
    delta: &BigRational,
    t: usize,
    mode: JointMode,
) -> Result<TraceDistribution> {
    if t == 0 {
        return Err(Error::NoTraces);
    }
    if delta < &BigRational::zero() || delta >= &BigRational::one() {
        return Err(Error::InvalidDeletionProbability(delta.to_f64().unwrap_or(f64::NAN)));
    }
    let n = x.len();
    let patterns = 1u128
        .checked_shl((t * n) as u32)
        .filter(|_| t * n < 128)
        .unwrap_or(u128::MAX);
    guard("deletion pattern count", patterns, JOINT_PATTERN_LIMIT)?;

    let one = BigRational::one();
    let keep = &one - delta;
    let pow = |b: &BigRational, e: usize| -> BigRational { num_traits::pow(b.clone(), e) };

    let mut dist = TraceDistribution::new();
    match mode {
        JointMode::Independent => {
            // per-symbol subset probability δ^(t-|S|) (1-δ)^|S|
            let subset_prob: Vec<BigRational> = (0..1u32 << t)
                .map(|s| {
                    let k = s.count_ones() as usize;
                    pow(delta, t - k) * pow(&keep, k)
                })
                .collect();
            let mut kept = vec![0u32; n];
            enumerate_patterns(&mut kept, 0, 0, 1 << t, &mut |kept| {
                let prob = kept
                    .iter()
                    .fold(one.clone(), |acc, &s| acc * &subset_prob[s as usize]);
                let traces = DeletionPattern::new(kept.to_vec(), t).apply(x);
                *dist.entry(traces).or_insert_with(BigRational::zero) += prob;
            });
        }
        JointMode::Cascade => {
            let delta_t = pow(delta, t);
            let survive = &one - &delta_t;
            let remnant_prob: Vec<BigRational> = (0..1u32 << t)
                .map(|s| {
                    if s == 0 {
                        return BigRational::zero();
                    }
                    let k = s.count_ones() as usize;
                    pow(delta, t - k) * pow(&keep, k) / &survive
                })
                .collect();
            for mask in 0u64..(1u64 << n) {
                let z: Vec<Symbol> = (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| x.symbols()[i])
                    .collect();
                let r = z.len();
                let first = pow(&delta_t, n - r) * pow(&survive, r);
                let z = BitSeq::from_symbols(z);
                let mut kept = vec![0u32; r];
                enumerate_patterns(&mut kept, 0, 1, 1 << t, &mut |kept| {
                    let prob = kept
                        .iter()
                        .fold(first.clone(), |acc, &s| acc * &remnant_prob[s as usize]);
                    let traces = DeletionPattern::new(kept.to_vec(), t).apply(&z);
                    *dist.entry(traces).or_insert_with(BigRational::zero) += prob;
                });
            }
        }
    }
    Ok(dist)
}

fn enumerate_patterns(kept: &mut [u32], pos: usize, lo: u32, hi: u32, visit: &mut dyn FnMut(&[u32])) {
    if pos == kept.len() {
        visit(kept);
        return;
    }
    for s in lo..hi {
        kept[pos] = s;
        enumerate_patterns(kept, pos + 1, lo, hi, visit);
    }
}

/// `num/den` as an exact rational.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
