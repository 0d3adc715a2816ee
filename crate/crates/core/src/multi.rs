//! Estimators that combine t traces.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{guard, Error, Result};
use crate::graph::{
    build_edit_graph, forward_potentials_within, marked_path_counts, reverse_potentials_within,
    MarkedCounts,
};
use crate::relaxed::{Ext, FTables, PriorVec};
use crate::seq::{binomial_u128, binomial_coeff, count_ratio, pascal, BigCount, BitSeq};
use crate::single::{ascend, check_trace, posterior_single, AscentOutcome, GradAscentConfig, PosteriorVec};

/// The combinatorial weights of the uniform-prior posterior:
/// `w_half[k] = 2^(n-k-1)·C(n-1,k)`, `w_pos(i,j,k) = 2^(n-k)·C(i-1,j-1)·C(n-i,k-j)`
/// and `w_den[k] = 2^(n-k)·C(n,k)`.
#[derive(Debug, Clone)]
pub struct SmapWeights {
    n: usize,
    pascal: Vec<Vec<BigCount>>,
}

impl SmapWeights {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            pascal: pascal(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn c(&self, a: usize, b: usize) -> &BigCount {
        static ZERO: BigCount = BigCount::ZERO;
        if b > a {
            &ZERO
        } else {
            &self.pascal[a][b]
        }
    }

    pub fn half(&self, k: usize) -> BigCount {
        if self.n == 0 || k >= self.n {
            return BigCount::zero();
        }
        self.c(self.n - 1, k) << (self.n - k - 1)
    }

    pub fn pos(&self, i: usize, j: usize, k: usize) -> BigCount {
        let n = self.n;
        if i == 0 || i > n || j == 0 || j > k || k > n || j > i || k - j > n - i {
            return BigCount::zero();
        }
        (self.c(i - 1, j - 1) * self.c(n - i, k - j)) << (n - k)
    }

    pub fn den(&self, k: usize) -> BigCount {
        if k > self.n {
            return BigCount::zero();
        }
        self.c(self.n, k) << (self.n - k)
    }
}

/// Exact numerators and the shared denominator of the uniform-prior
/// posteriors: `q_i = numerators[i-1] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmapCounts {
    pub numerators: Vec<BigCount>,
    pub denominator: BigCount,
}

impl SmapCounts {
    pub fn posterior(&self) -> PosteriorVec {
        PosteriorVec::from_vec(
            self.numerators
                .iter()
                .map(|a| count_ratio(a, &self.denominator))
                .collect(),
        )
    }

    /// `X̂_i = 1` iff `2·num_i >= den`, decided without rounding.
    pub fn estimate(&self) -> BitSeq {
        BitSeq::from_symbols(
            self.numerators
                .iter()
                .map(|a| u8::from((a << 1u32) >= self.denominator))
                .collect(),
        )
    }
}

struct PathCounts {
    /// `P[k]`: number of `k`-edge origin→destination paths.
    lengths: Vec<BigCount>,
    marked: MarkedCounts,
}

fn path_counts(n: usize, traces: &[BitSeq]) -> Result<PathCounts> {
    for y in traces {
        check_trace(n, y)?;
    }
    let g = build_edit_graph(traces)?;
    let fwd = forward_potentials_within(&g, n);
    let rev = reverse_potentials_within(&g, n);
    let lengths = fwd.at(g.destination()).to_dense(n);
    let marked = marked_path_counts(&g, &fwd, &rev, n);
    Ok(PathCounts { lengths, marked })
}

/// Exact numerators and denominator behind [`smap_exact`].
pub fn smap_exact_counts(n: usize, traces: &[BitSeq]) -> Result<SmapCounts> {
    let pc = path_counts(n, traces)?;
    let w = SmapWeights::new(n);
    let ks: Vec<usize> = (0..=n).filter(|&k| !pc.lengths[k].is_zero()).collect();
    let mut denominator = BigCount::zero();
    let mut half = BigCount::zero();
    for &k in &ks {
        denominator += w.den(k) * &pc.lengths[k];
        half += w.half(k) * &pc.lengths[k];
    }
    if denominator.is_zero() {
        // no length-n input contains every trace, e.g. "01" and "10" with n = 2
        return Err(Error::UnreachableLength { n });
    }
    let mut numerators = Vec::with_capacity(n);
    for i in 1..=n {
        let mut acc = half.clone();
        for &k in &ks {
            let row = pc.marked.row(k);
            let lo = 1.max((k + i).saturating_sub(n));
            let hi = i.min(k);
            let mut inner = BigCount::zero();
            for j in lo..=hi {
                let m = &row[j];
                if !m.is_zero() {
                    inner += w.c(i - 1, j - 1) * w.c(n - i, k - j) * m;
                }
            }
            acc += inner << (n - k);
        }
        numerators.push(acc);
    }
    Ok(SmapCounts {
        numerators,
        denominator,
    })
}

/// Exact symbolwise MAP under uniform priors: posteriors and the thresholded estimate.
pub fn smap_exact(n: usize, traces: &[BitSeq]) -> Result<(PosteriorVec, BitSeq)> {
    let counts = smap_exact_counts(n, traces)?;
    Ok((counts.posterior(), counts.estimate()))
}

/// Posteriors of a length-`n` input of the remnant channel: the fraction of
/// `n`-edge origin→destination paths whose `i`-th edge spells `1`.
pub fn remnant_posterior(n: usize, traces: &[BitSeq]) -> Result<PosteriorVec> {
    let pc = path_counts(n, traces)?;
    let total = &pc.lengths[n];
    if total.is_zero() {
        return Err(Error::UnreachableLength { n });
    }
    let row = pc.marked.row(n);
    Ok(PosteriorVec::from_vec(
        (1..=n).map(|i| count_ratio(&row[i], total)).collect(),
    ))
}

/// Feeds each trace's single-trace posterior forward as the next prior.
pub fn smap_sequential(n: usize, traces: &[BitSeq]) -> Result<BitSeq> {
    Ok(smap_sequential_posterior(n, traces)?.threshold())
}

pub fn smap_sequential_posterior(n: usize, traces: &[BitSeq]) -> Result<PosteriorVec> {
    for y in traces {
        check_trace(n, y)?;
    }
    // Posteriors sharpen geometrically with each trace and leave the f64 range
    // after a handful of traces, so the chain runs in extended range.
    let half = Ext::from_f64(0.5);
    let (mut p, mut c) = (vec![half; n], vec![half; n]);
    for y in traces.iter().filter(|y| !y.is_empty()) {
        let tables = FTables::build_ext(p, c, y.symbols());
        if tables.is_zero() {
            return Err(Error::ZeroProbabilityTrace);
        }
        (p, c) = tables.posteriors_ext();
    }
    let f = |xs: Vec<Ext>| xs.into_iter().map(|x| x.to_f64().clamp(0.0, 1.0)).collect();
    Ok(PosteriorVec::from_pairs(f(p), f(c)))
}

/// Per-trace posteriors from uniform priors, combined by comparing
/// `∏ q_i` against `∏ (1 - q_i)`.
pub fn independent_combination(n: usize, traces: &[BitSeq]) -> Result<BitSeq> {
    for y in traces {
        check_trace(n, y)?;
    }
    let uniform = PriorVec::uniform(n);
    let mut ones = vec![0.0f64; n];
    let mut zeros = vec![0.0f64; n];
    for y in traces {
        let q = posterior_single(&uniform, y)?;
        for (i, (&qi, &ci)) in q.probs().iter().zip(q.complements()).enumerate() {
            ones[i] += qi.ln();
            zeros[i] += ci.ln();
        }
    }
    Ok(BitSeq::from_symbols(
        ones.iter()
            .zip(&zeros)
            .map(|(a, b)| u8::from(a >= b))
            .collect(),
    ))
}

/// Projected gradient ascent on `Σ_j ln F(p, y^j)` from uniform priors.
pub fn grad_ascent_traces(n: usize, traces: &[BitSeq], cfg: &GradAscentConfig) -> Result<BitSeq> {
    Ok(ascend(n, traces, cfg, None)?.estimate)
}

pub fn grad_ascent_traces_detailed(
    n: usize,
    traces: &[BitSeq],
    cfg: &GradAscentConfig,
    p0: Option<&PriorVec>,
) -> Result<AscentOutcome> {
    ascend(n, traces, cfg, p0)
}

pub const ML_TRACES_MAX_N: usize = 20;

/// Every maximiser of `∏_j ⟨x choose y^j⟩` over `{0,1}^n`, with the maximum.
pub fn ml_exhaustive_traces(n: usize, traces: &[BitSeq]) -> Result<crate::single::MlSet> {
    guard("exhaustive ML length", n as u128, ML_TRACES_MAX_N as u128)?;
    if traces.is_empty() {
        return Err(Error::NoTraces);
    }
    for y in traces {
        check_trace(n, y)?;
    }
    let mut best = crate::single::MlSet {
        argmax: Vec::new(),
        max: BigUint::zero(),
    };
    for bits in 0..(1u64 << n) {
        let x = BitSeq::from_bits(bits, n);
        let mut prod = BigUint::one();
        for y in traces {
            match binomial_u128(x.symbols(), y.symbols()) {
                Some(c) => prod *= c,
                None => prod *= binomial_coeff(&x, y),
            }
            if prod.is_zero() {
                break;
            }
        }
        if prod > best.max {
            best.max = prod;
            best.argmax.clear();
            best.argmax.push(x);
        } else if prod == best.max && !prod.is_zero() {
            best.argmax.push(x);
        }
    }
    best.argmax.sort();
    Ok(best)
}
