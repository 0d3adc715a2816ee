//! Estimators that see a single trace.

use std::collections::HashSet;

use num_traits::Zero;

use crate::error::{guard, Error, Result};
use crate::relaxed::{f_tables, ln_f_value, threshold, PriorVec};
use crate::seq::{binomial_coeff, BigCount, BitSeq};

/// `q_i = Pr(X_i = 1 | observations)`, with `1 - q_i` kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVec {
    q: Vec<f64>,
    c: Vec<f64>,
}

impl PosteriorVec {
    pub(crate) fn from_vec(q: Vec<f64>) -> Self {
        let c = q.iter().map(|q| 1.0 - q).collect();
        Self { q, c }
    }

    pub(crate) fn from_pairs(q: Vec<f64>, c: Vec<f64>) -> Self {
        Self { q, c }
    }

    pub fn probs(&self) -> &[f64] {
        &self.q
    }

    /// `1 - q_i`, to full relative precision.
    pub fn complements(&self) -> &[f64] {
        &self.c
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// 1-based.
    pub fn at(&self, i: usize) -> f64 {
        self.q[i - 1]
    }

    /// `X̂_i = 1` iff `q_i >= 0.5`.
    pub fn threshold(&self) -> BitSeq {
        threshold(&self.q)
    }

    pub fn to_prior(&self) -> PriorVec {
        PriorVec::with_complements(self.q.clone(), self.c.clone()).expect("posteriors lie in [0, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradAscentConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the objective changes by less than this fraction.
    pub conv_rel_tol: f64,
}

impl Default for GradAscentConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iters: 100,
            conv_rel_tol: 1e-3,
        }
    }
}

impl GradAscentConfig {
    pub fn new(epsilon: f64, max_iters: usize, conv_rel_tol: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("step size must be positive, got {epsilon}")));
        }
        if max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if conv_rel_tol.is_nan() || conv_rel_tol < 0.0 {
            return Err(Error::Config(format!(
                "convergence tolerance must be nonnegative, got {conv_rel_tol}"
            )));
        }
        Ok(Self {
            epsilon,
            max_iters,
            conv_rel_tol,
        })
    }
}

pub(crate) fn check_trace(n: usize, y: &BitSeq) -> Result<()> {
    if y.len() > n {
        Err(Error::TraceTooLong { trace_len: y.len(), n })
    } else {
        Ok(())
    }
}

/// Exact `Pr(X_i = 1 | Y = y)` for independent priors `p`, in O(n·|y|).
pub fn posterior_single(p: &PriorVec, y: &BitSeq) -> Result<PosteriorVec> {
    check_trace(p.len(), y)?;
    if y.is_empty() {
        return Ok(PosteriorVec::from_pairs(p.probs().to_vec(), p.complements().to_vec()));
    }
    let tables = f_tables(p, y);
    if tables.is_zero() {
        return Err(Error::ZeroProbabilityTrace);
    }
    let (q, c) = tables.posteriors();
    Ok(PosteriorVec::from_pairs(q, c))
}

/// Every maximiser of `⟨x choose y⟩` over `{0,1}^n`, with the maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlSet {
    pub argmax: Vec<BitSeq>,
    pub max: BigCount,
}

impl MlSet {
    pub fn contains(&self, x: &BitSeq) -> bool {
        self.argmax.contains(x)
    }
}

pub const ML_SINGLE_MAX_N: usize = 24;

pub fn ml_exhaustive(n: usize, y: &BitSeq) -> Result<MlSet> {
    guard("exhaustive ML length", n as u128, ML_SINGLE_MAX_N as u128)?;
    check_trace(n, y)?;
    let mut best = MlSet {
        argmax: Vec::new(),
        max: BigCount::zero(),
    };
    for bits in 0..(1u64 << n) {
        let x = BitSeq::from_bits(bits, n);
        let c = binomial_coeff(&x, y);
        if c > best.max {
            best.max = c;
            best.argmax.clear();
            best.argmax.push(x);
        } else if c == best.max && !c.is_zero() {
            best.argmax.push(x);
        }
    }
    best.argmax.sort();
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    pub estimate: BitSeq,
    pub p: PriorVec,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient ascent on `F(p, y)` from `p0` (uniform when `None`).
pub fn grad_ascent_single(
    n: usize,
    y: &BitSeq,
    cfg: &GradAscentConfig,
    p0: Option<&PriorVec>,
) -> Result<BitSeq> {
    let out = ascend(n, std::slice::from_ref(y), cfg, p0)?;
    // the single-trace rule breaks ties toward 0
    Ok(BitSeq::from_symbols(
        out.p.probs().iter().map(|&p| u8::from(p > 0.5)).collect(),
    ))
}

/// Ascent on `Σ_j ln F(p, y^j)`; a single trace is the `t = 1` case.
pub(crate) fn ascend(
    n: usize,
    traces: &[BitSeq],
    cfg: &GradAscentConfig,
    p0: Option<&PriorVec>,
) -> Result<AscentOutcome> {
    for y in traces {
        check_trace(n, y)?;
    }
    let mut p = match p0 {
        Some(p0) if p0.len() != n => {
            return Err(Error::LengthMismatch {
                left: p0.len(),
                right: n,
            })
        }
        Some(p0) => p0.probs().to_vec(),
        None => vec![0.5; n],
    };
    let active: Vec<&BitSeq> = traces.iter().filter(|y| !y.is_empty()).collect();
    let objective = |p: &[f64]| -> f64 {
        let pv = PriorVec::new(p.to_vec()).expect("iterate stays in the unit cube");
        active.iter().map(|y| ln_f_value(&pv, y)).sum()
    };
    let mut current = objective(&p);
    let mut iterations = 0;
    let mut converged = active.is_empty();
    while !converged && iterations < cfg.max_iters {
        let pv = PriorVec::new(p.clone()).expect("iterate stays in the unit cube");
        let mut step = vec![0.0; n];
        for y in &active {
            for (s, g) in step.iter_mut().zip(f_tables(&pv, y).log_gradient()) {
                *s += g;
            }
        }
        for (pi, s) in p.iter_mut().zip(&step) {
            *pi = (*pi + cfg.epsilon * s).clamp(0.0, 1.0);
        }
        iterations += 1;
        let next = objective(&p);
        converged = relative_change(current, next) < cfg.conv_rel_tol;
        current = next;
    }
    let estimate = threshold(&p);
    Ok(AscentOutcome {
        estimate,
        p: PriorVec::new(p).expect("iterate stays in the unit cube"),
        iterations,
        converged,
    })
}

/// `|e^(b-a) - 1|`, the relative change between two log-objectives.
fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_finite() && b.is_finite() {
        (b - a).exp_m1().abs()
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone)]
pub struct SwitchOutcome {
    pub estimate: BitSeq,
    /// `ln F(p, y)` at the start and after every single-coordinate switch.
    pub ln_objective: Vec<f64>,
    pub rounds: usize,
}

/// Coordinate-switch heuristic for single-trace ML.
pub fn coordinate_switch(p0: &PriorVec, y: &BitSeq) -> Result<BitSeq> {
    Ok(coordinate_switch_detailed(p0, y)?.estimate)
}

pub fn coordinate_switch_detailed(p0: &PriorVec, y: &BitSeq) -> Result<SwitchOutcome> {
    let n = p0.len();
    check_trace(n, y)?;
    let mut p = p0.clone();
    let mut history = vec![ln_f_value(&p, y)];
    let mut visited: HashSet<BitSeq> = HashSet::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let tables = f_tables(&p, y);
        let mut order: Vec<(usize, f64)> = (1..=n)
            .map(|i| {
                let (gap, exp) = tables.endpoint_gap(i);
                let score = if gap == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    gap.abs().ln() + f64::from(exp) * std::f64::consts::LN_2
                };
                (i, score)
            })
            .collect();
        // stable sort keeps index order among equal scores
        order.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (i, _) in order {
            let (gap, _) = f_tables(&p, y).endpoint_gap(i);
            let s = if gap >= 0.0 { 1.0 } else { 0.0 };
            p = p.substitute(i, s)?;
            history.push(ln_f_value(&p, y));
        }
        let point = p.threshold();
        if !visited.insert(point) {
            break;
        }
    }
    Ok(SwitchOutcome {
        estimate: p.threshold(),
        ln_objective: history,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitSeq {
        BitSeq::parse_binary(s).unwrap()
    }

    #[test]
    fn intro_example() {
        let q = posterior_single(&PriorVec::uniform(6), &b("1010")).unwrap();
        assert_eq!(q.threshold(), b("100110"));
        assert!(ml_exhaustive(6, &b("1010")).unwrap().contains(&b("101010")));
    }

    #[test]
    fn empty_trace_returns_prior() {
        let p = PriorVec::new(vec![0.2, 0.9, 0.5]).unwrap();
        let q = posterior_single(&p, &BitSeq::empty()).unwrap();
        assert_eq!(q.probs(), p.probs());
    }

    #[test]
    fn posterior_errors() {
        let p = PriorVec::uniform(2);
        assert!(matches!(
            posterior_single(&p, &b("101")),
            Err(Error::TraceTooLong { trace_len: 3, n: 2 })
        ));
        let p = PriorVec::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(posterior_single(&p, &b("1")), Err(Error::ZeroProbabilityTrace));
    }

    #[test]
    fn ml_table() {
        let set = ml_exhaustive(10, &b("000100")).unwrap();
        assert_eq!(set.argmax, vec![b("0000001000"), b("0000010000"), b("0000011000")]);
        assert_eq!(ml_exhaustive(10, &b("10111")).unwrap().argmax, vec![b("1100111111")]);
        assert!(ml_exhaustive(25, &b("1")).is_err());
    }

    #[test]
    fn ascent_with_empty_trace_stays_put() {
        let p0 = PriorVec::new(vec![0.7, 0.2, 0.5]).unwrap();
        let x = grad_ascent_single(3, &BitSeq::empty(), &GradAscentConfig::default(), Some(&p0)).unwrap();
        // p_3 = 0.5 is not above one half
        assert_eq!(x, b("100"));
    }

    #[test]
    fn ascent_rejects_long_trace() {
        assert!(grad_ascent_single(2, &b("111"), &GradAscentConfig::default(), None).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GradAscentConfig::new(0.0, 10, 0.0).is_err());
        assert!(GradAscentConfig::new(0.1, 0, 0.0).is_err());
        assert!(GradAscentConfig::new(0.1, 1, -1.0).is_err());
        assert!(GradAscentConfig::new(0.1, 1, 0.0).is_ok());
    }

    #[test]
    fn switch_from_ml_point_is_fixed() {
        let y = b("10111");
        let ml = ml_exhaustive(10, &y).unwrap();
        let x = &ml.argmax[0];
        let out = coordinate_switch_detailed(&PriorVec::from_seq(x), &y).unwrap();
        assert_eq!(&out.estimate, x);
        assert_eq!(out.rounds, 2);
    }

    #[test]
    fn switch_never_decreases() {
        let y = b("0110100");
        let out = coordinate_switch_detailed(&PriorVec::uniform(11), &y).unwrap();
        for w in out.ln_objective.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs());
        }
    }
}
