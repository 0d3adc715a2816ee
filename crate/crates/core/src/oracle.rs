//! Brute-force reference implementations for testing.
//!
//! Nothing here calls into the production algorithms; only the sequence type
//! and the big-integer alias are shared. Every entry point is guarded so it
//! cannot be mistaken for a scalable path.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::seq::{BigCount, BitSeq, Symbol};

pub const BINOMIAL_BRUTE_LIMIT: u128 = 10_000_000;
pub const POSTERIOR_BRUTE_MAX_N: usize = 14;
pub const PATHS_BRUTE_VERTEX_LIMIT: u128 = 10_000;

fn exceeded(what: &'static str, size: u128, limit: u128) -> Error {
    Error::GuardExceeded { what, size, limit }
}

fn small_choose(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k.min(n - k) {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Number of index sets `S` with `f_S = g`, by walking every embedding.
pub fn binomial_brute(f: &BitSeq, g: &BitSeq) -> Result<BigCount> {
    let c = small_choose(f.len(), g.len());
    if c > BINOMIAL_BRUTE_LIMIT {
        return Err(exceeded("brute-force subset count", c, BINOMIAL_BRUTE_LIMIT));
    }
    Ok(BigCount::from(embeddings(f.symbols(), g.symbols())))
}

fn embeddings(f: &[Symbol], g: &[Symbol]) -> u64 {
    fn go(f: &[Symbol], g: &[Symbol], from: usize, matched: usize) -> u64 {
        if matched == g.len() {
            return 1;
        }
        let need = g.len() - matched;
        let mut total = 0;
        for k in from..f.len() {
            if f.len() - k < need {
                break;
            }
            if f[k] == g[matched] {
                total += go(f, g, k + 1, matched + 1);
            }
        }
        total
    }
    go(f, g, 0, 0)
}

/// Input prior for [`posterior_brute`].
#[derive(Debug, Clone, Copy)]
pub enum Prior<'a> {
    Uniform,
    Bernoulli(&'a [f64]),
}

/// `Pr(X_i = 1 | traces)` by enumerating all `2^n` inputs.
pub fn posterior_brute(prior: Prior<'_>, traces: &[BitSeq], n: usize) -> Result<Vec<f64>> {
    if n > POSTERIOR_BRUTE_MAX_N {
        return Err(exceeded(
            "brute-force posterior length",
            n as u128,
            POSTERIOR_BRUTE_MAX_N as u128,
        ));
    }
    if let Prior::Bernoulli(p) = prior {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: n,
            });
        }
    }
    let inputs: Vec<Vec<Symbol>> = (0..1u32 << n)
        .map(|bits| (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as Symbol).collect())
        .collect();
    let likelihood = |x: &[Symbol]| -> BigUint {
        let mut prod = BigUint::one();
        for y in traces {
            prod *= embeddings(x, y.symbols());
            if prod.is_zero() {
                break;
            }
        }
        prod
    };
    match prior {
        Prior::Uniform => {
            let mut num = vec![BigUint::zero(); n];
            let mut den = BigUint::zero();
            for x in &inputs {
                let l = likelihood(x);
                if l.is_zero() {
                    continue;
                }
                for (i, &s) in x.iter().enumerate() {
                    if s == 1 {
                        num[i] += &l;
                    }
                }
                den += l;
            }
            if den.is_zero() {
                return Err(Error::ZeroProbabilityTrace);
            }
            Ok(num.iter().map(|a| big_ratio(a, &den)).collect())
        }
        Prior::Bernoulli(p) => {
            let mut num = vec![0.0f64; n];
            let mut den = 0.0f64;
            for x in &inputs {
                let l = likelihood(x);
                if l.is_zero() {
                    continue;
                }
                let mut w = l.to_f64().unwrap_or(f64::INFINITY);
                for (&s, &pi) in x.iter().zip(p) {
                    w *= if s == 1 { pi } else { 1.0 - pi };
                }
                for (i, &s) in x.iter().enumerate() {
                    if s == 1 {
                        num[i] += w;
                    }
                }
                den += w;
            }
            if den == 0.0 {
                return Err(Error::ZeroProbabilityTrace);
            }
            Ok(num.iter().map(|a| a / den).collect())
        }
    }
}

fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = b.bits().saturating_sub(900);
    (a >> shift).to_f64().unwrap_or(f64::INFINITY) / (b >> shift).to_f64().unwrap_or(f64::INFINITY)
}

fn check_grid(traces: &[BitSeq]) -> Result<()> {
    let size = traces
        .iter()
        .try_fold(1u128, |acc, y| acc.checked_mul(y.len() as u128 + 1))
        .unwrap_or(u128::MAX);
    if size > PATHS_BRUTE_VERTEX_LIMIT {
        return Err(exceeded("brute-force grid size", size, PATHS_BRUTE_VERTEX_LIMIT));
    }
    if traces.is_empty() {
        return Err(Error::NoTraces);
    }
    Ok(())
}

/// Every step the grid walk may take from `pos`: the advanced position and the
/// symbol it spells. A step advances a nonempty set of coordinates that all
/// read the same next symbol.
fn steps(traces: &[BitSeq], pos: &[usize]) -> Vec<(Vec<usize>, Symbol)> {
    let t = traces.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << t) {
        let mut sym: Option<Symbol> = None;
        let mut ok = true;
        let mut next = pos.to_vec();
        for l in 0..t {
            if mask >> l & 1 == 0 {
                continue;
            }
            let Some(&s) = traces[l].symbols().get(pos[l]) else {
                ok = false;
                break;
            };
            if sym.is_some_and(|prev| prev != s) {
                ok = false;
                break;
            }
            sym = Some(s);
            next[l] += 1;
        }
        if ok {
            out.push((next, sym.expect("mask is nonempty")));
        }
    }
    out
}

/// Number of origin→destination grid walks spelling `w`.
pub fn infiltration_paths_brute(traces: &[BitSeq], w: &BitSeq) -> Result<BigCount> {
    check_grid(traces)?;
    fn go(traces: &[BitSeq], pos: &[usize], w: &[Symbol]) -> BigCount {
        let done = pos.iter().zip(traces).all(|(&p, y)| p == y.len());
        if w.is_empty() {
            return if done { BigCount::one() } else { BigCount::zero() };
        }
        let mut total = BigCount::zero();
        for (next, s) in steps(traces, pos) {
            if s == w[0] {
                total += go(traces, &next, &w[1..]);
            }
        }
        total
    }
    Ok(go(traces, &vec![0; traces.len()], w.symbols()))
}

pub const PATH_ENUMERATION_LIMIT: usize = 2_000_000;

/// Every origin→destination walk, grouped by the sequence it spells.
pub fn all_paths_brute(traces: &[BitSeq]) -> Result<BTreeMap<BitSeq, BigCount>> {
    check_grid(traces)?;
    let mut out: BTreeMap<BitSeq, BigCount> = BTreeMap::new();
    let mut visited = 0usize;
    let mut stack: Vec<(Vec<usize>, Vec<Symbol>)> = vec![(vec![0; traces.len()], Vec::new())];
    while let Some((pos, spelled)) = stack.pop() {
        visited += 1;
        if visited > PATH_ENUMERATION_LIMIT {
            return Err(exceeded(
                "brute-force path enumeration",
                visited as u128,
                PATH_ENUMERATION_LIMIT as u128,
            ));
        }
        if pos.iter().zip(traces).all(|(&p, y)| p == y.len()) {
            *out.entry(BitSeq::from_symbols(spelled)).or_default() += 1u32;
            continue;
        }
        for (next, s) in steps(traces, &pos) {
            let mut sp = spelled.clone();
            sp.push(s);
            stack.push((next, sp));
        }
    }
    Ok(out)
}

/// `counts[k]`: number of origin→destination walks of length `k`.
pub fn path_lengths_brute(traces: &[BitSeq]) -> Result<Vec<BigCount>> {
    let paths = all_paths_brute(traces)?;
    let max = paths.keys().map(BitSeq::len).max().unwrap_or(0);
    let mut out = vec![BigCount::zero(); max + 1];
    for (w, c) in paths {
        out[w.len()] += c;
    }
    Ok(out)
}

/// `marked[k][j]`: number of length-`k` walks whose `j`-th step spells `symbol`.
pub fn marked_paths_brute(traces: &[BitSeq], symbol: Symbol) -> Result<Vec<Vec<BigCount>>> {
    let paths = all_paths_brute(traces)?;
    let max = paths.keys().map(BitSeq::len).max().unwrap_or(0);
    let mut out: Vec<Vec<BigCount>> = (0..=max).map(|k| vec![BigCount::zero(); k + 1]).collect();
    for (w, c) in paths {
        for (j, &s) in w.symbols().iter().enumerate() {
            if s == symbol {
                out[w.len()][j + 1] += &c;
            }
        }
    }
    Ok(out)
}

/// `Σ_{f : |f| = n, f_i = a} ⟨f choose g⟩` by enumeration.
pub fn fill_count_brute(n: usize, i: usize, a: Symbol, g: &BitSeq) -> Result<BigCount> {
    if n > 16 {
        return Err(exceeded("brute-force fill length", n as u128, 16));
    }
    let mut total = BigCount::zero();
    for bits in 0..1u32 << n {
        let f: Vec<Symbol> = (0..n).map(|k| ((bits >> (n - 1 - k)) & 1) as Symbol).collect();
        if f[i - 1] == a {
            total += embeddings(&f, g.symbols());
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Alphabet;

    fn b(s: &str) -> BitSeq {
        BitSeq::parse_binary(s).unwrap()
    }

    #[test]
    fn binomial_examples() {
        let l = Alphabet::letters();
        let apple = BitSeq::parse_with("apple", &l).unwrap();
        let ape = BitSeq::parse_with("ape", &l).unwrap();
        assert_eq!(binomial_brute(&apple, &ape).unwrap(), BigCount::from(2u32));
        assert_eq!(binomial_brute(&b("0110"), &BitSeq::empty()).unwrap(), BigCount::one());
        let long = BitSeq::from_symbols(vec![0; 60]);
        let half = BitSeq::from_symbols(vec![0; 30]);
        assert!(binomial_brute(&long, &half).is_err());
    }

    #[test]
    fn intro_posterior() {
        let q = posterior_brute(Prior::Uniform, &[b("1010")], 6).unwrap();
        let x: Vec<u8> = q.iter().map(|&v| u8::from(v >= 0.5)).collect();
        assert_eq!(x, vec![1, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn exchangeable_positions() {
        let q = posterior_brute(Prior::Uniform, &[b("1")], 3).unwrap();
        assert!((q[0] - q[1]).abs() < 1e-15 && (q[1] - q[2]).abs() < 1e-15);
    }

    #[test]
    fn infiltration_examples() {
        let tr = [b("001"), b("101")];
        assert_eq!(infiltration_paths_brute(&tr, &b("101001")).unwrap(), BigCount::one());
        assert_eq!(infiltration_paths_brute(&tr, &b("01001")).unwrap(), BigCount::from(2u32));
        assert!(infiltration_paths_brute(&tr, &b("01")).unwrap().is_zero());
    }

    #[test]
    fn grid_guard() {
        let y = BitSeq::from_symbols(vec![1; 200]);
        assert!(infiltration_paths_brute(&[y.clone(), y], &b("1")).is_err());
    }
}
