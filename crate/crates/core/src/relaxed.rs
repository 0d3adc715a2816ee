//! The relaxed binomial coefficient `F(p, v) = E_{Z~p} binom(Z, v)`, its
//! prefix/suffix tables and its gradient.
//!
//! Table entries carry their own power-of-two exponent so that long
//! sequences (n in the thousands) neither overflow nor underflow; a single row
//! can span far more than the f64 range. Rescaling only happens once a value
//! leaves `[2^-256, 2^256]`, so small instances are bit-identical to the plain
//! recurrence.

use crate::error::{Error, Result};
use crate::seq::{BitSeq, Symbol};

/// Per-position Bernoulli parameters, each in `[0, 1]`.
///
/// The complements `1 - p_i` are stored alongside, so that probabilities
/// within 1e-16 of one (typical after chaining many posteriors) keep their
/// distance from one.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVec {
    p: Vec<f64>,
    c: Vec<f64>,
}

fn check_probs(probs: &[f64]) -> Result<()> {
    for (i, &p) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability {
                index: i + 1,
                value: p,
            });
        }
    }
    Ok(())
}

impl PriorVec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        let c = probs.iter().map(|p| 1.0 - p).collect();
        Ok(Self { p: probs, c })
    }

    /// Priors given together with their complements `1 - p_i`, which must
    /// agree with `p` to within 1e-12.
    pub fn with_complements(probs: Vec<f64>, comps: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        check_probs(&comps)?;
        if probs.len() != comps.len() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: comps.len(),
            });
        }
        for (i, (p, c)) in probs.iter().zip(&comps).enumerate() {
            if (p + c - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProbability { index: i + 1, value: *p });
            }
        }
        Ok(Self { p: probs, c: comps })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: vec![0.5; n],
            c: vec![0.5; n],
        }
    }

    /// The lattice point corresponding to a binary sequence.
    pub fn from_seq(x: &BitSeq) -> Self {
        let p: Vec<f64> = x.symbols().iter().map(|&s| f64::from(s)).collect();
        let c = p.iter().map(|p| 1.0 - p).collect();
        Self { p, c }
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// `1 - p_i`, to full relative precision.
    pub fn complements(&self) -> &[f64] {
        &self.c
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// 1-based coordinate access.
    pub fn at(&self, i: usize) -> f64 {
        self.p[i - 1]
    }

    pub fn substitute(&self, i: usize, s: f64) -> Result<Self> {
        let v = crate::seq::substitute(&self.p, i, s)?;
        check_probs(&v)?;
        let c = crate::seq::substitute(&self.c, i, 1.0 - s)?;
        Ok(Self { p: v, c })
    }

    /// Hard decision `x_i = 1` iff `p_i >= 0.5`.
    pub fn threshold(&self) -> BitSeq {
        threshold(&self.p)
    }

    pub fn is_lattice_point(&self) -> bool {
        self.p.iter().all(|&p| p == 0.0 || p == 1.0)
    }
}

pub(crate) fn threshold(q: &[f64]) -> BitSeq {
    BitSeq::from_symbols(q.iter().map(|&p| Symbol::from(p >= 0.5)).collect())
}

#[inline]
fn emit(p: f64, c: f64, sym: Symbol) -> f64 {
    if sym == 1 {
        p
    } else {
        c
    }
}


const HI: f64 = 1.157_920_892_373_162e77; // 2^256
const LO: f64 = 8.636_168_555_094_445e-78; // 2^-256

/// `m · 2^e` with `m` kept in `[LO, HI]` (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ext {
    m: f64,
    e: i32,
}

impl Ext {
    pub(crate) const ZERO: Ext = Ext { m: 0.0, e: 0 };
    pub(crate) const ONE: Ext = Ext { m: 1.0, e: 0 };

    pub(crate) fn from_f64(x: f64) -> Ext {
        Ext { m: x, e: 0 }.norm()
    }


    #[inline]
    fn norm(self) -> Ext {
        let a = self.m.abs();
        if a == 0.0 || (LO..=HI).contains(&a) {
            return self;
        }
        let d = a.log2().floor() as i32;
        Ext {
            m: self.m * 2f64.powi(-d),
            e: self.e + d,
        }
    }

    #[inline]
    fn add(self, o: Ext) -> Ext {
        if o.m == 0.0 {
            return self;
        }
        if self.m == 0.0 {
            return o;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let m = if hi.e == lo.e {
            hi.m + lo.m
        } else {
            hi.m + lo.m * 2f64.powi(lo.e - hi.e)
        };
        Ext { m, e: hi.e }.norm()
    }

    #[inline]
    fn mul(self, o: Ext) -> Ext {
        Ext {
            m: self.m * o.m,
            e: self.e + o.e,
        }
        .norm()
    }

    /// Multiplies by `p` in `[0, 1]`; tiny `p` goes through the exponent.
    #[inline]
    fn scale(self, p: f64) -> Ext {
        if p >= LO {
            Ext { m: self.m * p, e: self.e }.norm()
        } else {
            self.mul(Ext { m: p, e: 0 }.norm())
        }
    }

    fn div(self, o: Ext) -> Ext {
        Ext {
            m: self.m / o.m,
            e: self.e - o.e,
        }
        .norm()
    }

    /// Mantissa relative to `2^e`.
    #[inline]
    fn at_exp(self, e: i32) -> f64 {
        if self.e == e {
            self.m
        } else {
            self.m * 2f64.powi(self.e - e)
        }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.m * 2f64.powi(self.e)
    }

    fn ln(self) -> f64 {
        self.m.ln() + f64::from(self.e) * std::f64::consts::LN_2
    }
}

/// `F(p, v)` in O(nm) time and O(m) memory.
pub fn f_value(p: &PriorVec, v: &BitSeq) -> f64 {
    let (mant, exp) = f_value_scaled(p.probs(), p.complements(), v.symbols());
    mant * 2f64.powi(exp)
}

/// Natural log of `F(p, v)`; `-inf` when `F = 0`.
pub fn ln_f_value(p: &PriorVec, v: &BitSeq) -> f64 {
    let (mant, exp) = f_value_scaled(p.probs(), p.complements(), v.symbols());
    mant.ln() + f64::from(exp) * std::f64::consts::LN_2
}

fn f_value_scaled(p: &[f64], c: &[f64], v: &[Symbol]) -> (f64, i32) {
    let (n, m) = (p.len(), v.len());
    if m == 0 {
        return (1.0, 0);
    }
    if m > n {
        return (0.0, 0);
    }
    let mut row = vec![Ext::ZERO; m + 1];
    row[0] = Ext::ONE;
    for (k, (&pk, &ck)) in p.iter().zip(c).enumerate() {
        let hi = m.min(k + 1);
        for j in (1..=hi).rev() {
            row[j] = row[j].add(row[j - 1].scale(emit(pk, ck, v[j - 1])));
        }
    }
    (row[m].m, row[m].e)
}

/// Both DP tables of `F`:
/// `g_for(k, j) = F(p[1..=k], v[1..=j])` and `g_rev(k, j) = F(p[k+1..=n], v[j+1..=m])`.
#[derive(Debug, Clone)]
pub struct FTables {
    n: usize,
    m: usize,
    p: Vec<f64>,
    c: Vec<f64>,
    pe: Vec<Ext>,
    ce: Vec<Ext>,
    v: Vec<Symbol>,
    fwd: Vec<Ext>,
    rev: Vec<Ext>,
}

/// Lemma-style split of `F` around one coordinate, all three terms sharing one
/// power-of-two scale.
#[derive(Debug, Clone, Copy)]
struct Split {
    base: f64,
    coef1: f64,
    coef0: f64,
    exp: i32,
}

impl Split {
    fn total(&self, pi: f64, ci: f64) -> f64 {
        self.base + pi * self.coef1 + ci * self.coef0
    }
}

/// Builds both tables in O(nm) time and space.
pub fn f_tables(p: &PriorVec, v: &BitSeq) -> FTables {
    FTables::build(p.probs(), p.complements(), v.symbols())
}

impl FTables {
    fn build(p: &[f64], c: &[f64], v: &[Symbol]) -> Self {
        let ext = |xs: &[f64]| xs.iter().map(|&x| Ext::from_f64(x)).collect();
        Self::build_ext(ext(p), ext(c), v)
    }

    /// Tables for priors given in extended range, `pe[i] + ce[i] = 1`.
    pub(crate) fn build_ext(pe: Vec<Ext>, ce: Vec<Ext>, v: &[Symbol]) -> Self {
        let (n, m) = (pe.len(), v.len());
        let emit = |k: usize, sym: Symbol| if sym == 1 { pe[k] } else { ce[k] };
        let w = m + 1;
        let mut fwd = vec![Ext::ZERO; (n + 1) * w];
        fwd[0] = Ext::ONE;
        for k in 1..=n {
            let (prev, cur) = fwd.split_at_mut(k * w);
            let prev = &prev[(k - 1) * w..];
            let cur = &mut cur[..w];
            cur[0] = prev[0];
            for j in 1..=m.min(k) {
                cur[j] = prev[j].add(prev[j - 1].mul(emit(k - 1, v[j - 1])));
            }
        }

        let mut rev = vec![Ext::ZERO; (n + 1) * w];
        rev[n * w + m] = Ext::ONE;
        for k in (0..n).rev() {
            let (cur, next) = rev.split_at_mut((k + 1) * w);
            let next = &next[..w];
            let cur = &mut cur[k * w..];
            cur[m] = next[m];
            // g_rev(k, j) = 0 whenever n - k < m - j
            let lo = m.saturating_sub(n - k);
            for j in lo..m {
                cur[j] = next[j].add(next[j + 1].mul(emit(k, v[j])));
            }
        }

        Self {
            n,
            m,
            p: pe.iter().map(|x| x.to_f64()).collect(),
            c: ce.iter().map(|x| x.to_f64()).collect(),
            pe,
            ce,
            v: v.to_vec(),
            fwd,
            rev,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    fn fwd_row(&self, k: usize) -> &[Ext] {
        let w = self.m + 1;
        &self.fwd[k * w..(k + 1) * w]
    }

    #[inline]
    fn rev_row(&self, k: usize) -> &[Ext] {
        let w = self.m + 1;
        &self.rev[k * w..(k + 1) * w]
    }

    /// `F(p[1..=k], v[1..=j])`. May be `inf` or `0` for very long inputs; use
    /// the scale-free accessors there.
    pub fn g_for(&self, k: usize, j: usize) -> f64 {
        self.fwd_row(k)[j].to_f64()
    }

    /// `F(p[k+1..=n], v[j+1..=m])`.
    pub fn g_rev(&self, k: usize, j: usize) -> f64 {
        self.rev_row(k)[j].to_f64()
    }

    /// `F(p, v)`.
    pub fn value(&self) -> f64 {
        self.fwd_row(self.n)[self.m].to_f64()
    }

    pub fn ln_value(&self) -> f64 {
        self.fwd_row(self.n)[self.m].ln()
    }

    pub fn is_zero(&self) -> bool {
        self.fwd_row(self.n)[self.m].m == 0.0
    }

    fn split(&self, i: usize) -> Split {
        let (base, coef1, coef0) = self.split_ext(i);
        let exp = [base, coef1, coef0]
            .iter()
            .filter(|x| x.m != 0.0)
            .map(|x| x.e)
            .max()
            .unwrap_or(0);
        Split {
            base: base.at_exp(exp),
            coef1: coef1.at_exp(exp),
            coef0: coef0.at_exp(exp),
            exp,
        }
    }

    fn split_ext(&self, i: usize) -> (Ext, Ext, Ext) {
        let left = self.fwd_row(i - 1);
        let right = self.rev_row(i);
        // subsets avoiding i: j symbols of v land before i, the rest after
        let base = left.iter().zip(right).fold(Ext::ZERO, |acc, (a, b)| acc.add(a.mul(*b)));
        let mut coef1 = Ext::ZERO;
        let mut coef0 = Ext::ZERO;
        for k in 1..=self.m {
            let t = left[k - 1].mul(right[k]);
            if self.v[k - 1] == 1 {
                coef1 = coef1.add(t);
            } else {
                coef0 = coef0.add(t);
            }
        }
        (base, coef1, coef0)
    }

    /// `(base, coef1, coef0)` with `F = base + p_i·coef1 + (1-p_i)·coef0`.
    pub fn decompose(&self, i: usize) -> Result<(f64, f64, f64)> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        let s = self.split(i);
        let scale = 2f64.powi(s.exp);
        Ok((s.base * scale, s.coef1 * scale, s.coef0 * scale))
    }

    /// `∂F/∂p_i` for every coordinate.
    pub fn gradient(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|i| {
                let s = self.split(i);
                (s.coef1 - s.coef0) * 2f64.powi(s.exp)
            })
            .collect()
    }

    /// `∇F / F`, computed without ever forming `F` itself. Zero when `F = 0`.
    pub fn log_gradient(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|i| {
                let s = self.split(i);
                let f = s.total(self.p[i - 1], self.c[i - 1]);
                if f > 0.0 {
                    (s.coef1 - s.coef0) / f
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `F(p^(i→1), v) - F(p^(i→0), v)` as a mantissa and a power-of-two exponent.
    pub(crate) fn endpoint_gap(&self, i: usize) -> (f64, i32) {
        let s = self.split(i);
        (s.coef1 - s.coef0, s.exp)
    }

    /// `F(p^(i→1), v)` and `F(p^(i→0), v)`.
    pub fn endpoint_values(&self, i: usize) -> (f64, f64) {
        let s = self.split(i);
        let scale = 2f64.powi(s.exp);
        ((s.base + s.coef1) * scale, (s.base + s.coef0) * scale)
    }

    /// Single-trace posteriors `Pr(X_i = 1 | Y = v)` under priors `p` and
    /// their complements, in extended range.
    pub(crate) fn posteriors_ext(&self) -> (Vec<Ext>, Vec<Ext>) {
        (1..=self.n)
            .map(|i| {
                let (base, coef1, coef0) = self.split_ext(i);
                let one = base.add(coef1).mul(self.pe[i - 1]);
                let zero = base.add(coef0).mul(self.ce[i - 1]);
                let f = one.add(zero);
                (one.div(f), zero.div(f))
            })
            .unzip()
    }

    /// [`Self::posteriors_ext`] as doubles.
    pub(crate) fn posteriors(&self) -> (Vec<f64>, Vec<f64>) {
        let (q, c) = self.posteriors_ext();
        let f = |xs: Vec<Ext>| xs.into_iter().map(|x| x.to_f64().clamp(0.0, 1.0)).collect();
        (f(q), f(c))
    }
}

/// `∇_p F(p, v)` in O(nm).
pub fn f_gradient(p: &PriorVec, v: &BitSeq) -> Vec<f64> {
    f_tables(p, v).gradient()
}

/// Factors coordinate `i` (1-based) out of `F(p, v)`.
pub fn f_decompose(p: &PriorVec, v: &BitSeq, i: usize) -> Result<(f64, f64, f64)> {
    f_tables(p, v).decompose(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn b(s: &str) -> BitSeq {
        BitSeq::parse_binary(s).unwrap()
    }

    fn pv(v: &[f64]) -> PriorVec {
        PriorVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn values() {
        assert_eq!(f_value(&pv(&[1.0, 0.0, 1.0]), &b("11")), 1.0);
        assert_eq!(f_value(&pv(&[0.5, 0.5]), &b("1")), 1.0);
        assert_eq!(f_value(&pv(&[0.3, 0.7]), &BitSeq::empty()), 1.0);
        assert_eq!(f_value(&pv(&[0.3]), &b("11")), 0.0);
    }

    #[test]
    fn tables() {
        let t = f_tables(&pv(&[0.5, 0.5]), &b("1"));
        assert_eq!(t.g_for(0, 0), 1.0);
        assert_eq!(t.g_for(1, 1), 0.5);
        assert_eq!(t.g_for(2, 1), 1.0);
        assert_eq!(t.g_rev(0, 0), 1.0);
        let t = f_tables(&pv(&[1.0, 1.0]), &b("11"));
        assert_eq!(t.g_rev(0, 0), 1.0);
        assert_eq!(t.value(), 1.0);
    }

    #[test]
    fn table_boundaries() {
        let p = pv(&[0.2, 0.9, 0.4, 0.6, 0.1]);
        let v = b("101");
        let t = f_tables(&p, &v);
        let (n, m) = (5, 3);
        for k in 0..=n {
            assert_eq!(t.g_for(k, 0), 1.0);
            assert_eq!(t.g_rev(k, m), 1.0);
            for j in 0..=m {
                if k < j {
                    assert_eq!(t.g_for(k, j), 0.0);
                }
                if n - k < m - j {
                    assert_eq!(t.g_rev(k, j), 0.0);
                }
                assert!(t.g_for(k, j) >= 0.0 && t.g_rev(k, j) >= 0.0);
            }
        }
        assert_relative_eq!(t.g_for(n, m), t.g_rev(0, 0), max_relative = 1e-14);
        assert_relative_eq!(t.value(), f_value(&p, &v), max_relative = 1e-14);
    }

    #[test]
    fn long_uniform_closed_form() {
        // under uniform priors F = C(n, m) / 2^m whatever the symbols of v
        let n = 3000;
        let v = BitSeq::from_symbols((0..2400).map(|j| (j * 7 % 3 == 0) as Symbol).collect());
        let m = v.len();
        let ln_choose: f64 = (0..m).map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln()).sum();
        let want = ln_choose - m as f64 * std::f64::consts::LN_2;
        let t = f_tables(&PriorVec::uniform(n), &v);
        assert_relative_eq!(t.ln_value(), want, max_relative = 1e-10);
        assert_relative_eq!(ln_f_value(&PriorVec::uniform(n), &v), want, max_relative = 1e-10);
        // every split reassembles the same value
        for i in [1, 700, 1500, n] {
            let s = t.split(i);
            let ln = s.total(0.5, 0.5).ln() + f64::from(s.exp) * std::f64::consts::LN_2;
            assert_relative_eq!(ln, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn gradients() {
        assert_eq!(f_gradient(&pv(&[0.5, 0.5]), &b("1")), vec![1.0, 1.0]);
        assert_eq!(f_gradient(&pv(&[0.5, 0.5]), &b("0")), vec![-1.0, -1.0]);
        assert_eq!(f_gradient(&pv(&[0.5, 0.5]), &BitSeq::empty()), vec![0.0, 0.0]);
    }

    #[test]
    fn decomposition() {
        let (base, c1, c0) = f_decompose(&pv(&[0.5, 0.5]), &b("1"), 1).unwrap();
        assert_eq!((base, c1, c0), (0.5, 1.0, 0.0));
        assert_eq!(base + 0.5 * c1 + 0.5 * c0, 1.0);
        assert!(matches!(
            f_decompose(&pv(&[0.5]), &b("1"), 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        let x = b("1101");
        let p = PriorVec::from_seq(&x);
        for i in 1..=4 {
            let (base, c1, c0) = f_decompose(&p, &x, i).unwrap();
            let pi = p.at(i);
            assert_eq!(base + pi * c1 + (1.0 - pi) * c0, 1.0);
        }
    }

    #[test]
    fn long_inputs_stay_finite() {
        let n = 3000;
        let p = PriorVec::uniform(n);
        let v = BitSeq::from_symbols((0..2000).map(|i| (i % 3 == 0) as u8).collect());
        let t = f_tables(&p, &v);
        assert!(t.ln_value().is_finite());
        assert_relative_eq!(t.ln_value(), ln_f_value(&p, &v), max_relative = 1e-10);
        assert!(t.log_gradient().iter().all(|g| g.is_finite()));
        assert!(t.posteriors().0.iter().all(|q| (0.0..=1.0).contains(q)));
    }

    #[test]
    fn prior_validation() {
        assert!(PriorVec::new(vec![0.2, 1.2]).is_err());
        assert!(PriorVec::new(vec![f64::NAN]).is_err());
        assert_eq!(pv(&[0.5, 0.49, 1.0]).threshold(), b("101"));
        assert_eq!(pv(&[0.5, 0.5]).substitute(2, 0.0).unwrap(), pv(&[0.5, 0.0]));
    }
}
