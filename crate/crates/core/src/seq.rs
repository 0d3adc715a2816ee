//! Finite sequences over a small alphabet and the binomial coefficient of words.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative count.
pub type BigCount = BigUint;

/// Symbol id. Binary channels only ever use 0 and 1.
pub type Symbol = u8;

/// Maps text characters to symbol ids and back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn binary() -> Self {
        Self {
            chars: vec!['0', '1'],
        }
    }

    /// Lower-case ASCII letters, `a` is symbol 0.
    pub fn letters() -> Self {
        Self {
            chars: ('a'..='z').collect(),
        }
    }

    /// Alphabet with one symbol per distinct character of `chars`, in order.
    pub fn from_chars(chars: &str) -> Self {
        let mut out: Vec<char> = Vec::new();
        for c in chars.chars() {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        assert!(out.len() <= 256, "alphabet too large");
        Self { chars: out }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn encode(&self, c: char) -> Result<Symbol> {
        self.chars
            .iter()
            .position(|&a| a == c)
            .map(|p| p as Symbol)
            .ok_or(Error::UnknownSymbol { symbol: c })
    }

    pub fn decode(&self, s: Symbol) -> char {
        self.chars[s as usize]
    }
}

/// A finite sequence of symbols. The empty sequence is a valid value.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitSeq {
    symbols: Vec<Symbol>,
}

impl BitSeq {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_binary(s: &str) -> Result<Self> {
        Self::parse_with(s, &Alphabet::binary())
    }

    pub fn parse_with(s: &str, alphabet: &Alphabet) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| alphabet.encode(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { symbols })
    }

    /// The `n`-length binary sequence whose i-th symbol is bit `n-1-i` of `bits`
    /// (most significant bit first).
    pub fn from_bits(bits: u64, n: usize) -> Self {
        let symbols = (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as Symbol).collect();
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    /// 1-based access, matching the usual mathematical indexing.
    pub fn at(&self, i: usize) -> Symbol {
        self.symbols[i - 1]
    }

    pub fn is_binary(&self) -> bool {
        self.symbols.iter().all(|&s| s <= 1)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.symbols.iter().map(|&s| alphabet.decode(s)).collect()
    }

    pub fn reversed(&self) -> Self {
        Self {
            symbols: self.symbols.iter().rev().copied().collect(),
        }
    }

    /// Binary complement; only meaningful for binary sequences.
    pub fn complemented(&self) -> Self {
        Self {
            symbols: self.symbols.iter().map(|&s| 1 - s).collect(),
        }
    }

    /// Copy with coordinate `i` (1-based) replaced by `s`.
    pub fn substitute(&self, i: usize, s: Symbol) -> Result<Self> {
        substitute(&self.symbols, i, s).map(Self::from_symbols)
    }

    pub fn is_subsequence_of(&self, other: &BitSeq) -> bool {
        let mut it = other.symbols.iter();
        self.symbols.iter().all(|s| it.any(|o| o == s))
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            let c = char::from_digit(s as u32, 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for BitSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_binary(s)
    }
}

impl From<Vec<Symbol>> for BitSeq {
    fn from(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }
}

/// `x` with coordinate `i` (1-based) replaced by `s`. Works for symbol
/// sequences and prior vectors alike.
pub fn substitute<T: Clone>(x: &[T], i: usize, s: T) -> Result<Vec<T>> {
    if i == 0 || i > x.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: x.len(),
        });
    }
    let mut out = x.to_vec();
    out[i - 1] = s;
    Ok(out)
}

/// Number of index subsets `S` of `f` with `f_S = g`.
///
/// Runs in O(|f|·|g|) with a single row of counts. Counts are kept in `u128`
/// and the computation is redone with arbitrary precision on overflow.
pub fn binomial_coeff(f: &BitSeq, g: &BitSeq) -> BigCount {
    if g.len() > f.len() {
        return BigCount::zero();
    }
    match binomial_u128(f.symbols(), g.symbols()) {
        Some(v) => BigCount::from(v),
        None => binomial_big(f.symbols(), g.symbols()),
    }
}

/// `u128` binomial coefficient of words, `None` on overflow.
pub(crate) fn binomial_u128(f: &[Symbol], g: &[Symbol]) -> Option<u128> {
    let m = g.len();
    if m > f.len() {
        return Some(0);
    }
    let mut row = vec![0u128; m + 1];
    row[0] = 1;
    for (i, &a) in f.iter().enumerate() {
        // positions of g beyond i+1 cannot be matched yet
        let hi = m.min(i + 1);
        for j in (1..=hi).rev() {
            if g[j - 1] == a {
                row[j] = row[j].checked_add(row[j - 1])?;
            }
        }
    }
    Some(row[m])
}

fn binomial_big(f: &[Symbol], g: &[Symbol]) -> BigCount {
    let m = g.len();
    let mut row = vec![BigCount::zero(); m + 1];
    row[0] = BigCount::one();
    for (i, &a) in f.iter().enumerate() {
        let hi = m.min(i + 1);
        for j in (1..=hi).rev() {
            if g[j - 1] == a {
                let prev = row[j - 1].clone();
                row[j] += prev;
            }
        }
    }
    row.swap_remove(m)
}

/// Full prefix table: entry `[k][j]` is the binomial coefficient of `g[..j]`
/// in `f[..k]`.
pub fn binomial_prefix_table(f: &BitSeq, g: &BitSeq) -> Vec<Vec<BigCount>> {
    let (n, m) = (f.len(), g.len());
    let mut table = vec![vec![BigCount::zero(); m + 1]; n + 1];
    for row in table.iter_mut() {
        row[0] = BigCount::one();
    }
    for k in 1..=n {
        for j in 1..=m.min(k) {
            let mut v = table[k - 1][j].clone();
            if f.at(k) == g.at(j) {
                v += &table[k - 1][j - 1];
            }
            table[k][j] = v;
        }
    }
    table
}

/// Classical binomial coefficient, zero when `k > n`.
pub fn choose(n: usize, k: usize) -> BigCount {
    if k > n {
        return BigCount::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigCount::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Natural log of a count, accurate to double precision at any size.
pub fn ln_count(x: &BigCount) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `num / den` as a double, valid even when both exceed the `f64` range.
pub fn count_ratio(num: &BigCount, den: &BigCount) -> f64 {
    let shift = den.bits().max(num.bits()).saturating_sub(900);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// Pascal triangle of classical binomials up to `n_max`.
pub(crate) fn pascal(n_max: usize) -> Vec<Vec<BigCount>> {
    let mut rows: Vec<Vec<BigCount>> = Vec::with_capacity(n_max + 1);
    for a in 0..=n_max {
        let mut row = vec![BigCount::one(); a + 1];
        for b in 1..a {
            row[b] = &rows[a - 1][b - 1] + &rows[a - 1][b];
        }
        rows.push(row);
    }
    rows
}

/// Parses the line-oriented sequence format: one sequence per line, an empty
/// line is the empty sequence. Trailing `\r` is ignored.
pub fn read_sequences(text: &str, alphabet: &Alphabet) -> Result<Vec<BitSeq>> {
    text.lines()
        .map(|line| BitSeq::parse_with(line.trim_end_matches('\r'), alphabet))
        .collect()
}

pub fn write_sequences(seqs: &[BitSeq], alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for s in seqs {
        out.push_str(&s.render(alphabet));
        out.push('\n');
    }
    out
}
