//! The t-dimensional edit graph over a set of traces, path-count potentials
//! and the infiltration product.
//!
//! Vertices are mixed-radix indices into the grid `∏ (|y_l| + 1)`, with the
//! first trace as the most significant digit, so every predecessor of a vertex
//! has a smaller index. Edges are never stored: a vertex has at most `2^t - 1`
//! in- and out-neighbours, generated from the equal-symbol rule on demand.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{guard, Error, Result};
use crate::seq::{BigCount, BitSeq, Symbol};

pub const VERTEX_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone)]
pub struct EditGraph {
    traces: Vec<BitSeq>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    n_vertices: usize,
}

/// Builds the edit graph of `traces`.
pub fn build_edit_graph(traces: &[BitSeq]) -> Result<EditGraph> {
    EditGraph::new(traces)
}

impl EditGraph {
    pub fn new(traces: &[BitSeq]) -> Result<Self> {
        if traces.is_empty() {
            return Err(Error::NoTraces);
        }
        if traces.len() > 16 {
            return Err(Error::GuardExceeded {
                what: "edit graph dimension",
                size: traces.len() as u128,
                limit: 16,
            });
        }
        let dims: Vec<usize> = traces.iter().map(|y| y.len() + 1).collect();
        let count = dims
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .unwrap_or(u128::MAX);
        guard("edit graph vertex count", count, VERTEX_LIMIT)?;
        let mut strides = vec![1usize; dims.len()];
        for l in (0..dims.len() - 1).rev() {
            strides[l] = strides[l + 1] * dims[l + 1];
        }
        Ok(Self {
            traces: traces.to_vec(),
            dims,
            strides,
            n_vertices: count as usize,
        })
    }

    pub fn t(&self) -> usize {
        self.traces.len()
    }

    pub fn traces(&self) -> &[BitSeq] {
        &self.traces
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    pub fn origin(&self) -> usize {
        0
    }

    pub fn destination(&self) -> usize {
        self.n_vertices - 1
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.t());
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![0; self.t()];
        for (l, &s) in self.strides.iter().enumerate() {
            out[l] = v / s;
            v %= s;
        }
        out
    }

    /// Calls `f(u, symbol)` for every edge `u → v`.
    pub fn for_each_in_edge(&self, v: usize, mut f: impl FnMut(usize, Symbol)) {
        let c = self.coords(v);
        let mut by_symbol = [0u32; 2];
        for (l, &i) in c.iter().enumerate() {
            if i > 0 {
                let s = self.traces[l].symbols()[i - 1];
                by_symbol[(s & 1) as usize] |= 1 << l;
            }
        }
        for (sym, &mask) in by_symbol.iter().enumerate() {
            for_each_submask(mask, |sub| f(v - self.offset(sub), sym as Symbol));
        }
    }

    /// Calls `f(w, symbol)` for every edge `v → w`.
    pub fn for_each_out_edge(&self, v: usize, mut f: impl FnMut(usize, Symbol)) {
        let c = self.coords(v);
        let mut by_symbol = [0u32; 2];
        for (l, &i) in c.iter().enumerate() {
            if i + 1 < self.dims[l] {
                let s = self.traces[l].symbols()[i];
                by_symbol[(s & 1) as usize] |= 1 << l;
            }
        }
        for (sym, &mask) in by_symbol.iter().enumerate() {
            for_each_submask(mask, |sub| f(v + self.offset(sub), sym as Symbol));
        }
    }

    fn offset(&self, mask: u32) -> usize {
        (0..self.t())
            .filter(|l| mask >> l & 1 == 1)
            .map(|l| self.strides[l])
            .sum()
    }

    /// The symbol spelled by edge `u → v`.
    pub fn edge_symbol(&self, u: &[usize], v: &[usize]) -> Result<Symbol> {
        let not_edge = || Error::NotAnEdge {
            from: u.to_vec(),
            to: v.to_vec(),
        };
        if u.len() != self.t() || v.len() != self.t() {
            return Err(not_edge());
        }
        let mut sym: Option<Symbol> = None;
        for l in 0..self.t() {
            if v[l] == u[l] {
                continue;
            }
            if v[l] != u[l] + 1 || v[l] >= self.dims[l] {
                return Err(not_edge());
            }
            let s = self.traces[l].symbols()[u[l]];
            match sym {
                Some(prev) if prev != s => return Err(not_edge()),
                _ => sym = Some(s),
            }
        }
        sym.ok_or_else(not_edge)
    }

    fn max_coord(&self, c: &[usize]) -> usize {
        c.iter().copied().max().unwrap_or(0)
    }

    fn remaining(&self, c: &[usize]) -> (usize, usize) {
        // (max, sum) of distances to the destination
        let mut max = 0;
        let mut sum = 0;
        for (l, &i) in c.iter().enumerate() {
            let d = self.dims[l] - 1 - i;
            max = max.max(d);
            sum += d;
        }
        (max, sum)
    }
}

fn for_each_submask(mask: u32, mut f: impl FnMut(u32)) {
    let mut sub = mask;
    while sub != 0 {
        f(sub);
        sub = (sub - 1) & mask;
    }
}

/// Polynomial in λ with nonnegative integer coefficients, stored as a dense
/// window `[offset, offset + len)` of degrees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathPoly {
    offset: usize,
    coeffs: Vec<BigCount>,
}

impl PathPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self {
            offset: 0,
            coeffs: vec![BigCount::one()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Coefficient of `λ^k`.
    pub fn coeff(&self, k: usize) -> BigCount {
        self.get(k).cloned().unwrap_or_default()
    }

    fn get(&self, k: usize) -> Option<&BigCount> {
        k.checked_sub(self.offset).and_then(|i| self.coeffs.get(i))
    }

    /// Smallest and largest degree that may carry a nonzero coefficient.
    pub fn support(&self) -> Option<(usize, usize)> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.coeffs.len() - 1))
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map(|i| i + self.offset)
    }

    /// Dense coefficients from degree 0 up to `cap`.
    pub fn to_dense(&self, cap: usize) -> Vec<BigCount> {
        (0..=cap).map(|k| self.coeff(k)).collect()
    }

    fn window(lo: usize, hi: usize) -> Self {
        if lo > hi {
            return Self::zero();
        }
        Self {
            offset: lo,
            coeffs: vec![BigCount::zero(); hi - lo + 1],
        }
    }

    /// `self += λ · other`, restricted to this polynomial's window.
    fn add_shifted(&mut self, other: &PathPoly) {
        let Some((olo, ohi)) = other.support() else {
            return;
        };
        let Some((lo, hi)) = self.support() else {
            return;
        };
        let from = lo.max(olo + 1);
        let to = hi.min(ohi + 1);
        for k in from..=to {
            let src = &other.coeffs[k - 1 - olo];
            if !src.is_zero() {
                self.coeffs[k - lo] += src;
            }
        }
    }
}

/// Per-vertex path-count polynomials.
#[derive(Debug, Clone)]
pub struct Potentials {
    polys: Vec<PathPoly>,
}

impl Potentials {
    pub fn at(&self, v: usize) -> &PathPoly {
        &self.polys[v]
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }
}

/// Which coefficients a potential sweep keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truncation {
    /// Every degree up to the cap.
    Degree,
    /// Only degrees that can still be part of an origin→destination path of
    /// total length at most the cap.
    FullPath,
}

/// `p_for_v(λ)`: coefficient `k` counts the `k`-edge paths from the origin to
/// `v`, for `k <= n_cap`.
pub fn forward_potentials(g: &EditGraph, n_cap: usize) -> Potentials {
    sweep_forward(g, n_cap, Truncation::Degree)
}

/// `p_rev_v(λ)`: coefficient `k` counts the `k`-edge paths from `v` to the
/// destination, for `k <= n_cap`.
pub fn reverse_potentials(g: &EditGraph, n_cap: usize) -> Potentials {
    sweep_reverse(g, n_cap, Truncation::Degree)
}

/// Forward potentials keeping only coefficients that can extend to a full
/// origin→destination path of length at most `n_cap`. Everything the
/// posterior formulas read is retained; the rest is never computed.
pub fn forward_potentials_within(g: &EditGraph, n_cap: usize) -> Potentials {
    sweep_forward(g, n_cap, Truncation::FullPath)
}

/// Reverse counterpart of [`forward_potentials_within`].
pub fn reverse_potentials_within(g: &EditGraph, n_cap: usize) -> Potentials {
    sweep_reverse(g, n_cap, Truncation::FullPath)
}

fn sweep_forward(g: &EditGraph, n_cap: usize, trunc: Truncation) -> Potentials {
    let mut polys: Vec<PathPoly> = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        let c = g.coords(v);
        let lo = g.max_coord(&c);
        let sum: usize = c.iter().sum();
        let cap = match trunc {
            Truncation::Degree => Some(n_cap),
            Truncation::FullPath => n_cap.checked_sub(g.remaining(&c).0),
        };
        let Some(cap) = cap else {
            polys.push(PathPoly::zero());
            continue;
        };
        if v == g.origin() {
            polys.push(PathPoly::one());
            continue;
        }
        let mut acc = PathPoly::window(lo, sum.min(cap));
        if acc.support().is_some() {
            g.for_each_in_edge(v, |u, _| acc.add_shifted(&polys[u]));
        }
        polys.push(acc);
    }
    Potentials { polys }
}

fn sweep_reverse(g: &EditGraph, n_cap: usize, trunc: Truncation) -> Potentials {
    let nv = g.vertex_count();
    let mut polys: Vec<PathPoly> = vec![PathPoly::zero(); nv];
    for v in (0..nv).rev() {
        let c = g.coords(v);
        let (lo, sum) = g.remaining(&c);
        let cap = match trunc {
            Truncation::Degree => Some(n_cap),
            Truncation::FullPath => n_cap.checked_sub(g.max_coord(&c)),
        };
        let Some(cap) = cap else { continue };
        if v == g.destination() {
            polys[v] = PathPoly::one();
            continue;
        }
        let mut acc = PathPoly::window(lo, sum.min(cap));
        if acc.support().is_some() {
            g.for_each_out_edge(v, |w, _| acc.add_shifted(&polys[w]));
        }
        polys[v] = acc;
    }
    Potentials { polys }
}

/// `M[j][k]`: number of `k`-edge origin→destination paths whose `j`-th edge
/// spells `symbol`, for `1 <= j <= k <= n_cap`.
#[derive(Debug, Clone)]
pub struct MarkedCounts {
    n_cap: usize,
    table: Vec<Vec<BigCount>>,
}

impl MarkedCounts {
    pub fn get(&self, j: usize, k: usize) -> &BigCount {
        &self.table[k][j]
    }

    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    /// Row `k` as `[M[0][k], M[1][k], ..., M[k][k]]` (entry 0 is always zero).
    pub(crate) fn row(&self, k: usize) -> &[BigCount] {
        &self.table[k]
    }
}

/// Counts paths whose `j`-th edge carries a `1`, for every `(j, k)`.
pub fn marked_path_counts(g: &EditGraph, fwd: &Potentials, rev: &Potentials, n_cap: usize) -> MarkedCounts {
    marked_path_counts_for(g, fwd, rev, n_cap, 1)
}

/// [`marked_path_counts`] for an arbitrary edge symbol.
///
/// Each edge `u → v` spelling `symbol` contributes
/// `⟨p_for_u, λ^(j-1)⟩ · ⟨p_rev_v, λ^(k-j)⟩`. Edges are grouped by their head
/// `v` so the product is taken once per vertex rather than once per edge.
pub fn marked_path_counts_for(
    g: &EditGraph,
    fwd: &Potentials,
    rev: &Potentials,
    n_cap: usize,
    symbol: Symbol,
) -> MarkedCounts {
    let mut table: Vec<Vec<BigCount>> = (0..=n_cap).map(|k| vec![BigCount::zero(); k + 1]).collect();
    for v in 1..g.vertex_count() {
        let Some((rlo, rhi)) = rev.at(v).support() else {
            continue;
        };
        let c = g.coords(v);
        let lo = g.max_coord(&c);
        let hi = c.iter().sum::<usize>().min(n_cap.saturating_sub(rlo));
        let mut head = PathPoly::window(lo, hi);
        if head.support().is_none() {
            continue;
        }
        let mut any = false;
        g.for_each_in_edge(v, |u, s| {
            if s == symbol {
                head.add_shifted(fwd.at(u));
                any = true;
            }
        });
        if !any {
            continue;
        }
        let rv = rev.at(v);
        for j in lo..=hi {
            let a = &head.coeffs[j - lo];
            if a.is_zero() {
                continue;
            }
            for b in rlo..=rhi.min(n_cap - j) {
                let r = &rv.coeffs[b - rlo];
                if !r.is_zero() {
                    table[j + b][j] += a * r;
                }
            }
        }
    }
    MarkedCounts { n_cap, table }
}

/// Finite map from sequences to positive coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InfiltrationPoly {
    terms: BTreeMap<BitSeq, BigCount>,
}

impl InfiltrationPoly {
    pub fn monomial(w: BitSeq) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, BigCount::one());
        Self { terms }
    }

    /// `⟨σ, w⟩`.
    pub fn coeff(&self, w: &BitSeq) -> BigCount {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BitSeq, &BigCount)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, w: BitSeq, c: &BigCount) {
        if c.is_zero() {
            return;
        }
        *self.terms.entry(w).or_default() += c;
    }

    fn append_into(&self, a: Symbol, out: &mut InfiltrationPoly) {
        for (w, c) in &self.terms {
            let mut s = w.symbols().to_vec();
            s.push(a);
            out.add_term(BitSeq::from_symbols(s), c);
        }
    }

    /// `self ↑ g`, extended to polynomials by distributivity.
    pub fn infiltrate(&self, g: &BitSeq) -> Result<InfiltrationPoly> {
        let mut out = InfiltrationPoly::default();
        for (w, c) in &self.terms {
            let prod = infiltration(w, g)?;
            for (h, d) in prod.terms {
                out.add_term(h, &(d * c));
            }
        }
        Ok(out)
    }
}

impl InfiltrationPoly {
    /// `self ↑ other` for two polynomials.
    pub fn infiltrate_poly(&self, other: &InfiltrationPoly) -> Result<InfiltrationPoly> {
        let mut out = InfiltrationPoly::default();
        for (g, d) in &other.terms {
            for (h, c) in self.infiltrate(g)?.terms {
                out.add_term(h, &(c * d));
            }
        }
        Ok(out)
    }
}

pub const INFILTRATION_LIMIT: usize = 24;

/// `f ↑ g` from the prefix recursion
/// `fa↑gb = (f↑gb)a + (fa↑g)b + [a=b](f↑g)a`, `f↑e = e↑f = f`.
pub fn infiltration(f: &BitSeq, g: &BitSeq) -> Result<InfiltrationPoly> {
    let total = f.len() + g.len();
    guard(
        "infiltration input length",
        total as u128,
        INFILTRATION_LIMIT as u128,
    )?;
    let (n, m) = (f.len(), g.len());
    let prefix = |s: &BitSeq, k: usize| BitSeq::from_symbols(s.symbols()[..k].to_vec());
    // rows[i][j] = f[..i] ↑ g[..j]; only the previous row is kept
    let mut prev: Vec<InfiltrationPoly> = (0..=m).map(|j| InfiltrationPoly::monomial(prefix(g, j))).collect();
    for i in 1..=n {
        let a = f.at(i);
        let mut cur: Vec<InfiltrationPoly> = Vec::with_capacity(m + 1);
        cur.push(InfiltrationPoly::monomial(prefix(f, i)));
        for j in 1..=m {
            let b = g.at(j);
            let mut poly = InfiltrationPoly::default();
            prev[j].append_into(a, &mut poly);
            cur[j - 1].append_into(b, &mut poly);
            if a == b {
                prev[j - 1].append_into(a, &mut poly);
            }
            cur.push(poly);
        }
        prev = cur;
    }
    Ok(prev.swap_remove(m))
}

/// `f_1 ↑ f_2 ↑ ... ↑ f_m` by left fold.
pub fn infiltration_many(seqs: &[BitSeq]) -> Result<InfiltrationPoly> {
    let total: usize = seqs.iter().map(BitSeq::len).sum();
    guard(
        "infiltration input length",
        total as u128,
        INFILTRATION_LIMIT as u128,
    )?;
    let mut acc = InfiltrationPoly::monomial(BitSeq::empty());
    for s in seqs {
        acc = acc.infiltrate(s)?;
    }
    Ok(acc)
}
