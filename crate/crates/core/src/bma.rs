//! Bitwise majority alignment.

use crate::seq::{BitSeq, Symbol};

/// Pointer-based majority vote over `n` output positions.
///
/// A trace whose pointer has run past its end abstains. Ties, and positions
/// where every trace abstains, produce `1`.
pub fn bma(n: usize, traces: &[BitSeq]) -> BitSeq {
    let mut ptr = vec![0usize; traces.len()];
    let mut out: Vec<Symbol> = vec![1; n];
    for slot in out.iter_mut() {
        let mut votes = [0usize; 2];
        for (y, &c) in traces.iter().zip(&ptr) {
            if let Some(&s) = y.symbols().get(c) {
                votes[usize::from(s & 1)] += 1;
            }
        }
        if votes == [0, 0] {
            continue;
        }
        let b: Symbol = if votes[0] > votes[1] { 0 } else { 1 };
        *slot = b;
        for (y, c) in traces.iter().zip(ptr.iter_mut()) {
            if y.symbols().get(*c) == Some(&b) {
                *c += 1;
            }
        }
    }
    BitSeq::from_symbols(out)
}
