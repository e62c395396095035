//! Bit-packed columns for the oriented sweep.
//!
//! A [`Frontier`] holds one column of the window: bit `r` is row `r`
//! (0-based, bottom row first). Upward propagation inside a column is a
//! single carry-chain addition per word.

use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Frontier {
    words: Vec<u64>,
    len: usize,
}

impl Frontier {
    pub fn zeros(len: usize) -> Self {
        Frontier {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut f = Frontier {
            words: vec![!0; len.div_ceil(64)],
            len,
        };
        f.trim();
        f
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, r: usize) -> bool {
        r < self.len && (self.words[r / 64] >> (r % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, v: bool) {
        debug_assert!(r < self.len);
        let bit = 1u64 << (r % 64);
        if v {
            self.words[r / 64] |= bit;
        } else {
            self.words[r / 64] &= !bit;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set bits in `lo..hi`.
    pub fn count_range(&self, lo: usize, hi: usize) -> usize {
        (lo..hi.min(self.len)).filter(|&r| self.get(r)).count()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn highest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn and_assign(&mut self, other: &Frontier) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&r| self.get(r))
    }

    /// One sweep step: cells of `open` reachable from `seeds` moving up
    /// through consecutive open cells. `seeds` must be a subset of `open`.
    pub fn propagate_up(open: &Frontier, seeds: &Frontier) -> Frontier {
        let mut out = Frontier::zeros(open.len);
        let mut carry = 0u64;
        for (i, (&o, &s)) in open.words.iter().zip(&seeds.words).enumerate() {
            let (t, c1) = o.overflowing_add(s);
            let (sum, c2) = t.overflowing_add(carry);
            carry = (c1 || c2) as u64;
            out.words[i] = o & ((sum ^ o) | s);
        }
        out
    }
}

/// Per-symbol equality masks of a column sequence: `mask(v)` has bit `r` set
/// iff `ys[r] == v`.
pub(crate) struct SymbolMasks {
    masks: HashMap<u32, Frontier>,
    len: usize,
}

impl SymbolMasks {
    pub(crate) fn new(ys: &[u32]) -> Self {
        let mut masks: HashMap<u32, Frontier> = HashMap::new();
        for (r, &v) in ys.iter().enumerate() {
            masks
                .entry(v)
                .or_insert_with(|| Frontier::zeros(ys.len()))
                .set(r, true);
        }
        SymbolMasks {
            masks,
            len: ys.len(),
        }
    }

    /// Rows open against column symbol `x`.
    pub(crate) fn open(&self, x: u32) -> Frontier {
        match self.masks.get(&x) {
            None => Frontier::ones(self.len),
            Some(eq) => {
                let mut f = Frontier::ones(self.len);
                for (w, e) in f.words.iter_mut().zip(&eq.words) {
                    *w &= !*e;
                }
                f
            }
        }
    }
}
