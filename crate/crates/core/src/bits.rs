//! Fixed-width bit sets used for GF(2) algebra and fault signatures.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.toggle(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and_count(&self, other: &BitSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// Rank over GF(2) of the given rows.
pub fn gf2_rank(rows: &[BitSet]) -> usize {
    let mut basis: Vec<BitSet> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for b in &basis {
            let pivot = b.first_one().expect("basis rows are nonzero");
            if r.get(pivot) {
                r.xor_with(b);
            }
        }
        if let Some(p) = r.first_one() {
            for b in basis.iter_mut() {
                if b.get(p) {
                    b.xor_with(&r);
                }
            }
            basis.push(r);
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_dependent_rows() {
        let a = BitSet::from_indices(5, [0, 1]);
        let b = BitSet::from_indices(5, [1, 2]);
        let c = BitSet::from_indices(5, [0, 2]);
        assert_eq!(gf2_rank(&[a.clone(), b.clone(), c]), 2);
        assert_eq!(gf2_rank(&[a, b, BitSet::new(5)]), 2);
    }

    #[test]
    fn ones_iterates_across_words() {
        let s = BitSet::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(s.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(s.count_ones(), 4);
        assert_eq!(s.first_one(), Some(0));
    }
}

/// Dense row-major bit matrix; rows are trials, columns are coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> BitSet {
        BitSet::from_indices(self.cols, (0..self.cols).filter(|&c| self.get(r, c)))
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Rows packed to bytes, little-endian bit order within each byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let row_bytes = self.cols.div_ceil(8);
        let mut out = Vec::with_capacity(self.rows * row_bytes);
        for r in 0..self.rows {
            let words = &self.data[r * self.stride..(r + 1) * self.stride];
            let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
            out.extend_from_slice(&bytes[..row_bytes]);
        }
        out
    }

    pub fn from_packed_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Option<Self> {
        let row_bytes = cols.div_ceil(8);
        if bytes.len() != rows * row_bytes {
            return None;
        }
        let mut m = BitMatrix::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if bytes[r * row_bytes + c / 8] >> (c % 8) & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        Some(m)
    }
}
