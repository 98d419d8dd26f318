//! Fixed-length bitstrings packed into 64-bit words.
//!
//! The interface is positional: bit 0 is the *first* position of the string,
//! the one the leading-ones scan starts from and the most significant
//! position for value comparisons. Packing order is an internal detail; the
//! unused high bits of the last word are kept at zero so word-level scans
//! never see garbage.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitstring {
    words: Vec<u64>,
    len: usize,
}

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        Bitstring {
            words: vec![0; Self::word_count(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; Self::word_count(len)];
        Self::mask_tail(&mut words, len);
        Bitstring { words, len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at `index`; panics when out of range.
    pub fn get(&self, index: usize) -> bool {
        assert!(
            index < self.len,
            "bit index {index} out of range for length {}",
            self.len
        );
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len,
            "bit index {index} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (index % 64);
        if value {
            self.words[index / 64] |= mask;
        } else {
            self.words[index / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Length of the run of ones starting at position 0.
    pub fn leading_ones(&self) -> usize {
        let mut run = 0;
        for (i, &word) in self.words.iter().enumerate() {
            let width = self.word_width(i);
            // Positions within a word grow from the low bit, so the run
            // length inside the word is its trailing-ones count.
            let ones = (!word).trailing_zeros() as usize;
            if ones >= width {
                run += width;
            } else {
                return run + ones;
            }
        }
        run
    }

    pub fn is_all_ones(&self) -> bool {
        self.leading_ones() == self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn word_count(len: usize) -> usize {
        len.div_ceil(64)
    }

    fn word_width(&self, word_index: usize) -> usize {
        let start = word_index * 64;
        (self.len - start).min(64)
    }

    fn mask_tail(words: &mut [u64], len: usize) {
        let used = len % 64;
        if used != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

impl FromIterator<bool> for Bitstring {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut words = Vec::new();
        let mut current = 0u64;
        let mut len = 0;
        for bit in iter {
            if bit {
                current |= 1 << (len % 64);
            }
            len += 1;
            if len % 64 == 0 {
                words.push(current);
                current = 0;
            }
        }
        if len % 64 != 0 {
            words.push(current);
        }
        Bitstring { words, len }
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}
