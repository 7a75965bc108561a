//! Packed row of bits, one per bitline.

use std::fmt;

use rand::Rng;

/// A fixed-length packed bit vector. Bit `i` lives in word `i / 64` at
/// position `i % 64`; padding bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = Self {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        row.clear_padding();
        row
    }

    pub fn splat(len: usize, bit: bool) -> Self {
        if bit {
            Self::ones(len)
        } else {
            Self::zeros(len)
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut row = Self::zeros(len);
        for i in 0..len {
            row.set(i, f(i));
        }
        row
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut row = Self {
            len,
            words: (0..len.div_ceil(64)).map(|_| rng.random()).collect(),
        };
        row.clear_padding();
        row
    }

    /// Alternating `1010...` starting with a one at bitline 0.
    pub fn alternating(len: usize) -> Self {
        Self::from_fn(len, |i| i % 2 == 0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn not(&self) -> Self {
        let mut row = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        row.clear_padding();
        row
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "bit row length mismatch");
        Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Little-endian bytes: byte `k` holds bitlines `8k..8k+8`, bitline `8k`
    /// in the least significant bit.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n)
            .collect()
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (k, &b) in bytes.iter().enumerate() {
            words[k / 8] |= (b as u64) << (8 * (k % 8));
        }
        let mut row = Self { len, words };
        let before = row.words.clone();
        row.clear_padding();
        (row.words == before).then_some(row)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(len: usize, s: &str) -> Option<Self> {
        Self::from_bytes(len, &hex::decode(s).ok()?)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitRow({s})")
        } else {
            write!(f, "BitRow(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

/// Bitwise majority of an odd number of rows, computed word-parallel with a
/// bit-sliced population counter.
pub fn majority(inputs: &[&BitRow]) -> BitRow {
    assert!(inputs.len() % 2 == 1, "majority needs an odd input count");
    let len = inputs[0].len();
    let threshold = inputs.len().div_ceil(2) as u64;
    let words = inputs[0].words.len();
    let counter_bits = (usize::BITS - inputs.len().leading_zeros()) as usize + 1;
    let mut out = BitRow::zeros(len);
    let mut counter = vec![0u64; counter_bits];
    for w in 0..words {
        counter.iter_mut().for_each(|c| *c = 0);
        for input in inputs {
            debug_assert_eq!(input.len(), len);
            let mut carry = input.words[w];
            for c in counter.iter_mut() {
                let next = *c & carry;
                *c ^= carry;
                carry = next;
                if carry == 0 {
                    break;
                }
            }
        }
        // count >= threshold  <=>  count + (2^k - threshold) carries out of k bits
        let addend = (1u64 << counter_bits) - threshold;
        let mut carry = 0u64;
        for (i, c) in counter.iter().enumerate() {
            carry = if (addend >> i) & 1 == 1 {
                c | carry
            } else {
                c & carry
            };
        }
        out.words[w] = carry;
    }
    out.clear_padding();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn padding_stays_clear() {
        let r = BitRow::ones(70);
        assert_eq!(r.count_ones(), 70);
        assert_eq!(r.not().count_ones(), 0);
    }

    #[test]
    fn hex_layout_is_little_endian_bytes() {
        let mut r = BitRow::zeros(16);
        r.set(0, true);
        r.set(9, true);
        assert_eq!(r.to_hex(), "0102");
        assert_eq!(BitRow::from_hex(16, "0102").unwrap(), r);
        assert!(BitRow::from_hex(12, "01ff").is_none());
    }

    proptest! {
        #[test]
        fn majority_matches_popcount(m in prop::sample::select(vec![1usize, 3, 5, 7, 9, 31]),
                                     seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<BitRow> = (0..m).map(|_| BitRow::random(130, &mut rng)).collect();
            let refs: Vec<&BitRow> = rows.iter().collect();
            let got = majority(&refs);
            for i in 0..130 {
                let ones = rows.iter().filter(|r| r.get(i)).count();
                prop_assert_eq!(got.get(i), ones >= m.div_ceil(2));
            }
        }

        #[test]
        fn bytes_roundtrip(len in 1usize..300, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = BitRow::random(len, &mut rng);
            prop_assert_eq!(BitRow::from_bytes(len, &r.to_bytes()), Some(r));
        }
    }
}
