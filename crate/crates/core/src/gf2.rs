//! Bit-packed binary words of length `2^n`, Hamming weight and distance, the
//! Walsh-Hadamard transform, and GF(2) row reduction.
//!
//! Position `x` of a word is the point of `F_2^n` whose binary expansion is
//! `x`, with `x_1` as the most significant bit. Words print and parse as their
//! truth tables, position 0 first.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest number of variables accepted anywhere in the crate.
pub const MAX_VARS: u32 = 28;

const LIMB_BITS: usize = 64;

/// A binary vector of length `2^n`, i.e. the truth table of a Boolean
/// function of `n` variables.
///
/// Words order lexicographically as big-endian strings of their truth tables:
/// position 0 is the most significant. Unused high bits of the last limb are
/// always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    n: u32,
    limbs: Vec<u64>,
}

impl Word {
    /// The all-zero word. Panics if `n > MAX_VARS`.
    pub fn zeros(n: u32) -> Self {
        assert!(n <= MAX_VARS, "word with {n} variables exceeds MAX_VARS");
        let len = 1usize << n;
        Word {
            n,
            limbs: vec![0; len.div_ceil(LIMB_BITS)],
        }
    }

    pub fn ones(n: u32) -> Self {
        let mut w = Word::zeros(n);
        w.limbs.iter_mut().for_each(|l| *l = u64::MAX);
        w.mask_tail();
        w
    }

    /// Word with ones exactly at `positions`.
    pub fn from_positions(n: u32, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut w = Word::zeros(n);
        for p in positions {
            w.set(p, true);
        }
        w
    }

    /// Builds a word of length `2^n <= 64` from its truth-table integer: the
    /// bit of weight `2^(N-1-x)` holds position `x`, so integer order equals
    /// word order.
    pub fn from_key(n: u32, key: u64) -> Self {
        assert!(n <= 6);
        let len = 1u32 << n;
        let mut w = Word::zeros(n);
        w.limbs[0] = (key << (64 - len)).reverse_bits();
        w
    }

    /// Inverse of [`Word::from_key`].
    pub fn to_key(&self) -> u64 {
        assert!(self.n <= 6);
        let len = 1u32 << self.n;
        self.limbs[0].reverse_bits() >> (64 - len)
    }

    /// Number of variables.
    pub fn vars(&self) -> u32 {
        self.n
    }

    /// Length `2^n`.
    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len());
        (self.limbs[x / LIMB_BITS] >> (x % LIMB_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, bit: bool) {
        assert!(x < self.len(), "position {x} out of range");
        let mask = 1u64 << (x % LIMB_BITS);
        if bit {
            self.limbs[x / LIMB_BITS] |= mask;
        } else {
            self.limbs[x / LIMB_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, x: usize) {
        self.limbs[x / LIMB_BITS] ^= 1u64 << (x % LIMB_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> u64 {
        self.limbs.iter().map(|l| u64::from(l.count_ones())).sum()
    }

    /// Hamming distance; errors when the lengths differ.
    pub fn distance(&self, other: &Word) -> Result<u64> {
        self.check_len(other)?;
        Ok(self.xor_weight(other))
    }

    /// `weight(self ^ other)` without allocating. Lengths must match.
    #[inline]
    pub(crate) fn xor_weight(&self, other: &Word) -> u64 {
        self.limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| u64::from((a ^ b).count_ones()))
            .sum()
    }

    pub fn xor(&self, other: &Word) -> Result<Word> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.xor_assign(other);
        Ok(out)
    }

    /// In-place XOR. Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &Word) {
        assert_eq!(self.n, other.n, "xor of words with different lengths");
        for (a, b) in self.limbs.iter_mut().zip(&other.limbs) {
            *a ^= b;
        }
    }

    pub fn complement(&self) -> Word {
        let mut out = self.clone();
        out.limbs.iter_mut().for_each(|l| *l = !*l);
        out.mask_tail();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Lowest set position.
    pub fn first_one(&self) -> Option<usize> {
        self.limbs
            .iter()
            .enumerate()
            .find(|(_, &l)| l != 0)
            .map(|(i, l)| i * LIMB_BITS + l.trailing_zeros() as usize)
    }

    /// Set positions in increasing order.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.limbs.iter().enumerate().flat_map(|(i, &l)| {
            let mut rest = l;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * LIMB_BITS + b)
            })
        })
    }

    /// Truth table as a string of `'0'`/`'1'`, position 0 first.
    pub fn to_truth_table(&self) -> String {
        (0..self.len()).map(|x| if self.get(x) { '1' } else { '0' }).collect()
    }

    /// Parses a truth table whose length must be a power of two `2^n`, `n >= 1`.
    pub fn from_truth_table(s: &str) -> Result<Word> {
        let len = s.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Parse(format!("truth table length {len} is not 2^n with n >= 1")));
        }
        let n = len.trailing_zeros();
        if n > MAX_VARS {
            return Err(Error::resource(format!("{n} variables exceeds the limit of {MAX_VARS}")));
        }
        let mut w = Word::zeros(n);
        for (x, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => w.set(x, true),
                other => return Err(Error::Parse(format!("unexpected character {other:?} at {x}"))),
            }
        }
        Ok(w)
    }

    fn check_len(&self, other: &Word) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    fn mask_tail(&mut self) {
        let len = self.len();
        if !len.is_multiple_of(LIMB_BITS) {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << (len % LIMB_BITS)) - 1;
            }
        }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            // low bit of limb 0 is position 0, the most significant
            self.limbs
                .iter()
                .zip(&other.limbs)
                .map(|(a, b)| a.reverse_bits().cmp(&b.reverse_bits()))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_truth_table())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 6 {
            write!(f, "Word({})", self.to_truth_table())
        } else {
            write!(f, "Word(n={}, weight={})", self.n, self.weight())
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::from_truth_table(s)
    }
}

/// Walsh spectrum `F(a) = sum_x (-1)^(w(x) + a.x)` of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshSpectrum {
    n: u32,
    coeffs: Vec<i32>,
}

impl WalshSpectrum {
    pub fn vars(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn get(&self, a: usize) -> i32 {
        self.coeffs[a]
    }

    /// `sum_a F(a)^2`, equal to `4^n` for every word.
    pub fn energy(&self) -> u128 {
        self.coeffs
            .iter()
            .map(|&c| (i128::from(c) * i128::from(c)) as u128)
            .sum()
    }

    /// Largest `|F(a)|` over `a != 0`, or `None` when `n == 0`.
    pub fn max_abs_nonzero(&self) -> Option<u32> {
        self.coeffs[1..].iter().map(|c| c.unsigned_abs()).max()
    }
}

/// Fast Walsh-Hadamard transform of the `+-1` sign vector of `w`, in
/// `O(n 2^n)` integer operations.
pub fn walsh_transform(w: &Word) -> Result<WalshSpectrum> {
    if w.n > MAX_VARS {
        return Err(Error::resource(format!("walsh transform limited to n <= {MAX_VARS}")));
    }
    let mut v: Vec<i32> = (0..w.len()).map(|x| if w.get(x) { -1 } else { 1 }).collect();
    butterfly(&mut v);
    Ok(WalshSpectrum { n: w.n, coeffs: v })
}

/// In-place unnormalised Hadamard butterfly over a power-of-two slice.
pub(crate) fn butterfly(v: &mut [i32]) {
    #[cfg(feature = "parallel")]
    {
        const BLOCK: usize = 1 << 16;
        if v.len() > BLOCK {
            use rayon::prelude::*;
            v.par_chunks_mut(BLOCK).for_each(butterfly_serial);
            let mut h = BLOCK;
            while h < v.len() {
                v.par_chunks_mut(2 * h).for_each(|pair| {
                    let (lo, hi) = pair.split_at_mut(h);
                    lo.par_chunks_mut(BLOCK)
                        .zip(hi.par_chunks_mut(BLOCK))
                        .for_each(|(a, b)| combine(a, b));
                });
                h *= 2;
            }
            return;
        }
    }
    butterfly_serial(v);
}

fn butterfly_serial(v: &mut [i32]) {
    let mut h = 1;
    while h < v.len() {
        for pair in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = pair.split_at_mut(h);
            combine(lo, hi);
        }
        h *= 2;
    }
}

#[inline]
fn combine(lo: &mut [i32], hi: &mut [i32]) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

/// A set of words over GF(2) in reduced row echelon form.
///
/// Each row's pivot is its lowest set position and no other row has a one
/// there. Reducing a word clears every pivot position, which yields a
/// canonical representative of the word's coset modulo the row span.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    n: u32,
    rows: Vec<Word>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(n: u32) -> Self {
        EchelonBasis {
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Row-reduces `rows`. Dependent rows are dropped.
    pub fn from_rows<'a>(n: u32, rows: impl IntoIterator<Item = &'a Word>) -> Self {
        let mut basis = EchelonBasis::new(n);
        for r in rows {
            basis.insert(r);
        }
        basis
    }

    /// Adds a row; returns false if it was already in the span.
    pub fn insert(&mut self, row: &Word) -> bool {
        let reduced = self.reduce(row);
        let Some(p) = reduced.first_one() else {
            return false;
        };
        for (r, _) in self.rows.iter_mut().zip(&self.pivots).filter(|(r, _)| r.get(p)) {
            r.xor_assign(&reduced);
        }
        self.rows.push(reduced);
        self.pivots.push(p);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Word] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Positions that are not pivots, in increasing order. There are
    /// `2^n - rank` of them and they index the syndrome bits.
    pub fn free_positions(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; 1usize << self.n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..is_pivot.len()).filter(|&x| !is_pivot[x]).collect()
    }

    /// Canonical coset representative: `w` with all pivot positions cleared.
    pub fn reduce(&self, w: &Word) -> Word {
        assert_eq!(w.n, self.n);
        let mut out = w.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.reduce(w).is_zero()
    }
}
