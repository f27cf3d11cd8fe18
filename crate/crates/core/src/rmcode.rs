//! Reed-Muller codes `RM(n, r)`: generators, codeword enumeration, weight
//! distribution and the count of codewords far from balanced.

use num_integer::binomial;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{EchelonBasis, Word, MAX_VARS};
use crate::par::{map_reduce_chunks, Workers};

/// Largest dimension for which all `2^k` codewords may be enumerated.
pub const MAX_ENUM_DIM: u32 = 28;

/// Cap on the generator matrix size, in bits.
const MAX_GENERATOR_BITS: u64 = 1 << 32;

const ENUM_CHUNK: u64 = 1 << 14;

/// The code `RM(n, r)`: truth tables of Boolean functions in `n` variables of
/// algebraic degree at most `r`.
#[derive(Debug, Clone)]
pub struct RmCode {
    n: u32,
    r: u32,
    k: u32,
    /// Monomials as variable masks, bit `i - 1` standing for `x_i`.
    monomials: Vec<u32>,
    generators: Vec<Word>,
}

/// Summary of the code parameters, as emitted by `code info`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeInfo {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    pub d_min: u64,
    pub length: u64,
}

/// Builds `RM(n, r)`.
///
/// Generators are the evaluation vectors of the monomials `prod_{i in S} x_i`
/// with `|S| <= r`, ordered by degree and lexicographically within a degree
/// (so `1, x_1, .., x_n, x_1 x_2, x_1 x_3, ..`).
pub fn build_rm(n: u32, r: u32) -> Result<RmCode> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::param(format!("n must lie in 1..={MAX_VARS}, got {n}")));
    }
    if r > n {
        return Err(Error::param(format!("order r = {r} exceeds n = {n}")));
    }
    let k: u64 = (0..=r).map(|i| binomial(u64::from(n), u64::from(i))).sum();
    if k.saturating_mul(1 << n) > MAX_GENERATOR_BITS {
        return Err(Error::resource(format!(
            "generator matrix of RM({n},{r}) has {k} x 2^{n} bits"
        )));
    }
    let monomials: Vec<u32> = (0..=r).flat_map(|d| subsets_lex(n, d)).collect();
    let generators = monomials.iter().map(|&m| monomial_word(n, m)).collect();
    Ok(RmCode {
        n,
        r,
        k: k as u32,
        monomials,
        generators,
    })
}

/// Size-`d` subsets of `{1..n}` as masks, in lexicographic order.
fn subsets_lex(n: u32, d: u32) -> Vec<u32> {
    fn rec(start: u32, n: u32, left: u32, acc: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for v in start..n {
            if n - v < left {
                break;
            }
            rec(v + 1, n, left - 1, acc | (1 << v), out);
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, 0, &mut out);
    out
}

/// Truth table of the monomial with variable mask `m`. Variable `x_i` is bit
/// `n - i` of the point index.
fn monomial_word(n: u32, m: u32) -> Word {
    let point_mask = (0..n)
        .filter(|v| m >> v & 1 == 1)
        .fold(0usize, |acc, v| acc | 1 << (n - 1 - v));
    Word::from_positions(n, (0..1usize << n).filter(|x| x & point_mask == point_mask))
}

impl RmCode {
    pub fn vars(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn dim(&self) -> u32 {
        self.k
    }

    pub fn length(&self) -> u64 {
        1 << self.n
    }

    pub fn min_distance(&self) -> u64 {
        1 << (self.n - self.r)
    }

    /// `C(n, r)`, the dimension of the degree-`r` part.
    pub fn top_degree_count(&self) -> u64 {
        binomial(u64::from(self.n), u64::from(self.r))
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    /// Variable masks of the generator monomials, bit `i - 1` for `x_i`.
    pub fn monomials(&self) -> &[u32] {
        &self.monomials
    }

    pub fn info(&self) -> CodeInfo {
        CodeInfo {
            n: self.n,
            r: self.r,
            k: self.k,
            d_min: self.min_distance(),
            length: self.length(),
        }
    }

    /// Codeword for a message whose bit `j` selects generator `j`.
    pub fn encode(&self, message: u64) -> Word {
        let mut w = Word::zeros(self.n);
        for (j, g) in self.generators.iter().enumerate().take(64) {
            if message >> j & 1 == 1 {
                w.xor_assign(g);
            }
        }
        w
    }

    /// Row-reduced generator matrix; its `contains` is the membership test.
    pub fn echelon(&self) -> EchelonBasis {
        EchelonBasis::from_rows(self.n, &self.generators)
    }

    pub(crate) fn check_enumerable(&self) -> Result<()> {
        if self.k > MAX_ENUM_DIM {
            return Err(Error::resource(format!(
                "enumerating 2^{} codewords exceeds the 2^{MAX_ENUM_DIM} guard",
                self.k
            )));
        }
        Ok(())
    }

    /// All `2^k` codewords in Gray-code order of the message: index `i` holds
    /// the codeword of message `i ^ (i >> 1)`. The zero word comes first and
    /// consecutive codewords differ by one generator.
    pub fn codewords(&self) -> Result<Codewords<'_>> {
        self.check_enumerable()?;
        Ok(Codewords {
            code: self,
            next: 0,
            end: 1u64 << self.k,
            current: Word::zeros(self.n),
        })
    }

    /// Calls `f` on the codewords with Gray indices in `range`.
    pub(crate) fn for_each_codeword_in(&self, range: std::ops::Range<u64>, mut f: impl FnMut(&Word)) {
        if range.is_empty() {
            return;
        }
        let mut w = self.encode(range.start ^ (range.start >> 1));
        f(&w);
        for i in range.start + 1..range.end {
            w.xor_assign(&self.generators[i.trailing_zeros() as usize]);
            f(&w);
        }
    }

    /// Exact weight distribution by enumerating every codeword.
    pub fn weight_distribution(&self, workers: Workers) -> Result<WeightDistribution> {
        self.check_enumerable()?;
        let len = self.length() as usize;
        let counts = map_reduce_chunks(
            0..1u64 << self.k,
            ENUM_CHUNK,
            workers,
            vec![0u64; len + 1],
            |range| {
                let mut h = vec![0u64; len + 1];
                self.for_each_codeword_in(range, |w| h[w.weight() as usize] += 1);
                h
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
        Ok(WeightDistribution { counts })
    }

    /// Number of codewords `g` with `|wt(g) - 2^(n-1)| >= 2^(n-1) / C(n, r)`.
    pub fn count_far_codewords(&self, workers: Workers) -> Result<u64> {
        Ok(self.weight_distribution(workers)?.count_far(self.n, self.top_degree_count()))
    }
}

/// Iterator over codewords, see [`RmCode::codewords`].
#[derive(Debug)]
pub struct Codewords<'a> {
    code: &'a RmCode,
    next: u64,
    end: u64,
    current: Word,
}

impl Iterator for Codewords<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.next >= self.end {
            return None;
        }
        if self.next > 0 {
            let bit = self.next.trailing_zeros() as usize;
            self.current.xor_assign(&self.code.generators[bit]);
        }
        self.next += 1;
        Some(self.current.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Codewords<'_> {}

/// Number of codewords of each weight `0..=2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    counts: Vec<u64>,
}

impl WeightDistribution {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, weight: usize) -> u64 {
        self.counts.get(weight).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(weight, count)` pairs with nonzero count.
    pub fn support(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().copied().enumerate().filter(|&(_, c)| c > 0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.counts.iter().eq(self.counts.iter().rev())
    }

    /// Counts weights with `|w - 2^(n-1)| * divisor >= 2^(n-1)`, the exact
    /// form of `|w - 2^(n-1)| >= 2^(n-1) / divisor`.
    pub fn count_far(&self, n: u32, divisor: u64) -> u64 {
        let half = 1u128 << (n - 1);
        self.support()
            .filter(|&(w, _)| (w as u128).abs_diff(half) * u128::from(divisor) >= half)
            .map(|(_, c)| c)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, HashSet};

    fn dist_map(d: &WeightDistribution) -> BTreeMap<usize, u64> {
        d.support().collect()
    }

    #[test]
    fn parameters() {
        let c = build_rm(3, 1).unwrap();
        assert_eq!((c.dim(), c.min_distance(), c.length()), (4, 4, 8));
        let c = build_rm(4, 2).unwrap();
        assert_eq!((c.dim(), c.min_distance()), (11, 4));
        let c = build_rm(5, 5).unwrap();
        assert_eq!((c.dim(), c.min_distance()), (32, 1));
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(build_rm(3, 4), Err(Error::Parameter(_))));
        assert!(matches!(build_rm(0, 0), Err(Error::Parameter(_))));
        assert!(matches!(build_rm(29, 1), Err(Error::Parameter(_))));
        assert!(matches!(build_rm(28, 28), Err(Error::Resource(_))));
        assert!(matches!(build_rm(5, 5).unwrap().codewords(), Err(Error::Resource(_))));
    }

    #[test]
    fn generator_order_is_degree_then_lex() {
        let c = build_rm(3, 2).unwrap();
        let names: Vec<u32> = c.monomials().to_vec();
        assert_eq!(names, vec![0, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110]);
        // x_1 is the most significant coordinate of the point
        assert_eq!(c.generators()[1].to_string(), "00001111");
        assert_eq!(c.generators()[3].to_string(), "01010101");
        assert_eq!(c.generators()[4].to_string(), "00000011");
    }

    #[test]
    fn enumerate_rm11() {
        let c = build_rm(1, 1).unwrap();
        let words: Vec<String> = c.codewords().unwrap().map(|w| w.to_string()).collect();
        assert_eq!(words[0], "00");
        let set: HashSet<String> = words.into_iter().collect();
        let expected: HashSet<String> = ["00", "11", "01", "10"].iter().map(|s| s.to_string()).collect();
        assert_eq!(set, expected);
    }

    #[test]
    fn enumerate_distinct() {
        let c = build_rm(3, 1).unwrap();
        let all: HashSet<Word> = c.codewords().unwrap().collect();
        assert_eq!(all.len(), 16);
        let c = build_rm(4, 2).unwrap();
        let all: HashSet<Word> = c.codewords().unwrap().collect();
        assert_eq!(all.len(), 2048);
        let weights: HashSet<u64> = all.iter().map(Word::weight).collect();
        let expected: HashSet<u64> = [0, 4, 6, 8, 10, 12, 16].into_iter().collect();
        assert_eq!(weights, expected);
    }

    #[test]
    fn weight_distributions() {
        let d = build_rm(3, 1).unwrap().weight_distribution(Workers::Serial).unwrap();
        assert_eq!(dist_map(&d), BTreeMap::from([(0, 1), (4, 14), (8, 1)]));
        let d = build_rm(2, 2).unwrap().weight_distribution(Workers::Auto).unwrap();
        assert_eq!(dist_map(&d), BTreeMap::from([(0, 1), (1, 4), (2, 6), (3, 4), (4, 1)]));
        let d = build_rm(4, 1).unwrap().weight_distribution(Workers::Fixed(3)).unwrap();
        assert_eq!(dist_map(&d), BTreeMap::from([(0, 1), (8, 30), (16, 1)]));
    }

    #[test]
    fn weight_distribution_independent_of_workers() {
        let c = build_rm(6, 2).unwrap();
        let a = c.weight_distribution(Workers::Serial).unwrap();
        let b = c.weight_distribution(Workers::Fixed(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 1 << c.dim());
        assert!(a.is_symmetric());
    }

    #[test]
    fn far_codeword_counts() {
        assert_eq!(build_rm(3, 1).unwrap().count_far_codewords(Workers::Serial).unwrap(), 2);
        assert_eq!(build_rm(4, 1).unwrap().count_far_codewords(Workers::Serial).unwrap(), 2);
    }

    #[test]
    fn far_count_for_full_space_matches_direct_filter() {
        for n in 1..=4u32 {
            let code = build_rm(n, n).unwrap();
            let len = 1u64 << n;
            let half = len / 2;
            let direct = (0..1u64 << len)
                .filter(|w| u64::from(w.count_ones()).abs_diff(half) >= half)
                .count() as u64;
            assert_eq!(code.count_far_codewords(Workers::Auto).unwrap(), direct, "n={n}");
        }
    }

    #[test]
    fn minimum_distance_holds() {
        for n in 1..=6u32 {
            for r in 0..=n {
                let code = build_rm(n, r).unwrap();
                if code.dim() > 20 {
                    continue;
                }
                let d = code.weight_distribution(Workers::Auto).unwrap();
                let min_nonzero = d.support().map(|(w, _)| w as u64).find(|&w| w > 0);
                assert_eq!(min_nonzero, Some(code.min_distance()), "RM({n},{r})");
                assert_eq!(d.total(), 1 << code.dim());
                assert!(d.is_symmetric());
            }
        }
    }

    #[test]
    fn generators_independent() {
        for (n, r) in [(4, 2), (6, 3), (7, 2), (5, 5)] {
            let code = build_rm(n, r).unwrap();
            assert_eq!(code.echelon().rank(), code.dim() as usize);
        }
    }

    #[test]
    fn xor_closure_via_membership() {
        let code = build_rm(7, 2).unwrap();
        let basis = code.echelon();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mask = (1u64 << code.dim()) - 1;
        for _ in 0..1000 {
            let a = code.encode(rng.random::<u64>() & mask);
            let b = code.encode(rng.random::<u64>() & mask);
            assert!(basis.contains(&a.xor(&b).unwrap()));
        }
        let mut outside = code.encode(5);
        outside.flip(0);
        assert!(!basis.contains(&outside));
    }
}
