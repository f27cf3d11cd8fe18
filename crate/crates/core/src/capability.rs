//! Maximum-likelihood (coset leader) classification of error patterns and the
//! exact error-correction capability function `eps_C(t)`.
//!
//! A coset leader is a minimum-weight word of its coset `e + C`. When several
//! words tie, the lexicographically smallest one (see [`Word`]'s ordering) is
//! the chosen leader; `eps_C(t)` is the fraction of weight-`t` words that are
//! chosen leaders.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bounds::ball_volume_exact;
use crate::error::{Error, Result};
use crate::gf2::{walsh_transform, Word};
use crate::par::{map_reduce_chunks, Workers};
use crate::rmcode::RmCode;

/// Largest `n` for which the whole space `F_2^(2^n)` is partitioned.
pub const MAX_PROFILE_VARS: u32 = 5;

/// Largest `log2` of the coset count held in the leader table.
pub const MAX_PROFILE_COSET_BITS: u32 = 24;

const LEVEL_CHUNK: u64 = 1 << 15;

/// Status of an error pattern under maximum-likelihood decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorClass {
    /// Strictly lighter than every other member of its coset.
    UnambiguousLeader,
    /// Of minimum weight in its coset, tied with another member.
    AmbiguousLeader,
    /// Some member of its coset is strictly lighter.
    NotLeader,
}

impl ErrorClass {
    pub fn is_min_weight(self) -> bool {
        !matches!(self, ErrorClass::NotLeader)
    }

    fn from_weights(own: u64, best_other: u64) -> Self {
        match own.cmp(&best_other) {
            std::cmp::Ordering::Less => ErrorClass::UnambiguousLeader,
            std::cmp::Ordering::Equal => ErrorClass::AmbiguousLeader,
            std::cmp::Ordering::Greater => ErrorClass::NotLeader,
        }
    }
}

/// Classifies `e` against `code`, using the Walsh spectrum for first-order
/// codes and codeword enumeration otherwise.
pub fn classify_error(e: &Word, code: &RmCode) -> Result<ErrorClass> {
    if code.order() == 1 {
        classify_walsh(e, code)
    } else {
        classify_generic(e, code)
    }
}

/// Compares `wt(e)` with `min_{g != 0} wt(e + g)` over all `2^k` codewords.
pub fn classify_generic(e: &Word, code: &RmCode) -> Result<ErrorClass> {
    check_vars(e, code)?;
    code.check_enumerable()?;
    let own = e.weight();
    let mut best = u64::MAX;
    let mut acc = e.clone();
    let gens = code.generators();
    for i in 1..1u64 << code.dim() {
        acc.xor_assign(&gens[i.trailing_zeros() as usize]);
        best = best.min(acc.weight());
        if best < own {
            return Ok(ErrorClass::NotLeader);
        }
    }
    Ok(ErrorClass::from_weights(own, best))
}

/// First-order fast path. With `F` the Walsh spectrum of `e`,
/// `wt(e + a.x + b) = (2^n - (-1)^b F(a)) / 2`, so `e` is the unique lightest
/// word of its coset iff `F(0) > |F(a)|` for all `a != 0` and `F(0) > 0`.
pub fn classify_walsh(e: &Word, code: &RmCode) -> Result<ErrorClass> {
    check_vars(e, code)?;
    if code.order() != 1 {
        return Err(Error::param(format!(
            "walsh classification needs a first-order code, got order {}",
            code.order()
        )));
    }
    let spectrum = walsh_transform(e)?;
    let f0 = i64::from(spectrum.get(0));
    let peak = i64::from(spectrum.max_abs_nonzero().unwrap_or(0));
    // against the all-one word the competitor is -F(0)
    let rival = peak.max(-f0);
    Ok(match f0.cmp(&rival) {
        std::cmp::Ordering::Greater => ErrorClass::UnambiguousLeader,
        std::cmp::Ordering::Equal => ErrorClass::AmbiguousLeader,
        std::cmp::Ordering::Less => ErrorClass::NotLeader,
    })
}

fn check_vars(e: &Word, code: &RmCode) -> Result<()> {
    if e.vars() != code.vars() {
        return Err(Error::LengthMismatch {
            left: e.vars(),
            right: code.vars(),
        });
    }
    Ok(())
}

/// One weight class of a [`CapabilityProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub t: u64,
    /// `C(2^n, t)`.
    pub total_words: u64,
    /// Chosen coset leaders of weight `t`.
    pub correctable: u64,
}

impl ProfileRow {
    pub fn epsilon(&self) -> Ratio<u64> {
        Ratio::new(self.correctable, self.total_words)
    }
}

/// Exact `eps_C(t)` for every `t` in `0..=2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityProfile {
    pub n: u32,
    pub k: u32,
    pub d_min: u64,
    pub rows: Vec<ProfileRow>,
    /// Largest leader weight.
    pub covering_radius: u64,
    /// `floor((d_min - 1) / 2)`.
    pub t_c: u64,
}

/// JSON summary of a profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub n: u32,
    pub k: u32,
    pub covering_radius: u64,
    #[serde(rename = "t_C")]
    pub t_c: u64,
    pub leader_weight_census: BTreeMap<u64, u64>,
}

impl CapabilityProfile {
    pub fn epsilon(&self, t: u64) -> Ratio<u64> {
        self.rows
            .get(t as usize)
            .map(ProfileRow::epsilon)
            .unwrap_or_else(Ratio::zero)
    }

    /// Leader count per weight, for weights that have leaders.
    pub fn leader_census(&self) -> BTreeMap<u64, u64> {
        self.rows
            .iter()
            .filter(|r| r.correctable > 0)
            .map(|r| (r.t, r.correctable))
            .collect()
    }

    /// Total number of chosen leaders, one per coset.
    pub fn total_leaders(&self) -> u64 {
        self.rows.iter().map(|r| r.correctable).sum()
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            n: self.n,
            k: self.k,
            covering_radius: self.covering_radius,
            t_c: self.t_c,
            leader_weight_census: self.leader_census(),
        }
    }

    /// CSV with columns `t,total_words,correctable,epsilon_num,epsilon_den`.
    /// The fraction is written unreduced as `correctable/total_words`.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "t,total_words,correctable,epsilon_num,epsilon_den")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.t, r.total_words, r.correctable, r.correctable, r.total_words)?;
        }
        Ok(())
    }
}

/// Partitions the whole space into cosets and tallies the chosen leaders.
///
/// Words are visited by increasing weight. Each coset slot keeps the minimum
/// of `(weight, truth-table integer)` over the members seen, which is the
/// lightest, then lexicographically smallest, member. Enumeration stops once
/// every coset has a leader, so the cost is the volume of the ball of radius
/// equal to the covering radius.
pub fn exact_capability_profile(code: &RmCode, workers: Workers) -> Result<CapabilityProfile> {
    let n = code.vars();
    if n > MAX_PROFILE_VARS {
        return Err(Error::resource(format!(
            "exact profile enumerates 2^(2^{n}) words; limit is n <= {MAX_PROFILE_VARS}"
        )));
    }
    let len = 1u32 << n;
    let redundancy = len - code.dim();
    if redundancy > MAX_PROFILE_COSET_BITS {
        return Err(Error::resource(format!(
            "2^{redundancy} cosets exceed the 2^{MAX_PROFILE_COSET_BITS} leader table"
        )));
    }
    let syndrome = SyndromeMap::new(code);
    let cosets = 1u64 << redundancy;
    let slots: Vec<AtomicU64> = (0..cosets).map(|_| AtomicU64::new(u64::MAX)).collect();
    let binom = BinomialTable::new(len);

    let mut correctable = vec![0u64; len as usize + 1];
    let mut found = 0u64;
    for t in 0..=len {
        if found == cosets {
            break;
        }
        let level = binom.get(len, t);
        map_reduce_chunks(
            0..level,
            LEVEL_CHUNK,
            workers,
            (),
            |range| {
                let mut key = binom.unrank_colex(range.start, t);
                for i in range.clone() {
                    if i > range.start {
                        key = next_same_weight(key);
                    }
                    let s = syndrome.of_key(key);
                    slots[s as usize].fetch_min(u64::from(t) << 32 | key, Ordering::Relaxed);
                }
            },
            |_, _| (),
        );
        let new = slots
            .iter()
            .filter(|s| s.load(Ordering::Relaxed) >> 32 == u64::from(t))
            .count() as u64;
        correctable[t as usize] = new;
        found += new;
    }
    debug_assert_eq!(found, cosets);

    let rows: Vec<ProfileRow> = (0..=len)
        .map(|t| ProfileRow {
            t: u64::from(t),
            total_words: binom.get(len, t),
            correctable: correctable[t as usize],
        })
        .collect();
    let covering_radius = rows.iter().rev().find(|r| r.correctable > 0).map_or(0, |r| r.t);
    Ok(CapabilityProfile {
        n,
        k: code.dim(),
        d_min: code.min_distance(),
        rows,
        covering_radius,
        t_c: (code.min_distance() - 1) / 2,
    })
}

/// Linear map from truth-table integers to syndromes, as byte lookup tables.
///
/// The syndrome of `w` is its reduction modulo the row-reduced generator
/// matrix, read off at the non-pivot positions.
struct SyndromeMap {
    tables: Vec<[u32; 256]>,
}

impl SyndromeMap {
    fn new(code: &RmCode) -> Self {
        let n = code.vars();
        let len = 1usize << n;
        let basis = code.echelon();
        let free = basis.free_positions();
        // key bit b is position len - 1 - b
        let columns: Vec<u32> = (0..len)
            .map(|b| {
                let reduced = basis.reduce(&Word::from_positions(n, [len - 1 - b]));
                free.iter()
                    .enumerate()
                    .filter(|&(_, &x)| reduced.get(x))
                    .fold(0u32, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        let tables = columns
            .chunks(8)
            .map(|cols| {
                let mut table = [0u32; 256];
                for (v, entry) in table.iter_mut().enumerate() {
                    *entry = cols
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| v >> j & 1 == 1)
                        .fold(0, |acc, (_, &c)| acc ^ c);
                }
                table
            })
            .collect();
        SyndromeMap { tables }
    }

    #[inline]
    fn of_key(&self, key: u64) -> u32 {
        self.tables
            .iter()
            .enumerate()
            .fold(0, |acc, (i, t)| acc ^ t[(key >> (8 * i)) as usize & 0xff])
    }
}

/// Next integer with the same popcount (Gosper's hack).
#[inline]
fn next_same_weight(x: u64) -> u64 {
    let low = x & x.wrapping_neg();
    let ripple = x + low;
    (((ripple ^ x) >> 2) / low) | ripple
}

/// Pascal triangle up to 64 rows, with colex unranking of fixed-weight words.
struct BinomialTable {
    rows: Vec<Vec<u64>>,
}

impl BinomialTable {
    fn new(max: u32) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(max as usize + 1);
        for m in 0..=max as usize {
            let mut row = vec![1u64; m + 1];
            for j in 1..m {
                row[j] = rows[m - 1][j - 1] + rows[m - 1][j];
            }
            rows.push(row);
        }
        BinomialTable { rows }
    }

    fn get(&self, m: u32, j: u32) -> u64 {
        if j > m {
            0
        } else {
            self.rows[m as usize][j as usize]
        }
    }

    /// The `rank`-th weight-`t` integer in increasing order.
    fn unrank_colex(&self, mut rank: u64, t: u32) -> u64 {
        let mut key = 0u64;
        let mut top = self.rows.len() as u32;
        for i in (1..=t).rev() {
            let mut c = top - 1;
            while self.get(c, i) > rank {
                c -= 1;
            }
            key |= 1 << c;
            rank -= self.get(c, i);
            top = c;
        }
        key
    }
}

/// Outcome of [`check_monotonicity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub passed: bool,
    /// First `t` at which `eps(t+1) <= eps(t)` (or `<` inside the strict
    /// range `[t_C, covering_radius]`) fails.
    pub first_violation: Option<u64>,
    pub strict_violation: bool,
}

/// Checks `eps(t+1) <= eps(t)` for all `t`, strictly on `[t_C, covering_radius]`.
pub fn check_monotonicity(profile: &CapabilityProfile) -> MonotonicityReport {
    let last = profile.rows.len().saturating_sub(1) as u64;
    for t in 0..last {
        let (cur, next) = (profile.epsilon(t), profile.epsilon(t + 1));
        let strict = (profile.t_c..=profile.covering_radius).contains(&t);
        if next > cur || (strict && next == cur) {
            return MonotonicityReport {
                passed: false,
                first_violation: Some(t),
                strict_violation: strict && next == cur,
            };
        }
    }
    MonotonicityReport {
        passed: true,
        first_violation: None,
        strict_violation: false,
    }
}

/// `2^(2^n - k) / sum_{i <= t} C(2^n, i)`, the bound `eps_C(t) <= #cosets / Vol(t)`.
pub fn epsilon_upper_bound(code: &RmCode, t: u64) -> Result<BigRational> {
    let len = code.length();
    if t > len {
        return Err(Error::param(format!("t = {t} exceeds the length {len}")));
    }
    let cosets = BigUint::one() << (len - u64::from(code.dim()));
    let volume = ball_volume_exact(len, t)?;
    Ok(BigRational::new(cosets.into(), volume.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmcode::build_rm;
    use num_bigint::BigInt;

    /// Leader of `w`'s coset by direct scan: min over codewords of
    /// `(wt(w + g), w + g)` in word order.
    fn scan_leader(w: &Word, codewords: &[Word]) -> Word {
        codewords
            .iter()
            .map(|g| w.xor(g).unwrap())
            .min_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| a.cmp(b)))
            .unwrap()
    }

    fn brute_force_census(code: &RmCode) -> Vec<u64> {
        let len = code.length();
        let codewords: Vec<Word> = code.codewords().unwrap().collect();
        let mut census = vec![0u64; len as usize + 1];
        for key in 0..1u64 << len {
            let w = Word::from_key(code.vars(), key);
            if scan_leader(&w, &codewords) == w {
                census[w.weight() as usize] += 1;
            }
        }
        census
    }

    #[test]
    fn classify_examples() {
        let code = build_rm(3, 1).unwrap();
        assert_eq!(classify_error(&Word::zeros(3), &code).unwrap(), ErrorClass::UnambiguousLeader);
        for x in 0..8 {
            let e = Word::from_positions(3, [x]);
            assert_eq!(classify_generic(&e, &code).unwrap(), ErrorClass::UnambiguousLeader);
        }
        let e: Word = "11000000".parse().unwrap();
        assert_eq!(classify_generic(&e, &code).unwrap(), ErrorClass::AmbiguousLeader);
        assert_eq!(classify_walsh(&e, &code).unwrap(), ErrorClass::AmbiguousLeader);
        let e: Word = "11100000".parse().unwrap();
        assert_eq!(classify_error(&e, &code).unwrap(), ErrorClass::NotLeader);
        let code = build_rm(4, 2).unwrap();
        assert_eq!(classify_error(&Word::zeros(4), &code).unwrap(), ErrorClass::UnambiguousLeader);
    }

    #[test]
    fn classify_errors() {
        let code = build_rm(3, 1).unwrap();
        assert!(matches!(classify_error(&Word::zeros(4), &code), Err(Error::LengthMismatch { .. })));
        let code2 = build_rm(3, 2).unwrap();
        assert!(matches!(classify_walsh(&Word::zeros(3), &code2), Err(Error::Parameter(_))));
        let big = build_rm(6, 3).unwrap();
        assert!(matches!(classify_error(&Word::zeros(6), &big), Err(Error::Resource(_))));
    }

    #[test]
    fn rm31_profile() {
        let code = build_rm(3, 1).unwrap();
        let p = exact_capability_profile(&code, Workers::Serial).unwrap();
        let eps: Vec<Ratio<u64>> = (0..=8).map(|t| p.epsilon(t)).collect();
        assert_eq!(eps[0], Ratio::from_integer(1));
        assert_eq!(eps[1], Ratio::from_integer(1));
        assert_eq!(eps[2], Ratio::new(7, 28));
        assert!(eps[3..].iter().all(|e| e.is_zero()));
        assert_eq!(p.covering_radius, 2);
        assert_eq!(p.leader_census(), BTreeMap::from([(0, 1), (1, 8), (2, 7)]));
        assert_eq!(p.t_c, 1);
    }

    #[test]
    fn full_space_profile() {
        let code = build_rm(2, 2).unwrap();
        let p = exact_capability_profile(&code, Workers::Auto).unwrap();
        assert_eq!(p.epsilon(0), Ratio::from_integer(1));
        assert!((1..=4).all(|t| p.epsilon(t).is_zero()));
        assert_eq!(p.covering_radius, 0);
    }

    #[test]
    fn profile_matches_brute_force_scan() {
        for (n, r) in [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 1)] {
            let code = build_rm(n, r).unwrap();
            let p = exact_capability_profile(&code, Workers::Fixed(3)).unwrap();
            let census: Vec<u64> = p.rows.iter().map(|r| r.correctable).collect();
            assert_eq!(census, brute_force_census(&code), "RM({n},{r})");
        }
    }

    #[test]
    fn leader_count_identity_and_guarantee_region() {
        for (n, r) in [(4, 1), (4, 2), (5, 2), (5, 3)] {
            let code = build_rm(n, r).unwrap();
            let p = exact_capability_profile(&code, Workers::Auto).unwrap();
            assert_eq!(p.total_leaders(), 1 << (code.length() - u64::from(code.dim())));
            for t in 0..=p.t_c {
                assert_eq!(p.epsilon(t), Ratio::from_integer(1));
            }
            for t in p.covering_radius + 1..=code.length() {
                assert!(p.epsilon(t).is_zero());
            }
            assert!(check_monotonicity(&p).passed, "RM({n},{r})");
        }
    }

    #[test]
    fn profile_guards() {
        let code = build_rm(6, 5).unwrap();
        assert!(matches!(exact_capability_profile(&code, Workers::Serial), Err(Error::Resource(_))));
        let code = build_rm(5, 1).unwrap();
        assert!(matches!(exact_capability_profile(&code, Workers::Serial), Err(Error::Resource(_))));
    }

    #[test]
    fn monotonicity_examples() {
        let code = build_rm(3, 1).unwrap();
        let p = exact_capability_profile(&code, Workers::Serial).unwrap();
        assert_eq!(
            check_monotonicity(&p),
            MonotonicityReport { passed: true, first_violation: None, strict_violation: false }
        );
        let mut flat = p.clone();
        for row in &mut flat.rows {
            row.correctable = row.total_words;
        }
        flat.covering_radius = 3;
        let report = check_monotonicity(&flat);
        assert!(!report.passed);
        assert_eq!(report.first_violation, Some(1));
        assert!(report.strict_violation);

        let mut bumpy = p.clone();
        bumpy.rows[5].correctable = 1;
        bumpy.covering_radius = 2;
        let report = check_monotonicity(&bumpy);
        assert_eq!(report.first_violation, Some(4));
        assert!(!report.strict_violation);
    }

    #[test]
    fn upper_bound_values() {
        let code = build_rm(3, 1).unwrap();
        let b = epsilon_upper_bound(&code, 2).unwrap();
        assert_eq!(b, BigRational::new(BigInt::from(16), BigInt::from(37)));
        assert_eq!(epsilon_upper_bound(&code, 0).unwrap(), BigRational::from_integer(BigInt::from(16)));
        let p = exact_capability_profile(&code, Workers::Serial).unwrap();
        let eps2 = BigRational::new(BigInt::from(7), BigInt::from(28));
        assert!(eps2 <= b);
        assert!(p.epsilon(2) == Ratio::new(1, 4));
        assert!(matches!(epsilon_upper_bound(&code, 9), Err(Error::Parameter(_))));
    }

    #[test]
    fn colex_unrank_agrees_with_gosper() {
        let table = BinomialTable::new(12);
        for t in 1..=5u32 {
            let mut key = (1u64 << t) - 1;
            for rank in 0..table.get(12, t) {
                assert_eq!(table.unrank_colex(rank, t), key, "t={t} rank={rank}");
                key = next_same_weight(key);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let code = build_rm(3, 1).unwrap();
        let p = exact_capability_profile(&code, Workers::Serial).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,total_words,correctable,epsilon_num,epsilon_den\n0,1,1,1,1\n"));
        assert!(text.contains("\n2,28,7,7,28\n"));
    }
}
