//! Monte Carlo estimates of the fraction of weight-`t` errors that are
//! unambiguously correctable, and sweeps of `t = t_c` over `c`.
//!
//! Trial `i` of a run with seed `s` draws from its own ChaCha8 stream seeded
//! with [`substream_seed`]`(s, i)`. Results therefore depend only on
//! `(code, t, trials, seed)` and not on how trials are spread over workers.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{ln_binomial, threshold};
use crate::capability::{classify_error, ErrorClass};
use crate::error::{Error, Result};
use crate::gf2::{Word, MAX_VARS};
use crate::par::{map_reduce_chunks, Workers};
use crate::rmcode::{RmCode, MAX_ENUM_DIM};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_5EED;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

const TRIAL_CHUNK: u64 = 32;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, index))
}

/// Draws uniform weight-`t` words of length `2^n` by partial Fisher-Yates.
///
/// The position table is restored after every draw, so each draw depends only
/// on the random stream passed in.
#[derive(Debug, Clone)]
pub struct WeightSampler {
    n: u32,
    positions: Vec<u32>,
    swaps: Vec<u32>,
}

impl WeightSampler {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::param(format!("n must lie in 1..={MAX_VARS}, got {n}")));
        }
        Ok(WeightSampler {
            n,
            positions: (0..1u32 << n).collect(),
            swaps: Vec::new(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Result<Word> {
        let len = self.positions.len();
        if t > len as u64 {
            return Err(Error::param(format!("weight {t} exceeds length {len}")));
        }
        let t = t as usize;
        let mut w = Word::zeros(self.n);
        self.swaps.clear();
        for i in 0..t {
            let j = rng.random_range(i..len);
            self.positions.swap(i, j);
            self.swaps.push(j as u32);
            w.set(self.positions[i] as usize, true);
        }
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.positions.swap(i, j as usize);
        }
        Ok(w)
    }
}

/// One uniformly random word of weight `t` and length `2^n`.
pub fn sample_word_of_weight<R: Rng + ?Sized>(n: u32, t: u64, rng: &mut R) -> Result<Word> {
    WeightSampler::new(n)?.sample(t, rng)
}

/// Fraction of sampled weight-`t` errors that were unambiguous leaders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: u32,
    pub r: u32,
    /// Threshold constant the weight was derived from, if any.
    pub c: Option<f64>,
    pub t: u64,
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// 95% Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

fn check_feasible(code: &RmCode) -> Result<()> {
    if code.order() == 1 || code.dim() <= MAX_ENUM_DIM {
        Ok(())
    } else {
        Err(Error::resource(format!(
            "classifying against RM({},{}) needs 2^{} codewords",
            code.vars(),
            code.order(),
            code.dim()
        )))
    }
}

/// Samples `trials` uniform weight-`t` errors and counts the unambiguous
/// leaders, i.e. errors strictly closer to 0 than to any nonzero codeword.
pub fn estimate_correctable_fraction(
    code: &RmCode,
    t: u64,
    trials: u64,
    seed: u64,
    workers: Workers,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    if t > code.length() {
        return Err(Error::param(format!("weight {t} exceeds length {}", code.length())));
    }
    check_feasible(code)?;
    let n = code.vars();
    let successes = map_reduce_chunks(
        0..trials,
        TRIAL_CHUNK,
        workers,
        0u64,
        |range| {
            let mut sampler = WeightSampler::new(n).expect("validated by build_rm");
            range
                .filter(|&i| {
                    let mut rng = trial_rng(seed, i);
                    sampler
                        .sample(t, &mut rng)
                        .and_then(|e| classify_error(&e, code))
                        .is_ok_and(|class| class == ErrorClass::UnambiguousLeader)
                })
                .count() as u64
        },
        |a, b| a + b,
    );
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    Ok(McEstimate {
        n,
        r: code.order(),
        c: None,
        t,
        trials,
        successes,
        fraction: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        seed,
    })
}

/// Runs [`estimate_correctable_fraction`] at `t = t_c(c)` for every `c`;
/// rows come back sorted by `c` descending (increasing `t`).
pub fn threshold_sweep(
    code: &RmCode,
    c_values: &[f64],
    trials: u64,
    seed: u64,
    workers: Workers,
) -> Result<Vec<McEstimate>> {
    if c_values.is_empty() {
        return Err(Error::param("no c values given"));
    }
    let mut cs = c_values.to_vec();
    cs.sort_by(|a, b| b.total_cmp(a));
    cs.into_iter()
        .map(|c| {
            let params = threshold(c, code.vars(), code.order())?;
            let t = params.weight().ok_or_else(|| {
                Error::param(format!("threshold {} for c = {c} is below weight 0", params.delta))
            })?;
            let mut est = estimate_correctable_fraction(code, t, trials, seed, workers)?;
            est.c = Some(c);
            Ok(est)
        })
        .collect()
}

/// Fraction of a ball conditioned on `wt(e) <= delta`: per-shell fractions
/// averaged with weights `C(2^n, t)`.
pub fn shell_weighted_fraction(estimates: &[McEstimate]) -> Result<f64> {
    let first = estimates.first().ok_or_else(|| Error::param("no shells given"))?;
    let len = 1u64 << first.n;
    let logs: Vec<f64> = estimates.iter().map(|e| ln_binomial(len, e.t)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = estimates.iter().zip(&logs).fold((0.0, 0.0), |(num, den), (e, l)| {
        let w = (l - top).exp();
        (num + w * e.fraction, den + w)
    });
    Ok(num / den)
}

/// Largest `t <= 2^(n-1)` whose estimated fraction is at least `eps`, by
/// bisection on the (non-increasing) estimated fraction.
pub fn estimate_capability_threshold(
    code: &RmCode,
    eps: f64,
    trials: u64,
    seed: u64,
    workers: Workers,
) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    let (mut lo, mut hi) = (0u64, code.length() / 2 + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let est = estimate_correctable_fraction(code, mid, trials, seed, workers)?;
        if est.fraction >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Exact class counts over all words of weight `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub unambiguous: u64,
    pub ambiguous: u64,
    pub not_leader: u64,
}

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.unambiguous + self.ambiguous + self.not_leader
    }
}

/// Classifies every weight-`t` word; length at most 64 and at most `2^26` words.
pub fn exhaustive_class_counts(code: &RmCode, t: u64, workers: Workers) -> Result<ClassCounts> {
    let len = code.length();
    if len > 64 || t > len {
        return Err(Error::param(format!("exhaustive classification needs length <= 64 and t <= length, got {len}, {t}")));
    }
    check_feasible(code)?;
    let total = num_integer::binomial(len, t);
    if total > 1 << 26 {
        return Err(Error::resource(format!("{total} words of weight {t}")));
    }
    let n = code.vars();
    let words: Vec<u64> = fixed_weight_keys(len as u32, t as u32).collect();
    Ok(map_reduce_chunks(
        0..total,
        1 << 10,
        workers,
        ClassCounts::default(),
        |range| {
            let mut c = ClassCounts::default();
            for &key in &words[range.start as usize..range.end as usize] {
                match classify_error(&Word::from_key(n, key), code) {
                    Ok(ErrorClass::UnambiguousLeader) => c.unambiguous += 1,
                    Ok(ErrorClass::AmbiguousLeader) => c.ambiguous += 1,
                    _ => c.not_leader += 1,
                }
            }
            c
        },
        |a, b| ClassCounts {
            unambiguous: a.unambiguous + b.unambiguous,
            ambiguous: a.ambiguous + b.ambiguous,
            not_leader: a.not_leader + b.not_leader,
        },
    ))
}

fn fixed_weight_keys(len: u32, t: u32) -> impl Iterator<Item = u64> {
    let total = num_integer::binomial(u64::from(len), u64::from(t));
    let mut key = if t == 0 { 0 } else { u64::MAX >> (64 - t) };
    (0..total).map(move |i| {
        if i > 0 {
            let low = key & key.wrapping_neg();
            let ripple = key + low;
            key = (((ripple ^ key) >> 2) / low) | ripple;
        }
        key
    })
}

/// Formats with twelve significant digits, no exponent for moderate values.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

/// CSV with columns `n,r,c,t,trials,successes,fraction,ci_low,ci_high,seed`.
/// `c` is left empty for runs at an explicit weight.
pub fn write_csv(rows: &[McEstimate], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "n,r,c,t,trials,successes,fraction,ci_low,ci_high,seed")?;
    for e in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            e.n,
            e.r,
            e.c.map(format_sig12).unwrap_or_default(),
            e.t,
            e.trials,
            e.successes,
            format_sig12(e.fraction),
            format_sig12(e.ci_low),
            format_sig12(e.ci_high),
            e.seed
        )?;
    }
    Ok(())
}
