//! Closed-form thresholds and bounds around the correctability threshold
//! `delta = 2^(n-1) - c sqrt(2^(n-1) C(n,r) ln 2)`.
//!
//! Every `log` here is natural. Functions that can underflow an `f64` also
//! come in a `_log2` flavour.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_reduce_chunks, Workers};

/// Largest length accepted by [`ball_volume_exact`].
pub const MAX_EXACT_LEN: u64 = 1 << 24;

/// Largest `n` for the floating-point threshold formulas.
pub const MAX_THRESHOLD_VARS: u32 = 60;

/// Numeric values of the threshold symbols for given `c`, `n` and `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub c: f64,
    pub n: u32,
    pub r: u32,
    /// The dimension term under the root: `C(n, r)`, or an explicit `k`.
    pub dim_term: u64,
    /// `c 2^(n/2) sqrt(2 dim_term ln 2)`.
    pub lambda: f64,
    /// `2^(n-1) - lambda / 2`.
    pub delta: f64,
    /// `floor(delta)`; negative when the threshold lies below weight zero.
    pub t_c: i64,
}

impl ThresholdParams {
    /// `delta` through the direct form `2^(n-1) - c sqrt(2^(n-1) dim_term ln 2)`.
    pub fn delta_direct(&self) -> f64 {
        let half = pow2(self.n - 1);
        half - self.c * (half * self.dim_term as f64 * LN_2).sqrt()
    }

    /// `t_c` as a weight, if non-negative.
    pub fn weight(&self) -> Option<u64> {
        u64::try_from(self.t_c).ok()
    }
}

fn pow2(e: u32) -> f64 {
    (e as f64).exp2()
}

/// `C(n, r)` in floating point, exact while it fits in 53 bits.
pub fn binomial_f64(n: u64, r: u64) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (1..=r).fold(1.0, |acc, i| acc * (n - r + i) as f64 / i as f64)
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param(format!("c must be a positive real, got {c}")));
    }
    Ok(())
}

fn check_nr(n: u32, r: u32) -> Result<()> {
    if n == 0 || n > MAX_THRESHOLD_VARS {
        return Err(Error::param(format!("n must lie in 1..={MAX_THRESHOLD_VARS}, got {n}")));
    }
    if r > n {
        return Err(Error::param(format!("order r = {r} exceeds n = {n}")));
    }
    Ok(())
}

/// Threshold parameters with `dim_term = C(n, r)`.
pub fn threshold(c: f64, n: u32, r: u32) -> Result<ThresholdParams> {
    check_nr(n, r)?;
    threshold_with_dim(c, n, r, binomial_f64(n.into(), r.into()) as u64)
}

/// Threshold parameters with an explicit dimension term, e.g. the code
/// dimension `k` in place of `C(n, r)`.
pub fn threshold_with_dim(c: f64, n: u32, r: u32, dim_term: u64) -> Result<ThresholdParams> {
    check_c(c)?;
    check_nr(n, r)?;
    if dim_term == 0 {
        return Err(Error::param("dimension term must be positive"));
    }
    let lambda = c * pow2(n).sqrt() * (2.0 * dim_term as f64 * LN_2).sqrt();
    let delta = pow2(n - 1) - lambda / 2.0;
    Ok(ThresholdParams {
        c,
        n,
        r,
        dim_term,
        lambda,
        delta,
        t_c: delta.floor() as i64,
    })
}

/// `sum_{i <= t} C(len, i)` as an exact integer. Cost grows like `t * len`.
pub fn ball_volume_exact(len: u64, t: u64) -> Result<BigUint> {
    if t > len {
        return Err(Error::param(format!("radius {t} exceeds length {len}")));
    }
    if len > MAX_EXACT_LEN {
        return Err(Error::resource(format!(
            "exact ball volume limited to length <= {MAX_EXACT_LEN}, use the log-domain route"
        )));
    }
    if t == len {
        return Ok(BigUint::one() << len);
    }
    // sum the shorter side and complement
    if 2 * t > len {
        let rest = partial_binomial_sum(len, len - t - 1);
        return Ok((BigUint::one() << len) - rest);
    }
    Ok(partial_binomial_sum(len, t))
}

fn partial_binomial_sum(len: u64, t: u64) -> BigUint {
    let mut term = BigUint::one();
    let mut sum = BigUint::zero();
    for i in 0..=t {
        sum += &term;
        term *= len - i;
        term /= i + 1;
    }
    sum
}

/// `log2` of a positive big integer to full `f64` precision.
pub fn biguint_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map_or(f64::NEG_INFINITY, |v| (v as f64).log2());
    }
    let top = (x >> (bits - 64)).to_u64().unwrap_or(u64::MAX);
    (bits - 64) as f64 + (top as f64).log2()
}

/// Running sum with Neumaier compensation.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(mut self, other: CompensatedSum) -> CompensatedSum {
        self.add(other.sum);
        self.add(other.carry);
        self
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

const LN_BINOMIAL_BLOCK: u64 = 1 << 16;
const STIRLING_CUTOVER: u64 = 1 << 24;

/// `ln C(len, t)`.
///
/// Below the cutover this is the compensated sum of `ln(1 + (len - t) / i)`
/// for `i = 1..=t`, sharded in fixed blocks and merged in block order so the
/// rounding does not depend on the worker count. Above it, a Stirling series.
pub fn ln_binomial(len: u64, t: u64) -> f64 {
    if t > len {
        return f64::NEG_INFINITY;
    }
    let t = t.min(len - t);
    if t > STIRLING_CUTOVER {
        return ln_factorial(len) - ln_factorial(t) - ln_factorial(len - t);
    }
    let gap = (len - t) as f64;
    map_reduce_chunks(
        1..t + 1,
        LN_BINOMIAL_BLOCK,
        Workers::Auto,
        CompensatedSum::default(),
        |range| {
            let mut s = CompensatedSum::default();
            for i in range {
                s.add((gap / i as f64).ln_1p());
            }
            s
        },
        CompensatedSum::merge,
    )
    .value()
}

/// `ln m!` by direct summation for small `m` and the Stirling series beyond.
fn ln_factorial(m: u64) -> f64 {
    if m < 64 {
        let mut s = CompensatedSum::default();
        (2..=m).for_each(|i| s.add((i as f64).ln()));
        return s.value();
    }
    let x = m as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + series
}

/// `log2 sum_{i <= t} C(len, i)` in the log domain.
///
/// For `t <= len / 2` the terms below `C(len, t)` fall off geometrically and
/// are summed relative to it until they drop under `2^-70` of the total; for
/// larger `t` the complementary tail is subtracted from `2^len`.
pub fn ball_volume_log2(len: u64, t: u64) -> Result<f64> {
    if t > len {
        return Err(Error::param(format!("radius {t} exceeds length {len}")));
    }
    if t == len {
        return Ok(len as f64);
    }
    if 2 * t <= len {
        return Ok(lower_tail_log2(len, t));
    }
    let rest = lower_tail_log2(len, len - t - 1);
    Ok(len as f64 + (-(rest - len as f64).exp2()).ln_1p() / LN_2)
}

fn lower_tail_log2(len: u64, t: u64) -> f64 {
    let mut rel = CompensatedSum::default();
    rel.add(1.0);
    let mut term = 1.0f64;
    let mut i = t;
    while i > 0 {
        term *= i as f64 / (len - i + 1) as f64;
        rel.add(term);
        if term < rel.sum * 1e-21 {
            break;
        }
        i -= 1;
    }
    ln_binomial(len, t) / LN_2 + rel.value().log2()
}

/// `log2` of the asymptotic ball volume
/// `2^(2^n) / sqrt(pi) * 2^(-c^2 C) / (2 c sqrt(C ln 2))` with `C = C(n, r)`.
/// Subtract `2^n` for the probability of the ball.
pub fn ball_volume_asymptotic_log2(c: f64, n: u32, r: u32) -> Result<f64> {
    check_nr(n, r)?;
    ball_volume_asymptotic_log2_dim(c, n, binomial_f64(n.into(), r.into()))
}

/// As [`ball_volume_asymptotic_log2`] with an explicit dimension term.
pub fn ball_volume_asymptotic_log2_dim(c: f64, n: u32, dim_term: f64) -> Result<f64> {
    check_c(c)?;
    Ok(pow2(n) - c * c * dim_term - 0.5 * PI.log2() - (2.0 * c * (dim_term * LN_2).sqrt()).log2())
}

/// Inputs to the per-codeword intersection bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEvalInput {
    /// Chernoff parameter.
    pub s: f64,
    /// Exponent slack in the far-codeword count.
    pub alpha: f64,
    /// Weight of the codeword `g`.
    pub wt_g: u64,
}

impl BoundEvalInput {
    pub fn new(s: f64, alpha: f64, wt_g: u64, n: u32) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::param(format!("s must be finite and >= 0, got {s}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        if n > MAX_THRESHOLD_VARS || wt_g as f64 > pow2(n) {
            return Err(Error::param(format!("weight {wt_g} exceeds 2^{n}")));
        }
        Ok(BoundEvalInput { s, alpha, wt_g })
    }
}

/// Natural-log exponent `2 s^2 (2^n - wt_g) - 2 s lambda` of the bound on
/// `P(B_delta(0) & B_delta(g))`.
pub fn chernoff_intersection_exponent(input: &BoundEvalInput, lambda: f64, n: u32) -> f64 {
    let s = input.s;
    2.0 * s * s * (pow2(n) - input.wt_g as f64) - 2.0 * s * lambda
}

/// `exp(2 s^2 (2^n - wt_g) - 2 s lambda)`.
pub fn chernoff_intersection_bound(input: &BoundEvalInput, lambda: f64, n: u32) -> f64 {
    chernoff_intersection_exponent(input, lambda, n).exp()
}

/// The minimising `s = lambda / (2^(n+1) - 2 wt_g)`, at which the exponent
/// equals `-lambda^2 / (2^(n+1) - 2 wt_g)`.
pub fn optimal_chernoff_s(lambda: f64, n: u32, wt_g: u64) -> Result<f64> {
    let denom = pow2(n + 1) - 2.0 * wt_g as f64;
    if denom <= 0.0 {
        return Err(Error::Domain(format!("no finite minimiser for wt_g = {wt_g} >= 2^{n}")));
    }
    Ok(lambda / denom)
}

/// `log2` of `2^(-2 c^2 (C(n,r) - 1))`.
pub fn close_case_bound_log2(c: f64, n: u32, r: u32) -> Result<f64> {
    check_c(c)?;
    check_nr(n, r)?;
    Ok(-2.0 * c * c * (binomial_f64(n.into(), r.into()) - 1.0))
}

/// Bound `2^(-2 c^2 (C(n,r) - 1))` on the intersection probability for
/// codewords with `|wt(g) - 2^(n-1)| <= 2^(n-1) / C(n, r)`.
pub fn close_case_bound(c: f64, n: u32, r: u32) -> Result<f64> {
    Ok(close_case_bound_log2(c, n, r)?.exp2())
}

/// `log2` of `2^(-c^2 C(n,r) / (1 - 2^-r))`.
pub fn far_case_bound_log2(c: f64, r: u32, n: u32) -> Result<f64> {
    check_c(c)?;
    check_nr(n, r)?;
    if r == 0 {
        return Err(Error::param("the far-codeword bound needs r >= 1 (1 - 2^-r vanishes at r = 0)"));
    }
    let big_c = binomial_f64(n.into(), r.into());
    Ok(-c * c * big_c / (1.0 - pow2(r).recip()))
}

/// Per-codeword bound `2^(-c^2 C(n,r) / (1 - 2^-r))` valid when `wt(g) >= 2^(n-r)`.
pub fn far_case_bound(c: f64, r: u32, n: u32) -> Result<f64> {
    Ok(far_case_bound_log2(c, r, n)?.exp2())
}

/// `log2` of the summed far-codeword bound `2^(alpha C) 2^(-c^2 C / (1 - 2^-r))`.
pub fn far_sum_bound_log2(c: f64, r: u32, n: u32, alpha: f64) -> Result<f64> {
    let per = far_case_bound_log2(c, r, n)?;
    Ok(alpha * binomial_f64(n.into(), r.into()) + per)
}

/// Largest admissible `alpha`: `2^-r c^2 / (1 - 2^-r)`.
pub fn alpha_max(c: f64, r: u32) -> f64 {
    let q = pow2(r).recip();
    q * c * c / (1.0 - q)
}

/// Base-2 exponents `(e_left, e_right)` of the two terms whose sum bounds the
/// normalised intersection sum, without validating the parameters:
/// `e_left = -C c^2 + 2 c^2`, `e_right = C (alpha - 2^-r c^2 / (1 - 2^-r))`.
pub fn certificate_exponents(c: f64, n: u32, r: u32, alpha: f64) -> (f64, f64) {
    let big_c = binomial_f64(n.into(), r.into());
    let e_left = -big_c * c * c + 2.0 * c * c;
    let e_right = big_c * (alpha - alpha_max(c, r));
    (e_left, e_right)
}

/// Exponent pair plus the first `n` at which both are at most `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub c: f64,
    pub n: u32,
    pub r: u32,
    pub alpha: f64,
    pub alpha_max: f64,
    pub e_left: f64,
    pub e_right: f64,
    pub first_n_both_le_minus_one: Option<u32>,
}

const CERTIFICATE_SEARCH_LIMIT: u32 = 4096;

/// Validated [`certificate_exponents`], requiring `c > 1`, `r >= 1` and
/// `0 < alpha < alpha_max(c, r)`.
pub fn theorem1_certificate(c: f64, n: u32, r: u32, alpha: f64) -> Result<Certificate> {
    check_c(c)?;
    if c <= 1.0 {
        return Err(Error::param(format!("the certificate needs c > 1, got {c}")));
    }
    if r == 0 || r > n {
        return Err(Error::param(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    let max = alpha_max(c, r);
    if !(alpha > 0.0 && alpha < max) {
        return Err(Error::param(format!("alpha must lie in (0, {max}), got {alpha}")));
    }
    let (e_left, e_right) = certificate_exponents(c, n, r, alpha);
    let first = (r.max(1)..=CERTIFICATE_SEARCH_LIMIT).find(|&m| {
        let (l, rt) = certificate_exponents(c, m, r, alpha);
        l <= -1.0 && rt <= -1.0
    });
    Ok(Certificate {
        c,
        n,
        r,
        alpha,
        alpha_max: max,
        e_left,
        e_right,
        first_n_both_le_minus_one: first,
    })
}

/// `log2` of the tail bound `2^(2m) exp(-(m - k)^2 / m)` on
/// `sum_{i <= k} C(2m, i)`, for `k <= m`.
pub fn binomial_tail_bound(n_half: u64, k: u64) -> Result<f64> {
    if n_half == 0 || k > n_half {
        return Err(Error::Domain(format!("need 0 <= k <= m with m >= 1, got m = {n_half}, k = {k}")));
    }
    let d = (n_half - k) as f64;
    Ok(2.0 * n_half as f64 - d * d / (n_half as f64 * LN_2))
}

/// `log2` of the central estimate `2^(2m) / sqrt(pi m) exp(-(m - k)^2 / m)`
/// of `C(2m, k)`, valid for `|m - k| <= m^(5/8)`.
pub fn central_binomial_estimate(n_half: u64, k: u64) -> Result<f64> {
    let m = n_half as f64;
    let d = n_half.abs_diff(k) as f64;
    if n_half == 0 || d > m.powf(0.625) {
        return Err(Error::Domain(format!("|m - k| = {d} exceeds m^(5/8) for m = {n_half}")));
    }
    Ok(2.0 * m - 0.5 * (PI * m).log2() - d * d / (m * LN_2))
}

/// `(2^n - 2t) / sqrt(2^n k ln 4)`; tends to 1 along the capability
/// threshold of an asymptotically optimal family.
pub fn optimality_ratio(n: u32, k_dim: u64, t: u64) -> Result<f64> {
    if n == 0 || n > MAX_THRESHOLD_VARS || k_dim == 0 {
        return Err(Error::param("need 1 <= n <= 60 and k > 0"));
    }
    let len = pow2(n);
    if t as f64 > len / 2.0 {
        return Err(Error::param(format!("t = {t} exceeds 2^(n-1)")));
    }
    Ok((len - 2.0 * t as f64) / (len * k_dim as f64 * 4f64.ln()).sqrt())
}

/// Everything `bounds eval` prints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsEval {
    pub c: f64,
    pub n: u32,
    pub r: u32,
    pub lambda: f64,
    pub delta: f64,
    pub t_c: i64,
    /// `log2 sum_{i <= t_c} C(2^n, i)`; absent when `t_c < 0`.
    pub log2_vol_exact: Option<f64>,
    pub log2_vol_asymptotic: f64,
    /// Certificate exponents; absent for `r = 0`.
    pub e_left: Option<f64>,
    pub e_right: Option<f64>,
}

/// Evaluates the threshold, both ball-volume routes and the certificate
/// exponents. `alpha` defaults to half of [`alpha_max`].
pub fn evaluate(c: f64, n: u32, r: u32, alpha: Option<f64>, dim_override: Option<u64>) -> Result<BoundsEval> {
    let params = match dim_override {
        Some(k) => threshold_with_dim(c, n, r, k)?,
        None => threshold(c, n, r)?,
    };
    let log2_vol_exact = params.weight().map(|t| ball_volume_log2(1 << n, t)).transpose()?;
    let log2_vol_asymptotic = ball_volume_asymptotic_log2_dim(c, n, params.dim_term as f64)?;
    let (e_left, e_right) = if r == 0 {
        (None, None)
    } else {
        let alpha = alpha.unwrap_or_else(|| 0.5 * alpha_max(c, r));
        let (l, rt) = certificate_exponents(c, n, r, alpha);
        (Some(l), Some(rt))
    };
    Ok(BoundsEval {
        c,
        n,
        r,
        lambda: params.lambda,
        delta: params.delta,
        t_c: params.t_c,
        log2_vol_exact,
        log2_vol_asymptotic,
        e_left,
        e_right,
    })
}
