//! Continued-fraction expansions, approximants, and orbit-level Lyapunov
//! estimates.
//!
//! Digit extraction runs on exact big-integer rationals: an `f64` is a
//! dyadic rational, so its expansion is computed without drift and simply
//! terminates (with a flag) when the remainder hits an endpoint.  Deeper
//! expansions — a double supports only ~30 reliable digits — take seeds
//! with a wider mantissa ([`DEFAULT_MANTISSA_BITS`] = 256 by default).
//! The Birkhoff sampler at the bottom is the one deliberately floating-
//! point piece: it estimates almost-sure averages, where shadowing noise
//! washes out, not individual orbits.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::maps::MapModel;
use crate::Result;

/// Mantissa width used when sampling orbit seeds beyond double precision.
pub const DEFAULT_MANTISSA_BITS: u32 = 256;

/// Exact nonnegative rational in `[0, 1)`; numerator and denominator are
/// carried unreduced (the digit recursions preserve the gcd anyway).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Rat {
    pub num: BigUint,
    pub den: BigUint,
}

impl Rat {
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn to_f64(&self) -> f64 {
        // Align both parts to ~60 significant bits before dividing.
        let nb = self.num.bits();
        let db = self.den.bits();
        if self.num.is_zero() {
            return 0.0;
        }
        let shift = db.max(nb).saturating_sub(60);
        let n = (&self.num >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (&self.den >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn ln(&self) -> f64 {
        ln_biguint(&self.num) - ln_biguint(&self.den)
    }
}

/// Natural log of a large integer via its top bits.
fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().unwrap().ln();
    }
    let top = (v >> (bits - 53)).to_f64().unwrap();
    top.ln() + (bits - 53) as f64 * std::f64::consts::LN_2
}

/// Exact dyadic decomposition of a double in `(0, 1)`.
fn rat_from_f64(x: f64) -> Result<Rat> {
    if !(x > 0.0 && x < 1.0) || !x.is_finite() {
        return Err(Error::config(format!("expansion needs x in (0, 1), got {x}")));
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e2) = if raw_exp == 0 {
        (frac, -1074i64)
    } else {
        ((1u64 << 52) | frac, raw_exp - 1075)
    };
    debug_assert!(e2 < 0);
    Ok(Rat {
        num: BigUint::from(mantissa),
        den: BigUint::one() << (-e2) as u64,
    })
}

/// Which digit law to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CFKind {
    /// Gauss digits: `a_k = ⌊1/x_{k−1}⌋`, `x_k = 1/x_{k−1} − a_k`.
    Regular,
    /// Backward digits read off the Renyi orbit: branch `n` emits `n + 1`,
    /// so the neutral branch emits 2 and every digit is at least 2.
    Backward,
}

/// A (possibly truncated) continued-fraction expansion.
#[derive(Clone, Debug)]
pub struct CFExpansion {
    pub kind: CFKind,
    pub digits: Vec<u64>,
    /// True when the orbit reached an endpoint before producing the
    /// requested number of digits — the seed was rational at working
    /// precision and its expansion is finite.
    pub truncated: bool,
    origin: Rat,
}

impl CFExpansion {
    /// The seed as a double (exact seeds keep their full width internally).
    pub fn origin_f64(&self) -> f64 {
        self.origin.to_f64()
    }
}

/// One regular digit step: `x = p/q ↦ (⌊q/p⌋, q/p − ⌊q/p⌋)`.
fn gauss_step(x: &Rat) -> (BigUint, Rat) {
    let a = &x.den / &x.num;
    let rem = &x.den - &a * &x.num;
    (
        a,
        Rat {
            num: rem,
            den: x.num.clone(),
        },
    )
}

/// One backward digit step: the digit is `⌊1/(1−x)⌋ + 1` and the image is
/// the Renyi step `1/(1−x)` minus its floor, all exactly on `p/q`.
fn renyi_step(x: &Rat) -> (BigUint, Rat) {
    let gap = &x.den - &x.num; // q − p, positive for x < 1
    let b = &x.den / &gap; // ⌊1/(1−x)⌋ = branch index
    let rem = &x.den - &b * &gap;
    (
        b + 1u32,
        Rat {
            num: rem,
            den: gap,
        },
    )
}

fn expand_exact(origin: Rat, n: u32, kind: CFKind) -> CFExpansion {
    let mut digits = Vec::with_capacity(n as usize);
    let mut truncated = false;
    let mut x = origin.clone();
    for _ in 0..n {
        if x.is_zero() {
            truncated = true;
            break;
        }
        let (a, next) = match kind {
            CFKind::Regular => gauss_step(&x),
            CFKind::Backward => renyi_step(&x),
        };
        match a.to_u64() {
            Some(a) => digits.push(a),
            None => {
                // A digit beyond 2^64 certifies the remainder was within
                // 2^-64/q² of an endpoint — below any working precision.
                truncated = true;
                break;
            }
        }
        x = next;
    }
    CFExpansion {
        kind,
        digits,
        truncated,
        origin,
    }
}

/// Expand a double to `n` digits.  Doubles are exact dyadic rationals, so
/// the digits are exact and the expansion terminates (flagged) when the
/// dyadic tail runs out — around depth 30 for a generic double.
pub fn cf_expand(x: f64, n: u32, kind: CFKind) -> Result<CFExpansion> {
    Ok(expand_exact(rat_from_f64(x)?, n, kind))
}

/// Expand an exact decimal string such as `"0.3183098861837907"`; the
/// value is taken literally as the rational `digits/10^places`, so deep
/// expansions stay exact as long as the string carries enough places.
pub fn cf_expand_decimal(s: &str, n: u32, kind: CFKind) -> Result<CFExpansion> {
    let origin = parse_decimal(s)?;
    if origin.is_zero() || origin.num >= origin.den {
        return Err(Error::config(format!("expansion needs x in (0, 1), got {s}")));
    }
    Ok(expand_exact(origin, n, kind))
}

/// Parse `0.d₁d₂…` into an exact rational.
pub(crate) fn parse_decimal(s: &str) -> Result<Rat> {
    let t = s.trim();
    let rest = t
        .strip_prefix("0.")
        .or_else(|| t.strip_prefix('.'))
        .ok_or_else(|| Error::config(format!("expected a decimal in (0, 1) like 0.123…, got {t:?}")))?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::config(format!("malformed decimal fraction {t:?}")));
    }
    let num: BigUint = rest.parse().map_err(|_| Error::config("malformed decimal"))?;
    let den = BigUint::from(10u32).pow(rest.len() as u32);
    Ok(Rat { num, den })
}

/// Convergents `p_k/q_k` of a regular digit sequence, by the standard
/// two-term recurrence from seeds `(0, 1)` and `(1, 0)`, in exact integers.
pub fn approximants(digits: &[u64]) -> Vec<(BigUint, BigUint)> {
    let mut out = Vec::with_capacity(digits.len());
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    for &a in digits {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Two routes to the Lyapunov exponent of one orbit, from the same `n`
/// digits:
///
/// * `a = −(1/n)·log|x − p_n/q_n|` — approximation speed of the convergent;
/// * `b = (1/n)·log|(Gⁿ)′(x)|` — the Birkhoff sum of `log|G′|` along the
///   orbit, which is `−2 Σ log x_k` exactly.
///
/// The two agree in the limit; at finite `n` the first carries an `O(1/n)`
/// offset from the constant in front of `1/q_n²`.
///
/// Errors when the expansion terminates before `n` digits (rational seed):
/// a finite expansion has no exponent.
pub fn lyapunov_via_approximants(x: f64, n: u32) -> Result<(f64, f64)> {
    lyapunov_exact(rat_from_f64(x)?, n)
}

pub(crate) fn lyapunov_exact(origin: Rat, n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::config("lyapunov needs n ≥ 1"));
    }
    let mut digits = Vec::with_capacity(n as usize);
    let mut log_orbit_sum = 0.0f64; // Σ log x_k over the orbit
    let mut x = origin.clone();
    for _ in 0..n {
        if x.is_zero() {
            return Err(Error::config(format!(
                "expansion terminated after {} digits; the seed is rational at working precision",
                digits.len()
            )));
        }
        log_orbit_sum += x.ln();
        let (a, next) = gauss_step(&x);
        match a.to_u64() {
            Some(a) => digits.push(a),
            None => {
                return Err(Error::config(
                    "digit overflow: the seed is indistinguishable from a rational here",
                ))
            }
        }
        x = next;
    }
    let (p, q) = approximants(&digits).pop().expect("n ≥ 1");
    // |x − p/q| = |num·q − p·den| / (den·q), exactly.
    let lhs = &origin.num * &q;
    let rhs = &p * &origin.den;
    let diff = if lhs >= rhs { lhs - &rhs } else { rhs - &lhs };
    if diff.is_zero() {
        return Err(Error::config(
            "convergent reproduces the seed exactly; the seed is rational at working precision",
        ));
    }
    let log_err = ln_biguint(&diff) - ln_biguint(&origin.den) - ln_biguint(&q);
    let a = -log_err / n as f64;
    let b = -2.0 * log_orbit_sum / n as f64;
    Ok((a, b))
}

/// One Birkhoff run of `log|T′|` along a forward orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirkhoffSample {
    pub x0: f64,
    /// Steps actually taken (equals the request unless the orbit escaped).
    pub n: u32,
    /// `(1/n)·Σ log|T′(x_k)|` over the steps taken.
    pub lambda_hat: f64,
    /// True when the orbit left every branch domain (packing gap, exact
    /// endpoint hit, or truncated family).
    pub escaped: bool,
}

/// Draw `count` seeded uniform starts and average `log|T′|` over `n`
/// forward steps each.  Each sample runs on its own generator stream, so
/// the output is a pure function of `seed` regardless of evaluation order.
pub fn sample_lyapunov(model: &MapModel, count: u32, n: u32, seed: u64) -> Result<Vec<BirkhoffSample>> {
    if count == 0 || n == 0 {
        return Err(Error::config("sample_lyapunov needs count ≥ 1 and n ≥ 1"));
    }
    let mut out = Vec::with_capacity(count as usize);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut x0: f64 = rng.gen();
        if x0 <= 0.0 || x0 >= 1.0 {
            x0 = 0.5;
        }
        let mut acc = 0.0f64;
        let mut steps = 0u32;
        let mut escaped = false;
        let mut x = x0;
        while steps < n {
            let d = model.deriv_at(x);
            if d <= 0.0 {
                escaped = true;
                break;
            }
            acc += d.ln();
            steps += 1;
            match model.forward(x) {
                Some((y, _)) => x = y,
                None => {
                    escaped = true;
                    break;
                }
            }
        }
        let denom = steps.max(1);
        out.push(BirkhoffSample {
            x0,
            n: denom,
            lambda_hat: acc / denom as f64,
            escaped,
        });
    }
    Ok(out)
}
