//! Exact rational arithmetic and the combinatorial helpers shared by every
//! counting routine.
//!
//! Every weight, probability and count in the crate is a [`Rational`]. Values
//! are kept in lowest terms with a positive denominator, which is what
//! `num-rational` guarantees after each operation.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `n! / (parts[0]! * parts[1]! * ...)`.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<BigUint> {
    let total: u64 = parts.iter().sum();
    if total != n {
        return Err(Error::Invalid(format!(
            "multinomial parts sum to {total}, expected {n}"
        )));
    }
    // product of binomials avoids the large intermediate factorials
    let mut acc = BigUint::one();
    let mut seen = 0u64;
    for &p in parts {
        seen += p;
        acc *= binomial(seen, p);
    }
    Ok(acc)
}

pub fn pow(base: &Rational, mut exp: u64) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    if base.is_zero() || base.is_one() {
        return base.clone();
    }
    let mut acc = Rational::one();
    let mut b = base.clone();
    loop {
        if exp & 1 == 1 {
            acc *= &b;
        }
        exp >>= 1;
        if exp == 0 {
            break acc;
        }
        b = &b * &b;
    }
}

/// Integer power with a possibly negative exponent. Panics on `0^-k`.
pub fn pow_signed(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        pow(base, exp as u64)
    } else {
        assert!(!base.is_zero(), "zero raised to a negative power");
        pow(&base.recip(), exp.unsigned_abs())
    }
}

/// Parses `p`, `-p`, `+p`, `p/q` or `-p/q`. The denominator must be a
/// positive integer without sign.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Invalid(format!("`{text}` is not a rational number"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = num.strip_prefix(['-', '+']).unwrap_or(num);
    if !digits(unsigned) {
        return Err(bad());
    }
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom: BigInt = match den {
        Some(d) if digits(d) => d.parse().map_err(|_| bad())?,
        Some(_) => return Err(bad()),
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::Invalid(format!("`{text}` has a zero denominator")));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical `p/q` text, or bare `p` for integers.
pub fn render(q: &Rational) -> String {
    q.to_string()
}

/// Decimal expansion rounded half away from zero to `digits` places.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u8), digits);
    let scaled = q.numer().abs() * &scale;
    let (mut whole, rem) = scaled.div_rem(q.denom());
    if rem * 2u8 >= *q.denom() {
        whole += 1u8;
    }
    let sign = if q.is_negative() && !whole.is_zero() { "-" } else { "" };
    let s = whole.to_string();
    if digits == 0 {
        return format!("{sign}{s}");
    }
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int_part, frac) = s.split_at(s.len() - digits);
    format!("{sign}{int_part}.{frac}")
}

/// Coefficient of `z^target` in a polynomial of degree at most `degree_bound`,
/// recovered exactly from its values at `z = 0, 1, ..., degree_bound`.
///
/// Newton forward differences give `f(z) = sum_k d_k/k! * z(z-1)...(z-k+1)`;
/// the falling factorials are expanded with signed Stirling numbers of the
/// first kind.
pub fn extract_coefficient(
    mut evaluator: impl FnMut(&Rational) -> Rational,
    degree_bound: usize,
    target: usize,
) -> Rational {
    try_extract_coefficient(|z| Ok(evaluator(z)), degree_bound, target)
        .expect("infallible evaluator")
}

pub fn try_extract_coefficient(
    mut evaluator: impl FnMut(&Rational) -> Result<Rational>,
    degree_bound: usize,
    target: usize,
) -> Result<Rational> {
    if target > degree_bound {
        return Ok(Rational::zero());
    }
    let mut diffs = Vec::with_capacity(degree_bound + 1);
    for z in 0..=degree_bound {
        diffs.push(evaluator(&int(z as i64))?);
    }
    // in-place forward differences: diffs[k] becomes Δ^k f(0)
    for k in 1..=degree_bound {
        for i in (k..=degree_bound).rev() {
            let d = &diffs[i] - &diffs[i - 1];
            diffs[i] = d;
        }
    }
    // stirling[t] holds s(k, t) for the current k
    let mut stirling = vec![BigInt::zero(); degree_bound + 2];
    stirling[0] = BigInt::one();
    let mut fact = BigInt::one();
    let mut coeff = Rational::zero();
    for (k, d) in diffs.iter().enumerate() {
        if k > 0 {
            fact *= k;
            // s(k, t) = s(k-1, t-1) - (k-1) s(k-1, t)
            for t in (0..=k).rev() {
                let lower = if t > 0 { stirling[t - 1].clone() } else { BigInt::zero() };
                stirling[t] = lower - &stirling[t] * (k - 1);
            }
        }
        if !stirling[target].is_zero() && !d.is_zero() {
            coeff += d * Rational::new(stirling[target].clone(), fact.clone());
        }
    }
    Ok(coeff)
}
