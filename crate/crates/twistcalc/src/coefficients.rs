//! Exact coefficient arithmetic: rational scalars, log-domain norms, and the
//! q-analogue combinatorics (q-integers, q-factorials, Gaussian binomials).
//!
//! All norms are ultrametric and live in the log domain: a value is stored as
//! a rational valuation `v` with `|x| = p^(-v)`, and `v = +inf` encodes 0.
//! The trivial norm uses the same representation with `v` restricted to
//! `{0, +inf}`. No floating point is involved anywhere.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Exact rational scalar. `BigRational` keeps fractions reduced with a
/// positive denominator, which is exactly the canonical form required.
pub type Scalar = BigRational;

/// Build a scalar from a machine integer.
pub fn scalar_int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Build a scalar from a numerator/denominator pair.
pub fn scalar_ratio(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Build a scalar from big integers; a zero denominator is an error rather
/// than a panic.
pub fn scalar_ratio_big(num: BigInt, den: BigInt) -> Result<Scalar> {
    if den.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

/// Parse "num/den" or "num" into a scalar.
pub fn scalar_from_str(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("invalid integer `{t}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// A valuation in the extended rationals: `Finite(v)` with `|x| = p^(-v)`,
/// or `Infinite` for the zero element. Ordered with `Infinite` largest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormValue {
    Finite(Scalar),
    Infinite,
}

impl NormValue {
    pub fn zero() -> Self {
        NormValue::Finite(Scalar::zero())
    }

    pub fn finite(v: Scalar) -> Self {
        NormValue::Finite(v)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, NormValue::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Scalar> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Infinite => None,
        }
    }

    /// Valuation of a product: valuations add; anything plus `Infinite` is
    /// `Infinite`.
    pub fn add(&self, other: &NormValue) -> NormValue {
        match (self, other) {
            (NormValue::Finite(a), NormValue::Finite(b)) => NormValue::Finite(a + b),
            _ => NormValue::Infinite,
        }
    }

    /// Add a finite rational offset, absorbing into `Infinite`.
    pub fn offset(&self, by: &Scalar) -> NormValue {
        match self {
            NormValue::Finite(a) => NormValue::Finite(a + by),
            NormValue::Infinite => NormValue::Infinite,
        }
    }
}

impl PartialOrd for NormValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NormValue::Infinite, NormValue::Infinite) => Ordering::Equal,
            (NormValue::Infinite, _) => Ordering::Greater,
            (_, NormValue::Infinite) => Ordering::Less,
            (NormValue::Finite(a), NormValue::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Finite(v) => write!(f, "{v}"),
            NormValue::Infinite => write!(f, "inf"),
        }
    }
}

/// The designated norm on the coefficient field: trivial or p-adic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormContext {
    /// `|x| = 1` for `x != 0`; valuations are 0 or `+inf`.
    Trivial,
    /// p-adic norm `|x| = p^(-v_p(x))` for a prime `p`.
    PAdic(u64),
}

impl NormContext {
    /// p-adic context; rejects non-prime bases.
    pub fn padic(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(NormContext::PAdic(p))
        } else {
            Err(Error::InvalidPrime(format!("{p} is not prime")))
        }
    }

    /// Valuation of a scalar in this context.
    pub fn valuation(&self, x: &Scalar) -> NormValue {
        if x.is_zero() {
            return NormValue::Infinite;
        }
        match self {
            NormContext::Trivial => NormValue::zero(),
            NormContext::PAdic(p) => padic_valuation(x, *p),
        }
    }
}

impl fmt::Display for NormContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormContext::Trivial => write!(f, "trivial"),
            NormContext::PAdic(p) => write!(f, "{p}-adic"),
        }
    }
}

/// p-adic valuation of a nonzero rational: `v_p(num) - v_p(den)`.
/// Returns `Infinite` for 0.
pub fn padic_valuation(x: &Scalar, p: u64) -> NormValue {
    if x.is_zero() {
        return NormValue::Infinite;
    }
    let p = BigInt::from(p);
    let v = int_padic_valuation(x.numer(), &p) - int_padic_valuation(x.denom(), &p);
    NormValue::Finite(Scalar::from_integer(BigInt::from(v)))
}

/// Multiplicity of the prime `p` in a nonzero integer, by repeated division.
fn int_padic_valuation(n: &BigInt, p: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let mut v = 0i64;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Deterministic trial-division primality check; `p` stays machine-sized.
fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Ordinary binomial coefficient as a Scalar; 0 for k > n.
pub fn binomial(n: u32, k: u32) -> Scalar {
    if k > n {
        return Scalar::zero();
    }
    let mut acc = Scalar::one();
    for j in 0..k.min(n - k) {
        acc = acc * Scalar::from_integer((n - j).into())
            / Scalar::from_integer((j + 1).into());
    }
    acc
}

/// q-integer `(n)_q = 1 + q + ... + q^(n-1)`, with `(0)_q = 0`.
pub fn q_integer(n: u32, q: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    let mut pow = Scalar::one();
    for _ in 0..n {
        acc += &pow;
        pow *= q;
    }
    acc
}

/// q-factorial `(n)_q! = (1)_q (2)_q ... (n)_q`, with `(0)_q! = 1`.
pub fn q_factorial(n: u32, q: &Scalar) -> Scalar {
    let mut acc = Scalar::one();
    for j in 1..=n {
        acc *= q_integer(j, q);
    }
    acc
}

/// Gaussian binomial `binom(n,k)_q = (n)_q! / ((k)_q! (n-k)_q!)`.
///
/// Fails when a q-factorial in the denominator vanishes, which over the
/// rationals happens exactly for q = -1 at even inner indices.
pub fn q_binomial(n: u32, k: u32, q: &Scalar) -> Result<Scalar> {
    if k > n {
        return Ok(Scalar::zero());
    }
    if k == 0 || k == n {
        return Ok(Scalar::one());
    }
    let den = q_factorial(k, q) * q_factorial(n - k, q);
    if den.is_zero() {
        return Err(Error::RootOfUnity(format!(
            "q-factorial denominator vanishes for binom({n},{k}) at q = {q}"
        )));
    }
    Ok(q_factorial(n, q) / den)
}

/// Checks `(j)_q != 0` for `1 <= j <= order`; rejects q values that are
/// roots of unity up to the working order (divided powers undefined there).
pub fn ensure_not_root_of_unity(q: &Scalar, order: u32) -> Result<()> {
    for j in 1..=order {
        if q_integer(j, q).is_zero() {
            return Err(Error::RootOfUnity(format!(
                "({j})_q = 0 for q = {q}; divided powers undefined at order {order}"
            )));
        }
    }
    Ok(())
}
