//! Prime arithmetic and extended naturals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number or infinity. Used for p-exponents of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exp {
    Fin(u64),
    Inf,
}

impl Exp {
    pub const ZERO: Exp = Exp::Fin(0);

    pub fn is_zero(self) -> bool {
        self == Exp::ZERO
    }

    pub fn is_inf(self) -> bool {
        self == Exp::Inf
    }

    /// `count` copies of `self` summed; an infinite count gives `Inf` unless `self` is zero.
    pub fn times(self, count: Exp) -> Exp {
        match (self, count) {
            (Exp::Fin(0), _) | (_, Exp::Fin(0)) => Exp::ZERO,
            (Exp::Fin(a), Exp::Fin(b)) => a.checked_mul(b).map_or(Exp::Inf, Exp::Fin),
            _ => Exp::Inf,
        }
    }
}

impl Add for Exp {
    type Output = Exp;

    fn add(self, rhs: Exp) -> Exp {
        match (self, rhs) {
            (Exp::Fin(a), Exp::Fin(b)) => a.checked_add(b).map_or(Exp::Inf, Exp::Fin),
            _ => Exp::Inf,
        }
    }
}

impl std::iter::Sum for Exp {
    fn sum<I: Iterator<Item = Exp>>(iter: I) -> Exp {
        iter.fold(Exp::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exp::Fin(a), Exp::Fin(b)) => a.cmp(b),
            (Exp::Fin(_), Exp::Inf) => Ordering::Less,
            (Exp::Inf, Exp::Fin(_)) => Ordering::Greater,
            (Exp::Inf, Exp::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Fin(n) => write!(f, "{n}"),
            Exp::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exp::Fin(n) => s.serialize_u64(*n),
            Exp::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Exp::Fin(n)),
            Raw::Str(s) if s == "inf" => Ok(Exp::Inf),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// A group index `[A:B]`: a positive integer or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Finite(BigUint),
    Infinite,
}

impl Index {
    pub fn one() -> Index {
        Index::Finite(BigUint::from(1u32))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Index::Infinite)
    }

    pub fn mul(&self, other: &Index) -> Index {
        match (self, other) {
            (Index::Finite(a), Index::Finite(b)) => Index::Finite(a * b),
            _ => Index::Infinite,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Index::Finite(n) => match u64::try_from(n) {
                Ok(v) => s.serialize_u64(v),
                Err(_) => s.serialize_str(&n.to_string()),
            },
            Index::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Index::Finite(BigUint::from(n))),
            Raw::Str(s) if s == "inf" => Ok(Index::Infinite),
            Raw::Str(s) => s
                .parse::<BigUint>()
                .map(Index::Finite)
                .map_err(|_| serde::de::Error::custom(format!("bad index {s:?}"))),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `p`.
pub fn next_prime(p: u64) -> u64 {
    let mut q = p + 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

/// Number of primes strictly below `q`, or `None` when that count is too costly to enumerate.
pub fn prime_count_below(q: u64) -> Option<u64> {
    if q > 10_000_000 {
        return None;
    }
    let n = q as usize;
    if n < 3 {
        return Some(0);
    }
    let mut sieve = vec![true; n];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i < n {
        if sieve[i] {
            let mut j = i * i;
            while j < n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    Some(sieve.iter().filter(|&&b| b).count() as u64)
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = num_integer::gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Prime factorization of a positive integer.
pub fn factorize(n: u64) -> BTreeMap<u64, u32> {
    assert!(n > 0, "factorize(0)");
    let mut out = BTreeMap::new();
    let mut m = n;
    for p in [2u64, 3, 5, 7, 11, 13] {
        while m.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            m /= p;
        }
    }
    factor_into(m, &mut out);
    out
}

/// p-adic valuation of a non-zero integer.
pub fn valuation(mut k: i128, p: u64) -> u32 {
    debug_assert!(k != 0);
    let p = p as i128;
    let mut v = 0;
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}
