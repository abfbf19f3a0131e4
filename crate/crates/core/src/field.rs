//! Arithmetic in the prime field F_p for word-sized primes.
//!
//! Moduli are limited to odd primes below 2^62 so that the product of two
//! reduced elements always fits a `u128` intermediate. That is far below the
//! sizes a production Diffie-Hellman group would use; the limit keeps the
//! arithmetic exact without a bignum dependency. Nothing here is constant time.

use std::fmt;

use crate::error::{Error, Result};

/// Largest accepted modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

/// A reduced residue modulo the prime of some [`FieldCtx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The modulus together with everything derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    octet_len: usize,
    factors_p_minus_1: Vec<u64>,
}

impl FieldCtx {
    /// Validates `p` (prime, odd, below 2^62) and factors p-1.
    pub fn new(p: u64) -> Result<Self> {
        if !(3..MAX_MODULUS).contains(&p) {
            return Err(Error::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let bits = 64 - p.leading_zeros() as usize;
        let octet_len = bits.div_ceil(8);
        let mut factors = factorize(p - 1);
        factors.dedup();
        Ok(FieldCtx {
            p,
            octet_len,
            factors_p_minus_1: factors,
        })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Octets needed to hold any element, `ceil(bits(p) / 8)`.
    #[inline]
    pub fn octet_len(&self) -> usize {
        self.octet_len
    }

    /// Distinct prime factors of p-1, ascending.
    pub fn factors_p_minus_1(&self) -> &[u64] {
        &self.factors_p_minus_1
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem(v % self.p)
    }

    /// Accepts `v` only if it is already reduced.
    pub fn try_elem(&self, v: u64) -> Option<FieldElem> {
        (v < self.p).then_some(FieldElem(v))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        // a, b < 2^62, no overflow
        let s = a.0 + b.0;
        FieldElem(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.sub(FieldElem::ZERO, a)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(mul_mod(a.0, b.0, self.p))
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, base: FieldElem, exp: u64) -> FieldElem {
        FieldElem(pow_mod(base.0, exp, self.p))
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(FieldElem(t0.rem_euclid(self.p as i128) as u64))
    }

    /// True iff `g` generates F_p^*: g^((p-1)/q) != 1 for every prime q | p-1.
    pub fn is_primitive_root(&self, g: FieldElem) -> bool {
        if g.0 <= 1 {
            return false;
        }
        self.factors_p_minus_1
            .iter()
            .all(|&q| self.pow(g, (self.p - 1) / q) != FieldElem::ONE)
    }

    /// Fixed-width big-endian encoding at [`octet_len`](Self::octet_len).
    pub fn encode(&self, x: FieldElem) -> Vec<u8> {
        i2osp(x.0, self.octet_len).expect("reduced element fits octet_len")
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
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

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
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

/// Prime factors with multiplicity, ascending.
pub fn factorize(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(q) {
            out.push(q);
            n /= q;
        }
    }
    let mut q = 53;
    while q * q <= n && q < 1 << 12 {
        while n.is_multiple_of(q) {
            out.push(q);
            n /= q;
        }
        q += 2;
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            out.push(m);
            continue;
        }
        let d = pollard_brent(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard rho. `n` must be composite and odd.
fn pollard_brent(n: u64) -> u64 {
    for c in 1..u64::MAX {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("pollard rho exhausted constants")
}

/// Integer to big-endian octet string of exactly `len` octets.
pub fn i2osp(x: u64, len: usize) -> Result<Vec<u8>> {
    if len < 8 && x >> (8 * len) != 0 {
        return Err(Error::Overflow { len });
    }
    let be = x.to_be_bytes();
    let mut out = vec![0u8; len];
    if len >= 8 {
        out[len - 8..].copy_from_slice(&be);
    } else {
        out.copy_from_slice(&be[8 - len..]);
    }
    Ok(out)
}

/// Big-endian octet string to integer. Inputs longer than 8 octets must
/// carry leading zeros.
pub fn os2ip(octets: &[u8]) -> Result<u64> {
    let split = octets.len().saturating_sub(8);
    if octets[..split].iter().any(|&b| b != 0) {
        return Err(Error::Overflow { len: 8 });
    }
    Ok(octets[split..].iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
}

/// Reduces a big-endian octet string of any length modulo `p`.
pub fn os2ip_mod(octets: &[u8], p: u64) -> u64 {
    octets
        .iter()
        .fold(0u64, |acc, &b| (((acc as u128) << 8 | b as u128) % p as u128) as u64)
}
