//! Exact integer arithmetic: factorization, primality, residue symbols and
//! square classes.
//!
//! Everything here works on machine integers up to 2^96 in absolute value,
//! with [`num_bigint::BigInt`] entry points for curve invariants that can be
//! larger but have small prime support.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest magnitude accepted by [`factor`].
pub const FACTOR_BOUND: u128 = 1 << 96;

const TRIAL_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero has no factorization")]
    Zero,
    #[error("|{0}| exceeds the 2^96 factorization bound")]
    TooLarge(String),
    #[error("jacobi symbol needs an odd positive modulus, got {0}")]
    BadModulus(i128),
    #[error("{0} is not prime")]
    NotPrime(u128),
    #[error("{a} is divisible by {q}")]
    NotUnit { a: i128, q: u128 },
}

/// Prime factorization with sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: i128,
    pub sign: i8,
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Multiply the factorization back out.
    pub fn recompose(&self) -> i128 {
        let mut v: i128 = self.sign as i128;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                v *= p as i128;
            }
        }
        v
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.sign < 0 {
            parts.push("-1".to_string());
        }
        for &(p, e) in &self.factors {
            if e == 1 {
                parts.push(p.to_string());
            } else {
                parts.push(format!("{p}^{e}"));
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join("*"))
    }
}

// ---------------------------------------------------------------------------
// modular arithmetic on u128 (moduli below 2^96)

#[inline]
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // m < 2^127: Horner over 32-bit limbs of b keeps every product below 2^128.
    let a = a % m;
    let b = b % m;
    let mut r: u128 = 0;
    for k in (0..4).rev() {
        let limb = (b >> (32 * k)) & 0xffff_ffff;
        r = shl32_mod(r, m);
        r = addmod(r, mul_small_mod(a, limb, m), m);
    }
    r
}

#[inline]
fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn shl32_mod(mut r: u128, m: u128) -> u128 {
    for _ in 0..32 {
        r = addmod(r, r, m);
    }
    r
}

fn mul_small_mod(a: u128, limb: u128, m: u128) -> u128 {
    // a < m < 2^96, limb < 2^32 so the product fits in u128
    if m < (1u128 << 96) {
        (a * limb) % m
    } else {
        let mut acc = 0u128;
        let mut base = a;
        let mut l = limb;
        while l > 0 {
            if l & 1 == 1 {
                acc = addmod(acc, base, m);
            }
            base = addmod(base, base, m);
            l >>= 1;
        }
        acc
    }
}

pub fn powmod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            r = mulmod(r, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    r
}

#[inline]
pub fn powmod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut r = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    r as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn invmod(a: i128, m: i128) -> Option<i128> {
    let ext = a.rem_euclid(m).extended_gcd(&m);
    if ext.gcd != 1 {
        return None;
    }
    Some(ext.x.rem_euclid(m))
}

/// Reduce `a` into `0..m` for a positive modulus.
#[inline]
pub fn modp(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

// ---------------------------------------------------------------------------
// primality

const MR_BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
/// Below this bound the first 13 prime bases are a deterministic witness set.
const PSI_13: u128 = 3_317_044_064_679_887_385_961_981;

fn strong_probable_prime(n: u128, a: u128) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let mut x = powmod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn jacobi_i128(a: i128, n: u128) -> i8 {
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a & 1 == 0 {
            a >>= 1;
            let r = n & 7;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a & 3 == 3 && n & 3 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Strong Lucas probable-prime test with Selfridge parameters.
fn strong_lucas(n: u128) -> bool {
    if is_square_u128(n) {
        return false;
    }
    let mut d: i128 = 5;
    loop {
        let j = jacobi_i128(d, n);
        if j == -1 {
            break;
        }
        if j == 0 && d.unsigned_abs() != n {
            return false;
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let p: u128 = 1;
    let q: i128 = (1 - d) / 4;
    let qm = q.rem_euclid(n as i128) as u128;
    let dm = d.rem_euclid(n as i128) as u128;
    let mut k = n + 1;
    let mut s = 0;
    while k & 1 == 0 {
        k >>= 1;
        s += 1;
    }
    // compute U_k, V_k, Q^k by binary ladder
    let inv2 = n.div_ceil(2);
    let mut u: u128 = 0;
    let mut v: u128 = 2;
    let mut qk: u128 = 1;
    let bits = 128 - k.leading_zeros();
    for i in (0..bits).rev() {
        // double
        let u2 = mulmod(u, v, n);
        let v2 = (mulmod(v, v, n) + n - mulmod(2, qk, n)) % n;
        u = u2;
        v = v2;
        qk = mulmod(qk, qk, n);
        if (k >> i) & 1 == 1 {
            // add one: U_{m+1} = (P U + V)/2, V_{m+1} = (D U + P V)/2
            let un = mulmod((mulmod(p, u, n) + v) % n, inv2, n);
            let vn = mulmod((mulmod(dm, u, n) + mulmod(p, v, n)) % n, inv2, n);
            u = un;
            v = vn;
            qk = mulmod(qk, qm, n);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = (mulmod(v, v, n) + n - mulmod(2, qk, n)) % n;
        qk = mulmod(qk, qk, n);
        if v == 0 {
            return true;
        }
    }
    false
}

/// Primality for n < 2^96. Deterministic below 3.3·10^24; above that the
/// Miller–Rabin bases are combined with a strong Lucas test.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 47 * 47 {
        return true;
    }
    if !MR_BASES.iter().all(|&a| strong_probable_prime(n, a)) {
        return false;
    }
    n < PSI_13 || strong_lucas(n)
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(n as u128)
}

// ---------------------------------------------------------------------------
// factorization

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Brent's variant of Pollard rho; `n` odd composite.
fn rho(n: u128, seed: u128) -> Option<u128> {
    let c = seed % (n - 1) + 1;
    let f = |x: u128| addmod(mulmod(x, x, n), c, n);
    let mut y = seed % n;
    let m = 128u64;
    let mut g = 1u128;
    let mut r = 1u64;
    let mut q = 1u128;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                let diff = x.abs_diff(y);
                q = mulmod(q, diff, n);
            }
            g = gcd_u128(q, n);
            k += m;
        }
        r *= 2;
        if r > (1 << 26) {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd_u128(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

fn split_composite(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    if let Some(r) = isqrt_u128_exact(n) {
        split_composite(r, out);
        split_composite(r, out);
        return;
    }
    let mut seed = 2u128;
    loop {
        if let Some(d) = rho(n, seed) {
            split_composite(d, out);
            split_composite(n / d, out);
            return;
        }
        seed += 1;
    }
}

fn collect(mut primes: Vec<u128>) -> Vec<(u128, u32)> {
    primes.sort_unstable();
    let mut out: Vec<(u128, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Complete factorization of a nonzero integer with |n| < 2^96.
pub fn factor(n: i128) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut m = n.unsigned_abs();
    if m >= FACTOR_BOUND {
        return Err(ArithError::TooLarge(n.to_string()));
    }
    let mut primes = Vec::new();
    while m & 1 == 0 {
        primes.push(2);
        m >>= 1;
    }
    let mut d: u128 = 3;
    while d <= TRIAL_LIMIT as u128 && d * d <= m {
        while m.is_multiple_of(d) {
            primes.push(d);
            m /= d;
        }
        d += 2;
    }
    if m > 1 {
        if d * d > m {
            primes.push(m);
        } else {
            split_composite(m, &mut primes);
        }
    }
    Ok(Factorization {
        value: n,
        sign: if n < 0 { -1 } else { 1 },
        factors: collect(primes),
    })
}

/// Factor a big integer. Trial division by `hint` primes first, then by
/// small primes; whatever remains must be below 2^96.
pub fn factor_big(n: &BigInt, hint: &[u64]) -> Result<Vec<(u64, u32)>, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    let mut m = n.abs();
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut hints: Vec<u64> = hint.to_vec();
    hints.sort_unstable();
    hints.dedup();
    for p in hints {
        let pb = BigInt::from(p);
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if !m.is_one() {
        // small trial division on the big remainder before handing over
        let mut d = 2u64;
        while d < 10_000 && m.bits() > 96 {
            let db = BigInt::from(d);
            let mut e = 0;
            while (&m % &db).is_zero() {
                m /= &db;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        let rest = m
            .to_u128()
            .filter(|&r| r < FACTOR_BOUND)
            .ok_or_else(|| ArithError::TooLarge(m.to_string()))?;
        let f = factor(rest as i128)?;
        for (p, e) in f.factors {
            let p = u64::try_from(p).map_err(|_| ArithError::TooLarge(p.to_string()))?;
            out.push((p, e));
        }
    }
    out.sort_unstable();
    let mut merged: Vec<(u64, u32)> = Vec::new();
    for (p, e) in out {
        match merged.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(merged)
}

// ---------------------------------------------------------------------------
// residue symbols

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i128, n: i128) -> Result<i8, ArithError> {
    if n <= 0 || n % 2 == 0 {
        return Err(ArithError::BadModulus(n));
    }
    Ok(jacobi_i128(a, n as u128))
}

/// Kronecker symbol (a/n) for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut res = 1i8;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            res = -res;
        }
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                res = -res;
            }
        }
    }
    res * jacobi_i128(a as i128, n as u128)
}

/// Whether `a` is an n-th power in (Z/q)^*, via a^((q-1)/gcd(n,q-1)) ≡ 1.
pub fn nth_power_residue(a: i128, q: u128, n: u64) -> Result<bool, ArithError> {
    if !is_prime(q) || q == 2 {
        return Err(ArithError::NotPrime(q));
    }
    let r = a.rem_euclid(q as i128) as u128;
    if r == 0 {
        return Err(ArithError::NotUnit { a, q });
    }
    let g = gcd_u128(n as u128, q - 1);
    Ok(powmod(r, (q - 1) / g, q) == 1)
}

/// Legendre symbol for an odd prime, as -1/0/1.
#[inline]
pub fn legendre(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if powmod_u64(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root modulo an odd prime (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powmod_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod_u64(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let pm = p as u128;
    let mut m = s;
    let mut c = powmod_u64(z, q, p) as u128;
    let mut t = powmod_u64(a, q, p) as u128;
    let mut r = powmod_u64(a, q.div_ceil(2), p) as u128;
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % pm;
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = b * b % pm;
        }
        m = i;
        c = b * b % pm;
        t = t * c % pm;
        r = r * b % pm;
    }
    Some(r as u64)
}

// ---------------------------------------------------------------------------
// square classes

/// Square class of a nonzero rational integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareClass {
    pub squarefree: i64,
    pub discriminant: i64,
}

pub fn square_class(d: i128) -> Result<SquareClass, ArithError> {
    let f = factor(d)?;
    let mut s: i128 = f.sign as i128;
    for &(p, e) in &f.factors {
        if e % 2 == 1 {
            s *= p as i128;
        }
    }
    let s = i64::try_from(s).map_err(|_| ArithError::TooLarge(d.to_string()))?;
    let disc = if s.rem_euclid(4) == 1 { s } else { 4 * s };
    Ok(SquareClass {
        squarefree: s,
        discriminant: disc,
    })
}

/// Squarefree part of a nonzero integer (sign kept).
pub fn squarefree_part(d: i128) -> Result<i64, ArithError> {
    square_class(d).map(|c| c.squarefree)
}

// ---------------------------------------------------------------------------
// misc

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

fn isqrt_u128_exact(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

pub fn is_square_u128(n: u128) -> bool {
    isqrt_u128_exact(n).is_some()
}

/// Integer square root of a nonnegative i128 if it is a perfect square.
#[inline]
pub fn exact_sqrt_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    // quick rejection modulo 64
    const QR64: u64 = 0x0202_0212_0203_0213;
    if (QR64 >> (n as u64 & 63)) & 1 == 0 {
        return None;
    }
    isqrt_u128_exact(n as u128).map(|r| r as i128)
}

pub fn exact_sqrt_big(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// p-adic valuation of a nonzero big integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime factor of every integer up to `n` (index 0 and 1 hold 0).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Distinct prime divisors of a nonzero i64.
pub fn prime_divisors(n: i64) -> Vec<u64> {
    factor(n as i128)
        .map(|f| f.factors.iter().map(|&(p, _)| p as u64).collect())
        .unwrap_or_default()
}

/// Euler phi from a factorization.
pub fn euler_phi(n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let f = factor(n as i128).expect("nonzero");
    f.factors
        .iter()
        .map(|&(p, e)| (p as u64 - 1) * (p as u64).pow(e - 1))
        .product()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factor_examples() {
        let f = factor(480).unwrap();
        assert_eq!(f.factors, vec![(2, 5), (3, 1), (5, 1)]);
        assert_eq!(factor(2993).unwrap().factors, vec![(41, 1), (73, 1)]);
        let f = factor(-1513).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, vec![(17, 1), (89, 1)]);
        assert_eq!(f.to_string(), "-1*17*89");
        assert_eq!(factor(0), Err(ArithError::Zero));
        assert!(matches!(factor(1i128 << 100), Err(ArithError::TooLarge(_))));
    }

    #[test]
    fn factor_large_semiprimes() {
        // product of two primes just above 2^40, then three 31-bit primes
        let p: i128 = 1_099_511_627_791;
        let q: i128 = 1_099_511_627_803;
        let f = factor(p * q).unwrap();
        assert_eq!(f.factors, vec![(p as u128, 1), (q as u128, 1)]);
        let n: i128 = 2_147_483_647 * 2_147_483_629 * 2_147_483_587;
        assert_eq!(factor(n).unwrap().recompose(), n);
        // close to the bound: (2^61 - 1) * 2^31-ish prime
        let m61: i128 = (1 << 61) - 1;
        let f = factor(m61 * 2_147_483_647).unwrap();
        assert_eq!(f.factors.len(), 2);
    }

    #[test]
    fn primality_against_sieve() {
        let ps = primes_up_to(20_000);
        let set: std::collections::HashSet<u64> = ps.iter().copied().collect();
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), set.contains(&n), "n = {n}");
        }
        // strong pseudoprimes to several bases
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557)); // largest prime below 2^64
        assert!(is_prime((1u128 << 89) - 1)); // Mersenne prime M89
        assert!(!is_prime(((1u128 << 89) - 1) * 3));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(73 % 41, 41).unwrap(), 1);
        assert_eq!(jacobi(3, 7).unwrap(), -1);
        assert_eq!(jacobi(0, 7).unwrap(), 0);
        assert_eq!(jacobi(1, 8), Err(ArithError::BadModulus(8)));
        assert_eq!(jacobi(1, -3), Err(ArithError::BadModulus(-3)));
    }

    #[test]
    fn jacobi_matches_exhaustive_legendre() {
        for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
            let squares: std::collections::HashSet<u64> = (1..p).map(|x| x * x % p).collect();
            for a in -3 * p as i128..3 * p as i128 {
                let r = a.rem_euclid(p as i128) as u64;
                let want = if r == 0 {
                    0
                } else if squares.contains(&r) {
                    1
                } else {
                    -1
                };
                assert_eq!(jacobi(a, p as i128).unwrap(), want, "({a}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_small_cases() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(41, 2), 1); // 41 ≡ 1 mod 8
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-1, -1), -1);
    }

    #[test]
    fn power_residue_examples() {
        assert!(nth_power_residue(13, 103, 3).unwrap());
        assert!(nth_power_residue(103, 13, 3).unwrap());
        assert!(!nth_power_residue(2, 7, 3).unwrap());
        assert!(nth_power_residue(11, 241, 5).unwrap());
        assert!(nth_power_residue(241 % 11, 11, 5).unwrap());
        assert!(matches!(
            nth_power_residue(14, 7, 3),
            Err(ArithError::NotUnit { .. })
        ));
        assert_eq!(powmod(11, 48, 241), 1);
    }

    #[test]
    fn power_residue_matches_enumeration() {
        for q in primes_up_to(100).into_iter().filter(|&q| q > 2) {
            for n in 1..=12u64 {
                let powers: std::collections::HashSet<u64> =
                    (1..q).map(|x| powmod_u64(x, n, q)).collect();
                for a in 1..q {
                    assert_eq!(
                        nth_power_residue(a as i128, q as u128, n).unwrap(),
                        powers.contains(&a),
                        "a={a} q={q} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(
            square_class(1513).unwrap(),
            SquareClass { squarefree: 1513, discriminant: 1513 }
        );
        assert_eq!(
            square_class(-1).unwrap(),
            SquareClass { squarefree: -1, discriminant: -4 }
        );
        assert_eq!(
            square_class(12).unwrap(),
            SquareClass { squarefree: 3, discriminant: 12 }
        );
        assert_eq!(square_class(0), Err(ArithError::Zero));
    }

    #[test]
    fn tonelli_shanks() {
        for p in primes_up_to(500).into_iter().filter(|&p| p > 2) {
            for a in 0..p {
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(legendre(a as i64, p), -1),
                }
            }
        }
    }

    #[test]
    fn big_factoring_with_hints() {
        let n = BigInt::from(2993i64).pow(6u32) * BigInt::from(480i64) * BigInt::from(-1);
        let f = factor_big(&n, &[41, 73]).unwrap();
        assert_eq!(f, vec![(2, 5), (3, 1), (5, 1), (41, 6), (73, 6)]);
    }

    proptest! {
        #[test]
        fn factor_recomposes(n in (-(1i128 << 62))..(1i128 << 62)) {
            prop_assume!(n != 0);
            let f = factor(n).unwrap();
            prop_assert_eq!(f.recompose(), n);
            let mut last = 0;
            for &(p, e) in &f.factors {
                prop_assert!(p > last && e > 0 && is_prime(p));
                last = p;
            }
        }

        #[test]
        fn square_class_ignores_squares(d in -100_000i128..100_000, k in 1i128..3000) {
            prop_assume!(d != 0);
            prop_assert_eq!(square_class(d * k * k).unwrap(), square_class(d).unwrap());
        }
    }
}
