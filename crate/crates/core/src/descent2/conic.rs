//! Rational points on diagonal conics by Lagrange's descent.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith;

/// Split n = s·r² with s squarefree (sign kept in s).
fn squarefree_split(n: i128) -> Option<(i128, i128)> {
    let f = arith::factor(n).ok()?;
    let (mut s, mut r) = (f.sign as i128, 1i128);
    for (p, e) in f.factors {
        let p = p as i128;
        if e % 2 == 1 {
            s *= p;
        }
        r *= p.checked_pow(e / 2)?;
    }
    Some((s, r))
}

/// t with t² ≡ a mod n for squarefree n > 0.
fn sqrt_mod_squarefree(a: i128, n: i128) -> Option<i128> {
    let f = arith::factor(n).ok()?;
    let (mut t, mut m) = (0i128, 1i128);
    for (p, _) in f.factors {
        let p = p as i128;
        let r = arith::sqrt_mod_prime(a.rem_euclid(p) as u64, p as u64)? as i128;
        // CRT: t ≡ old mod m, t ≡ r mod p
        let inv = arith::invmod(m.rem_euclid(p), p)?;
        let k = ((r - t).rem_euclid(p) * inv).rem_euclid(p);
        t += m * k;
        m *= p;
    }
    Some(t.rem_euclid(n))
}

/// Nontrivial solution of a X² + b Y² = Z² for squarefree a, b.
fn lagrange(a: i128, b: i128) -> Option<[BigInt; 3]> {
    if a == 1 {
        return Some([BigInt::one(), BigInt::zero(), BigInt::one()]);
    }
    if b == 1 {
        return Some([BigInt::zero(), BigInt::one(), BigInt::one()]);
    }
    if a < 0 && b < 0 {
        return None;
    }
    if a.abs() > b.abs() {
        let [x, y, z] = lagrange(b, a)?;
        return Some([y, x, z]);
    }
    let n = b.abs();
    let mut t = sqrt_mod_squarefree(a, n)?;
    if 2 * t > n {
        t -= n;
    }
    let bp = (t * t - a) / b;
    if bp == 0 {
        return None;
    }
    let (c, m) = squarefree_split(bp)?;
    let [x0, y0, z0] = lagrange(a, c)?;
    let (m, t, a, bp) = (BigInt::from(m), BigInt::from(t), BigInt::from(a), BigInt::from(bp));
    let (x0, z0) = (&m * x0, &m * z0);
    // N(Z + X√a) = N(t + √a)·N(z0 + x0√a) = b·(b' y0)²
    let x = &z0 + &t * &x0;
    let y = &bp * y0;
    let z = &t * &z0 + &a * &x0;
    Some(primitive([x, y, z]))
}

fn primitive(v: [BigInt; 3]) -> [BigInt; 3] {
    let g = v[0].gcd(&v[1]).gcd(&v[2]);
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.map(|x| x / &g)
}

/// Primitive nontrivial integer solution of A x² + B y² + C z² = 0, or None
/// when the conic has no rational point.
pub fn solve_ternary(a: i128, b: i128, c: i128) -> Option<[BigInt; 3]> {
    if a == 0 || b == 0 || c == 0 {
        return None;
    }
    // −AC x² − BC y² = (Cz)²
    let (a0, s) = squarefree_split(a.checked_mul(-c)?)?;
    let (b0, r) = squarefree_split(b.checked_mul(-c)?)?;
    let [x, y, z] = lagrange(a0, b0)?;
    let (s, r, cb) = (BigInt::from(s), BigInt::from(r), BigInt::from(c));
    let sol = primitive([&x * &r * &cb, &y * &s * &cb, &z * &r * &s]);
    let check = BigInt::from(a) * &sol[0] * &sol[0]
        + BigInt::from(b) * &sol[1] * &sol[1]
        + &cb * &sol[2] * &sol[2];
    let nontrivial = sol.iter().any(|v| !v.is_zero());
    (check.is_zero() && nontrivial).then(|| {
        // normalise the sign of the first nonzero coordinate
        let neg = sol.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative());
        if neg {
            sol.map(|v| -v)
        } else {
            sol
        }
    })
}
