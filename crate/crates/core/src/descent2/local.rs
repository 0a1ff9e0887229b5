//! Square classes over completions of Q, local Kummer images and the small
//! amount of p-adic arithmetic the descent needs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DescentError;
use crate::abfield::Place;
use crate::arith;

/// Square class in Q_v*/Q_v*², packed into 3 bits.
///
/// ∞: bit 0 = negative. Odd p: bit 0 = odd valuation, bit 1 = unit part is a
/// nonresidue. p = 2: bit 0 = odd valuation, bit 1 = unit ≡ 3 mod 4,
/// bit 2 = unit ≡ ±3 mod 8. Multiplication of classes is XOR.
pub type ClassCode = u8;

/// Pair of classes (b1, b2) packed into 6 bits.
#[inline]
pub fn pair_code(c1: ClassCode, c2: ClassCode) -> u8 {
    c1 | (c2 << 3)
}

fn unit_bits(unit_mod8_or_p: u64, p: u64) -> u8 {
    if p == 2 {
        let u = unit_mod8_or_p & 7;
        (if u % 4 == 3 { 2 } else { 0 }) | (if u == 3 || u == 5 { 4 } else { 0 })
    } else if arith::legendre(unit_mod8_or_p as i64, p) == 1 {
        0
    } else {
        2
    }
}

pub fn class_of_i128(n: i128, place: Place) -> ClassCode {
    debug_assert!(n != 0);
    match place {
        Place::Infinity => (n < 0) as u8,
        Place::Prime(p) => {
            let mut m = n.unsigned_abs();
            let mut v = 0;
            while m.is_multiple_of(p as u128) {
                m /= p as u128;
                v += 1;
            }
            let modulus = if p == 2 { 8 } else { p as u128 };
            let mut r = m % modulus;
            if n < 0 {
                r = (modulus - r) % modulus;
            }
            (v & 1) as u8 | unit_bits(r as u64, p)
        }
    }
}

pub fn class_of_int(n: &BigInt, place: Place) -> ClassCode {
    if let Some(v) = n.to_i128() {
        return class_of_i128(v, place);
    }
    match place {
        Place::Infinity => n.is_negative() as u8,
        Place::Prime(p) => {
            let pb = BigInt::from(p);
            let mut m = n.clone();
            let mut v = 0;
            while (&m % &pb).is_zero() {
                m /= &pb;
                v += 1;
            }
            let modulus = BigInt::from(if p == 2 { 8 } else { p });
            let r = m.mod_floor(&modulus).to_u64().expect("small");
            (v & 1) as u8 | unit_bits(r, p)
        }
    }
}

pub fn class_of_rat(q: &BigRational, place: Place) -> ClassCode {
    class_of_int(q.numer(), place) ^ class_of_int(q.denom(), place)
}

/// Size of E(Q_v)/2E(Q_v) for a curve with full 2-torsion over Q_v.
pub fn image_target(place: Place) -> u32 {
    match place {
        Place::Infinity => 2,
        Place::Prime(2) => 8,
        Place::Prime(_) => 4,
    }
}

/// Subgroup of pair codes, as a 64-bit membership mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalImage {
    pub place: Place,
    pub mask: u64,
}

impl LocalImage {
    fn trivial(place: Place) -> Self {
        LocalImage { place, mask: 1 }
    }
    pub fn contains(&self, code: u8) -> bool {
        self.mask >> code & 1 == 1
    }
    pub fn size(&self) -> u32 {
        self.mask.count_ones()
    }
    fn close_with(&mut self, g: u8) {
        if self.contains(g) {
            return;
        }
        let mut m = self.mask;
        for c in 0..64u8 {
            if self.mask >> c & 1 == 1 {
                m |= 1 << (c ^ g);
            }
        }
        self.mask = m;
    }
}

/// Images of the three 2-torsion points under x ↦ (x − e1, x − e2).
pub fn torsion_images(e: &[i128; 3]) -> [(i128, i128); 3] {
    let [e1, e2, e3] = *e;
    [
        ((e1 - e2) * (e1 - e3), e1 - e2),
        (e2 - e1, (e2 - e1) * (e2 - e3)),
        (e3 - e1, e3 - e2),
    ]
}

/// Image of E(Q_v)/2E(Q_v) in (Q_v*/Q_v*²)² for y² = (x−e1)(x−e2)(x−e3).
///
/// Generated by the 2-torsion images and by random local points until the
/// known order |E(Q_v)/2E(Q_v)| is reached, so the result is exact.
pub fn local_image(e: &[i128; 3], place: Place) -> Result<LocalImage, DescentError> {
    let mut img = LocalImage::trivial(place);
    for (a, b) in torsion_images(e) {
        img.close_with(pair_code(class_of_i128(a, place), class_of_i128(b, place)));
    }
    let target = image_target(place);
    let p = match place {
        Place::Infinity => {
            return if img.size() == target {
                Ok(img)
            } else {
                Err(DescentError::LocalImage(place))
            };
        }
        Place::Prime(p) => p as i128,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p as u64);
    // largest k with p^(2k) ≤ 2^40
    let mut kmax = 0u32;
    while p.pow(2 * (kmax + 1)) <= 1 << 40 && kmax < 4 {
        kmax += 1;
    }
    let nmax: i128 = p.pow(2 * kmax + 2).min(1 << 50);
    let mut tries = 0u32;
    while img.size() < target {
        tries += 1;
        if tries > 2_000_000 {
            return Err(DescentError::LocalImage(place));
        }
        // x − e_i up to squares, for x = n/p^(2k) or x = e_i + u p^j
        let m: [i128; 3] = if rng.gen_bool(0.5) {
            let k = rng.gen_range(0..=kmax);
            let n = rng.gen_range(-nmax..=nmax);
            let s = p.pow(2 * k);
            [n - e[0] * s, n - e[1] * s, n - e[2] * s]
        } else {
            let i = rng.gen_range(0..3);
            let j = rng.gen_range(0..=2 * kmax + 2);
            let umax = (p * p).min(1 << 30);
            let u = rng.gen_range(-umax..=umax);
            let x = e[i] + u * p.pow(j);
            [x - e[0], x - e[1], x - e[2]]
        };
        if m.contains(&0) {
            continue;
        }
        let c = m.map(|v| class_of_i128(v, place));
        if c[0] ^ c[1] ^ c[2] == 0 {
            img.close_with(pair_code(c[0], c[1]));
        }
    }
    Ok(img)
}

// ---------------------------------------------------------------------------
// p-adic numbers

/// Nonzero p-adic number p^val · unit, with the unit known modulo p^prec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Padic {
    pub val: i64,
    pub unit: BigInt,
}

pub struct PadicCtx {
    pub p: u64,
    pub prec: u32,
    pb: BigInt,
    modulus: BigInt,
}

impl PadicCtx {
    pub fn new(p: u64, prec: u32) -> Self {
        let pb = BigInt::from(p);
        let modulus = num_traits::pow(pb.clone(), prec as usize);
        PadicCtx { p, prec, pb, modulus }
    }

    fn split(&self, n: &BigInt) -> (i64, BigInt) {
        let mut m = n.clone();
        let mut v = 0;
        while (&m % &self.pb).is_zero() {
            m /= &self.pb;
            v += 1;
        }
        (v, m)
    }

    pub fn from_int(&self, n: &BigInt) -> Option<Padic> {
        if n.is_zero() {
            return None;
        }
        let (val, m) = self.split(n);
        Some(Padic { val, unit: m.mod_floor(&self.modulus) })
    }

    pub fn from_rat(&self, q: &BigRational) -> Option<Padic> {
        let a = self.from_int(q.numer())?;
        let b = self.from_int(q.denom())?;
        let inv = modinv(&b.unit, &self.modulus)?;
        Some(Padic { val: a.val - b.val, unit: (a.unit * inv).mod_floor(&self.modulus) })
    }

    pub fn mul(&self, a: &Padic, b: &Padic) -> Padic {
        Padic { val: a.val + b.val, unit: (&a.unit * &b.unit).mod_floor(&self.modulus) }
    }

    pub fn is_square(&self, a: &Padic) -> bool {
        a.val % 2 == 0 && self.unit_is_square(&a.unit)
    }

    fn unit_is_square(&self, u: &BigInt) -> bool {
        if self.p == 2 {
            u.mod_floor(&BigInt::from(8)) == BigInt::one()
        } else {
            let r = u.mod_floor(&self.pb).to_u64().expect("residue");
            arith::legendre(r as i64, self.p) == 1
        }
    }

    /// Square root of a square; its unit is correct modulo p^(prec − 1).
    pub fn sqrt(&self, a: &Padic) -> Option<Padic> {
        if !self.is_square(a) {
            return None;
        }
        let u = &a.unit;
        let root = if self.p == 2 {
            let mut r = BigInt::one();
            for k in 3..self.prec {
                let m = BigInt::one() << (k + 1);
                if !(&r * &r - u).mod_floor(&m).is_zero() {
                    r += BigInt::one() << (k - 1);
                }
            }
            r
        } else {
            let r0 = arith::sqrt_mod_prime(u.mod_floor(&self.pb).to_u64()?, self.p)?;
            // Newton lifting r ← r − (r² − u)/(2r)
            let mut r = BigInt::from(r0);
            let mut k = 1u32;
            while k < self.prec {
                k = (2 * k).min(self.prec);
                let m = num_traits::pow(self.pb.clone(), k as usize);
                let inv = modinv(&(2 * &r), &m)?;
                r = (&r - (&r * &r - u) * inv).mod_floor(&m);
            }
            r
        };
        Some(Padic { val: a.val / 2, unit: root.mod_floor(&self.modulus) })
    }

    /// Σ c_i x_i with integer coefficients; None when cancellation leaves
    /// fewer than `min_digits` correct digits.
    pub fn linear(&self, terms: &[(BigInt, Padic)], min_digits: u32) -> Option<Padic> {
        let scaled: Vec<Padic> = terms
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| self.mul(&self.from_int(c).expect("nonzero"), x))
            .collect();
        let vmin = scaled.iter().map(|x| x.val).min()?;
        let mut total = BigInt::zero();
        for x in &scaled {
            total += &x.unit * num_traits::pow(self.pb.clone(), (x.val - vmin) as usize);
        }
        // the sum is reliable modulo p^(prec − 1)
        let reliable = self.prec - 1;
        let m = num_traits::pow(self.pb.clone(), reliable as usize);
        let total = total.mod_floor(&m);
        if total.is_zero() {
            return None;
        }
        let (v, unit) = self.split(&total);
        if reliable as i64 - v < min_digits as i64 {
            return None;
        }
        Some(Padic { val: vmin + v, unit })
    }

    /// Hilbert symbol (a, b) over Q_p.
    pub fn hilbert(&self, a: &Padic, b: &Padic) -> i8 {
        let p = self.p;
        let (alpha, beta) = (a.val.rem_euclid(2), b.val.rem_euclid(2));
        if p == 2 {
            let u = a.unit.mod_floor(&BigInt::from(8)).to_u64().expect("residue");
            let w = b.unit.mod_floor(&BigInt::from(8)).to_u64().expect("residue");
            let eps = |x: u64| ((x - 1) / 2) % 2;
            let omega = |x: u64| ((x * x - 1) / 8) % 2;
            let e = eps(u) * eps(w) + alpha as u64 * omega(w) + beta as u64 * omega(u);
            if e.is_multiple_of(2) {
                1
            } else {
                -1
            }
        } else {
            let u = a.unit.mod_floor(&self.pb).to_u64().expect("residue") as i64;
            let w = b.unit.mod_floor(&self.pb).to_u64().expect("residue") as i64;
            let mut s: i8 = 1;
            if alpha * beta == 1 && p % 4 == 3 {
                s = -s;
            }
            if beta == 1 {
                s *= arith::legendre(u, p);
            }
            if alpha == 1 {
                s *= arith::legendre(w, p);
            }
            s
        }
    }
}

fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Hilbert symbol (a, b)_v of nonzero rationals.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: Place) -> i8 {
    match place {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(p) => {
            let ctx = PadicCtx::new(p, 4);
            ctx.hilbert(&ctx.from_rat(a).expect("nonzero"), &ctx.from_rat(b).expect("nonzero"))
        }
    }
}
