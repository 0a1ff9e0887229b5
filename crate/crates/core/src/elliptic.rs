//! Elliptic curves over Q: minimal models, Tate's algorithm, Frobenius
//! traces, quadratic twists and rational 2-torsion.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EllipticError {
    #[error("singular Weierstrass model (discriminant 0)")]
    Singular,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("additive reduction at {0}")]
    Additive(u64),
    #[error("twist parameter must be nonzero")]
    ZeroTwist,
    #[error("2-division cubic does not split over Q")]
    NoFullTwoTorsion,
    #[error("unknown curve label {0:?}")]
    UnknownLabel(String),
    #[error("cannot parse curve {0:?}: expected a label or a1,a2,a3,a4,a6")]
    Parse(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

fn vp(n: &BigInt, p: u64) -> u32 {
    arith::valuation(n, p)
}

fn divides(pk: &BigInt, n: &BigInt) -> bool {
    (n % pk).is_zero()
}

/// Integral Weierstrass coefficients [a1, a2, a3, a4, a6].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Model {
    pub a: [BigInt; 5],
}

impl Model {
    pub fn new(a: [i64; 5]) -> Self {
        Model { a: a.map(bi) }
    }

    pub fn b2(&self) -> BigInt {
        let [a1, a2, ..] = &self.a;
        a1 * a1 + 4 * a2
    }
    pub fn b4(&self) -> BigInt {
        let [a1, _, a3, a4, _] = &self.a;
        a1 * a3 + 2 * a4
    }
    pub fn b6(&self) -> BigInt {
        let [_, _, a3, _, a6] = &self.a;
        a3 * a3 + 4 * a6
    }
    pub fn b8(&self) -> BigInt {
        let [a1, a2, a3, a4, a6] = &self.a;
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }
    pub fn c4(&self) -> BigInt {
        let b2 = self.b2();
        &b2 * &b2 - 24 * self.b4()
    }
    pub fn c6(&self) -> BigInt {
        let (b2, b4, b6) = (self.b2(), self.b4(), self.b6());
        -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * b6
    }
    pub fn disc(&self) -> BigInt {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    /// Substitution x = x' + r, y = y' + s x' + t.
    pub fn rst(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> Model {
        let [a1, a2, a3, a4, a6] = &self.a;
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        Model {
            a: [n1, n2, n3, n4, n6],
        }
    }

    /// Full substitution x = u²x' + r, y = u³y' + s u² x' + t.
    pub fn transform(&self, u: &BigInt, r: &BigInt, s: &BigInt, t: &BigInt) -> Option<Model> {
        let m = self.rst(r, s, t);
        let pows = [1u32, 2, 3, 4, 6];
        let mut a: [BigInt; 5] = Default::default();
        for i in 0..5 {
            let d = u.pow(pows[i]);
            if !divides(&d, &m.a[i]) {
                return None;
            }
            a[i] = &m.a[i] / d;
        }
        Some(Model { a })
    }

    fn scale_down(&self, p: u64) -> Model {
        self.transform(&bi(p as i64), &BigInt::zero(), &BigInt::zero(), &BigInt::zero())
            .expect("caller checked divisibility")
    }

    /// Reduce so that a1, a3 ∈ {0,1} and a2 ∈ {-1,0,1}.
    fn laska_normalize(&self) -> Model {
        let a1 = &self.a[0];
        let s = -a1.div_floor(&bi(2));
        let m = self.rst(&BigInt::zero(), &s, &BigInt::zero());
        let r = -(&m.a[1] + BigInt::one()).div_floor(&bi(3));
        let m = m.rst(&r, &BigInt::zero(), &BigInt::zero());
        let t = -m.a[2].div_floor(&bi(2));
        m.rst(&BigInt::zero(), &BigInt::zero(), &t)
    }

    /// Whether (x, y) lies on the curve.
    pub fn contains(&self, x: &BigRational, y: &BigRational) -> bool {
        let [a1, a2, a3, a4, a6] = self.a.clone().map(BigRational::from_integer);
        let lhs = y * y + &a1 * x * y + &a3 * y;
        let rhs = x * x * x + &a2 * x * x + &a4 * x + &a6;
        lhs == rhs
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "[{a1},{a2},{a3},{a4},{a6}]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    I(u32),
    IStar(u32),
    II,
    III,
    IV,
    IIStar,
    IIIStar,
    IVStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::IIStar => write!(f, "II*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IVStar => write!(f, "IV*"),
        }
    }
}

impl Serialize for Kodaira {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Kodaira {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let k = match s.as_str() {
            "II" => Kodaira::II,
            "III" => Kodaira::III,
            "IV" => Kodaira::IV,
            "II*" => Kodaira::IIStar,
            "III*" => Kodaira::IIIStar,
            "IV*" => Kodaira::IVStar,
            t => {
                let body = t.strip_prefix('I').ok_or_else(|| serde::de::Error::custom(t.to_string()))?;
                match body.strip_suffix('*') {
                    Some(n) => Kodaira::IStar(n.parse().map_err(serde::de::Error::custom)?),
                    None => Kodaira::I(body.parse().map_err(serde::de::Error::custom)?),
                }
            }
        };
        Ok(k)
    }
}

/// Tate's algorithm output at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub p: u64,
    pub kind: Reduction,
    pub kodaira: Kodaira,
    pub fp: u32,
    #[serde(skip)]
    pub v_disc: u32,
    /// valuation of j, None when j = 0
    #[serde(skip)]
    pub v_j: Option<i64>,
}

fn md(a: &BigInt, p: u64) -> u64 {
    a.mod_floor(&bi(p as i64)).to_u64().expect("residue fits")
}

fn inv_mod(a: u64, p: u64) -> u64 {
    arith::invmod(a as i128, p as i128).expect("unit") as u64
}

/// Tate's algorithm at p. Returns local data and a model minimal at p
/// (integral everywhere, related to the input by an integral change of
/// coordinates followed by scalings by p).
fn tate(model: &Model, p: u64) -> (LocalData, Model) {
    let pb = bi(p as i64);
    let p2 = &pb * &pb;
    let half = if p == 2 { 0 } else { p.div_ceil(2) };
    let mut c = model.clone();
    loop {
        let disc = c.disc();
        let n = vp(&disc, p);
        let c4 = c.c4();
        let v_j = if c4.is_zero() {
            None
        } else {
            Some(3 * vp(&c4, p) as i64 - n as i64)
        };
        let data = |kind, kodaira, fp| LocalData {
            p,
            kind,
            kodaira,
            fp,
            v_disc: n,
            v_j,
        };
        if n == 0 {
            return (data(Reduction::Good, Kodaira::I(0), 0), c);
        }
        // move the singular point to (0,0)
        let (b2, b4, b6) = (c.b2(), c.b4(), c.b6());
        let (r, t) = if p == 2 {
            if md(&b2, 2) == 0 {
                let r = md(&c.a[3], 2);
                let t = md(&(bi(r as i64) * (1 + &c.a[1] + &c.a[3]) + &c.a[4]), 2);
                (r, t)
            } else {
                let r = md(&c.a[2], 2);
                let t = md(&(bi(r as i64) + &c.a[3]), 2);
                (r, t)
            }
        } else if p == 3 {
            let r = if md(&b2, 3) == 0 {
                md(&-&b6, 3)
            } else {
                md(&-(&b2 * &b4), 3)
            };
            let t = md(&(&c.a[0] * bi(r as i64) + &c.a[2]), 3);
            (r, t)
        } else {
            let r = if md(&c4, p) == 0 {
                md(&(-(inv_mod(12, p) as i128) * md(&b2, p) as i128).into(), p)
            } else {
                let num = (&c.c6() + &b2 * &c4).mod_floor(&pb);
                let den = inv_mod(md(&(12 * &c4), p), p);
                md(&(-(num * bi(den as i64))), p)
            };
            let t = md(&(-(&c.a[0] * bi(r as i64) + &c.a[2]) * bi(half as i64)), p);
            (r, t)
        };
        c = c.rst(&bi(r as i64), &BigInt::zero(), &bi(t as i64));
        debug_assert!(divides(&pb, &c.a[2]) && divides(&pb, &c.a[3]) && divides(&pb, &c.a[4]));

        if md(&c4, p) != 0 {
            let split = if p == 2 {
                md(&c.a[1], 2) == 0
            } else {
                let d = md(&(&c.a[0] * &c.a[0] + 4 * &c.a[1]), p);
                arith::legendre(d as i64, p) == 1
            };
            let kind = if split {
                Reduction::SplitMultiplicative
            } else {
                Reduction::NonsplitMultiplicative
            };
            return (data(kind, Kodaira::I(n), 1), c);
        }
        if vp(&c.a[4], p) < 2 {
            return (data(Reduction::Additive, Kodaira::II, n), c);
        }
        if vp(&c.b8(), p) < 3 {
            return (data(Reduction::Additive, Kodaira::III, n - 1), c);
        }
        if vp(&c.b6(), p) < 3 {
            return (data(Reduction::Additive, Kodaira::IV, n - 2), c);
        }
        // p | a1, a2; p^2 | a3, a4; p^3 | a6
        let (s, t) = if p == 2 {
            (bi(md(&c.a[1], 2) as i64), 2 * bi(md(&(&c.a[4] / 4), 2) as i64))
        } else {
            let h = bi(half as i64);
            (-&c.a[0] * &h, -&c.a[2] * &h)
        };
        c = c.rst(&BigInt::zero(), &s, &t);
        let b = &c.a[1] / &pb;
        let cc = &c.a[3] / &p2;
        let d = &c.a[4] / (&p2 * &pb);
        let w = 27 * &d * &d - &b * &b * &cc * &cc + 4 * &b * &b * &b * &d - 18 * &b * &cc * &d
            + 4 * &cc * &cc * &cc;
        let x = 3 * &cc - &b * &b;
        if md(&w, p) != 0 {
            return (data(Reduction::Additive, Kodaira::IStar(0), n - 4), c);
        }
        if md(&x, p) != 0 {
            // double root: move it to T = 0
            let r = if p == 2 {
                md(&cc, 2)
            } else if p == 3 {
                md(&(&b * &cc), 3)
            } else {
                let num = md(&(&b * &cc - 9 * &d), p);
                let den = inv_mod(md(&(2 * &x), p), p);
                ((num as u128 * den as u128) % p as u128) as u64
            };
            c = c.rst(&(bi(r as i64) * &pb), &BigInt::zero(), &BigInt::zero());
            let mut m = 1u32;
            let mut mx = p2.clone();
            let mut my = p2.clone();
            loop {
                let a3t = &c.a[2] / &my;
                let a6t = &c.a[4] / (&mx * &my);
                if md(&(&a3t * &a3t + 4 * &a6t), p) != 0 {
                    break;
                }
                let t = if p == 2 {
                    &my * bi(md(&a6t, 2) as i64)
                } else {
                    &my * bi(md(&(-&a3t * bi(half as i64)), p) as i64)
                };
                c = c.rst(&BigInt::zero(), &BigInt::zero(), &t);
                my *= &pb;
                m += 1;
                let a2t = &c.a[1] / &pb;
                let a4t = &c.a[3] / (&pb * &mx);
                let a6t = &c.a[4] / (&mx * &my);
                if md(&(&a4t * &a4t - 4 * &a6t * &a2t), p) != 0 {
                    break;
                }
                let r = if p == 2 {
                    &mx * bi(md(&(&a6t * &a2t), 2) as i64)
                } else {
                    let den = inv_mod(md(&(2 * &a2t), p), p);
                    &mx * bi(md(&(-&a4t * bi(den as i64)), p) as i64)
                };
                c = c.rst(&r, &BigInt::zero(), &BigInt::zero());
                mx *= &pb;
                m += 1;
            }
            return (data(Reduction::Additive, Kodaira::IStar(m), n - m - 4), c);
        }
        // triple root: move it to T = 0
        let rt = if p == 2 {
            md(&b, 2)
        } else if p == 3 {
            md(&-&d, 3)
        } else {
            md(&(-&b * bi(inv_mod(3, p) as i64)), p)
        };
        c = c.rst(&(bi(rt as i64) * &pb), &BigInt::zero(), &BigInt::zero());
        let p4 = &p2 * &p2;
        let x3t = &c.a[2] / &p2;
        let x6t = &c.a[4] / &p4;
        if md(&(&x3t * &x3t + 4 * &x6t), p) != 0 {
            return (data(Reduction::Additive, Kodaira::IVStar, n - 6), c);
        }
        let t = if p == 2 {
            md(&x6t, 2)
        } else {
            md(&(&x3t * bi(half as i64)), p)
        };
        c = c.rst(&BigInt::zero(), &BigInt::zero(), &(-&p2 * bi(t as i64)));
        if !divides(&p4, &c.a[3]) {
            return (data(Reduction::Additive, Kodaira::IIIStar, n - 7), c);
        }
        if !divides(&(&p4 * &p2), &c.a[4]) {
            return (data(Reduction::Additive, Kodaira::IIStar, n - 8), c);
        }
        c = c.scale_down(p);
    }
}

// ---------------------------------------------------------------------------
// point counting

/// Frobenius trace by character summation over F_p, p odd: the inner loop
/// walks f(x) = 4x³ + b2x² + 2b4x + b6 by forward differences.
pub fn ap_char_sum(b: [i64; 3], p: u64, qr: &mut Vec<i8>) -> i64 {
    debug_assert!(p % 2 == 1);
    let pu = p as usize;
    qr.clear();
    qr.resize(pu, -1);
    qr[0] = 0;
    let mut sq = 0u64;
    for x in 1..=(p / 2) {
        // (x)² = (x-1)² + 2x - 1
        sq += 2 * x - 1;
        if sq >= p {
            sq %= p;
        }
        qr[sq as usize] = 1;
    }
    let m = |v: i64| v.rem_euclid(p as i64) as u64;
    let (b2, b4, b6) = (m(b[0]), m(b[1]), m(b[2]));
    // f(x) and its differences at x = 0
    let f0 = b6;
    let add = |a: u64, c: u64| {
        let s = a + c;
        if s >= p {
            s - p
        } else {
            s
        }
    };
    let f1 = (4 + b2 + 2 * b4 + b6) % p;
    let f2 = (32 + 4 * b2 + 4 * b4 + b6) % p;
    // Δf(0) = f1 - f0, Δ²f(0) = f2 - 2f1 + f0, Δ³f = 24
    let mut d1 = (f1 + p - f0) % p;
    let mut d2 = (f2 + 2 * p - 2 * f1 + f0) % p;
    let d3 = 24 % p;
    let mut fx = f0;
    let mut s: i64 = 0;
    for _ in 0..p {
        s += qr[fx as usize] as i64;
        fx = add(fx, d1);
        d1 = add(d1, d2);
        d2 = add(d2, d3);
    }
    -s
}

/// Brute-force count of affine points for tiny p.
fn count_brute(a: [u64; 5], p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let l = (y * y + a1 * x * y + a3 * y) % p;
            let r = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
            if l == r {
                n += 1;
            }
        }
    }
    n
}

type Pt = Option<(u64, u64)>;

struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    #[inline]
    fn mulm(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.p as u128) as u64
    }
    #[inline]
    fn sub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.p - y
        }
    }
    fn inv(&self, x: u64) -> u64 {
        let (mut a, mut b) = (x as i64, self.p as i64);
        let (mut u, mut v) = (1i64, 0i64);
        while b != 0 {
            let q = a / b;
            (a, b) = (b, a - q * b);
            (u, v) = (v, u - q * v);
        }
        u.rem_euclid(self.p as i64) as u64
    }
    fn add(&self, p: Pt, q: Pt) -> Pt {
        let (x1, y1) = match p {
            None => return q,
            Some(v) => v,
        };
        let (x2, y2) = match q {
            None => return p,
            Some(v) => v,
        };
        let lam = if x1 == x2 {
            if (y1 + y2) % self.p == 0 {
                return None;
            }
            let num = (3 * self.mulm(x1, x1) + self.a) % self.p;
            self.mulm(num, self.inv(2 * y1 % self.p))
        } else {
            self.mulm(self.sub(y2, y1), self.inv(self.sub(x2, x1)))
        };
        let x3 = self.sub(self.sub(self.mulm(lam, lam), x1), x2);
        let y3 = self.sub(self.mulm(lam, self.sub(x1, x3)), y1);
        Some((x3, y3))
    }
    fn mul(&self, mut k: u64, p: Pt) -> Pt {
        let mut r = None;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                r = self.add(r, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        r
    }
    fn rhs(&self, x: u64) -> u64 {
        (self.mulm(self.mulm(x, x), x) + self.mulm(self.a, x) + self.b) % self.p
    }
    fn point_with_x_from(&self, start: u64) -> Option<(Pt, u64)> {
        for x in start..start + 200 {
            let x = x % self.p;
            let f = self.rhs(x);
            if f == 0 {
                continue;
            }
            if let Some(y) = arith::sqrt_mod_prime(f, self.p) {
                return Some((Some((x, y)), x + 1));
            }
        }
        None
    }

    /// Some multiple m ∈ [lo, hi] with mP = O.
    fn multiple_in(&self, pt: Pt, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo;
        let s = (((width + 1) as f64).sqrt().ceil() as u64).max(1);
        let mut baby: Vec<(u64, u64, u64)> = Vec::with_capacity(s as usize);
        let mut jp: Pt = None;
        for j in 1..=s {
            jp = self.add(jp, pt);
            if let Some((x, y)) = jp {
                baby.push((x, y, j));
            }
        }
        baby.sort_unstable();
        let step = self.mul(s, pt);
        let mut r = self.mul(lo, pt);
        let mut i = 0u64;
        while i * s <= width + s {
            let base = lo + i * s;
            match r {
                None => {
                    if base <= hi {
                        return Some(base);
                    }
                }
                Some((x, y)) => {
                    let k = baby.partition_point(|e| e.0 < x);
                    let mut idx = k;
                    while idx < baby.len() && baby[idx].0 == x {
                        let (_, yj, j) = baby[idx];
                        let m = if yj == y { base.checked_sub(j) } else { Some(base + j) };
                        if let Some(m) = m {
                            if m >= lo && m <= hi && self.mul(m, pt).is_none() {
                                return Some(m);
                            }
                        }
                        idx += 1;
                    }
                }
            }
            r = self.add(r, step);
            i += 1;
        }
        None
    }

    fn order_from_multiple(&self, pt: Pt, m: u64) -> u64 {
        let mut ord = m;
        let f = arith::factor(m as i128).expect("nonzero");
        for &(q, _) in &f.factors {
            let q = q as u64;
            while ord.is_multiple_of(q) && self.mul(ord / q, pt).is_none() {
                ord /= q;
            }
        }
        ord
    }
}

/// #E(F_p) for y² = x³ + ax + b by baby-step giant-step on points of E and
/// its quadratic twist; None when the group structure leaves it ambiguous.
fn count_bsgs(a: u64, b: u64, p: u64) -> Option<u64> {
    let w = arith::isqrt_u128(4 * p as u128) as u64 + 1;
    let lo = p + 1 - w;
    let hi = p + 1 + w;
    let e = ShortCurve { a, b, p };
    // twist by a non-residue d: y² = x³ + a d² x + b d³
    let mut d = 2;
    while arith::legendre(d as i64, p) != -1 {
        d += 1;
    }
    let tw = ShortCurve {
        a: e.mulm(a, e.mulm(d, d)),
        b: e.mulm(b, e.mulm(d, e.mulm(d, d))),
        p,
    };
    let (mut l1, mut l2) = (1u64, 1u64);
    let (mut x1, mut x2) = (1u64, 1u64);
    for attempt in 0..16 {
        let on_twist = attempt % 2 == 1;
        let (c, start) = if on_twist { (&tw, &mut x2) } else { (&e, &mut x1) };
        let Some((pt, next)) = c.point_with_x_from(*start) else {
            continue;
        };
        *start = next;
        let m = c.multiple_in(pt, lo, hi)?;
        let ord = c.order_from_multiple(pt, m);
        if on_twist {
            l2 = l2.lcm(&ord);
        } else {
            l1 = l1.lcm(&ord);
        }
        // N ≡ 0 mod l1 and 2p + 2 - N ≡ 0 mod l2
        let mut found = None;
        let mut count = 0;
        let first = lo.div_ceil(l1) * l1;
        let mut n = first;
        while n <= hi {
            if (2 * p + 2 - n).is_multiple_of(l2) {
                count += 1;
                found = Some(n);
                if count > 1 {
                    break;
                }
            }
            n += l1;
        }
        if count == 1 {
            return found;
        }
    }
    None
}

/// Threshold above which point counting switches to baby-step giant-step.
const BSGS_MIN: u64 = 1 << 10;

/// a_p from a model with good reduction at p.
fn ap_good(model: &Model, p: u64, qr: &mut Vec<i8>) -> i64 {
    if p < 5 {
        let a = model.a.clone().map(|x| md(&x, p));
        return p as i64 + 1 - count_brute(a, p) as i64;
    }
    if p >= BSGS_MIN {
        let c4 = md(&model.c4(), p);
        let c6 = md(&model.c6(), p);
        let a = (p - (27 * c4) % p) % p;
        let b = (p - (54 * c6 % p)) % p;
        if let Some(n) = count_bsgs(a, b, p) {
            return p as i64 + 1 - n as i64;
        }
    }
    let b = [
        md(&model.b2(), p) as i64,
        md(&model.b4(), p) as i64,
        md(&model.b6(), p) as i64,
    ];
    ap_char_sum(b, p, qr)
}

// ---------------------------------------------------------------------------
// curves

/// Fixture curves, keyed by their Cremona labels.
pub const FIXTURES: [(&str, [i64; 5]); 5] = [
    ("480a1", [0, -1, 0, -6, 0]),
    ("37a1", [0, 0, 1, -1, 0]),
    ("14a1", [1, 0, 1, 4, -6]),
    ("24a4", [0, -1, 0, 1, 0]),
    ("19a3", [0, 1, 1, 1, 0]),
];

#[derive(Debug, Default)]
struct ApCache {
    /// a_p at primes p ≤ bound, indexed by p (zero elsewhere)
    ap: Arc<Vec<i32>>,
    bound: u64,
}

#[derive(Clone, Debug)]
struct TwistInfo {
    base: EllipticCurveQ,
    /// fundamental discriminant of the twisting character
    disc: i64,
}

/// An elliptic curve over Q, stored by its reduced global minimal model.
#[derive(Clone, Debug)]
pub struct EllipticCurveQ {
    model: Model,
    input: Model,
    disc: BigInt,
    conductor: BigInt,
    local: Vec<LocalData>,
    label: Option<String>,
    twist: Option<Box<TwistInfo>>,
    cache: Arc<Mutex<ApCache>>,
}

impl PartialEq for EllipticCurveQ {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
    }
}

impl EllipticCurveQ {
    pub fn new(a: [i64; 5]) -> Result<Self, EllipticError> {
        Self::from_model(Model::new(a), &[])
    }

    /// Curve from a model; `hint` primes are tried first when factoring the
    /// discriminant.
    pub fn from_model(input: Model, hint: &[u64]) -> Result<Self, EllipticError> {
        let d0 = input.disc();
        if d0.is_zero() {
            return Err(EllipticError::Singular);
        }
        let primes: Vec<u64> = arith::factor_big(&d0, hint)?.into_iter().map(|(p, _)| p).collect();
        let mut m = input.clone();
        for &p in &primes {
            m = tate(&m, p).1;
        }
        let model = m.laska_normalize();
        let disc = model.disc();
        let mut local = Vec::new();
        let mut conductor = BigInt::one();
        for &p in &primes {
            if disc.is_zero() || !divides(&bi(p as i64), &disc) {
                continue;
            }
            let (ld, _) = tate(&model, p);
            conductor *= bi(p as i64).pow(ld.fp);
            local.push(ld);
        }
        Ok(EllipticCurveQ {
            model,
            input,
            disc,
            conductor,
            local,
            label: None,
            twist: None,
            cache: Arc::default(),
        })
    }

    pub fn from_label(label: &str) -> Result<Self, EllipticError> {
        let (_, a) = FIXTURES
            .iter()
            .find(|(l, _)| *l == label)
            .ok_or_else(|| EllipticError::UnknownLabel(label.to_string()))?;
        let mut e = Self::new(*a)?;
        e.label = Some(label.to_string());
        Ok(e)
    }

    /// Label from the fixture table or "a1,a2,a3,a4,a6".
    pub fn parse(s: &str) -> Result<Self, EllipticError> {
        let s = s.trim();
        if FIXTURES.iter().any(|(l, _)| *l == s) {
            return Self::from_label(s);
        }
        let parts: Vec<&str> = s.trim_matches(|c| c == '[' || c == ']').split(',').collect();
        if parts.len() != 5 {
            return Err(EllipticError::Parse(s.to_string()));
        }
        let mut a = [0i64; 5];
        for (i, t) in parts.iter().enumerate() {
            a[i] = t.trim().parse().map_err(|_| EllipticError::Parse(s.to_string()))?;
        }
        Self::new(a)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }
    pub fn input_model(&self) -> &Model {
        &self.input
    }
    pub fn a_invariants(&self) -> &[BigInt; 5] {
        &self.model.a
    }
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }
    pub fn conductor(&self) -> &BigInt {
        &self.conductor
    }
    pub fn conductor_u64(&self) -> u64 {
        self.conductor.to_u64().expect("conductor fits in u64")
    }
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
    pub fn c4(&self) -> BigInt {
        self.model.c4()
    }
    pub fn c6(&self) -> BigInt {
        self.model.c6()
    }
    pub fn j_invariant(&self) -> BigRational {
        let c4 = self.c4();
        BigRational::new(&c4 * &c4 * &c4, self.disc.clone())
    }
    /// Local data at the primes of bad reduction.
    pub fn bad_primes_data(&self) -> &[LocalData] {
        &self.local
    }
    pub fn bad_primes(&self) -> Vec<u64> {
        self.local.iter().map(|l| l.p).collect()
    }
    /// If this curve was built as a twist: the base curve and the
    /// fundamental discriminant.
    pub fn twist_data(&self) -> Option<(&EllipticCurveQ, i64)> {
        self.twist.as_ref().map(|t| (&t.base, t.disc))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn name(&self) -> String {
        match (&self.label, &self.twist) {
            (Some(l), _) => l.clone(),
            (None, Some(t)) => format!("{}^({})", t.base.name(), t.disc),
            _ => self.model.to_string(),
        }
    }

    pub fn local_data(&self, p: u64) -> Result<LocalData, EllipticError> {
        if !arith::is_prime_u64(p) {
            return Err(EllipticError::NotPrime(p));
        }
        Ok(self
            .local
            .iter()
            .find(|l| l.p == p)
            .cloned()
            .unwrap_or_else(|| tate(&self.model, p).0))
    }

    fn ap_uncached(&self, p: u64, qr: &mut Vec<i8>) -> i64 {
        if let Some(l) = self.local.iter().find(|l| l.p == p) {
            return match l.kind {
                Reduction::SplitMultiplicative => 1,
                Reduction::NonsplitMultiplicative => -1,
                _ => 0,
            };
        }
        ap_good(&self.model, p, qr)
    }

    /// Trace of Frobenius at p (±1 multiplicative, 0 additive).
    pub fn ap(&self, p: u64) -> Result<i64, EllipticError> {
        if !arith::is_prime_u64(p) {
            return Err(EllipticError::NotPrime(p));
        }
        {
            let c = self.cache.lock().expect("a_p cache poisoned");
            if p <= c.bound {
                return Ok(c.ap[p as usize] as i64);
            }
        }
        Ok(self.ap_uncached(p, &mut Vec::new()))
    }

    /// a_p for every prime p ≤ bound, indexed by p. Twists reuse the base
    /// curve's table through a_p(E_D) = (D/p)·a_p(E) for p ∤ N(E)·D.
    pub fn ap_table(&self, bound: u64) -> Arc<Vec<i32>> {
        {
            let c = self.cache.lock().expect("a_p cache poisoned");
            if c.bound >= bound {
                return c.ap.clone();
            }
        }
        let table = match &self.twist {
            Some(tw) => {
                let base = tw.base.ap_table(bound);
                let mut t: Vec<i32> = Vec::with_capacity(bound as usize + 1);
                let exceptional: Vec<u64> = {
                    let mut v = tw.base.bad_primes();
                    v.extend(arith::prime_divisors(tw.disc));
                    v
                };
                let mut qr = Vec::new();
                for p in 0..=bound {
                    let a = base[p as usize];
                    if a == 0 && !(p >= 2 && arith::is_prime_u64(p)) {
                        t.push(0);
                    } else if exceptional.contains(&p) {
                        t.push(self.ap_uncached(p, &mut qr) as i32);
                    } else {
                        t.push(arith::kronecker(tw.disc, p as i64) as i32 * a);
                    }
                }
                t
            }
            None => {
                let mut t = vec![0i32; bound as usize + 1];
                let mut qr = Vec::new();
                for p in arith::primes_up_to(bound) {
                    t[p as usize] = self.ap_uncached(p, &mut qr) as i32;
                }
                t
            }
        };
        let table = Arc::new(table);
        let mut c = self.cache.lock().expect("a_p cache poisoned");
        if c.bound < bound {
            c.ap = table.clone();
            c.bound = bound;
        }
        table
    }

    /// a_n for 0 ≤ n ≤ bound (a_0 = 0).
    pub fn an_list(&self, bound: usize) -> Vec<i64> {
        let ap = self.ap_table(bound as u64);
        let spf = arith::smallest_prime_factors(bound);
        let mut a = vec![0i64; bound + 1];
        if bound >= 1 {
            a[1] = 1;
        }
        let bad: HashMap<u64, ()> = self.local.iter().map(|l| (l.p, ())).collect();
        for n in 2..=bound {
            let p = spf[n] as usize;
            let mut m = n / p;
            let mut pk = p;
            while m.is_multiple_of(p) {
                m /= p;
                pk *= p;
            }
            if m > 1 {
                a[n] = a[pk] * a[m];
            } else if pk == p {
                a[n] = ap[p] as i64;
            } else if bad.contains_key(&(p as u64)) {
                a[n] = a[pk / p] * ap[p] as i64;
            } else {
                a[n] = ap[p] as i64 * a[pk / p] - p as i64 * a[pk / p / p];
            }
        }
        a
    }

    /// α^f + β^f for the Frobenius roots at a non-additive prime.
    pub fn frobenius_trace_power(&self, p: u64, f: u32) -> Result<i128, EllipticError> {
        let ap = self.ap(p)? as i128;
        let ld = self.local_data(p)?;
        match ld.kind {
            Reduction::Additive => Err(EllipticError::Additive(p)),
            Reduction::SplitMultiplicative | Reduction::NonsplitMultiplicative => {
                Ok(ap.pow(f))
            }
            Reduction::Good => {
                let p = p as i128;
                let (mut prev, mut cur) = (2i128, ap);
                for _ in 1..f {
                    (prev, cur) = (cur, ap * cur - p * prev);
                }
                Ok(if f == 0 { 2 } else { cur })
            }
        }
    }

    /// Quadratic twist by the square class of d, as a minimal model.
    pub fn quadratic_twist(&self, d: i64) -> Result<EllipticCurveQ, EllipticError> {
        if d == 0 {
            return Err(EllipticError::ZeroTwist);
        }
        let sc = arith::square_class(d as i128)?;
        if sc.squarefree == 1 {
            return Ok(self.clone());
        }
        // compose with an existing twist
        let (base, disc) = match &self.twist {
            Some(t) => {
                let prod = arith::square_class(t.disc as i128 * sc.discriminant as i128)?;
                if prod.squarefree == 1 {
                    return Ok(t.base.clone());
                }
                (t.base.clone(), prod.discriminant)
            }
            None => (self.clone(), sc.discriminant),
        };
        let s = bi(arith::square_class(disc as i128)?.squarefree);
        let c4 = base.c4();
        let c6 = base.c6();
        let twisted = Model {
            a: [
                BigInt::zero(),
                BigInt::zero(),
                BigInt::zero(),
                -27 * c4 * &s * &s,
                -54 * c6 * &s * &s * &s,
            ],
        };
        let mut hint = vec![2, 3];
        hint.extend(base.bad_primes());
        hint.extend(arith::prime_divisors(disc));
        let mut e = EllipticCurveQ::from_model(twisted, &hint)?;
        e.twist = Some(Box::new(TwistInfo { base, disc }));
        Ok(e)
    }

    /// Rational roots and field structure of the 2-division cubic.
    pub fn two_torsion(&self) -> TwoTorsion {
        TwoTorsion::of(&self.model)
    }

    /// Roots e1 < e2 < e3 of X³ + b2X² + 8b4X + 16b6 (X = 4x), when all are
    /// rational.
    pub fn two_torsion_roots(&self) -> Result<[BigInt; 3], EllipticError> {
        let t = self.two_torsion();
        if t.roots.len() != 3 {
            return Err(EllipticError::NoFullTwoTorsion);
        }
        Ok([t.roots[0].clone(), t.roots[1].clone(), t.roots[2].clone()])
    }

    /// Affine points with x = u/v², |u|, |v| ≤ bound.
    pub fn point_search(&self, bound: u64) -> Vec<(BigRational, BigRational)> {
        let [a1, a2, a3, a4, a6] = self.model.a.clone();
        let mut out = Vec::new();
        let b = bound as i64;
        for v in 1..=b {
            let vb = bi(v);
            let v2 = &vb * &vb;
            let v3 = &v2 * &vb;
            let v4 = &v2 * &v2;
            let v6 = &v3 * &v3;
            for u in -b..=b {
                if u.gcd(&v) != 1 {
                    continue;
                }
                let ub = bi(u);
                // Y = y v³: Y² + (a1 u v + a3 v³) Y = u³ + a2u²v² + a4uv⁴ + a6v⁶
                let lin = &a1 * &ub * &vb + &a3 * &v3;
                let rhs = &ub * &ub * &ub + &a2 * &ub * &ub * &v2 + &a4 * &ub * &v4 + &a6 * &v6;
                let disc = &lin * &lin + 4 * &rhs;
                let Some(r) = arith::exact_sqrt_big(&disc) else {
                    continue;
                };
                let x = BigRational::new(ub.clone(), v2.clone());
                let mut ys = vec![(-&lin + &r) / 2];
                if !r.is_zero() {
                    ys.push((-&lin - &r) / 2);
                }
                for yy in ys {
                    let y = BigRational::new(yy, v3.clone());
                    debug_assert!(self.model.contains(&x, &y));
                    out.push((x.clone(), y));
                }
            }
        }
        out
    }
}

impl fmt::Display for EllipticCurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.model)
    }
}

/// Structure of E[2] over Q, via the monic cubic X³ + b2X² + 8b4X + 16b6 in
/// X = 4x (its roots are 4× the x-coordinates of the 2-torsion points).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTorsion {
    /// rational roots X, sorted ascending
    pub roots: Vec<BigInt>,
    /// discriminant of the residual quadratic when exactly one root is rational
    pub quadratic_disc: Option<BigInt>,
}

impl TwoTorsion {
    fn of(m: &Model) -> TwoTorsion {
        let c2 = m.b2();
        let c1 = 8 * m.b4();
        let c0 = 16 * m.b6();
        let f = |x: &BigInt| x * x * x + &c2 * x * x + &c1 * x + &c0;
        let mut roots: Vec<BigInt> = Vec::new();
        for r in real_roots_f64(&c2, &c1, &c0) {
            let guess = BigInt::from(r.round() as i128);
            for k in -2..=2 {
                let x = &guess + k;
                if f(&x).is_zero() && !roots.contains(&x) {
                    roots.push(x);
                }
            }
        }
        roots.sort();
        let quadratic_disc = if roots.len() == 1 {
            // X³ + c2X² + c1X + c0 = (X - r)(X² + (c2 + r)X + q)
            let r = &roots[0];
            let b = &c2 + r;
            let q = &c1 + r * &b;
            Some(&b * &b - 4 * q)
        } else {
            None
        };
        TwoTorsion {
            roots,
            quadratic_disc,
        }
    }

    pub fn order_over_q(&self) -> u32 {
        match self.roots.len() {
            0 => 1,
            1 => 2,
            _ => 4,
        }
    }

    /// Order of E(F)[2] for the multiquadratic field generated by the
    /// square roots of `discs`.
    pub fn order_over(&self, discs: &[i64]) -> u32 {
        match self.roots.len() {
            0 => 1,
            3 => 4,
            _ => {
                let d = self.quadratic_disc.as_ref().expect("one rational root");
                if in_square_span(d, discs) {
                    4
                } else {
                    2
                }
            }
        }
    }

    /// Shape of the 2-division cubic over Q: "1+1+1", "1+2" or "3".
    pub fn factorization_type(&self) -> &'static str {
        match self.roots.len() {
            0 => "3",
            1 => "1+2",
            _ => "1+1+1",
        }
    }
}

/// Whether d is a square times a product of a subset of `discs`.
fn in_square_span(d: &BigInt, discs: &[i64]) -> bool {
    let n = discs.len();
    (0u32..1 << n).any(|mask| {
        let mut prod = d.clone();
        for (i, &x) in discs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod *= x;
            }
        }
        arith::exact_sqrt_big(&prod).is_some()
    })
}

/// Real roots of the monic cubic X³ + aX² + bX + c.
fn real_roots_f64(a: &BigInt, b: &BigInt, c: &BigInt) -> Vec<f64> {
    let (a, b, c) = (
        a.to_f64().unwrap_or(f64::MAX),
        b.to_f64().unwrap_or(f64::MAX),
        c.to_f64().unwrap_or(f64::MAX),
    );
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    // Cauchy bound then bracket via critical points
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let mut pts = vec![-bound];
    let disc = 4.0 * a * a - 12.0 * b;
    if disc > 0.0 {
        let s = disc.sqrt();
        let mut crit = [(-2.0 * a - s) / 6.0, (-2.0 * a + s) / 6.0];
        crit.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        pts.extend(crit);
    }
    pts.push(bound);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            // tangent root at a critical point
            if f(hi).abs() < 1e-6 * (1.0 + hi.abs().powi(3)) {
                roots.push(hi);
            }
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..3 {
            let d = df(x);
            if d != 0.0 {
                x -= f(x) / d;
            }
        }
        roots.push(x);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(l: &str) -> EllipticCurveQ {
        EllipticCurveQ::from_label(l).unwrap()
    }

    #[test]
    fn fixture_conductors() {
        for (label, n) in [("480a1", 480), ("37a1", 37), ("14a1", 14), ("24a4", 24), ("19a3", 19)] {
            let e = curve(label);
            assert_eq!(e.conductor(), &bi(n), "{label}");
            assert_eq!(e.model(), e.input_model(), "fixture models are minimal");
        }
        assert_eq!(EllipticCurveQ::new([0; 5]).unwrap_err(), EllipticError::Singular);
    }

    #[test]
    fn invariant_relations() {
        for (_, a) in FIXTURES {
            let m = Model::new(a);
            assert_eq!(4 * m.b8(), m.b2() * m.b6() - m.b4() * m.b4());
            assert_eq!(1728 * m.disc(), m.c4().pow(3) - m.c6().pow(2));
        }
    }

    #[test]
    fn local_data_examples() {
        let e = curve("480a1");
        let l3 = e.local_data(3).unwrap();
        assert!(matches!(
            l3.kind,
            Reduction::SplitMultiplicative | Reduction::NonsplitMultiplicative
        ));
        assert_eq!(l3.fp, 1);
        let l2 = e.local_data(2).unwrap();
        assert_eq!((l2.kind, l2.fp), (Reduction::Additive, 5));
        // a_37 = -1, so the global sign -1 comes from ∞ alone
        let l = curve("37a1").local_data(37).unwrap();
        assert_eq!((l.kind, l.fp), (Reduction::NonsplitMultiplicative, 1));
        for (label, p, ap) in [("480a1", 3, -1), ("480a1", 5, -1), ("14a1", 2, -1), ("14a1", 7, 1), ("19a3", 19, 1), ("24a4", 3, -1)] {
            assert_eq!(curve(label).ap(p).unwrap(), ap, "{label} at {p}");
        }
        let l7 = e.local_data(7).unwrap();
        assert_eq!((l7.kind, l7.fp), (Reduction::Good, 0));
        let json = serde_json::to_value(&l2).unwrap();
        assert_eq!(json["kind"], "additive");
        assert_eq!(json["fp"], 5);
    }

    /// (a-invariants, conductor, [(p, fp, Kodaira)]) from an independent
    /// computer algebra system.
    const TATE_ORACLE: &[([i64; 5], u64, &[(u64, u32, &str)])] = &[
        ([0, -1, 0, -6, 0], 480, &[(2, 5, "III"), (3, 1, "I2"), (5, 1, "I2")]),
        ([0, -1, 0, 1, 0], 24, &[(2, 3, "III"), (3, 1, "I1")]),
        ([0, 0, 0, 0, 1], 36, &[(2, 2, "IV"), (3, 2, "III")]),
        ([0, 0, 0, 1, 0], 64, &[(2, 6, "II")]),
        ([0, 0, 0, -1, 0], 32, &[(2, 5, "III")]),
        ([0, 0, 0, 0, -432], 27, &[(3, 3, "IV*")]),
        ([0, 0, 0, -11, -14], 32, &[(2, 5, "I0*")]),
        ([0, 0, 0, 4, 0], 32, &[(2, 5, "I3*")]),
        ([1, -1, 1, -1, 0], 17, &[(17, 1, "I1")]),
        ([0, 0, 0, 0, 2], 1728, &[(2, 6, "II"), (3, 3, "II")]),
        ([0, 0, 0, -5, 0], 800, &[(2, 5, "III"), (5, 2, "III")]),
        ([0, 0, 0, 0, 3125], 2700, &[(2, 2, "IV"), (3, 3, "II"), (5, 2, "II*")]),
        ([0, 0, 0, 125, 0], 1600, &[(2, 6, "II"), (5, 2, "III*")]),
        ([0, 0, 0, -75, 0], 14400, &[(2, 6, "II"), (3, 2, "III"), (5, 2, "I0*")]),
        ([1, 0, 0, 0, -5], 10795, &[(5, 1, "I1"), (17, 1, "I1"), (127, 1, "I1")]),
        ([0, 0, 0, 0, 1024], 27, &[(3, 3, "II")]),
        ([0, 0, 0, -2, 0], 256, &[(2, 8, "III")]),
        ([0, 0, 0, 3, 0], 288, &[(2, 5, "III"), (3, 2, "III")]),
        ([0, 0, 0, 0, -3], 972, &[(2, 2, "IV"), (3, 5, "II")]),
        ([0, 0, 0, -4, 4], 88, &[(2, 3, "I1*"), (11, 1, "I1")]),
        ([1, 1, 1, -10, -10], 15, &[(3, 1, "I4"), (5, 1, "I4")]),
        ([1, 2, 1, -8, 14], 135810, &[(2, 1, "I1"), (3, 3, "II"), (5, 1, "I1"), (503, 1, "I1")]),
        ([1, 2, 4, -32, -48], 231498, &[(2, 1, "I4"), (3, 4, "II"), (1429, 1, "I1")]),
        ([0, 2, 4, 16, 36], 7360, &[(2, 6, "I0*"), (5, 1, "I2"), (23, 1, "I1")]),
        ([0, 2, 1, -4, 12], 3489, &[(3, 1, "I4"), (1163, 1, "I1")]),
        ([0, 2, 0, 20, -10], 639680, &[(2, 6, "II"), (5, 1, "I1"), (1999, 1, "I1")]),
        ([0, 2, 0, -16, 0], 1088, &[(2, 6, "I4*"), (17, 1, "I1")]),
        ([3, 1, 0, -243, 0], 47163, &[(3, 1, "I10"), (79, 1, "I1"), (199, 1, "I1")]),
        ([3, 0, 1, -135, -189], 1911015, &[(3, 2, "I0*"), (5, 1, "I1"), (42467, 1, "I1")]),
        ([3, 1, 1, 3, 0], 1933, &[(1933, 1, "I1")]),
        ([0, 0, 9, 9, 486], 1367451, &[(3, 2, "I0*"), (151939, 1, "I1")]),
        ([1, -3, 9, -243, 9], 146721306, &[(2, 1, "I2"), (3, 1, "I2"), (19, 1, "I1"), (89, 1, "I1"), (14461, 1, "I1")]),
        ([0, 3, 0, 27, 15], 927936, &[(2, 6, "II"), (3, 4, "II"), (179, 1, "I1")]),
        ([5, -5, 25, -1250, 6250], 27756275, &[(5, 2, "I1*"), (521, 1, "I1"), (2131, 1, "I1")]),
        ([1, 0, 0, -750, 0], 1440030, &[(2, 1, "I2"), (3, 1, "I2"), (5, 1, "I6"), (23, 1, "I1"), (2087, 1, "I1")]),
        ([5, 0, 25, 125, -625], 41325, &[(3, 1, "I1"), (5, 2, "IV*"), (19, 1, "I1"), (29, 1, "I1")]),
        ([0, -5, 25, 125, -20], 150204675, &[(3, 1, "I1"), (5, 2, "II"), (79, 1, "I1"), (101, 1, "I1"), (251, 1, "I1")]),
        ([1, 0, 0, -20, -21875], 41337343145, &[(5, 1, "I2"), (7, 1, "I1"), (479, 1, "I1"), (1231, 1, "I1"), (2003, 1, "I1")]),
        ([1, 5, 0, 250, 78125], 834842705, &[(5, 1, "I6"), (166968541, 1, "I1")]),
        ([0, 7, 1, -19208, 49], 453838644404461, &[(23, 1, "I1"), (34649, 1, "I1"), (569485843, 1, "I1")]),
        ([7, 7, 0, 28, -9604], 2639240450, &[(2, 1, "I2"), (5, 2, "II"), (7, 2, "III"), (11, 1, "I1"), (97931, 1, "I1")]),
        ([0, 1, 49, 1372, -12005], 658756469, &[(7, 1, "I4"), (94108067, 1, "I1")]),
        ([1, 1, 0, 2401, -343], 9041280794, &[(2, 1, "I2"), (7, 1, "I3"), (13, 1, "I1"), (4519, 1, "I1"), (10993, 1, "I1")]),
        ([1, -7, 0, -14406, 392], 4559622978582, &[(2, 1, "I2"), (3, 2, "III"), (7, 1, "I2"), (36187483957, 1, "I1")]),
        ([7, 0, 49, -16807, -16807], 2517159057, &[(3, 1, "I1"), (7, 2, "IV*"), (107, 1, "I1"), (160033, 1, "I1")]),
        ([0, 0, 8, -16, 0], 37, &[(37, 1, "I1")]),
        ([0, 0, 27, -81, 0], 37, &[(37, 1, "I1")]),
        ([0, 0, 216, -1296, 0], 37, &[(37, 1, "I1")]),
        ([2, 0, 8, 64, -384], 14, &[(2, 1, "I6"), (7, 1, "I3")]),
        ([3, 0, 27, 324, -4374], 14, &[(2, 1, "I6"), (7, 1, "I3")]),
        ([6, 0, 216, 5184, -279936], 14, &[(2, 1, "I6"), (7, 1, "I3")]),
        ([0, 4, 8, 16, 0], 19, &[(19, 1, "I1")]),
        ([0, 9, 27, 81, 0], 19, &[(19, 1, "I1")]),
        ([0, 36, 216, 1296, 0], 19, &[(19, 1, "I1")]),
    ];

    #[test]
    fn tate_against_oracle() {
        for (a, n, data) in TATE_ORACLE {
            let e = EllipticCurveQ::new(*a).unwrap();
            assert_eq!(e.conductor(), &bi(*n as i64), "{a:?}");
            for &(p, fp, kod) in *data {
                let l = e.local_data(p).unwrap();
                assert_eq!((l.fp, l.kodaira.to_string().as_str()), (fp, kod), "{a:?} at {p}");
            }
        }
    }

    #[test]
    fn ap_examples() {
        let e = curve("480a1");
        assert_eq!(e.ap(7).unwrap(), 0);
        assert_eq!(e.ap(11).unwrap(), -4);
        assert_eq!(e.frobenius_trace_power(7, 2).unwrap(), -14);
        assert_eq!(e.frobenius_trace_power(11, 2).unwrap(), -6);
        assert_eq!(e.frobenius_trace_power(3, 2).unwrap(), 1);
        assert_eq!(e.frobenius_trace_power(2, 1), Err(EllipticError::Additive(2)));
        assert_eq!(e.ap(15), Err(EllipticError::NotPrime(15)));
    }

    #[test]
    fn ap_against_naive_count_and_hasse() {
        for (_, a) in FIXTURES {
            let e = EllipticCurveQ::new(a).unwrap();
            for p in arith::primes_up_to(100) {
                let ap = e.ap(p).unwrap();
                if e.local_data(p).unwrap().kind == Reduction::Good {
                    let m = e.model().a.clone().map(|x| md(&x, p));
                    assert_eq!(ap, p as i64 + 1 - count_brute(m, p) as i64, "p={p}");
                    assert!((ap * ap) as u64 <= 4 * p);
                }
            }
        }
    }

    #[test]
    fn bsgs_matches_character_sum() {
        let mut qr = Vec::new();
        for (_, a) in FIXTURES {
            let e = EllipticCurveQ::new(a).unwrap();
            let m = e.model();
            for p in arith::primes_up_to(12_000).into_iter().filter(|&p| p >= 1024) {
                if e.bad_primes().contains(&p) {
                    continue;
                }
                let b = [md(&m.b2(), p) as i64, md(&m.b4(), p) as i64, md(&m.b6(), p) as i64];
                let slow = ap_char_sum(b, p, &mut qr);
                let c4 = md(&m.c4(), p);
                let c6 = md(&m.c6(), p);
                let fast = count_bsgs((p - 27 * c4 % p) % p, (p - 54 * c6 % p) % p, p)
                    .map(|n| p as i64 + 1 - n as i64);
                if let Some(f) = fast {
                    assert_eq!(f, slow, "p={p}");
                }
            }
        }
    }

    /// #E(F_{p²}) by brute force in F_p[i]/(i² - nonresidue).
    fn count_fp2(m: &Model, p: u64) -> u64 {
        let nr = (2..p).find(|&d| arith::legendre(d as i64, p) == -1).unwrap();
        let mul = |(a, b): (u64, u64), (c, d): (u64, u64)| {
            ((a * c + b * d % p * nr) % p, (a * d + b * c) % p)
        };
        let add = |(a, b): (u64, u64), (c, d): (u64, u64)| ((a + c) % p, (b + d) % p);
        let k = |x: &BigInt| (md(x, p), 0u64);
        let [a1, a2, a3, a4, a6] = m.a.clone().map(|x| k(&x));
        let mut n = 1;
        for x0 in 0..p {
            for x1 in 0..p {
                let x = (x0, x1);
                let x2 = mul(x, x);
                let rhs = add(add(add(mul(x2, x), mul(a2, x2)), mul(a4, x)), a6);
                for y0 in 0..p {
                    for y1 in 0..p {
                        let y = (y0, y1);
                        let lhs = add(add(mul(y, y), mul(mul(a1, x), y)), mul(a3, y));
                        if lhs == rhs {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn trace_powers_against_fp2_counts() {
        for (_, a) in FIXTURES {
            let e = EllipticCurveQ::new(a).unwrap();
            for p in arith::primes_up_to(19).into_iter().filter(|&p| p > 2) {
                if e.local_data(p).unwrap().kind != Reduction::Good {
                    continue;
                }
                let a2 = e.frobenius_trace_power(p, 2).unwrap() as i64;
                assert_eq!((p * p + 1) as i64 - a2, count_fp2(e.model(), p) as i64, "p={p}");
            }
        }
    }

    #[test]
    fn an_is_multiplicative_with_hecke_recursion() {
        for (_, a) in FIXTURES {
            let e = EllipticCurveQ::new(a).unwrap();
            let an = e.an_list(2000);
            for m in 1..45usize {
                for n in 1..45usize {
                    if m.gcd(&n) == 1 {
                        assert_eq!(an[m * n], an[m] * an[n]);
                    }
                }
            }
            for p in arith::primes_up_to(40) {
                let p = p as usize;
                if e.local_data(p as u64).unwrap().kind == Reduction::Good {
                    assert_eq!(an[p * p], an[p] * an[p] - p as i64);
                }
            }
        }
    }

    #[test]
    fn twists() {
        let e = curve("480a1");
        assert_eq!(e.quadratic_twist(1).unwrap(), e);
        assert_eq!(e.quadratic_twist(4).unwrap(), e);
        assert_eq!(e.quadratic_twist(0).unwrap_err(), EllipticError::ZeroTwist);
        for (d, a, n) in [
            (-1, [0, 1, 0, -6, 0], 480u64),
            (41, [0, 1, 0, -10646, -146496], 806880),
            (73, [0, -1, 0, -33750, -795600], 2557920),
            (-41, [0, -1, 0, -10646, 146496], 806880),
            (-73, [0, 1, 0, -33750, 795600], 2557920),
            (2993, [0, 1, 0, -56734310, -55627825392], 4299863520),
            (-2993, [0, -1, 0, -56734310, 55627825392], 4299863520),
        ] {
            let t = e.quadratic_twist(d).unwrap();
            assert_eq!(t.model(), &Model::new(a), "D = {d}");
            assert_eq!(t.conductor_u64(), n, "D = {d}");
            assert_eq!(t.j_invariant(), e.j_invariant());
            let back = t.quadratic_twist(d).unwrap();
            assert_eq!(back.model(), e.model());
        }
        let s = curve("37a1").quadratic_twist(-1513).unwrap();
        assert_eq!(s.conductor_u64(), 1355188048);
        assert_eq!(s.conductor_u64() % (37 * 1513 * 1513), 0);
        assert_eq!(s.bad_primes(), vec![2, 17, 37, 89]);
    }

    #[test]
    fn twist_ap_tables_match_direct_counts() {
        let e = curve("37a1");
        for d in [-4i64, 17, -68, 89 * 17] {
            let t = e.quadratic_twist(d).unwrap();
            let table = t.ap_table(3000);
            let fresh = EllipticCurveQ::from_model(t.model().clone(), &[2, 17, 37, 89]).unwrap();
            for p in arith::primes_up_to(3000) {
                assert_eq!(table[p as usize] as i64, fresh.ap(p).unwrap(), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn two_torsion_examples() {
        let e = curve("480a1");
        let t = e.two_torsion();
        assert_eq!(t.order_over_q(), 4);
        // X = 4x: roots 4·{-2, 0, 3}
        assert_eq!(t.roots, vec![bi(-8), bi(0), bi(12)]);
        assert_eq!(t.order_over(&[-4, 41]), 4);
        let t14 = curve("14a1").two_torsion();
        assert_eq!(t14.factorization_type(), "1+2");
        assert_eq!(t14.order_over(&[-4, 17]), 2);
        let t37 = curve("37a1").two_torsion();
        assert_eq!(t37.order_over(&[-4, 17, 89]), 1);
        assert_eq!(t37.factorization_type(), "3");
    }

    #[test]
    fn point_search_examples() {
        let has = |e: &EllipticCurveQ, x: i64, y: i64| {
            let pts = e.point_search(5);
            pts.contains(&(BigRational::from_integer(bi(x)), BigRational::from_integer(bi(y))))
        };
        assert!(has(&curve("37a1"), 0, 0));
        assert!(has(&curve("19a3"), 0, 0));
        let e = curve("480a1");
        assert!(has(&e, 0, 0) && has(&e, -2, 0) && has(&e, 3, 0));
        for (x, y) in curve("37a1").point_search(20) {
            assert!(curve("37a1").model().contains(&x, &y));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn invariance_under_substitution(idx in 0usize..5, u in 1i64..4, r in -5i64..5, s in -5i64..5, t in -5i64..5) {
            let e = EllipticCurveQ::new(FIXTURES[idx].1).unwrap();
            // inverse direction: start from a scaled-up model
            let m = e.model();
            let ub = bi(u);
            let [a1, a2, a3, a4, a6] = m.a.clone();
            let scaled = Model { a: [a1 * &ub, a2 * ub.pow(2), a3 * ub.pow(3), a4 * ub.pow(4), a6 * ub.pow(6)] };
            let moved = scaled.rst(&bi(r), &bi(s), &bi(t));
            let f = EllipticCurveQ::from_model(moved, &[]).unwrap();
            prop_assert_eq!(f.model(), e.model());
            prop_assert_eq!(f.conductor(), e.conductor());
            for p in [5u64, 7, 11, 13] {
                prop_assert_eq!(f.ap(p).unwrap(), e.ap(p).unwrap());
            }
        }
    }
}
