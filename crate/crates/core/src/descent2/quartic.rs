//! Binary quartic forms: covariant reduction and the square search used to
//! find rational points on 2-covering curves.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith;

/// g(s, t) = c0 s⁴ + c1 s³t + c2 s²t² + c3 st³ + c4 t⁴.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quartic {
    pub c: [BigInt; 5],
}

pub type Mat2 = [[i128; 2]; 2];

const IDENTITY: Mat2 = [[1, 0], [0, 1]];

fn pmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

impl Quartic {
    pub fn eval(&self, s: &BigInt, t: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        let mut tp = BigInt::from(1);
        let sp: Vec<BigInt> = (0..5).map(|k| num_traits::pow(s.clone(), k)).collect();
        for i in 0..5 {
            acc += &self.c[i] * &sp[4 - i] * &tp;
            tp *= t;
        }
        acc
    }

    /// g(m00 s + m01 t, m10 s + m11 t).
    pub fn transform(&self, m: &Mat2) -> Quartic {
        let x = [BigInt::from(m[0][0]), BigInt::from(m[0][1])];
        let y = [BigInt::from(m[1][0]), BigInt::from(m[1][1])];
        let pow = |l: &[BigInt; 2], k: usize| {
            let mut r = vec![BigInt::from(1)];
            for _ in 0..k {
                r = pmul(&r, l);
            }
            r
        };
        let mut out: [BigInt; 5] = Default::default();
        for i in 0..5 {
            let term = pmul(&pow(&x, 4 - i), &pow(&y, i));
            for (j, v) in term.iter().enumerate() {
                out[j] += &self.c[i] * v;
            }
        }
        Quartic { c: out }
    }

    /// Divide out the largest square of small primes dividing the content;
    /// g is a square at (s, t) iff the result is.
    pub fn remove_square_content(&self) -> Quartic {
        let mut g = self.c.iter().fold(BigInt::zero(), |a, b| a.gcd(b));
        let mut sq = BigInt::from(1);
        if g.is_zero() {
            return self.clone();
        }
        for p in arith::primes_up_to(10_000) {
            let pb = BigInt::from(p);
            let p2 = &pb * &pb;
            while (&g % &p2).is_zero() {
                g /= &p2;
                sq *= &p2;
            }
            while (&g % &pb).is_zero() {
                g /= &pb;
            }
        }
        Quartic { c: self.c.clone().map(|v| v / &sq) }
    }

    fn roots(&self) -> Option<[Complex64; 4]> {
        let c: Vec<f64> = self.c.iter().map(|v| v.to_f64()).collect::<Option<_>>()?;
        if c[0] == 0.0 || c.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let a: Vec<f64> = c.iter().map(|v| v / c[0]).collect();
        let p = |z: Complex64| (((z + a[1]) * z + a[2]) * z + a[3]) * z + a[4];
        // Durand–Kerner
        let seed = Complex64::new(0.4, 0.9);
        let scale = a.iter().skip(1).map(|v| v.abs()).fold(1.0f64, f64::max);
        let mut z: [Complex64; 4] = std::array::from_fn(|k| seed.powu(k as u32) * scale);
        for _ in 0..2000 {
            let mut delta = 0.0f64;
            for i in 0..4 {
                let mut den = Complex64::new(1.0, 0.0);
                for j in 0..4 {
                    if i != j {
                        den *= z[i] - z[j];
                    }
                }
                if den.norm() == 0.0 {
                    return None;
                }
                let step = p(z[i]) / den;
                z[i] -= step;
                delta = delta.max(step.norm() / z[i].norm().max(1.0));
            }
            if delta < 1e-15 {
                break;
            }
        }
        z.iter().all(|r| r.re.is_finite() && r.im.is_finite()).then_some(z)
    }

    /// SL2(Z)-equivalent quartic with small coefficients, from reducing the
    /// positive definite covariant Σ |s − r t|² / |g'(r)| over the roots r.
    /// Returns (g∘M, M).
    pub fn reduce(&self) -> (Quartic, Mat2) {
        // move a root away from infinity first
        let mut shift = IDENTITY;
        let mut g = self.clone();
        let mut k = 0;
        while g.c[0].is_zero() {
            k += 1;
            shift = [[1, 0], [k, 1]];
            g = self.transform(&shift);
            if k > 10 {
                return (self.clone(), IDENTITY);
            }
        }
        let Some(roots) = g.roots() else {
            return (g, shift);
        };
        let c: Vec<f64> = g.c.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect();
        let dg = |z: Complex64| ((z * (4.0 * c[0]) + 3.0 * c[1]) * z + 2.0 * c[2]) * z + c[3];
        let (mut qa, mut qb, mut qc) = (0.0, 0.0, 0.0);
        for r in roots {
            let w = 1.0 / dg(r).norm();
            if !w.is_finite() {
                return (g, shift);
            }
            qa += w;
            qb += -2.0 * w * r.re;
            qc += w * r.norm_sqr();
        }
        let mut m = IDENTITY;
        for _ in 0..1000 {
            let k = (-qb / (2.0 * qa)).round();
            if !k.is_finite() || k.abs() > 1e15 {
                break;
            }
            qc += qb * k + qa * k * k;
            qb += 2.0 * qa * k;
            let ki = k as i128;
            m = [[m[0][0], m[0][0] * ki + m[0][1]], [m[1][0], m[1][0] * ki + m[1][1]]];
            if qa > qc * (1.0 + 1e-12) {
                std::mem::swap(&mut qa, &mut qc);
                qb = -qb;
                m = [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]];
            } else {
                break;
            }
        }
        let total = mat_mul(&shift, &m);
        (self.transform(&total), total)
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Quadratic-residue table modulo m.
struct SquareTable {
    m: u64,
    bits: Vec<u64>,
}

impl SquareTable {
    fn new(m: u64) -> Self {
        let mut bits = vec![0u64; (m as usize).div_ceil(64)];
        for x in 0..m {
            let r = (x * x % m) as usize;
            bits[r / 64] |= 1 << (r % 64);
        }
        SquareTable { m, bits }
    }
    #[inline]
    fn has(&self, r: u64) -> bool {
        self.bits[r as usize / 64] >> (r % 64) & 1 == 1
    }
}

fn tables() -> &'static [SquareTable; 2] {
    static T: std::sync::OnceLock<[SquareTable; 2]> = std::sync::OnceLock::new();
    T.get_or_init(|| [SquareTable::new(64 * 63 * 65 * 11), SquareTable::new(17 * 19 * 23 * 29 * 31)])
}

/// First coprime (s, t) with 0 ≤ t ≤ h, |s| ≤ h (ordered by t, then s) at
/// which g is a perfect square and `accept` holds, with the square root.
pub fn search_square(
    g: &Quartic,
    h: i64,
    accept: impl Fn(i64, i64) -> bool,
) -> Option<(i64, i64, BigInt)> {
    let tabs = tables();
    let residues: Vec<[u64; 5]> = tabs
        .iter()
        .map(|tb| {
            let m = BigInt::from(tb.m);
            std::array::from_fn(|i| g.c[i].mod_floor(&m).to_u64().expect("residue"))
        })
        .collect();
    let check = |s: i64, t: i64| -> Option<BigInt> {
        if s.gcd(&t) != 1 || !accept(s, t) {
            return None;
        }
        let v = g.eval(&BigInt::from(s), &BigInt::from(t));
        if v.is_negative() {
            return None;
        }
        arith::exact_sqrt_big(&v)
    };
    if let Some(r) = check(1, 0) {
        return Some((1, 0, r));
    }
    for t in 1..=h {
        let mut ct = [[0u64; 5]; 2];
        for (k, tb) in tabs.iter().enumerate() {
            let m = tb.m;
            let tm = t as u64 % m;
            let mut tp = 1u64;
            for i in 0..5 {
                ct[k][i] = residues[k][i] * tp % m;
                tp = tp * tm % m;
            }
        }
        for s in -h..=h {
            let mut pass = true;
            for (k, tb) in tabs.iter().enumerate() {
                let m = tb.m;
                let sm = s.rem_euclid(m as i64) as u64;
                let c = &ct[k];
                let v = ((((c[0] * sm + c[1]) % m * sm + c[2]) % m * sm + c[3]) % m * sm + c[4]) % m;
                if !tb.has(v) {
                    pass = false;
                    break;
                }
            }
            if pass {
                if let Some(r) = check(s, t) {
                    return Some((s, t, r));
                }
            }
        }
    }
    None
}
