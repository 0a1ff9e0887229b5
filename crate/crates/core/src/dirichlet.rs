//! Dirichlet characters with exact values.
//!
//! A character mod m is an exponent vector on the cyclic generators of
//! (Z/m)^*. Values are kept as integers k mod the character order n,
//! meaning e^(2πik/n); conversion to floating point happens only at the
//! numeric boundary.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, powmod_u64};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("character mod {modulus} is not primitive (conductor {conductor})")]
    NotPrimitive { modulus: u64, conductor: u64 },
    #[error("modulus {0} is not a multiple of {1}")]
    BadInduction(u64, u64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("exponent vector has {got} entries, unit group has {want}")]
    Shape { got: usize, want: usize },
}

/// One cyclic factor of (Z/m)^*, living on a prime-power component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicFactor {
    pub p: u64,
    pub k: u32,
    /// generator modulo p^k
    pub local_gen: u64,
    /// CRT lift to m, congruent to 1 modulo the other prime powers
    pub generator: u64,
    pub order: u64,
    pub kind: FactorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    /// cyclic group mod an odd prime power
    Odd,
    /// the ±1 part at 2
    MinusOne,
    /// the ⟨5⟩ part at 2^k, k ≥ 3
    Five,
}

/// Cyclic decomposition of (Z/m)^*.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroup {
    pub modulus: u64,
    pub factors: Vec<CyclicFactor>,
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs = arith::prime_divisors((p - 1) as i64);
    (2..p)
        .find(|&g| qs.iter().all(|&q| powmod_u64(g, (p - 1) / q, p) != 1))
        .expect("primitive root exists")
}

fn crt_lift(residue: u64, pk: u64, m: u64) -> u64 {
    // x ≡ residue mod pk, x ≡ 1 mod m/pk
    let rest = m / pk;
    if rest == 1 {
        return residue % pk;
    }
    let inv = arith::invmod(rest as i128, pk as i128).expect("coprime") as u128;
    // x = 1 + rest * ((residue - 1) * inv mod pk)
    let t = (residue as i128 - 1).rem_euclid(pk as i128) as u128 * inv % pk as u128;
    ((1 + rest as u128 * t) % m as u128) as u64
}

impl UnitGroup {
    pub fn new(m: u64) -> UnitGroup {
        assert!(m >= 1, "modulus must be positive");
        let mut factors = Vec::new();
        if m > 1 {
            let f = arith::factor(m as i128).expect("nonzero");
            for &(p, k) in &f.factors {
                let p = p as u64;
                let pk = p.pow(k);
                if p == 2 {
                    if k >= 2 {
                        factors.push(CyclicFactor {
                            p,
                            k,
                            local_gen: pk - 1,
                            generator: crt_lift(pk - 1, pk, m),
                            order: 2,
                            kind: FactorKind::MinusOne,
                        });
                    }
                    if k >= 3 {
                        factors.push(CyclicFactor {
                            p,
                            k,
                            local_gen: 5,
                            generator: crt_lift(5, pk, m),
                            order: pk / 4,
                            kind: FactorKind::Five,
                        });
                    }
                } else {
                    let mut g = primitive_root_prime(p);
                    if k >= 2 && powmod_u64(g, p - 1, p * p) == 1 {
                        g += p;
                    }
                    factors.push(CyclicFactor {
                        p,
                        k,
                        local_gen: g,
                        generator: crt_lift(g, pk, m),
                        order: pk / p * (p - 1),
                        kind: FactorKind::Odd,
                    });
                }
            }
        }
        UnitGroup { modulus: m, factors }
    }

    /// Shared, cached instance.
    pub fn cached(m: u64) -> Arc<UnitGroup> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("unit group cache poisoned");
        guard
            .entry(m)
            .or_insert_with(|| Arc::new(UnitGroup::new(m)))
            .clone()
    }

    pub fn generators(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.generator).collect()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.order).collect()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|f| f.order).product()
    }

    /// Group exponent.
    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |acc, f| acc.lcm(&f.order))
    }

    /// Discrete logarithm vector of a unit, or None if gcd(a, m) > 1.
    pub fn log(&self, a: i128) -> Option<Vec<u64>> {
        let m = self.modulus;
        let a = a.rem_euclid(m as i128) as u64;
        if m > 1 && a.gcd(&m) != 1 {
            return None;
        }
        let mut out = Vec::with_capacity(self.factors.len());
        let mut i = 0;
        while i < self.factors.len() {
            let f = &self.factors[i];
            let pk = f.p.pow(f.k);
            let r = a % pk;
            match f.kind {
                FactorKind::Odd => {
                    out.push(dlog(f.local_gen, r, pk, f.order));
                    i += 1;
                }
                FactorKind::MinusOne => {
                    let neg = r % 4 == 3;
                    out.push(neg as u64);
                    if self.factors.get(i + 1).map(|g| g.kind) == Some(FactorKind::Five) {
                        let g = &self.factors[i + 1];
                        let r1 = if neg { pk - r } else { r };
                        out.push(dlog(5, r1, pk, g.order));
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                FactorKind::Five => unreachable!("⟨5⟩ factor always follows the ±1 factor"),
            }
        }
        Some(out)
    }

    /// Residue with the given log vector.
    pub fn exp(&self, logs: &[u64]) -> u64 {
        let m = self.modulus as u128;
        let mut x: u128 = 1 % m;
        for (f, &l) in self.factors.iter().zip(logs) {
            x = x * arith::powmod(f.generator as u128, l as u128, m) % m;
        }
        x as u64
    }
}

/// Pohlig–Hellman discrete log of `h` to base `g` in a cyclic group of
/// order `n` inside (Z/modulus)^*.
fn dlog(g: u64, h: u64, modulus: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let f = arith::factor(n as i128).expect("nonzero");
    let mut residues = Vec::new();
    for &(q, e) in &f.factors {
        let q = q as u64;
        let qe = q.pow(e);
        let cof = n / qe;
        let gq = powmod_u64(g, cof, modulus);
        let hq = powmod_u64(h, cof, modulus);
        // digits base q
        let gamma = powmod_u64(gq, qe / q, modulus); // order q
        let mut x = 0u64;
        let mut qi = 1u64;
        for i in 0..e {
            let ginv = powmod_u64(gq, qe - x % qe, modulus);
            let t = (hq as u128 * ginv as u128 % modulus as u128) as u64;
            let t = powmod_u64(t, qe / (qi * q), modulus);
            let d = bsgs(gamma, t, modulus, q);
            x += d * qi;
            if i + 1 < e {
                qi *= q;
            }
        }
        residues.push((x % qe, qe));
    }
    // CRT
    let mut x: i128 = 0;
    let mut md: i128 = 1;
    for (r, q) in residues {
        let q = q as i128;
        let inv = arith::invmod(md % q, q).unwrap_or(0);
        let t = ((r as i128 - x).rem_euclid(q) * inv).rem_euclid(q);
        x += md * t;
        md *= q;
    }
    x.rem_euclid(n as i128) as u64
}

fn bsgs(g: u64, h: u64, modulus: u64, n: u64) -> u64 {
    let mm = modulus as u128;
    if n <= 64 {
        let mut x = 1u128;
        for k in 0..n {
            if x == h as u128 {
                return k;
            }
            x = x * g as u128 % mm;
        }
        panic!("discrete log does not exist");
    }
    let s = (n as f64).sqrt().ceil() as u64;
    let mut table = HashMap::with_capacity(s as usize);
    let mut x = 1u128;
    for j in 0..s {
        table.entry(x as u64).or_insert(j);
        x = x * g as u128 % mm;
    }
    let ginv_s = powmod_u64(g, n - s % n, modulus) as u128;
    let mut y = h as u128;
    for i in 0..=s {
        if let Some(&j) = table.get(&(y as u64)) {
            return (i * s + j) % n;
        }
        y = y * ginv_s % mm;
    }
    panic!("discrete log does not exist");
}

/// A Dirichlet character given by exponents on the unit-group generators.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    exps: Vec<u64>,
    order: u64,
    conductor: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}
impl Eq for DirichletCharacter {}

impl std::hash::Hash for DirichletCharacter {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.group.modulus.hash(state);
        self.exps.hash(state);
    }
}

impl DirichletCharacter {
    pub fn new(modulus: u64, exps: Vec<u64>) -> Result<Self, CharError> {
        Self::from_group(UnitGroup::cached(modulus), exps)
    }

    pub fn from_group(group: Arc<UnitGroup>, mut exps: Vec<u64>) -> Result<Self, CharError> {
        if exps.len() != group.factors.len() {
            return Err(CharError::Shape {
                got: exps.len(),
                want: group.factors.len(),
            });
        }
        for (e, f) in exps.iter_mut().zip(&group.factors) {
            *e %= f.order;
        }
        let order = exps
            .iter()
            .zip(&group.factors)
            .fold(1u64, |acc, (&e, f)| acc.lcm(&(f.order / e.gcd(&f.order))));
        let conductor = conductor_of(&group, &exps);
        Ok(DirichletCharacter {
            group,
            exps,
            order,
            conductor,
        })
    }

    pub fn trivial(modulus: u64) -> Self {
        let g = UnitGroup::cached(modulus);
        let n = g.factors.len();
        Self::from_group(g, vec![0; n]).expect("shape matches")
    }

    /// Kronecker character (D/·) of a fundamental discriminant, modulus |D|.
    pub fn kronecker(d: i64) -> Result<Self, CharError> {
        if !is_fundamental_discriminant(d) {
            return Err(CharError::NotFundamental(d));
        }
        let m = d.unsigned_abs();
        let g = UnitGroup::cached(m);
        let exps = g
            .factors
            .iter()
            .map(|f| {
                if arith::kronecker(d, f.generator as i64) == 1 {
                    0
                } else {
                    f.order / 2
                }
            })
            .collect();
        Self::from_group(g, exps)
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }
    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }
    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn conductor(&self) -> u64 {
        self.conductor
    }
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    /// χ(a) as k with value e^(2πik/order), None when gcd(a, m) > 1.
    pub fn eval(&self, a: i128) -> Option<u64> {
        let logs = self.group.log(a)?;
        Some(self.eval_logs(&logs))
    }

    /// χ evaluated on a unit given by its log vector.
    pub fn eval_logs(&self, logs: &[u64]) -> u64 {
        let n = self.order as u128;
        let mut k: u128 = 0;
        for ((&e, &l), f) in self.exps.iter().zip(logs).zip(&self.group.factors) {
            // e·l/o_j as a fraction of n
            let o = f.order as u128;
            let num = (e as u128 * l as u128) % o;
            k = (k + num * n / o) % n;
        }
        k as u64
    }

    /// Complex value χ(a).
    pub fn value<T: Float + FloatConst>(&self, a: i128) -> Complex<T> {
        match self.eval(a) {
            None => Complex::new(T::zero(), T::zero()),
            Some(k) => root_of_unity(k, self.order),
        }
    }

    /// Real value for characters of order ≤ 2.
    pub fn value_real(&self, a: i128) -> i8 {
        debug_assert!(self.order <= 2);
        match self.eval(a) {
            None => 0,
            Some(0) => 1,
            Some(_) => -1,
        }
    }

    pub fn is_even(&self) -> bool {
        self.eval(-1) == Some(0)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CharError> {
        let m = self.modulus().lcm(&other.modulus());
        let a = self.induce(m)?;
        let b = other.induce(m)?;
        let exps = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
        Self::from_group(a.group.clone(), exps)
    }

    pub fn pow(&self, k: u64) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(&self.group.factors)
            .map(|(&e, f)| ((e as u128 * k as u128) % f.order as u128) as u64)
            .collect();
        Self::from_group(self.group.clone(), exps).expect("shape preserved")
    }

    pub fn conj(&self) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(&self.group.factors)
            .map(|(&e, f)| (f.order - e) % f.order)
            .collect();
        Self::from_group(self.group.clone(), exps).expect("shape preserved")
    }

    /// The same character viewed modulo a multiple of its modulus.
    pub fn induce(&self, m: u64) -> Result<Self, CharError> {
        if m == self.modulus() {
            return Ok(self.clone());
        }
        if !m.is_multiple_of(self.modulus()) {
            return Err(CharError::BadInduction(m, self.modulus()));
        }
        let g = UnitGroup::cached(m);
        let exps = g
            .factors
            .iter()
            .map(|f| {
                let k = self.eval(f.generator as i128).expect("generator is a unit");
                // χ(g_j) = e^(2πik/n); need exponent mod o_j
                let o = f.order as u128;
                let n = self.order as u128;
                debug_assert_eq!((k as u128 * o) % n, 0);
                ((k as u128 * o / n) % o) as u64
            })
            .collect();
        Self::from_group(g, exps)
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> Self {
        let f = self.conductor;
        if f == self.modulus() {
            return self.clone();
        }
        let g = UnitGroup::cached(f);
        let exps = g
            .factors
            .iter()
            .map(|fac| {
                // lift the generator mod f to a unit mod m
                let a = lift_unit(fac.generator, f, self.modulus());
                let k = self.eval(a as i128).expect("lift is a unit");
                let o = fac.order as u128;
                ((k as u128 * o / self.order as u128) % o) as u64
            })
            .collect();
        Self::from_group(g, exps).expect("shape matches")
    }

    /// Gauss sum Σ χ(a) e^(2πia/m); the character must be primitive.
    pub fn gauss_sum<T: Float + FloatConst>(&self) -> Result<Complex<T>, CharError> {
        if !self.is_primitive() {
            return Err(CharError::NotPrimitive {
                modulus: self.modulus(),
                conductor: self.conductor,
            });
        }
        let m = self.modulus();
        if m == 1 {
            return Ok(Complex::new(T::one(), T::zero()));
        }
        // χ(a)e(a/m) = e(k/n + a/m); combine over the common denominator
        let l = self.order.lcm(&m) as u128;
        let mut sum = Complex::new(T::zero(), T::zero());
        for a in 1..m {
            if let Some(k) = self.eval(a as i128) {
                let num = (k as u128 * (l / self.order as u128) + a as u128 * (l / m as u128)) % l;
                sum = sum + root_of_unity::<T>(num as u64, l as u64);
            }
        }
        Ok(sum)
    }
}

impl std::fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "chi_{}{:?}", self.modulus(), self.exps)
    }
}

/// e^(2πik/n), reduced to a small angle for accuracy.
pub fn root_of_unity<T: Float + FloatConst>(k: u64, n: u64) -> Complex<T> {
    let k = k % n;
    if k == 0 {
        return Complex::new(T::one(), T::zero());
    }
    let num = T::from(2 * k).expect("finite");
    let den = T::from(n).expect("finite");
    let theta = T::PI() * num / den;
    Complex::new(theta.cos(), theta.sin())
}

/// Smallest positive x ≡ a mod f with gcd(x, m) = 1.
fn lift_unit(a: u64, f: u64, m: u64) -> u64 {
    let mut x = a % f;
    if x == 0 {
        x = f;
    }
    while x.gcd(&m) != 1 {
        x += f;
    }
    x
}

fn conductor_of(group: &UnitGroup, exps: &[u64]) -> u64 {
    let mut cond = 1u64;
    let mut i = 0;
    while i < group.factors.len() {
        let f = &group.factors[i];
        let comp_order = |e: u64, o: u64| o / e.gcd(&o);
        match f.kind {
            FactorKind::Odd => {
                let o = comp_order(exps[i], f.order);
                if o > 1 {
                    let mut a = 0;
                    let mut t = o;
                    while t % f.p == 0 {
                        t /= f.p;
                        a += 1;
                    }
                    cond *= f.p.pow(a + 1);
                }
                i += 1;
            }
            FactorKind::MinusOne => {
                let neg = exps[i] != 0;
                let mut five_order = 1;
                if group.factors.get(i + 1).map(|g| g.kind) == Some(FactorKind::Five) {
                    five_order = comp_order(exps[i + 1], group.factors[i + 1].order);
                    i += 2;
                } else {
                    i += 1;
                }
                if five_order > 1 {
                    cond *= 4 * five_order;
                } else if neg {
                    cond *= 4;
                }
            }
            FactorKind::Five => unreachable!("⟨5⟩ factor always follows the ±1 factor"),
        }
    }
    cond
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    let squarefree = |x: i64| {
        arith::factor(x as i128)
            .map(|f| f.factors.iter().all(|&(_, e)| e == 1))
            .unwrap_or(false)
    };
    if r == 1 {
        squarefree(d)
    } else if r == 0 {
        let q = d / 4;
        matches!(q.rem_euclid(4), 2 | 3) && squarefree(q)
    } else {
        false
    }
}

/// Every character mod m, in lexicographic exponent order.
pub fn all_characters(m: u64) -> Vec<DirichletCharacter> {
    characters_with(m, |_| true)
}

fn characters_with(
    m: u64,
    keep: impl Fn(&DirichletCharacter) -> bool,
) -> Vec<DirichletCharacter> {
    let g = UnitGroup::cached(m);
    let orders = g.orders();
    let mut out = Vec::new();
    let mut e = vec![0u64; orders.len()];
    loop {
        let c = DirichletCharacter::from_group(g.clone(), e.clone()).expect("shape matches");
        if keep(&c) {
            out.push(c);
        }
        let mut j = orders.len();
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            e[j] += 1;
            if e[j] < orders[j] {
                break;
            }
            e[j] = 0;
        }
    }
}

/// All characters mod m of exact order n.
pub fn characters_of_order(m: u64, n: u64) -> Vec<DirichletCharacter> {
    let g = UnitGroup::cached(m);
    // exponent e_j must be a multiple of o_j / gcd(o_j, n)
    let steps: Vec<(u64, u64)> = g
        .factors
        .iter()
        .map(|f| {
            let d = f.order.gcd(&n);
            (f.order / d, d)
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0u64; steps.len()];
    loop {
        let exps = idx.iter().zip(&steps).map(|(&i, &(s, _))| i * s).collect();
        let c = DirichletCharacter::from_group(g.clone(), exps).expect("shape matches");
        if c.order() == n {
            out.push(c);
        }
        let mut j = steps.len();
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < steps[j].1 {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Primitive characters of exact order n with conductor in [lo, hi], ordered
/// by (conductor, exponent vector).
pub fn primitive_characters_of_order(n: u64, lo: u64, hi: u64) -> Vec<DirichletCharacter> {
    let mut out = Vec::new();
    for f in lo.max(1)..=hi {
        if !conductor_admits_order(f, n) {
            continue;
        }
        for c in characters_of_order(f, n) {
            if c.is_primitive() {
                out.push(c);
            }
        }
    }
    out
}

/// Cheap necessary condition for a primitive character of order n mod f.
fn conductor_admits_order(f: u64, n: u64) -> bool {
    if f == 1 {
        return n == 1;
    }
    let fac = arith::factor(f as i128).expect("nonzero");
    for &(p, k) in &fac.factors {
        let p = p as u64;
        if p == 2 {
            if k == 1 || (n % 2 == 1) {
                return false;
            }
            if k >= 3 && !n.is_multiple_of(1 << (k - 2)) {
                return false;
            }
        } else {
            if k >= 2 && !n.is_multiple_of(p.pow(k - 1)) {
                return false;
            }
            if k == 1 && (p - 1).gcd(&n) == 1 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c64(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn unit_group_examples() {
        let g = UnitGroup::new(7);
        assert_eq!(g.generators(), vec![3]);
        assert_eq!(g.orders(), vec![6]);
        let g = UnitGroup::new(8);
        assert_eq!(g.generators(), vec![7, 5]);
        assert_eq!(g.orders(), vec![2, 2]);
        let g = UnitGroup::new(1);
        assert!(g.factors.is_empty());
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn unit_group_orders_and_logs() {
        for m in 1..400u64 {
            let g = UnitGroup::new(m);
            assert_eq!(g.order(), arith::euler_phi(m), "m = {m}");
            for f in &g.factors {
                let pk = f.p.pow(f.k);
                // exact local order
                let mut x = 1u64;
                let mut ord = 0;
                loop {
                    x = x * f.local_gen % pk;
                    ord += 1;
                    if x == 1 {
                        break;
                    }
                }
                assert_eq!(ord, f.order, "m = {m}");
            }
            for a in 0..m {
                if let Some(l) = g.log(a as i128) {
                    assert_eq!(g.exp(&l), a % m.max(1), "m={m} a={a}");
                }
            }
        }
    }

    #[test]
    fn order_three_character_mod_7() {
        let chi = DirichletCharacter::new(7, vec![2]).unwrap();
        assert_eq!(chi.order(), 3);
        assert_eq!(chi.eval(3), Some(1));
        assert_eq!(chi.eval(2), Some(2));
        assert_eq!(chi.eval(1), Some(0));
        assert_eq!(chi.eval(14), None);
        assert_eq!(chi.conductor(), 7);
        let t = chi.gauss_sum::<f64>().unwrap();
        assert!((t.norm_sqr() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn conductor_examples() {
        assert_eq!(DirichletCharacter::trivial(12).conductor(), 1);
        let k = DirichletCharacter::kronecker(-4).unwrap();
        assert_eq!(k.conductor(), 4);
        let t = k.gauss_sum::<f64>().unwrap();
        assert!((t - c64(0.0, 2.0)).norm() < 1e-14);
        let one = DirichletCharacter::trivial(1);
        assert_eq!(one.gauss_sum::<f64>().unwrap(), c64(1.0, 0.0));
        assert!(DirichletCharacter::trivial(12).gauss_sum::<f64>().is_err());
    }

    #[test]
    fn kronecker_characters_match_symbol() {
        for d in [-4i64, -3, 5, 8, -8, 12, 41, 73, -164, -292, 2993, -11972, -7, 17, -68] {
            let c = DirichletCharacter::kronecker(d).unwrap();
            assert_eq!(c.conductor(), d.unsigned_abs(), "D = {d}");
            assert!(c.order() <= 2);
            for a in -200i64..200 {
                assert_eq!(c.value_real(a as i128), arith::kronecker(d, a), "D={d} a={a}");
            }
        }
        assert!(DirichletCharacter::kronecker(12 * 4).is_err());
    }

    #[test]
    fn order_counts() {
        assert_eq!(characters_of_order(7, 3).len(), 2);
        assert!(characters_of_order(8, 3).is_empty());
        assert_eq!(characters_of_order(13 * 103, 3).len(), 8);
    }

    #[test]
    fn orthogonality() {
        for m in 1..=50u64 {
            let chars = all_characters(m);
            assert_eq!(chars.len() as u64, arith::euler_phi(m));
            for x in &chars {
                for y in &chars {
                    let mut s = c64(0.0, 0.0);
                    for a in 0..m {
                        s += x.value::<f64>(a as i128) * y.value::<f64>(a as i128).conj();
                    }
                    let want = if x == y { arith::euler_phi(m) as f64 } else { 0.0 };
                    assert!((s - c64(want, 0.0)).norm() < 1e-10, "m={m} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn gauss_sums_of_primitive_characters() {
        for m in 1..=200u64 {
            for c in all_characters(m).into_iter().filter(|c| c.is_primitive()) {
                let t = c.gauss_sum::<f64>().unwrap();
                assert!((t.norm_sqr() - m as f64).abs() < 1e-8, "{c}");
            }
        }
    }

    #[test]
    fn conductor_is_minimal_period() {
        for m in 1..=120u64 {
            for c in all_characters(m) {
                let f = c.conductor();
                assert_eq!(m % f, 0);
                // trivial on units ≡ 1 mod f
                for a in (1..m).filter(|a| a % f == 1 % f) {
                    if a.gcd(&m) == 1 {
                        assert_eq!(c.eval(a as i128), Some(0), "{c} a={a}");
                    }
                }
                // not trivial on units ≡ 1 mod any proper divisor
                for d in (1..f).filter(|d| f % d == 0) {
                    let nontrivial = (1..m)
                        .filter(|a| a % d == 1 % d && a.gcd(&m) == 1)
                        .any(|a| c.eval(a as i128) != Some(0));
                    assert!(nontrivial, "{c} d={d}");
                }
                // primitive version re-evaluates identically
                let p = c.primitive();
                assert_eq!(p.modulus(), f);
                for a in 1..m {
                    if a.gcd(&m) == 1 {
                        let lhs = c.value::<f64>(a as i128);
                        let rhs = p.value::<f64>(a as i128);
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn odd_order_characters_are_even() {
        for m in 1..=150u64 {
            for c in all_characters(m).into_iter().filter(|c| c.order() % 2 == 1) {
                assert!(c.is_even(), "{c}");
            }
        }
    }

    #[test]
    fn primitive_enumeration_by_conductor() {
        let cubic = primitive_characters_of_order(3, 1, 20);
        let conds: Vec<u64> = cubic.iter().map(|c| c.conductor()).collect();
        assert_eq!(conds, vec![7, 7, 9, 9, 13, 13, 19, 19]);
        let quad = primitive_characters_of_order(2, 1, 13);
        let conds: Vec<u64> = quad.iter().map(|c| c.conductor()).collect();
        assert_eq!(conds, vec![3, 4, 5, 7, 8, 8, 11, 12, 13]);
    }

    proptest! {
        #[test]
        fn multiplicative(m in 1u64..300, seed in any::<u64>(), a in 1i64..10_000, b in 1i64..10_000) {
            let g = UnitGroup::cached(m);
            let exps: Vec<u64> = g.factors.iter().enumerate()
                .map(|(i, f)| seed.rotate_left(7 * i as u32) % f.order).collect();
            let c = DirichletCharacter::new(m, exps).unwrap();
            let ab = c.value::<f64>(a as i128 * b as i128);
            let prod = c.value::<f64>(a as i128) * c.value::<f64>(b as i128);
            prop_assert!((ab - prod).norm() < 1e-12);
            prop_assert_eq!(c.eval(a as i128).is_none(), (a as u64).gcd(&m) > 1 && m > 1);
        }

        #[test]
        fn product_conductor_divides_lcm(m1 in 1u64..80, m2 in 1u64..80, s1 in any::<u64>(), s2 in any::<u64>()) {
            let pick = |m: u64, s: u64| {
                let g = UnitGroup::cached(m);
                let exps: Vec<u64> = g.factors.iter().enumerate()
                    .map(|(i, f)| s.rotate_left(11 * i as u32) % f.order).collect();
                DirichletCharacter::new(m, exps).unwrap()
            };
            let x = pick(m1, s1);
            let y = pick(m2, s2);
            let xy = x.mul(&y).unwrap();
            prop_assert_eq!(x.conductor().lcm(&y.conductor()) % xy.conductor(), 0);
        }
    }
}
