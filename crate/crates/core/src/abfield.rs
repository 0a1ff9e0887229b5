//! Abelian number fields as groups of Dirichlet characters.
//!
//! A field F is the group X of characters mod m that cut it out. Its Galois
//! group G is the image of (Z/m)^* under u ↦ (χ_1(u), ..., χ_r(u)) for a
//! generating set χ_j of X, so |G| = |X| and subgroups of G come from sets
//! of units.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::dirichlet::{
    is_fundamental_discriminant, primitive_characters_of_order, CharError,
    DirichletCharacter, UnitGroup,
};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("no admissible character with conductor up to {bound} (group reached order {reached})")]
    Exhausted { bound: u64, reached: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid field description: {0}")]
    Invalid(String),
}

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Infinity),
            t => t
                .parse::<u64>()
                .ok()
                .filter(|&p| arith::is_prime_u64(p))
                .map(Place::Prime)
                .ok_or_else(|| FieldError::Invalid(format!("bad place {t:?}"))),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Splitting type (e, f, g) of a place in F.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitData {
    pub e: u64,
    pub f: u64,
    pub g: u64,
}

/// An abelian extension of Q.
#[derive(Clone, Debug)]
pub struct AbelianField {
    modulus: u64,
    /// generators of X, all mod `modulus`
    gens: Vec<DirichletCharacter>,
    /// the whole of X
    chars: Vec<DirichletCharacter>,
}

/// Element of G as values on the generators: χ_j(g) = e^(2πi k_j / n_j).
type GElem = Vec<u64>;

impl AbelianField {
    /// Field cut out by the group generated by `chars`, all induced to the
    /// lcm of their moduli.
    pub fn from_characters(chars: &[DirichletCharacter]) -> Result<Self, FieldError> {
        let m = chars.iter().fold(1u64, |acc, c| acc.lcm(&c.modulus()));
        Self::with_modulus(m, chars)
    }

    pub fn with_modulus(m: u64, chars: &[DirichletCharacter]) -> Result<Self, FieldError> {
        let gens: Vec<DirichletCharacter> = chars
            .iter()
            .map(|c| c.induce(m))
            .collect::<Result<_, _>>()?;
        let chars = closure(m, &gens);
        Ok(AbelianField {
            modulus: m,
            gens,
            chars,
        })
    }

    pub fn rationals() -> Self {
        Self::from_characters(&[]).expect("empty list")
    }

    /// Multiquadratic field from fundamental discriminants.
    pub fn multiquadratic(discs: &[i64]) -> Result<Self, FieldError> {
        let chars = discs
            .iter()
            .map(|&d| DirichletCharacter::kronecker(d))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_characters(&chars)
    }

    /// The subfield of Q(ζ_m) fixed by the n-th powers: X is the n-torsion of
    /// the character group. For m = 13·103, n = 3 and m = 11·241, n = 5 this
    /// is the unique subfield of degree 9 resp. 25, since the 3-part resp.
    /// 5-part of (Z/m)^* is (Z/3)^2 resp. (Z/5)^2.
    pub fn torsion_subfield(m: u64, n: u64) -> Result<Self, FieldError> {
        let g = UnitGroup::cached(m);
        let gens: Vec<DirichletCharacter> = g
            .factors
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let mut e = vec![0; g.factors.len()];
                e[j] = f.order / f.order.gcd(&n);
                DirichletCharacter::from_group(g.clone(), e)
            })
            .collect::<Result<_, _>>()?;
        Self::with_modulus(m, &gens)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn degree(&self) -> u64 {
        self.chars.len() as u64
    }
    pub fn generators(&self) -> &[DirichletCharacter] {
        &self.gens
    }
    /// All characters of F, trivial character first.
    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.chars
    }

    /// Image of a unit in G.
    fn image(&self, u: i128) -> GElem {
        let logs = self.group().log(u).expect("unit");
        self.gens.iter().map(|c| c.eval_logs(&logs)).collect()
    }

    fn group(&self) -> std::sync::Arc<UnitGroup> {
        UnitGroup::cached(self.modulus)
    }

    fn gen_orders(&self) -> Vec<u64> {
        self.gens.iter().map(|c| c.order()).collect()
    }

    fn add(&self, a: &GElem, b: &GElem) -> GElem {
        a.iter()
            .zip(b)
            .zip(self.gen_orders())
            .map(|((x, y), n)| (x + y) % n)
            .collect()
    }

    fn identity(&self) -> GElem {
        vec![0; self.gens.len()]
    }

    fn elem_order(&self, a: &GElem) -> u64 {
        a.iter()
            .zip(self.gen_orders())
            .fold(1, |acc, (&k, n)| acc.lcm(&(n / k.gcd(&n))))
    }

    /// Subgroup of G generated by the images of the given units.
    fn subgroup(&self, units: &[i128]) -> HashSet<GElem> {
        let gens: Vec<GElem> = units.iter().map(|&u| self.image(u)).collect();
        let mut seen: HashSet<GElem> = HashSet::new();
        let mut queue = VecDeque::from([self.identity()]);
        seen.insert(self.identity());
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// All of G.
    fn elements(&self) -> HashSet<GElem> {
        let gens: Vec<i128> = self.group().generators().iter().map(|&g| g as i128).collect();
        self.subgroup(&gens)
    }

    /// Units generating the inertia group at p (empty if p ∤ m).
    pub fn inertia_units(&self, p: u64) -> Vec<i128> {
        self.group()
            .factors
            .iter()
            .filter(|f| f.p == p)
            .map(|f| f.generator as i128)
            .collect()
    }

    /// A unit whose image is a Frobenius at p: ≡ p modulo the prime-to-p part
    /// of m and ≡ 1 modulo the p-part.
    pub fn frobenius_unit(&self, p: u64) -> i128 {
        let m = self.modulus;
        let mut pk = 1;
        while m.is_multiple_of(pk * p) {
            pk *= p;
        }
        let rest = m / pk;
        if rest == 1 {
            return 1;
        }
        let r = p % rest;
        // x ≡ r mod rest, x ≡ 1 mod pk
        let inv = arith::invmod(rest as i128, pk as i128).unwrap_or(0);
        let t = ((1 - r as i128).rem_euclid(pk as i128) * inv).rem_euclid(pk as i128);
        (r as i128 + rest as i128 * t).rem_euclid(m as i128)
    }

    /// Units generating the decomposition group at a place.
    pub fn decomposition_units(&self, place: Place) -> Vec<i128> {
        match place {
            Place::Infinity => vec![-1],
            Place::Prime(p) => {
                let mut u = self.inertia_units(p);
                u.push(self.frobenius_unit(p));
                u
            }
        }
    }

    /// (e, f, g) of a place.
    pub fn split(&self, place: Place) -> SplitData {
        let n = self.degree();
        match place {
            Place::Infinity => {
                let e = self.elem_order(&self.image(-1));
                SplitData { e, f: 1, g: n / e }
            }
            Place::Prime(p) => {
                let inertia = self.subgroup(&self.inertia_units(p));
                let e = inertia.len() as u64;
                let frob = self.image(self.frobenius_unit(p));
                let mut x = frob.clone();
                let mut f = 1;
                while !inertia.contains(&x) {
                    x = self.add(&x, &frob);
                    f += 1;
                }
                SplitData { e, f, g: n / (e * f) }
            }
        }
    }

    /// Primes that ramify in F.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let cond = self.chars.iter().fold(1u64, |acc, c| acc.lcm(&c.conductor()));
        if cond == 1 {
            return Vec::new();
        }
        arith::prime_divisors(cond as i64)
    }

    /// Distinct cyclic subgroups of G as (generator, order).
    fn cyclic_subgroups(&self) -> Vec<(GElem, u64)> {
        let mut seen: HashSet<BTreeSet<GElem>> = HashSet::new();
        let mut out = Vec::new();
        let mut elems: Vec<GElem> = self.elements().into_iter().collect();
        elems.sort();
        for g in elems {
            let ord = self.elem_order(&g);
            let mut sub = BTreeSet::new();
            let mut x = self.identity();
            for _ in 0..ord {
                sub.insert(x.clone());
                x = self.add(&x, &g);
            }
            if seen.insert(sub) {
                out.push((g, ord));
            }
        }
        out
    }

    /// Certificate that every place of Q splits into a multiple of n places.
    pub fn certify_split_multiple(&self, n: u64) -> SplittingCertificate {
        let mut entries = Vec::new();
        for p in self.ramified_primes() {
            entries.push(PlaceEntry {
                place: Place::Prime(p),
                split: self.split(Place::Prime(p)),
            });
        }
        entries.push(PlaceEntry {
            place: Place::Infinity,
            split: self.split(Place::Infinity),
        });
        let deg = self.degree();
        let cyclic: Vec<CyclicWitness> = self
            .cyclic_subgroups()
            .into_iter()
            .map(|(generator, order)| CyclicWitness {
                generator,
                order,
                index: deg / order,
            })
            .collect();
        let verdict = entries.iter().all(|e| e.split.g % n == 0)
            && cyclic.iter().all(|c| c.index % n == 0);
        SplittingCertificate {
            modulus: self.modulus,
            generators: self.gens.iter().map(|c| c.exponents().to_vec()).collect(),
            degree: deg,
            n,
            entries,
            cyclic_subgroups: cyclic,
            verdict,
        }
    }

    /// Fundamental discriminants of the quadratic subfields, by |D|.
    pub fn quadratic_subfield_discs(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self
            .chars
            .iter()
            .filter(|c| c.order() == 2)
            .map(|c| {
                let f = c.conductor() as i64;
                if c.is_even() {
                    f
                } else {
                    -f
                }
            })
            .collect();
        out.sort_by_key(|d| (d.unsigned_abs(), *d < 0));
        out
    }

    /// Subfield fixed by the subgroup generated by the images of `units`.
    pub fn fixed_subfield(&self, units: &[i128]) -> Self {
        let kept: Vec<DirichletCharacter> = self
            .chars
            .iter()
            .filter(|c| units.iter().all(|&u| c.eval(u) == Some(0)))
            .cloned()
            .collect();
        let gens = minimal_generators(self.modulus, &kept);
        AbelianField::with_modulus(self.modulus, &gens).expect("same modulus")
    }

    /// Whether χ (of any modulus) belongs to X.
    pub fn contains(&self, chi: &DirichletCharacter) -> bool {
        let p = chi.primitive();
        self.chars.iter().any(|c| c.primitive() == p)
    }

    pub fn to_description(&self) -> FieldDescription {
        FieldDescription {
            modulus: self.modulus,
            generators: self.gens.iter().map(|c| c.exponents().to_vec()).collect(),
            discriminants: None,
        }
    }

    pub fn from_description(d: &FieldDescription) -> Result<Self, FieldError> {
        if let Some(discs) = &d.discriminants {
            if let Some(&bad) = discs.iter().find(|&&x| !is_fundamental_discriminant(x)) {
                return Err(FieldError::Invalid(format!(
                    "{bad} is not a fundamental discriminant"
                )));
            }
            let f = Self::multiquadratic(discs)?;
            return if d.modulus == 0 || d.modulus == f.modulus {
                Ok(f)
            } else {
                let chars = f.gens.clone();
                Self::with_modulus(d.modulus, &chars)
            };
        }
        if d.modulus == 0 {
            return Err(FieldError::Invalid("modulus must be positive".into()));
        }
        let chars = d
            .generators
            .iter()
            .map(|e| DirichletCharacter::new(d.modulus, e.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::with_modulus(d.modulus, &chars)
    }
}

impl fmt::Display for AbelianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() > 1 && self.chars.iter().all(|c| c.order() <= 2) {
            let basis = basis_discs(&self.quadratic_subfield_discs());
            let roots: Vec<String> = basis.iter().map(|d| format!("sqrt({d})")).collect();
            return write!(f, "Q({})", roots.join(","));
        }
        write!(f, "F[m={}, degree {}]", self.modulus, self.degree())
    }
}

/// A multiplicatively independent subset of discriminants spanning the list.
fn basis_discs(discs: &[i64]) -> Vec<i64> {
    let mut span: HashSet<i64> = HashSet::from([1]);
    let mut basis = Vec::new();
    for &d in discs {
        if span.contains(&d) {
            continue;
        }
        basis.push(d);
        let new: Vec<i64> = span
            .iter()
            .map(|&s| {
                let prod = s as i128 * d as i128;
                let sc = arith::square_class(prod).expect("nonzero");
                sc.discriminant
            })
            .collect();
        span.extend(new);
    }
    basis
}

fn closure(m: u64, gens: &[DirichletCharacter]) -> Vec<DirichletCharacter> {
    let one = DirichletCharacter::trivial(m);
    let mut seen: HashSet<DirichletCharacter> = HashSet::from([one.clone()]);
    let mut out = vec![one.clone()];
    let mut queue = VecDeque::from([one]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g).expect("same modulus");
            if seen.insert(y.clone()) {
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    out
}

/// Greedy generating set of the group spanned by `chars`.
fn minimal_generators(m: u64, chars: &[DirichletCharacter]) -> Vec<DirichletCharacter> {
    let mut gens: Vec<DirichletCharacter> = Vec::new();
    let mut span: HashSet<DirichletCharacter> = HashSet::from([DirichletCharacter::trivial(m)]);
    let mut sorted = chars.to_vec();
    sorted.sort_by_key(|c| std::cmp::Reverse(c.order()));
    for c in sorted {
        if !span.contains(&c) {
            gens.push(c);
            span = closure(m, &gens).into_iter().collect();
        }
    }
    gens
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub place: Place,
    #[serde(flatten)]
    pub split: SplitData,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicWitness {
    /// values of the field generators on a generator of the subgroup
    pub generator: Vec<u64>,
    pub order: u64,
    pub index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingCertificate {
    pub modulus: u64,
    pub generators: Vec<Vec<u64>>,
    pub degree: u64,
    pub n: u64,
    pub entries: Vec<PlaceEntry>,
    pub cyclic_subgroups: Vec<CyclicWitness>,
    pub verdict: bool,
}

/// Field description as read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescription {
    #[serde(default)]
    pub modulus: u64,
    #[serde(default)]
    pub generators: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminants: Option<Vec<i64>>,
}

// ---------------------------------------------------------------------------
// density construction

/// A set of characters to avoid. Queries are made with primitive characters.
pub trait AvoidSet {
    fn contains(&self, chi: &DirichletCharacter) -> bool;
}

/// Explicit finite set, closed under powers prime to the order.
#[derive(Clone, Debug, Default)]
pub struct ExplicitAvoid {
    set: HashSet<DirichletCharacter>,
}

impl ExplicitAvoid {
    pub fn new<'a>(chars: impl IntoIterator<Item = &'a DirichletCharacter>) -> Self {
        let mut set = HashSet::new();
        for c in chars {
            let p = c.primitive();
            let n = p.order();
            for k in 1..n.max(2) {
                if k.gcd(&n) == 1 {
                    set.insert(p.pow(k));
                }
            }
        }
        ExplicitAvoid { set }
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

impl AvoidSet for ExplicitAvoid {
    fn contains(&self, chi: &DirichletCharacter) -> bool {
        self.set.contains(&chi.primitive())
    }
}

/// Membership decided lazily by a predicate, memoized per power class.
pub struct PredicateAvoid<F: Fn(&DirichletCharacter) -> bool> {
    pred: F,
    memo: Mutex<HashMap<DirichletCharacter, bool>>,
}

impl<F: Fn(&DirichletCharacter) -> bool> PredicateAvoid<F> {
    pub fn new(pred: F) -> Self {
        PredicateAvoid {
            pred,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Number of distinct predicate evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }
}

impl<F: Fn(&DirichletCharacter) -> bool> AvoidSet for PredicateAvoid<F> {
    fn contains(&self, chi: &DirichletCharacter) -> bool {
        let p = chi.primitive();
        // canonical representative of the power class: least exponent vector
        let n = p.order();
        let rep = (1..n.max(2))
            .filter(|k| k.gcd(&n) == 1)
            .map(|k| p.pow(k))
            .min_by(|a, b| a.exponents().cmp(b.exponents()))
            .unwrap_or(p);
        if let Some(&v) = self.memo.lock().expect("memo poisoned").get(&rep) {
            return v;
        }
        let v = (self.pred)(&rep);
        self.memo.lock().expect("memo poisoned").insert(rep, v);
        v
    }
}

/// A field with group (Z/p)^d none of whose nontrivial characters lies in
/// `avoid`, in which every place of `force_split` splits completely. The
/// search is greedy over primitive order-p characters ordered by
/// (conductor, exponent vector).
pub fn density_construct(
    p: u64,
    d: u32,
    avoid: &dyn AvoidSet,
    force_split: &[Place],
    conductor_bound: u64,
) -> Result<AbelianField, FieldError> {
    if !arith::is_prime_u64(p) {
        return Err(FieldError::NotPrime(p));
    }
    let mut chosen: Vec<DirichletCharacter> = Vec::new();
    // X_{i-1} as primitive characters
    let mut current: Vec<DirichletCharacter> = vec![DirichletCharacter::trivial(1)];
    let candidates = primitive_characters_of_order(p, 1, conductor_bound);
    let mut it = candidates.into_iter();
    while chosen.len() < d as usize {
        let Some(chi) = it.next() else {
            return Err(FieldError::Exhausted {
                bound: conductor_bound,
                reached: current.len() as u64,
            });
        };
        if !splits_at(&chi, force_split) {
            continue;
        }
        if current.contains(&chi) {
            continue;
        }
        // every new character φ·χ^a must avoid S
        let mut new_chars = Vec::new();
        let mut ok = true;
        'outer: for a in 1..p {
            let ca = chi.pow(a);
            for psi in &current {
                let phi = psi.mul(&ca)?.primitive();
                if avoid.contains(&phi) {
                    ok = false;
                    break 'outer;
                }
                new_chars.push(phi);
            }
        }
        if !ok {
            continue;
        }
        current.extend(new_chars);
        chosen.push(chi);
    }
    AbelianField::from_characters(&chosen)
}

fn splits_at(chi: &DirichletCharacter, places: &[Place]) -> bool {
    places.iter().all(|pl| match *pl {
        Place::Infinity => chi.is_even(),
        Place::Prime(l) => chi.eval(l as i128) == Some(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::characters_of_order;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f3() -> AbelianField {
        AbelianField::torsion_subfield(13 * 103, 3).unwrap()
    }
    fn f4() -> AbelianField {
        AbelianField::multiquadratic(&[-4, 41, 73]).unwrap()
    }
    fn f5() -> AbelianField {
        AbelianField::torsion_subfield(11 * 241, 5).unwrap()
    }

    #[test]
    fn construction_examples() {
        let a = primitive_characters_of_order(3, 13, 13)[0].clone();
        let b = primitive_characters_of_order(3, 103, 103)[0].clone();
        let f = AbelianField::from_characters(&[a, b]).unwrap();
        assert_eq!(f.degree(), 9);
        assert_eq!(f.modulus(), 1339);
        assert_eq!(f3().degree(), 9);
        assert_eq!(f4().degree(), 8);
        assert_eq!(f5().degree(), 25);
        assert_eq!(AbelianField::rationals().degree(), 1);
        assert_eq!(f4().to_string(), "Q(sqrt(-4),sqrt(41),sqrt(73))");
    }

    #[test]
    fn degree_matches_unit_index() {
        for f in [f3(), f4(), f5()] {
            // H = ∩ ker χ, [units : H] = |X|
            let g = UnitGroup::cached(f.modulus());
            let m = f.modulus();
            let h = (1..m)
                .filter(|a| a.gcd(&m) == 1)
                .filter(|&a| f.characters().iter().all(|c| c.eval(a as i128) == Some(0)))
                .count() as u64;
            assert_eq!(g.order() / h, f.degree());
            assert_eq!(f.elements().len() as u64, f.degree());
        }
    }

    #[test]
    fn split_examples() {
        let f4 = f4();
        assert_eq!(f4.split(Place::Prime(7)), SplitData { e: 1, f: 2, g: 4 });
        assert_eq!(f4.split(Place::Prime(2)), SplitData { e: 2, f: 1, g: 4 });
        assert_eq!(f4.split(Place::Infinity), SplitData { e: 2, f: 1, g: 4 });
        assert_eq!(f3().split(Place::Prime(13)), SplitData { e: 3, f: 1, g: 3 });
    }

    #[test]
    fn certificates() {
        let c = f3().certify_split_multiple(3);
        assert!(c.verdict);
        assert!(c.entries.iter().all(|e| e.split.g == 3 || e.split.g == 9));
        assert!(f4().certify_split_multiple(4).verdict);
        assert!(f5().certify_split_multiple(5).verdict);
        let qi = AbelianField::multiquadratic(&[-4]).unwrap();
        let c = qi.certify_split_multiple(2);
        assert!(!c.verdict);
        assert_eq!(c.entries[0].place, Place::Prime(2));
        assert_eq!(c.entries[0].split.g, 1);
        let json = serde_json::to_string(&c).unwrap();
        let back: SplittingCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn quadratic_subfields() {
        assert_eq!(
            f4().quadratic_subfield_discs(),
            vec![-4, 41, 73, -164, -292, 2993, -11972]
        );
        let f = AbelianField::multiquadratic(&[-4, 17]).unwrap();
        assert_eq!(f.quadratic_subfield_discs(), vec![-4, 17, -68]);
        assert!(f3().quadratic_subfield_discs().is_empty());
    }

    fn test_fields() -> Vec<AbelianField> {
        vec![
            f3(),
            f4(),
            f5(),
            AbelianField::multiquadratic(&[-4, 17]).unwrap(),
            AbelianField::multiquadratic(&[-4, 8, 5, -3, 13]).unwrap(),
            AbelianField::torsion_subfield(7 * 9, 3).unwrap(),
            AbelianField::from_characters(&characters_of_order(16 * 5, 4)).unwrap(),
            AbelianField::from_characters(&characters_of_order(7, 6)).unwrap(),
        ]
    }

    #[test]
    fn efg_multiplies_to_degree() {
        for f in test_fields() {
            assert!(f.degree() <= 32);
            let mut places: Vec<Place> = arith::primes_up_to(300).into_iter().map(Place::Prime).collect();
            places.push(Place::Infinity);
            for pl in places {
                let s = f.split(pl);
                assert_eq!(s.e * s.f * s.g, f.degree(), "{f} at {pl}");
            }
        }
    }

    #[test]
    fn unramified_splitting_matches_cyclic_subgroups() {
        for f in test_fields() {
            let m = f.modulus();
            let h: Vec<u64> = (1..m)
                .filter(|a| a.gcd(&m) == 1)
                .filter(|&a| f.characters().iter().all(|c| c.eval(a as i128) == Some(0)))
                .collect();
            let hset: HashSet<u64> = h.iter().copied().collect();
            let mut realized = HashSet::new();
            for p in arith::primes_up_to(1000) {
                if m % p == 0 {
                    continue;
                }
                let s = f.split(Place::Prime(p));
                assert_eq!(s.e, 1);
                // order of p·H in units/H
                let mut x = p % m;
                let mut ord = 1;
                while !hset.contains(&x) {
                    x = x * (p % m) % m;
                    ord += 1;
                }
                assert_eq!(s.f, ord, "{f} p={p}");
                realized.insert((s.f, s.g));
            }
            let predicted: HashSet<(u64, u64)> = f
                .cyclic_subgroups()
                .into_iter()
                .map(|(_, o)| (o, f.degree() / o))
                .collect();
            assert_eq!(realized, predicted, "{f}");
        }
    }

    #[test]
    fn certificate_implies_local_sums_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (f, n) in [(f3(), 3u64), (f4(), 4), (f5(), 5)] {
            assert!(f.certify_split_multiple(n).verdict);
            let mut places: Vec<Place> = arith::primes_up_to(500).into_iter().map(Place::Prime).collect();
            places.push(Place::Infinity);
            let splits: Vec<(Place, SplitData)> = places.iter().map(|&p| (p, f.split(p))).collect();
            for _ in 0..100 {
                // λ on (place, e, f), supported on a random finite set
                let mut total = 0u64;
                for (pl, s) in &splits {
                    if rng.gen_bool(0.3) {
                        let lambda: u64 = rng.gen_range(0..n);
                        let _ = pl;
                        total += s.g * lambda;
                    }
                }
                assert_eq!(total % n, 0);
            }
        }
    }

    #[test]
    fn density_examples() {
        let none = ExplicitAvoid::default();
        let f = density_construct(3, 1, &none, &[], 100).unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.modulus(), 7);
        let f = density_construct(3, 2, &none, &[], 10_000).unwrap();
        assert_eq!(f.degree(), 9);
        assert_eq!(f.modulus(), 63);
        let cert = f.certify_split_multiple(3);
        // generic places split into 3 or 9, but 7 is not a cube mod 9, so the
        // ramified prime 7 has a single place above it
        assert!(cert.cyclic_subgroups.iter().all(|c| c.index % 3 == 0));
        assert_eq!(f.split(Place::Prime(7)), SplitData { e: 3, f: 3, g: 1 });
        assert!(!cert.verdict);
        let forced = [Place::Prime(2), Place::Prime(5), Place::Infinity];
        let f = density_construct(2, 2, &none, &forced, 10_000).unwrap();
        assert_eq!(f.degree(), 4);
        assert_eq!(f.quadratic_subfield_discs(), vec![41, 89, 3649]);
        for pl in forced {
            let s = f.split(pl);
            assert_eq!((s.e, s.f), (1, 1), "{pl}");
        }
        assert!(matches!(
            density_construct(3, 3, &none, &[], 10),
            Err(FieldError::Exhausted { bound: 10, .. })
        ));
    }

    #[test]
    fn density_avoids_characters() {
        // forbid the first two cubic characters and their products
        let cubic = primitive_characters_of_order(3, 1, 20);
        let avoid = ExplicitAvoid::new(&[cubic[0].clone(), cubic[2].clone()]);
        let f = density_construct(3, 2, &avoid, &[], 1000).unwrap();
        assert_eq!(f.degree(), 9);
        for c in f.characters().iter().filter(|c| !c.is_trivial()) {
            assert!(!avoid.contains(c), "{c}");
            assert!(!avoid.contains(&c.pow(2)));
        }
        let lazy = PredicateAvoid::new(|c: &DirichletCharacter| c.conductor() == 7);
        let f = density_construct(3, 1, &lazy, &[], 100).unwrap();
        assert_eq!(f.modulus(), 9);
        assert!(lazy.evaluations() >= 1);
    }

    #[test]
    fn fixed_subfields_and_descriptions() {
        let f = f4();
        let d = f.fixed_subfield(&f.decomposition_units(Place::Prime(7)));
        // 7 is inert in exactly the subfields where Frob_7 ≠ 1
        assert_eq!(d.degree(), 4);
        assert_eq!(d.split(Place::Prime(7)).g, 4);
        let desc = f.to_description();
        let back = AbelianField::from_description(&desc).unwrap();
        assert_eq!(back.quadratic_subfield_discs(), f.quadratic_subfield_discs());
        let by_disc = FieldDescription { modulus: 0, generators: vec![], discriminants: Some(vec![-4, 41, 73]) };
        assert_eq!(AbelianField::from_description(&by_disc).unwrap().degree(), 8);
        assert!("inf".parse::<Place>().is_ok());
        assert!("4".parse::<Place>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_multiquadratic_fields(mask in 1u32..64) {
            let pool = [-4i64, 5, -7, 8, 13, -3];
            let discs: Vec<i64> = pool.iter().enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect();
            let f = AbelianField::multiquadratic(&discs).unwrap();
            prop_assert_eq!(f.degree(), 1 << discs.len());
            prop_assert_eq!(f.quadratic_subfield_discs().len() as u64, f.degree() - 1);
            for p in [2u64, 3, 5, 7, 11, 13, 17] {
                let s = f.split(Place::Prime(p));
                prop_assert_eq!(s.e * s.f * s.g, f.degree());
            }
        }
    }
}
