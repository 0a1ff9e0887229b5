//! Complete 2-descent for elliptic curves over Q with full rational
//! 2-torsion, and ranks over multiquadratic fields.
//!
//! For y² = (x−e1)(x−e2)(x−e3) the map P ↦ (x − e1, x − e2) identifies
//! E(Q)/2E(Q) with the pairs (b1, b2) whose 2-covering
//!
//!   b1 z1² − b2 z2² = e2 − e1,   b1 z1² − b1b2 z3² = e3 − e1
//!
//! has a rational point. Upper bounds come from local solvability (the
//! 2-Selmer group) refined by the Cassels–Tate pairing; lower bounds from
//! explicit points, each recorded with an exactly checkable witness.

pub mod conic;
pub mod ctp;
pub mod local;
pub mod quartic;

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abfield::Place;
use crate::arith::{self, ArithError};
use crate::elliptic::{EllipticCurveQ, EllipticError};
use local::{class_of_i128, local_image, pair_code, torsion_images, LocalImage};
use quartic::Quartic;

#[derive(Debug, Error)]
pub enum DescentError {
    #[error("curve has no full rational 2-torsion")]
    NoFullTwoTorsion,
    #[error("local image at {0} did not reach its known order")]
    LocalImage(Place),
    #[error("Cassels-Tate pairing: {0}")]
    Ctp(String),
    #[error("witness for ({0}, {1}) does not satisfy the covering equations")]
    BadWitness(i64, i64),
    #[error("2-torsion roots out of range: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Curve(#[from] EllipticError),
}

/// Torsor search heights: |s|, t ≤ H on the reduced quartic, in order.
pub const SEARCH_HEIGHTS: [i64; 2] = [1_000, 10_000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankInterval {
    pub lower: u32,
    pub upper: u32,
}

impl RankInterval {
    pub fn exact(r: u32) -> Self {
        RankInterval { lower: r, upper: r }
    }
    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }
    /// Parity of the rank when the interval pins it.
    pub fn parity(&self) -> Option<u32> {
        self.is_tight().then_some(self.lower % 2)
    }
}

impl Add for RankInterval {
    type Output = RankInterval;
    fn add(self, o: Self) -> Self {
        RankInterval { lower: self.lower + o.lower, upper: self.upper + o.upper }
    }
}

impl fmt::Display for RankInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// y² = (x − e1)(x − e2)(x − e3), e1 = 0 < e2 < e3, with no square u² > 1
/// dividing both e2 and e3.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FullTwoTorsionModel {
    pub e: [i128; 3],
}

impl FullTwoTorsionModel {
    pub fn from_roots(mut e: [i128; 3]) -> Result<Self, DescentError> {
        e.sort_unstable();
        if e[0] == e[1] || e[1] == e[2] {
            return Err(DescentError::NoFullTwoTorsion);
        }
        let (d2, d3) = (e[1] - e[0], e[2] - e[0]);
        let g = d2.gcd(&d3);
        let mut u2 = 1i128;
        for (p, k) in arith::factor(g)?.factors {
            u2 *= (p as i128).pow(k - k % 2);
        }
        Ok(FullTwoTorsionModel { e: [0, d2 / u2, d3 / u2] })
    }

    /// From the 2-division roots of any model of E.
    pub fn from_curve(e: &EllipticCurveQ) -> Result<Self, DescentError> {
        let r = e.two_torsion_roots().map_err(|_| DescentError::NoFullTwoTorsion)?;
        let conv = |v: &BigInt| -> Result<i128, DescentError> {
            i128::try_from(v).map_err(|_| DescentError::TooLarge(v.to_string()))
        };
        Self::from_roots([conv(&r[0])?, conv(&r[1])?, conv(&r[2])?])
    }

    /// Model of the quadratic twist by d.
    pub fn twist(&self, d: i64) -> Result<Self, DescentError> {
        let d = d as i128;
        Self::from_roots(self.e.map(|v| v * d))
    }

    /// [a1, a2, a3, a4, a6].
    pub fn a_invariants(&self) -> [i128; 5] {
        let [a, b, c] = self.e;
        [0, -(a + b + c), 0, a * b + a * c + b * c, -a * b * c]
    }

    /// −1 and the primes of 2·(e1−e2)(e1−e3)(e2−e3), in increasing order.
    pub fn support(&self) -> Result<Vec<i64>, DescentError> {
        let [a, b, c] = self.e;
        let mut ps = vec![2u128];
        for d in [b - a, c - a, c - b] {
            ps.extend(arith::factor(d)?.primes());
        }
        ps.sort_unstable();
        ps.dedup();
        Ok(std::iter::once(-1).chain(ps.into_iter().map(|p| p as i64)).collect())
    }

    fn rhs(&self, x: &BigRational) -> BigRational {
        self.e.iter().fold(BigRational::one(), |acc, &ei| acc * (x - rat(ei)))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => y * y == self.rhs(x),
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let [_, a2, _, a4, _] = self.a_invariants().map(rat);
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return Point::Infinity;
            }
            (rat(3) * x1 * x1 + rat(2) * &a2 * x1 + &a4) / (rat(2) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - &a2 - x1 - x2;
        let y3 = &lambda * (x1 - &x3) - y1;
        Point::Affine(x3, y3)
    }
}

impl fmt::Display for FullTwoTorsionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.e;
        write!(f, "y^2 = (x - {a})(x - {b})(x - {c})")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Infinity,
    Affine(BigRational, BigRational),
}

fn rat(n: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    Some(BigRational::new(arith::exact_sqrt_big(q.numer())?, arith::exact_sqrt_big(q.denom())?))
}

fn sqf_mul(a: i64, b: i64) -> i64 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

fn pair_mul(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (sqf_mul(a.0, b.0), sqf_mul(a.1, b.1))
}

/// Rational point (z1, z2, z3) on the 2-covering of (b1, b2), with the x
/// coordinate of the corresponding point of E.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub b1: i64,
    pub b2: i64,
    pub x: String,
    pub z: [String; 3],
}

impl Witness {
    fn from_point(m: &FullTwoTorsionModel, class: (i64, i64), p: &Point) -> Result<Self, DescentError> {
        let Point::Affine(x, _) = p else {
            return Err(DescentError::BadWitness(class.0, class.1));
        };
        let beta = [class.0, class.1, class.0 * class.1];
        let mut z: [String; 3] = Default::default();
        for i in 0..3 {
            let q = (x - rat(m.e[i])) / rat(beta[i] as i128);
            z[i] = rat_sqrt(&q).ok_or(DescentError::BadWitness(class.0, class.1))?.to_string();
        }
        Ok(Witness { b1: class.0, b2: class.1, x: x.to_string(), z })
    }

    /// Exact check of both covering equations.
    pub fn verify(&self, m: &FullTwoTorsionModel) -> bool {
        let parse = |s: &str| s.parse::<BigRational>().ok();
        let (Some(z1), Some(z2), Some(z3)) = (parse(&self.z[0]), parse(&self.z[1]), parse(&self.z[2])) else {
            return false;
        };
        let (b1, b2) = (rat(self.b1 as i128), rat(self.b2 as i128));
        let [e1, e2, e3] = m.e.map(rat);
        &b1 * &z1 * &z1 - &b2 * &z2 * &z2 == &e2 - &e1 && &b1 * &z1 * &z1 - &b1 * &b2 * &z3 * &z3 == e3 - e1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub b1: i64,
    pub b2: i64,
    /// local solvability per place of the report, in order
    pub local: Vec<bool>,
    pub witness: Option<Witness>,
}

impl PairRecord {
    pub fn locally_solvable(&self) -> bool {
        self.local.iter().all(|&b| b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentReport {
    pub curve: String,
    pub roots: [i128; 3],
    pub support: Vec<i64>,
    pub places: Vec<Place>,
    pub pairs: Vec<PairRecord>,
    /// log2 of the number of locally solvable pairs
    pub selmer_dim: u32,
    /// F_2-rank of the Cassels–Tate pairing on the Selmer group
    pub ctp_rank: Option<u32>,
    pub ctp_error: Option<String>,
    /// log2 of the subgroup generated by witnessed pairs
    pub found_dim: u32,
    pub search_height: i64,
    pub rank_interval: RankInterval,
}

impl DescentReport {
    pub fn selmer(&self) -> impl Iterator<Item = &PairRecord> {
        self.pairs.iter().filter(|r| r.locally_solvable())
    }
    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.pairs.iter().filter_map(|r| r.witness.as_ref())
    }
}

/// Whether the 2-covering of (b1, b2) has a point over the completion at
/// `place`, by membership in the local Kummer image.
pub fn torsor_locally_solvable(b1: i64, b2: i64, e: &[i128; 3], place: Place) -> Result<bool, DescentError> {
    let img = local_image(e, place)?;
    Ok(img.contains(pair_code(class_of_i128(b1 as i128, place), class_of_i128(b2 as i128, place))))
}

fn subgroup_elements(support: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(1 << support.len());
    for mask in 0u32..1 << support.len() {
        let mut b = 1i64;
        for (i, &g) in support.iter().enumerate() {
            if mask >> i & 1 == 1 {
                b *= g;
            }
        }
        out.push(b);
    }
    out.sort_by_key(|&b| (b.abs(), b < 0));
    out
}

/// Unimodular integer matrix whose column `i` is ±p (p primitive); returns
/// the other two columns.
fn complete_basis(p: &[BigInt; 3]) -> ([BigInt; 3], [BigInt; 3]) {
    let mut m: [[BigInt; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| BigInt::from((r == c) as i32)));
    let mut v = p.clone();
    loop {
        let nz: Vec<usize> = (0..3).filter(|&i| !v[i].is_zero()).collect();
        if nz.len() <= 1 {
            let i = nz[0];
            let others: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let col = |c: usize| std::array::from_fn(|r| m[r][c].clone());
            return (col(others[0]), col(others[1]));
        }
        let i = *nz.iter().min_by_key(|&&k| v[k].abs()).expect("nonzero");
        for &j in &nz {
            if j == i {
                continue;
            }
            let q = v[j].div_floor(&v[i]);
            v[j] = &v[j] - &q * &v[i];
            // v_j −= q v_i  ⇒  column i of m += q · column j
            for row in m.iter_mut() {
                let add = &q * &row[j];
                row[i] += add;
            }
        }
    }
}

/// Quartic g(s, t) whose square values give points of the class (b1, b2),
/// with the conic parametrisation (z1, w) as binary quadratic forms.
struct Covering {
    quartic: Quartic,
    z1: [BigInt; 3],
    w: [BigInt; 3],
}

fn covering(m: &FullTwoTorsionModel, b1: i64, b2: i64) -> Option<Covering> {
    let [e1, e2, e3] = m.e;
    // b1 z1² − b2 z2² − (e2 − e1) w² = 0
    let d = [BigInt::from(b1), BigInt::from(-b2), BigInt::from(-(e2 - e1))];
    let p0 = conic::solve_ternary(b1 as i128, -(b2 as i128), -(e2 - e1))?;
    let (u, v) = complete_basis(&p0);
    let q = |x: &[BigInt; 3], y: &[BigInt; 3]| -> BigInt { (0..3).map(|i| &d[i] * &x[i] * &y[i]).sum() };
    let (q11, q12, q22) = (q(&u, &u), q(&u, &v), q(&v, &v));
    let (p1, p2) = (q(&p0, &u), q(&p0, &v));
    // point Q(w)·P0 − 2B(P0, w)·w on the line through P0 in direction w = sU + tV
    let form = |i: usize| -> [BigInt; 3] {
        [
            &q11 * &p0[i] - 2 * &p1 * &u[i],
            2 * &q12 * &p0[i] - 2 * &p1 * &v[i] - 2 * &p2 * &u[i],
            &q22 * &p0[i] - 2 * &p2 * &v[i],
        ]
    };
    let (x, w) = (form(0), form(2));
    let sq = |f: &[BigInt; 3]| -> [BigInt; 5] {
        [
            &f[0] * &f[0],
            2 * &f[0] * &f[1],
            &f[1] * &f[1] + 2 * &f[0] * &f[2],
            2 * &f[1] * &f[2],
            &f[2] * &f[2],
        ]
    };
    let (x2, w2) = (sq(&x), sq(&w));
    let b3 = BigInt::from(sqf_mul(b1, b2));
    let (b1b, d3) = (BigInt::from(b1), BigInt::from(e3 - e1));
    let c: [BigInt; 5] = std::array::from_fn(|k| &b3 * (&b1b * &x2[k] - &d3 * &w2[k]));
    Some(Covering { quartic: Quartic { c }, z1: x, w })
}

fn eval_form(f: &[BigInt; 3], s: &BigInt, t: &BigInt) -> BigInt {
    &f[0] * s * s + &f[1] * s * t + &f[2] * t * t
}

/// Search the 2-covering of (b1, b2) for a rational point up to height h.
fn search_class(m: &FullTwoTorsionModel, b1: i64, b2: i64, h: i64) -> Option<Point> {
    let cov = covering(m, b1, b2)?;
    let g = cov.quartic.remove_square_content();
    let (red, mat) = g.reduce();
    let (s, t, _) = quartic::search_square(&red, h, |s, t| {
        let (s0, t0) = (
            BigInt::from(mat[0][0] * s as i128 + mat[0][1] * t as i128),
            BigInt::from(mat[1][0] * s as i128 + mat[1][1] * t as i128),
        );
        !eval_form(&cov.w, &s0, &t0).is_zero()
    })?;
    let (s0, t0) = (
        BigInt::from(mat[0][0] * s as i128 + mat[0][1] * t as i128),
        BigInt::from(mat[1][0] * s as i128 + mat[1][1] * t as i128),
    );
    let z1 = eval_form(&cov.z1, &s0, &t0);
    let w = eval_form(&cov.w, &s0, &t0);
    let x = rat(m.e[0]) + rat(b1 as i128) * BigRational::new(&z1 * &z1, &w * &w);
    let y = rat_sqrt(&m.rhs(&x))?;
    Some(Point::Affine(x, y))
}

/// Subgroup of E(Q)/2E(Q) spanned by explicit points, keyed by class.
struct Span {
    points: HashMap<(i64, i64), Point>,
}

impl Span {
    fn new() -> Self {
        Span { points: HashMap::from([((1, 1), Point::Infinity)]) }
    }
    fn contains(&self, c: (i64, i64)) -> bool {
        self.points.contains_key(&c)
    }
    fn insert(&mut self, m: &FullTwoTorsionModel, c: (i64, i64), p: Point) {
        if self.contains(c) {
            return;
        }
        let old: Vec<((i64, i64), Point)> = self.points.iter().map(|(k, v)| (*k, v.clone())).collect();
        for (k, q) in old {
            self.points.insert(pair_mul(k, c), m.add(&q, &p));
        }
    }
    fn dim(&self) -> u32 {
        self.points.len().trailing_zeros()
    }
}

/// Full 2-descent on a model with rational 2-torsion.
pub fn two_descent_model(m: &FullTwoTorsionModel, name: &str) -> Result<DescentReport, DescentError> {
    let support = m.support()?;
    let places: Vec<Place> = std::iter::once(Place::Infinity)
        .chain(support.iter().skip(1).map(|&p| Place::Prime(p as u64)))
        .collect();
    let images: Vec<LocalImage> = places.iter().map(|&pl| local_image(&m.e, pl)).collect::<Result<_, _>>()?;
    let elems = subgroup_elements(&support);
    let mut pairs = Vec::with_capacity(elems.len() * elems.len());
    for &b1 in &elems {
        for &b2 in &elems {
            let local = images
                .iter()
                .map(|img| {
                    let pl = img.place;
                    img.contains(pair_code(class_of_i128(b1 as i128, pl), class_of_i128(b2 as i128, pl)))
                })
                .collect();
            pairs.push(PairRecord { b1, b2, local, witness: None });
        }
    }
    let selmer: Vec<(i64, i64)> = pairs.iter().filter(|r| r.locally_solvable()).map(|r| (r.b1, r.b2)).collect();
    debug_assert!(selmer.len().is_power_of_two());
    let selmer_dim = selmer.len().trailing_zeros();

    // basis of the Selmer group in enumeration order
    let mut basis: Vec<(i64, i64)> = Vec::new();
    let mut span_sel: Vec<(i64, i64)> = vec![(1, 1)];
    for &c in &selmer {
        if !span_sel.contains(&c) {
            basis.push(c);
            let ext: Vec<(i64, i64)> = span_sel.iter().map(|&s| pair_mul(s, c)).collect();
            span_sel.extend(ext);
        }
    }

    // radical of the Cassels–Tate pairing (all of Sel if it cannot be computed)
    let (radical, ctp_rank, ctp_error) = match pairing_matrix(&m.e, &basis) {
        Ok(mat) => {
            let rank = ctp::f2_rank(&mat);
            let kernel = f2_kernel(&mat);
            let mut rad: Vec<(i64, i64)> = vec![(1, 1)];
            for vec in kernel {
                let c = basis
                    .iter()
                    .zip(&vec)
                    .filter(|(_, &bit)| bit == 1)
                    .fold((1, 1), |acc, (&b, _)| pair_mul(acc, b));
                if !rad.contains(&c) {
                    let ext: Vec<(i64, i64)> = rad.iter().map(|&s| pair_mul(s, c)).collect();
                    rad.extend(ext);
                }
            }
            (rad, Some(rank), None)
        }
        Err(e) => (selmer.clone(), None, Some(e.to_string())),
    };
    let mut radical = radical;
    radical.sort_by_key(|&(a, b)| (a.abs() + b.abs(), a.abs(), b.abs(), a < 0, b < 0));
    let radical_dim = radical.len().trailing_zeros();

    let mut span = Span::new();
    let tors = torsion_images(&m.e);
    for (i, (a, b)) in tors.iter().enumerate() {
        let c = (arith::squarefree_part(*a)?, arith::squarefree_part(*b)?);
        span.insert(m, c, Point::Affine(rat(m.e[i]), BigRational::zero()));
    }
    let mut height = 0;
    'heights: for h in SEARCH_HEIGHTS {
        for &c in &radical {
            if span.dim() >= radical_dim {
                break 'heights;
            }
            if span.contains(c) {
                continue;
            }
            height = h;
            if let Some(p) = search_class(m, c.0, c.1, h) {
                span.insert(m, c, p);
            }
        }
    }
    for rec in pairs.iter_mut() {
        if let Some(p) = span.points.get(&(rec.b1, rec.b2)) {
            if !matches!(p, Point::Infinity) {
                let w = Witness::from_point(m, (rec.b1, rec.b2), p)?;
                if !w.verify(m) {
                    return Err(DescentError::BadWitness(rec.b1, rec.b2));
                }
                rec.witness = Some(w);
            }
        }
    }
    let found_dim = span.dim();
    let rank_interval = RankInterval {
        lower: found_dim.saturating_sub(2),
        upper: radical_dim.saturating_sub(2),
    };
    Ok(DescentReport {
        curve: name.to_string(),
        roots: m.e,
        support,
        places,
        pairs,
        selmer_dim,
        ctp_rank,
        ctp_error,
        found_dim,
        search_height: height,
        rank_interval,
    })
}

fn pairing_matrix(e: &[i128; 3], basis: &[(i64, i64)]) -> Result<Vec<Vec<u8>>, DescentError> {
    let n = basis.len();
    let mut mat = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = ctp::cassels_tate(e, basis[i], basis[j])?;
            let bit = (v == -1) as u8;
            mat[i][j] = bit;
            mat[j][i] = bit;
        }
    }
    Ok(mat)
}

/// Basis of {c : c·M = 0} over F_2 for a symmetric matrix M.
fn f2_kernel(mat: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let n = mat.len();
    let mut rows: Vec<Vec<u8>> = mat.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(piv) = (r..n).find(|&i| rows[i][col] == 1) else { continue };
        rows.swap(r, piv);
        for i in 0..n {
            if i != r && rows[i][col] == 1 {
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pr) {
                    *x ^= y;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u8; n];
            v[f] = 1;
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = rows[k][f];
            }
            v
        })
        .collect()
}

/// Complete 2-descent on E/Q.
pub fn two_descent(e: &EllipticCurveQ) -> Result<DescentReport, DescentError> {
    let m = FullTwoTorsionModel::from_curve(e)?;
    two_descent_model(&m, &e.name())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistDescent {
    pub d: i64,
    pub report: DescentReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiquadraticRank {
    pub curve: String,
    pub discs: Vec<i64>,
    pub twists: Vec<TwistDescent>,
    pub rank_interval: RankInterval,
}

/// Rank of E over Q(√d1, …, √dm) as the sum over the 2^m quadratic twists.
pub fn rank_multiquadratic(e: &EllipticCurveQ, discs: &[i64]) -> Result<MultiquadraticRank, DescentError> {
    let base = FullTwoTorsionModel::from_curve(e)?;
    let mut classes: Vec<i64> = Vec::new();
    for mask in 0u32..1 << discs.len() {
        let mut d = 1i64;
        for (i, &di) in discs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d = sqf_mul(d, arith::squarefree_part(di as i128)?);
            }
        }
        if !classes.contains(&d) {
            classes.push(d);
        }
    }
    let mut twists = Vec::new();
    let mut total = RankInterval::exact(0);
    for d in classes {
        let model = base.twist(d)?;
        let report = two_descent_model(&model, &format!("{}^({d})", e.name()))?;
        total = total + report.rank_interval;
        twists.push(TwistDescent { d, report });
    }
    Ok(MultiquadraticRank { curve: e.name(), discs: discs.to_vec(), twists, rank_interval: total })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(l: &str) -> EllipticCurveQ {
        EllipticCurveQ::from_label(l).unwrap()
    }

    #[test]
    fn congruent_number_curve() {
        let m = FullTwoTorsionModel::from_roots([-1, 0, 1]).unwrap();
        assert_eq!(m.e, [0, 1, 2]);
        let r = two_descent_model(&m, "y^2=x^3-x").unwrap();
        assert_eq!(r.rank_interval, RankInterval::exact(0));
        assert_eq!(r.selmer_dim, 2);
        assert_eq!(r.found_dim, 2);
    }

    #[test]
    fn fixture_curves() {
        let r = two_descent(&curve("480a1")).unwrap();
        assert_eq!(r.rank_interval, RankInterval::exact(1));
        assert!(matches!(two_descent(&curve("37a1")), Err(DescentError::NoFullTwoTorsion)));
        for w in r.witnesses() {
            assert!(w.verify(&FullTwoTorsionModel { e: r.roots }));
        }
    }

    #[test]
    fn trivial_and_sign_obstructed_pairs() {
        let e = [0i128, 1, 2];
        for pl in [Place::Infinity, Place::Prime(2), Place::Prime(3)] {
            assert!(torsor_locally_solvable(1, 1, &e, pl).unwrap());
        }
        assert!(!torsor_locally_solvable(-1, -1, &e, Place::Infinity).unwrap());
    }

    #[test]
    fn basis_completion_is_unimodular() {
        for p in [[3i64, 5, 7], [0, 4, 9], [12, -18, 35], [1, 0, 0], [-6, 10, 15]] {
            let pb = p.map(BigInt::from);
            let (u, v) = complete_basis(&pb);
            let det = &pb[0] * (&u[1] * &v[2] - &u[2] * &v[1]) - &pb[1] * (&u[0] * &v[2] - &u[2] * &v[0])
                + &pb[2] * (&u[0] * &v[1] - &u[1] * &v[0]);
            assert_eq!(det.abs(), BigInt::one(), "{p:?}");
        }
    }
}
