//! Cassels–Tate pairing on the 2-Selmer group of y² = (x−e1)(x−e2)(x−e3).
//!
//! For Selmer elements a = (a1, a2, a3), b = (b1, b2, b3) (a3 = a1a2 up to
//! squares), let U_i be a rational point on the conic
//! a_j Z_j² − a_k Z_k² = (e_k − e_j) Z_0² ({i, j, k} = {1, 2, 3}) and h_i the
//! tangent linear form there. Then ⟨a, b⟩ = Π_v Π_i (h_i(P_v), b_i)_v for
//! any local points P_v on the 2-covering of a.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::conic::solve_ternary;
use super::local::{Padic, PadicCtx};
use super::DescentError;
use crate::arith;

/// Tangent form coefficients (i, j, k, c_j, c_k, c_0).
type Tangent = (usize, usize, usize, BigInt, BigInt, BigInt);

const PREC: u32 = 40;
const AGREEMENT: usize = 3;

fn sqf_product(a: i64, b: i64) -> i64 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

fn triple(a: (i64, i64)) -> [i64; 3] {
    [a.0, a.1, sqf_product(a.0, a.1)]
}

fn tangents(e: &[i128; 3], a: &[i64; 3]) -> Result<Vec<Tangent>, DescentError> {
    let mut out = Vec::new();
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let [uj, uk, u0] = solve_ternary(a[j] as i128, -(a[k] as i128), -(e[k] - e[j]))
            .ok_or_else(|| DescentError::Ctp(format!("conic {i} of {a:?} has no rational point")))?;
        out.push((
            i,
            j,
            k,
            BigInt::from(a[j]) * uj,
            -BigInt::from(a[k]) * uk,
            -BigInt::from(e[k] - e[j]) * u0,
        ));
    }
    Ok(out)
}

fn rat(n: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Candidate x-coordinates of local points: x = n/p^(2k) or x = e_i + a_i t².
fn sample_x(rng: &mut ChaCha8Rng, e: &[i128; 3], a: &[i64; 3], p: i128) -> BigRational {
    let pb = BigInt::from(p);
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(0..=3usize);
        let nmax = p.checked_pow(6).unwrap_or(i128::MAX).min(1 << 60);
        let n = rng.gen_range(-nmax..=nmax);
        BigRational::new(BigInt::from(n), num_traits::pow(pb, 2 * k))
    } else {
        let i = rng.gen_range(0..3usize);
        let k = rng.gen_range(-3i32..=6);
        let umax = p.checked_pow(3).unwrap_or(i128::MAX).min(1 << 40);
        let u = BigRational::from_integer(BigInt::from(rng.gen_range(1..=umax)));
        let pk = if k >= 0 {
            BigRational::from_integer(num_traits::pow(pb, k as usize))
        } else {
            BigRational::new(BigInt::from(1), num_traits::pow(pb, (-k) as usize))
        };
        let t = u * pk;
        rat(e[i]) + rat(a[i] as i128) * &t * &t
    }
}

fn term_at_prime(
    e: &[i128; 3],
    a: &[i64; 3],
    b: &[i64; 3],
    tans: &[Tangent],
    p: u64,
    rng: &mut ChaCha8Rng,
) -> Result<i8, DescentError> {
    let ctx = PadicCtx::new(p, PREC);
    let bs: Vec<Padic> = b.iter().map(|&v| ctx.from_int(&BigInt::from(v)).expect("nonzero")).collect();
    let mut values = BTreeSet::new();
    let mut found = 0;
    for _ in 0..400_000 {
        let x = sample_x(rng, e, a, p as i128);
        let mut z = Vec::with_capacity(3);
        for l in 0..3 {
            let q = (&x - rat(e[l])) / rat(a[l] as i128);
            let Some(qp) = ctx.from_rat(&q) else { break };
            let Some(r) = ctx.sqrt(&qp) else { break };
            z.push(r);
        }
        if z.len() < 3 {
            continue;
        }
        let one = ctx.from_int(&BigInt::from(1)).expect("one");
        let mut prod = 1i8;
        let mut ok = true;
        for (i, j, k, cj, ck, c0) in tans {
            let terms = [(cj.clone(), z[*j].clone()), (ck.clone(), z[*k].clone()), (c0.clone(), one.clone())];
            match ctx.linear(&terms, 4) {
                Some(h) => prod *= ctx.hilbert(&h, &bs[*i]),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        values.insert(prod);
        found += 1;
        if found == AGREEMENT {
            break;
        }
    }
    match (values.len(), found) {
        (1, AGREEMENT) => Ok(*values.iter().next().expect("one value")),
        (1, _) | (0, _) => Err(DescentError::Ctp(format!("no usable local point at {p}"))),
        _ => Err(DescentError::Ctp(format!("local term at {p} depends on the point"))),
    }
}

fn term_at_infinity(
    e: &[i128; 3],
    a: &[i64; 3],
    b: &[i64; 3],
    tans: &[Tangent],
    rng: &mut ChaCha8Rng,
) -> Result<i8, DescentError> {
    let ef = e.map(|v| v as f64);
    let span = (ef[2] - ef[0]).abs() + 1.0;
    let mut values = BTreeSet::new();
    let mut found = 0;
    for _ in 0..100_000 {
        let x = ef[0] - 2.0 * span + rng.gen::<f64>() * 6.0 * span;
        let q: Vec<f64> = (0..3).map(|l| (x - ef[l]) / a[l] as f64).collect();
        if q.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let z: Vec<f64> = q.iter().map(|v| v.sqrt()).collect();
        let mut prod = 1i8;
        let mut ok = true;
        for (i, j, k, cj, ck, c0) in tans {
            let (cj, ck, c0) = (cj.to_f64().unwrap(), ck.to_f64().unwrap(), c0.to_f64().unwrap());
            let h = cj * z[*j] + ck * z[*k] + c0;
            let scale = cj.abs() * z[*j] + ck.abs() * z[*k] + c0.abs();
            if h.abs() < 1e-9 * scale {
                ok = false;
                break;
            }
            if h < 0.0 && b[*i] < 0 {
                prod = -prod;
            }
        }
        if !ok {
            continue;
        }
        values.insert(prod);
        found += 1;
        if found == AGREEMENT {
            break;
        }
    }
    match (values.len(), found) {
        (1, AGREEMENT) => Ok(*values.iter().next().expect("one value")),
        _ => Err(DescentError::Ctp("no consistent real point".into())),
    }
}

fn primes_of(n: &BigInt, out: &mut BTreeSet<u64>) -> Result<(), DescentError> {
    if n.is_zero() {
        return Ok(());
    }
    for (p, _) in arith::factor_big(n, &[]).map_err(|e| DescentError::Ctp(e.to_string()))? {
        out.insert(p);
    }
    Ok(())
}

/// ⟨a, b⟩ ∈ {±1} for Selmer elements a, b given as (b1, b2) pairs.
pub fn cassels_tate(e: &[i128; 3], a: (i64, i64), b: (i64, i64)) -> Result<i8, DescentError> {
    let (a, b) = (triple(a), triple(b));
    if b == [1, 1, 1] || a == [1, 1, 1] {
        return Ok(1);
    }
    let tans = tangents(e, &a)?;
    let mut primes = BTreeSet::from([2u64]);
    for d in [e[1] - e[0], e[2] - e[0], e[2] - e[1]] {
        primes_of(&BigInt::from(d), &mut primes)?;
    }
    for v in a.iter().chain(b.iter()) {
        primes_of(&BigInt::from(*v), &mut primes)?;
    }
    for (_, _, _, cj, ck, c0) in &tans {
        for c in [cj, ck, c0] {
            primes_of(c, &mut primes)?;
        }
    }
    let seed = (a[0] as u64).wrapping_mul(31) ^ (a[1] as u64).wrapping_mul(131) ^ (b[0] as u64) ^ (b[1] as u64) << 7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = term_at_infinity(e, &a, &b, &tans, &mut rng)?;
    for p in primes {
        total *= term_at_prime(e, &a, &b, &tans, p, &mut rng)?;
    }
    Ok(total)
}

/// Rank over F_2 of a square 0/1 matrix.
pub fn f2_rank(rows: &[Vec<u8>]) -> u32 {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let n = m.first().map_or(0, |r| r.len());
    let mut rank = 0usize;
    for col in 0..n {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] == 1) else { continue };
        m.swap(rank, piv);
        for r in 0..m.len() {
            if r != rank && m[r][col] == 1 {
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank as u32
}
