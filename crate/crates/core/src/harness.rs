//! Verification pipelines: each statement id maps to a deterministic
//! computation whose outcome is a [`VerificationReport`].
//!
//! Numbers that are asserted in the literature but not computed here live
//! only in the embedded fixture file; any report that reads one is marked
//! [`Outcome::VerifiedWithFixtures`].

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::abfield::{density_construct, AbelianField, FieldError, Place, PredicateAvoid, SplitData};
use crate::arith::{self, ArithError};
use crate::descent2::{self, DescentError};
use crate::dirichlet::{is_fundamental_discriminant, CharError, DirichletCharacter};
use crate::elliptic::{EllipticCurveQ, EllipticError};
use crate::lfunc::{self, LError, RankDecision, Verdict};
use crate::rootnum::{self, RootError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown statement id {0:?}")]
    UnknownStatement(String),
    #[error("no quadratic twist of the requested analytic rank with |D| <= {0}")]
    NoTwist(u64),
    #[error("fixture file: {0}")]
    Fixture(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curve(#[from] EllipticError),
    #[error(transparent)]
    L(#[from] LError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Char(#[from] CharError),
}

// ---------------------------------------------------------------------------
// fixtures

const CLAIMS_TOML: &str = include_str!("../fixtures/claims.toml");

#[derive(Clone, Debug, Deserialize)]
pub struct Fixtures {
    pub rank_over_field: BTreeMap<String, BTreeMap<String, u32>>,
    pub sha2_dim: BTreeMap<String, BTreeMap<String, u32>>,
    pub selmer2_order: BTreeMap<String, BTreeMap<String, u64>>,
}

pub fn fixtures() -> Result<&'static Fixtures, HarnessError> {
    static F: OnceLock<Result<Fixtures, String>> = OnceLock::new();
    F.get_or_init(|| toml::from_str(CLAIMS_TOML).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| HarnessError::Fixture(e.clone()))
}

fn fixture<T: Copy>(table: &BTreeMap<String, BTreeMap<String, T>>, curve: &str, key: &str) -> Result<T, HarnessError> {
    table
        .get(curve)
        .and_then(|m| m.get(key))
        .copied()
        .ok_or_else(|| HarnessError::Fixture(format!("missing entry {curve}/{key}")))
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// recorded for context; does not affect the verdict
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Verified,
    VerifiedWithFixtures,
    OutOfScopePartsSkipped,
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::VerifiedWithFixtures => 10,
            Outcome::OutOfScopePartsSkipped => 20,
            Outcome::Failed => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// the check reads a fixture value
    pub fixture: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statement: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub fixtures_used: Vec<String>,
    pub verdict: Outcome,
}

impl VerificationReport {
    fn new(statement: &str, inputs: Value) -> Self {
        VerificationReport {
            statement: statement.to_string(),
            inputs,
            checks: Vec::new(),
            fixtures_used: Vec::new(),
            verdict: Outcome::Verified,
        }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: Value) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(name, status, detail);
    }

    fn push(&mut self, name: impl Into<String>, status: Status, detail: Value) {
        self.checks.push(Check { name: name.into(), status, fixture: false, detail });
    }

    fn fixture_check(&mut self, name: impl Into<String>, key: String, ok: bool, detail: Value) {
        self.fixtures_used.push(key);
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, fixture: true, detail });
    }

    fn finish(mut self) -> Self {
        let has = |s: Status| self.checks.iter().any(|c| c.status == s);
        self.verdict = if has(Status::Fail) {
            Outcome::Failed
        } else if has(Status::Skipped) {
            Outcome::OutOfScopePartsSkipped
        } else if self.checks.iter().any(|c| c.fixture) {
            Outcome::VerifiedWithFixtures
        } else {
            Outcome::Verified
        };
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Exit code for a batch: any failure gives 1, otherwise the largest code.
pub fn combined_exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Outcome::Failed) {
        1
    } else {
        reports.iter().map(|r| r.exit_code()).max().unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// fields

/// Degree 9 subfield of Q(ζ13, ζ103); unique because the 3-part of
/// (Z/1339)^× is (Z/3)².
pub fn field_f3() -> Result<AbelianField, HarnessError> {
    Ok(AbelianField::torsion_subfield(13 * 103, 3)?)
}

pub fn field_f4() -> Result<AbelianField, HarnessError> {
    Ok(AbelianField::multiquadratic(&[-4, 41, 73])?)
}

/// Degree 25 subfield of Q(ζ11, ζ241); unique because the 5-part of
/// (Z/2651)^× is (Z/5)².
pub fn field_f5() -> Result<AbelianField, HarnessError> {
    Ok(AbelianField::torsion_subfield(11 * 241, 5)?)
}

/// Built-in fields by name: F3, F4, F5, Q, or a list of discriminants such
/// as "-4,17".
pub fn named_field(name: &str) -> Result<Option<AbelianField>, HarnessError> {
    Ok(match name {
        "F3" => Some(field_f3()?),
        "F4" => Some(field_f4()?),
        "F5" => Some(field_f5()?),
        "Q" => Some(AbelianField::rationals()),
        _ => {
            let discs: Option<Vec<i64>> = name.split(',').map(|t| t.trim().parse().ok()).collect();
            match discs {
                Some(d) if !d.is_empty() && d.iter().all(|&x| is_fundamental_discriminant(x)) => {
                    Some(AbelianField::multiquadratic(&d)?)
                }
                _ => None,
            }
        }
    })
}

fn curve(label: &str) -> Result<EllipticCurveQ, HarnessError> {
    Ok(EllipticCurveQ::from_label(label)?)
}

// ---------------------------------------------------------------------------
// place-additive invariants

/// A finitely supported map (place of Q, e, f) → Z/nZ, standing for a local
/// invariant λ evaluated on the completions of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalInvariantTable {
    pub n: u64,
    pub values: BTreeMap<(Place, u64, u64), u64>,
}

impl LocalInvariantTable {
    pub fn new(n: u64) -> Self {
        LocalInvariantTable { n, values: BTreeMap::new() }
    }

    pub fn set(&mut self, place: Place, e: u64, f: u64, v: u64) {
        let v = v % self.n;
        if v == 0 {
            self.values.remove(&(place, e, f));
        } else {
            self.values.insert((place, e, f), v);
        }
    }

    /// Σ over places w of F of λ(F_w), mod n.
    pub fn global_sum(&self, split: &mut impl FnMut(Place) -> SplitData) -> u64 {
        let mut total = 0u64;
        for (&(place, e, f), &v) in &self.values {
            let s = split(place);
            if s.e == e && s.f == f {
                total = (total + s.g % self.n * v) % self.n;
            }
        }
        total
    }

    /// Random table supported on ∞, the ramified primes of `field` and
    /// `extra` random primes below 10^4; each place gets its true (e, f) and
    /// a decoy pair that never occurs.
    pub fn random(n: u64, field: &AbelianField, extra: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut places: Vec<Place> = vec![Place::Infinity];
        places.extend(field.ramified_primes().into_iter().map(Place::Prime));
        let small = arith::primes_up_to(10_000);
        for _ in 0..extra {
            places.push(Place::Prime(small[rng.gen_range(0..small.len())]));
        }
        let mut t = LocalInvariantTable::new(n);
        for pl in places {
            let s = field.split(pl);
            t.set(pl, s.e, s.f, rng.gen_range(0..n));
            t.set(pl, s.e + 1, s.f, rng.gen_range(0..n));
        }
        t
    }
}

/// Splitting certificate for (F, n) and, when it holds, `trials` random
/// place-additive invariants whose global sums must vanish mod n.
pub fn check_lemma_split(field: &AbelianField, n: u64, trials: usize, seed: u64) -> VerificationReport {
    let mut r = VerificationReport::new(
        "lemma-split",
        json!({"field": field.to_string(), "modulus": field.modulus(), "n": n, "trials": trials, "seed": seed}),
    );
    let cert = field.certify_split_multiple(n);
    let gs: BTreeSet<u64> = cert.entries.iter().map(|e| e.split.g).chain(cert.cyclic_subgroups.iter().map(|c| c.index)).collect();
    r.check("splitting-certificate", cert.verdict, json!({"place_counts": gs, "certificate": cert}));
    if !cert.verdict {
        r.push("lemma", Status::Info, json!("inapplicable: hypothesis not met"));
        return r.finish();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<Place, SplitData> = HashMap::new();
    let mut violations = 0usize;
    for _ in 0..trials {
        let t = LocalInvariantTable::random(n, field, 8, &mut rng);
        let s = t.global_sum(&mut |pl| *cache.entry(pl).or_insert_with(|| field.split(pl)));
        if s != 0 {
            violations += 1;
        }
    }
    r.check("random-local-invariants", violations == 0, json!({"trials": trials, "violations": violations}));
    r.finish()
}

// ---------------------------------------------------------------------------
// statements

pub const STATEMENTS: [&str; 12] = [
    "certify-split",
    "lemma-split",
    "rank-mod-3",
    "rank-mod-4",
    "rank-mod-5",
    "remark-lfun",
    "rank-sha-mod-4",
    "sha-mod-4",
    "cubic-parity",
    "torsion",
    "demo-mod-p",
    "demo-mod-4",
];

pub fn verify(id: &str) -> Result<VerificationReport, HarnessError> {
    match id {
        "certify-split" => verify_certify_split(),
        "lemma-split" => verify_lemma_split(),
        "rank-mod-3" => verify_rank_mod_n(3),
        "rank-mod-4" => verify_rank_mod_n(4),
        "rank-mod-5" => verify_rank_mod_n(5),
        "remark-lfun" => verify_remark_lfun(),
        "rank-sha-mod-4" | "sha-mod-4" | "cubic-parity" => verify_twist_sum_violation(id),
        "torsion" => verify_torsion_claims(),
        "demo-mod-p" => demo_conditional(&Demo::mod_p_default()),
        "demo-mod-4" => demo_conditional(&Demo::mod_4_default()),
        _ => Err(HarnessError::UnknownStatement(id.to_string())),
    }
}

pub fn verify_all() -> Result<Vec<VerificationReport>, HarnessError> {
    STATEMENTS.iter().map(|id| verify(id)).collect()
}

/// Certificates for (F3, 3), (F4, 4), (F5, 5) and the failing control (Q(i), 2).
pub fn verify_certify_split() -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new("certify-split", json!({"fields": ["F3", "F4", "F5"], "control": "Q(i)"}));
    for (name, f, n) in [("F3", field_f3()?, 3), ("F4", field_f4()?, 4), ("F5", field_f5()?, 5)] {
        let cert = f.certify_split_multiple(n);
        let gs: BTreeSet<u64> =
            cert.entries.iter().map(|e| e.split.g).chain(cert.cyclic_subgroups.iter().map(|c| c.index)).collect();
        r.check(format!("{name}, n={n}"), cert.verdict, json!({"place_counts": gs, "certificate": cert}));
    }
    let qi = AbelianField::multiquadratic(&[-4])?;
    let cert = qi.certify_split_multiple(2);
    r.check("control Q(i), n=2 is rejected", !cert.verdict, json!({"certificate": cert}));
    Ok(r.finish())
}

pub fn verify_lemma_split() -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new("lemma-split", json!({"fields": ["F3", "F4", "F5"], "trials_each": 3400}));
    for (name, f, n) in [("F3", field_f3()?, 3), ("F4", field_f4()?, 4), ("F5", field_f5()?, 5)] {
        let sub = check_lemma_split(&f, n, 3400, 0x5eed + n);
        r.check(format!("{name}, n={n}"), sub.verdict == Outcome::Verified, json!(sub.checks));
    }
    let sub = check_lemma_split(&AbelianField::multiquadratic(&[-4])?, 2, 10, 1);
    r.check("Q(i), n=2 is inapplicable", sub.verdict == Outcome::Failed, json!(sub.checks));
    Ok(r.finish())
}

/// Rank of 480a1 over F_n is not 0 mod n although every place splits into a
/// multiple of n places.
pub fn verify_rank_mod_n(n: u64) -> Result<VerificationReport, HarnessError> {
    let e = curve("480a1")?;
    let mut r = VerificationReport::new("rank-mod-n", json!({"n": n, "curve": "480a1"}));
    r.statement = format!("rank-mod-{n}");
    match n {
        4 => {
            let f = field_f4()?;
            let cert = f.certify_split_multiple(4);
            r.check("splitting certificate F4, n=4", cert.verdict, json!(cert));
            let mq = descent2::rank_multiquadratic(&e, &[-4, 41, 73])?;
            let twists: Vec<Value> = mq
                .twists
                .iter()
                .map(|t| {
                    json!({"d": t.d, "rank": t.report.rank_interval, "selmer_dim": t.report.selmer_dim,
                           "ctp_rank": t.report.ctp_rank})
                })
                .collect();
            let iv = mq.rank_interval;
            r.check("rank over F4 pinned by descent", iv.is_tight(), json!({"interval": iv, "twists": twists}));
            r.check(
                "rank over F4 is not 0 mod 4",
                iv.is_tight() && iv.lower % 4 != 0,
                json!({"rank": iv.lower, "mod_4": iv.lower % 4}),
            );
        }
        3 | 5 => {
            let (f, name, gates) = if n == 3 {
                (field_f3()?, "F3", [(13i128, 103u128), (103, 13)])
            } else {
                (field_f5()?, "F5", [(11, 241), (241, 11)])
            };
            for (a, q) in gates {
                let ok = arith::nth_power_residue(a, q, n)?;
                r.check(format!("{a} is a {n}th power residue mod {q}"), ok, json!(ok));
            }
            let cert = f.certify_split_multiple(n);
            r.check(format!("splitting certificate {name}, n={n}"), cert.verdict, json!(cert));
            let rq = descent2::two_descent(&e)?.rank_interval;
            r.check("rank over Q by descent", rq.is_tight(), json!({"interval": rq}));
            let rk = fixture(&fixtures()?.rank_over_field, "480a1", name)?;
            r.fixture_check(
                format!("rank over {name} is not 0 mod {n}"),
                format!("rank_over_field.480a1.{name}"),
                !(rk as u64).is_multiple_of(n),
                json!({"rank": rk, "residue": rk as u64 % n}),
            );
            r.push(format!("exact rank over {name}"), Status::Info, json!(format!("requires a descent over a field of degree {}; not computed", f.degree())));
        }
        _ => return Err(HarnessError::UnknownStatement(format!("rank-mod-{n}"))),
    }
    Ok(r.finish())
}

fn poly(c: &[i64]) -> Vec<num_bigint::BigInt> {
    c.iter().map(|&v| num_bigint::BigInt::from(v)).collect()
}

/// Discriminants of the square classes generated by `discs`, trivial first.
fn twist_classes(discs: &[i64]) -> Vec<i64> {
    let mut out = vec![1i64];
    for mask in 1u32..1 << discs.len() {
        let mut d = 1i64;
        for (i, &x) in discs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d *= x;
            }
        }
        out.push(d);
    }
    out
}

/// L(480a1/F4, s) is formally a 4th power and vanishes to order 6 at s = 1.
pub fn verify_remark_lfun() -> Result<VerificationReport, HarnessError> {
    let e = curve("480a1")?;
    let f = field_f4()?;
    let mut r = VerificationReport::new("remark-lfun", json!({"curve": "480a1", "field": "F4", "p_max": 1000}));
    let expected: [(u64, Vec<i64>, u64); 5] = [
        (2, vec![1], 1),
        (3, vec![1, 0, -1], 4),
        (5, vec![1, 0, -1], 4),
        (7, vec![1, 0, 14, 0, 49], 4),
        (11, vec![1, 0, 6, 0, 121], 4),
    ];
    for (p, base, k) in expected {
        let ef = lfunc::euler_factor_over_field(&e, &f, p)?;
        let want = lfunc::poly_pow(&poly(&base), k);
        r.check(format!("Euler factor at {p}"), ef.coefficients == want, json!({"factor": ef.display()}));
    }
    let four = lfunc::formal_nth_power(&e, &f, 4, 1000)?;
    r.check("formally a 4th power up to 1000", four.passed, json!(four));
    let eight = lfunc::formal_nth_power(&e, &f, 8, 1000)?;
    r.check("not an 8th power (control)", !eight.passed, json!(eight));

    let mut total = 0u32;
    let mut all_decided = true;
    let mut rows = Vec::new();
    let mut leq1_decided = true;
    for d in twist_classes(&[-4, 41, 73]) {
        let t = e.quadratic_twist(d)?;
        let one = lfunc::analytic_rank_leq1(&t)?;
        leq1_decided &= one != RankDecision::Indeterminate;
        let dec = if one == RankDecision::Indeterminate { lfunc::analytic_rank_leq2(&t)? } else { one };
        match dec.as_int() {
            Some(k) => total += k,
            None => all_decided = false,
        }
        rows.push(json!({"d": d, "conductor": t.conductor().to_string(), "sign": lfunc::sign_of(&t)?,
                         "rank_leq1": one, "rank": dec}));
    }
    r.push(
        "every twist decided at order <= 1",
        Status::Info,
        json!({"holds": leq1_decided, "note": "the order-2 twist is decided from L''(1)"}),
    );
    r.check("order of vanishing at s=1 is 6", all_decided && total == 6, json!({"total": total, "twists": rows}));
    Ok(r.finish())
}

fn rank_row(t: &EllipticCurveQ, d: i64) -> Result<(Option<u32>, Value), HarnessError> {
    let dec = lfunc::analytic_rank_leq1(t)?;
    Ok((dec.as_int(), json!({"d": d, "sign": lfunc::sign_of(t)?, "analytic_rank": dec})))
}

/// Twist sums over multiquadratic fields that a place-additive invariant
/// would force to vanish.
pub fn verify_twist_sum_violation(statement: &str) -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new(statement, Value::Null);
    match statement {
        "rank-sha-mod-4" | "sha-mod-4" => {
            let e = curve("37a1")?;
            let discs = [-4i64, 17, 89];
            r.inputs = json!({"curve": "37a1", "field": "Q(sqrt(-1),sqrt(17),sqrt(89))", "modulus": 4});
            let f = AbelianField::multiquadratic(&discs)?;
            let cert = f.certify_split_multiple(4);
            r.check("every place splits into a multiple of 4", cert.verdict, json!(cert));
            let fx = fixtures()?;
            let mut sha_sum = 0u32;
            let mut rank_sum = 0u32;
            let mut ranks_ok = true;
            let mut rows = Vec::new();
            for d in twist_classes(&discs) {
                let sqf = arith::squarefree_part(d as i128)?;
                let key = sqf.to_string();
                let sha = fixture(&fx.sha2_dim, "37a1", &key)?;
                r.fixtures_used.push(format!("sha2_dim.37a1.{key}"));
                sha_sum += sha;
                if statement == "rank-sha-mod-4" {
                    let t = e.quadratic_twist(d)?;
                    let (rank, mut row) = rank_row(&t, sqf)?;
                    match rank {
                        Some(k) => rank_sum += k,
                        None => ranks_ok = false,
                    }
                    let expect = u32::from([1, -17, -89, 1513].contains(&sqf));
                    ranks_ok &= rank == Some(expect);
                    row["sha2_dim"] = json!(sha);
                    rows.push(row);
                } else {
                    rows.push(json!({"d": sqf, "sha2_dim": sha}));
                }
            }
            if statement == "rank-sha-mod-4" {
                r.check(
                    "ranks 1 for 1,-17,-89,1513 and 0 otherwise",
                    ranks_ok,
                    json!({"twists": rows, "note": "analytic rank <= 1 equals Mordell-Weil rank (Kolyvagin)"}),
                );
                let s = (rank_sum + sha_sum) % 4;
                r.fixture_check(
                    "sum of rank + dim Sha[2] is 2 mod 4",
                    "sha2_dim.37a1".into(),
                    ranks_ok && s == 2,
                    json!({"rank_sum": rank_sum, "sha_sum": sha_sum, "mod_4": s}),
                );
            } else {
                let s = sha_sum % 4;
                r.fixture_check(
                    "sum of dim Sha[2] is 2 mod 4",
                    "sha2_dim.37a1".into(),
                    s == 2,
                    json!({"twists": rows, "mod_4": s}),
                );
            }
            r.fixtures_used.sort();
            r.fixtures_used.dedup();
        }
        "cubic-parity" => {
            let e = curve("19a3")?;
            let chi = DirichletCharacter::new(7, vec![2])?;
            r.inputs = json!({"curve": "19a3", "character": {"modulus": 7, "exponents": [2], "chi(3)": "e^(2 pi i/3)"},
                              "field": "Q(sqrt(-1),sqrt(17))"});
            let f = AbelianField::multiquadratic(&[-4, 17])?;
            let cert = f.certify_split_multiple(2);
            r.check("every place splits into a multiple of 2", cert.verdict, json!(cert));
            let mut orders = Vec::new();
            let mut rows = Vec::new();
            for d in [1i64, -4, 17, -68] {
                let t = e.quadratic_twist(d)?;
                let v = lfunc::twisted_central_value::<f64>(&t, &chi)?;
                let order = match v.verdict {
                    Verdict::Nonzero => Some(0u32),
                    Verdict::Zero => {
                        let dv = lfunc::twisted_central_derivative::<f64>(&t, &chi)?;
                        rows.push(json!({"d": d, "derivative": dv}));
                        (dv.verdict == Verdict::Nonzero).then_some(1)
                    }
                    Verdict::Indeterminate => None,
                };
                rows.push(json!({"d": d, "value": v, "order": order}));
                orders.push(order);
            }
            let decided: Option<Vec<u32>> = orders.iter().copied().collect();
            r.check("orders are 0, 0, 0, 1", decided.as_deref() == Some(&[0, 0, 0, 1]), json!(rows));
            let sum: u32 = decided.iter().flatten().sum();
            r.check("sum of orders is odd", decided.is_some() && sum % 2 == 1, json!({"sum": sum}));
        }
        _ => return Err(HarnessError::UnknownStatement(statement.to_string())),
    }
    Ok(r.finish())
}

/// Torsion and Selmer parities over multiquadratic fields.
pub fn verify_torsion_claims() -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new("torsion", json!({"curves": ["14a1", "24a4", "480a1", "37a1"]}));
    let discs = [-4i64, 17];
    let f = AbelianField::multiquadratic(&discs)?;
    let cert = f.certify_split_multiple(2);
    r.check("Q(sqrt(-1),sqrt(17)): every place splits into a multiple of 2", cert.verdict, json!(cert));
    let t14 = curve("14a1")?.two_torsion();
    let o = t14.order_over(&discs);
    r.check("14a1: E(F)[2] has order 2", o == 2, json!({"order": o, "cubic": t14.factorization_type()}));
    let sel = fixture(&fixtures()?.selmer2_order, "14a1", "-4,17")?;
    r.fixture_check(
        "14a1: dim Sel_2 over F is odd",
        "selmer2_order.14a1.-4,17".into(),
        sel.is_power_of_two() && sel.trailing_zeros() % 2 == 1,
        json!({"order": sel}),
    );
    r.push(
        "24a4: dim E(F)[p] = 1",
        Status::Skipped,
        json!("rests on the surjectivity of the mod-p Galois representation; not computed"),
    );
    let t480 = curve("480a1")?.two_torsion();
    let controls: Vec<u32> = [&[][..], &[-4][..], &[-4, 41, 73][..]].iter().map(|d| t480.order_over(d)).collect();
    r.check("480a1: order 4 over every field", controls.iter().all(|&o| o == 4), json!(controls));
    let t37 = curve("37a1")?.two_torsion();
    let o37 = t37.order_over(&[-4, 17, 89]);
    r.check("37a1: order 1 over Q(sqrt(-1),sqrt(17),sqrt(89))", o37 == 1, json!({"order": o37}));
    Ok(r.finish())
}

// ---------------------------------------------------------------------------
// conditional constructions

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Demo {
    /// rank-1 twist, then a (Z/p)^3 field avoiding the zeros of L(E_D, χ, 1)
    ModP { p: u64, curve: String, conductor_bound: u64, max_twist: u64 },
    /// rank-2 twist, then a (Z/2)^d field avoiding twists of order > 1
    Mod4 { curve: String, conductor_bound: u64, max_twist: u64, max_l_conductor: u64 },
}

impl Demo {
    pub fn mod_p_default() -> Self {
        Demo::ModP { p: 3, curve: "37a1".into(), conductor_bound: 10_000, max_twist: 200 }
    }
    pub fn mod_4_default() -> Self {
        Demo::Mod4 { curve: "0,1,1,-2,0".into(), conductor_bound: 10_000, max_twist: 200, max_l_conductor: 2_000_000_000 }
    }
}

/// Fundamental discriminants ordered by |D| then sign, starting with 1.
fn fundamental_discriminants(max: u64) -> impl Iterator<Item = i64> {
    std::iter::once(1).chain(
        (2..=max as i64).flat_map(|a| [a, -a]).filter(|&d| is_fundamental_discriminant(d)),
    )
}

fn quadratic_disc(chi: &DirichletCharacter) -> i64 {
    let f = chi.conductor() as i64;
    if chi.is_even() {
        f
    } else {
        -f
    }
}

fn find_twist(e: &EllipticCurveQ, want: RankDecision, max: u64) -> Result<(i64, EllipticCurveQ), HarnessError> {
    for d in fundamental_discriminants(max) {
        let t = e.quadratic_twist(d)?;
        let dec = if want == RankDecision::Two {
            lfunc::analytic_rank_leq2(&t)
        } else {
            lfunc::analytic_rank_leq1(&t)
        };
        if matches!(dec, Ok(x) if x == want) {
            return Ok((d, t));
        }
    }
    Err(HarnessError::NoTwist(max))
}

pub fn demo_conditional(demo: &Demo) -> Result<VerificationReport, HarnessError> {
    match demo {
        Demo::ModP { p, curve, conductor_bound, max_twist } => demo_mod_p(*p, curve, *conductor_bound, *max_twist, demo),
        Demo::Mod4 { curve, conductor_bound, max_twist, max_l_conductor } => {
            demo_mod_4(curve, *conductor_bound, *max_twist, *max_l_conductor, demo)
        }
    }
}

fn demo_mod_p(p: u64, label: &str, bound: u64, max_twist: u64, demo: &Demo) -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new("demo-mod-p", json!(demo));
    let e = EllipticCurveQ::parse(label)?;
    let (d, ed) = find_twist(&e, RankDecision::One, max_twist)?;
    let n = ed.conductor_u64();
    r.check("twist of analytic rank 1", true, json!({"d": d, "conductor": n}));

    // S: characters with L(E_D, χ, 1) = 0, plus those that cannot be
    // evaluated (modulus not prime to N), which are avoided conservatively
    let (evaluated, zeros, unevaluable) = (Cell::new(0usize), Cell::new(0usize), Cell::new(0usize));
    let avoid = PredicateAvoid::new(|chi: &DirichletCharacter| {
        if num_integer::gcd(chi.conductor(), n) != 1 {
            unevaluable.set(unevaluable.get() + 1);
            return true;
        }
        evaluated.set(evaluated.get() + 1);
        match lfunc::twisted_central_value::<f64>(&ed, chi) {
            Ok(v) if v.verdict == Verdict::Nonzero => false,
            _ => {
                zeros.set(zeros.get() + 1);
                true
            }
        }
    });
    let f = density_construct(p, 3, &avoid, &[], bound)?;
    r.check(
        "field with group (Z/p)^3 avoiding S",
        f.degree() == p.pow(3),
        json!({"field": f.to_description(), "generator_conductors": f.generators().iter().map(|c| c.conductor()).collect::<Vec<_>>(),
               "characters_evaluated": evaluated.get(), "zeros_or_undecided": zeros.get(), "avoided_unevaluable": unevaluable.get()}),
    );
    let cert = f.certify_split_multiple(p);
    r.check(format!("every place splits into a multiple of {p}"), cert.verdict, json!(cert));

    // L(E_D/F, s) = Π_χ L(E_D, χ, s) has a simple zero at s = 1
    let lead = lfunc::central_derivative::<f64>(&ed)?;
    let mut nonzero = 0usize;
    let mut rows = Vec::new();
    for chi in f.characters().iter().filter(|c| !c.is_trivial()) {
        let prim = chi.primitive();
        let v = lfunc::twisted_central_value::<f64>(&ed, &prim)?;
        nonzero += usize::from(v.verdict == Verdict::Nonzero);
        rows.push(json!({"conductor": prim.conductor(), "exponents": prim.exponents(), "abs": v.abs(), "verdict": v.verdict}));
    }
    let total = f.characters().len() - 1;
    r.check(
        "L(E_D/F, s) has a simple zero at s=1",
        lead.verdict == Verdict::Nonzero && nonzero == total,
        json!({"derivative_trivial_character": lead.re, "nonvanishing_twists": nonzero, "of": total, "twists": rows}),
    );
    Ok(r.finish())
}

fn demo_mod_4(
    label: &str,
    bound: u64,
    max_twist: u64,
    max_l_conductor: u64,
    demo: &Demo,
) -> Result<VerificationReport, HarnessError> {
    let mut r = VerificationReport::new("demo-mod-4", json!(demo));
    let e = EllipticCurveQ::parse(label)?;
    let (d, ep) = find_twist(&e, RankDecision::Two, max_twist)?;
    let n = ep.conductor_u64();
    r.check("twist of analytic rank 2", true, json!({"d": d, "conductor": n}));
    let mut places: Vec<Place> = ep.bad_primes().into_iter().map(Place::Prime).collect();
    places.push(Place::Infinity);
    let dim = 5 + 3 * places.len() as u32;

    // S: quadratic χ with ord L(E', χ, s) > 1, decided where the twisted
    // conductor is within reach
    let (evaluated, hits, skipped) = (Cell::new(0usize), Cell::new(0usize), Cell::new(0usize));
    let avoid = PredicateAvoid::new(|chi: &DirichletCharacter| {
        let dc = quadratic_disc(chi);
        let Ok(t) = ep.quadratic_twist(dc) else {
            skipped.set(skipped.get() + 1);
            return false;
        };
        if *t.conductor() > num_bigint::BigInt::from(max_l_conductor) {
            skipped.set(skipped.get() + 1);
            return false;
        }
        evaluated.set(evaluated.get() + 1);
        let high = !matches!(lfunc::analytic_rank_leq1(&t), Ok(RankDecision::Zero | RankDecision::One));
        hits.set(hits.get() + usize::from(high));
        high
    });
    let fd = density_construct(2, dim, &avoid, &[], bound)?;
    r.check(
        "field with group (Z/2)^d, d = 5 + 3|P|",
        fd.degree() == 1 << dim,
        json!({"d": dim, "P": places, "discriminants": fd.generators().iter().map(quadratic_disc).collect::<Vec<_>>(),
               "twists_evaluated": evaluated.get(), "avoided": hits.get()}),
    );
    r.push(
        "avoidance of S for characters beyond the conductor bound",
        if skipped.get() == 0 { Status::Pass } else { Status::Skipped },
        json!({"unevaluated_characters": skipped.get(), "max_twist_conductor": max_l_conductor}),
    );

    // force complete splitting at P one place at a time
    let mut sub = fd.clone();
    let mut drops = Vec::new();
    for &pl in &places {
        let before = sub.degree().trailing_zeros();
        sub = sub.fixed_subfield(&sub.decomposition_units(pl));
        drops.push(json!({"place": pl, "drop": before - sub.degree().trailing_zeros()}));
    }
    let max_drop = drops.iter().filter_map(|v| v["drop"].as_u64()).max().unwrap_or(0);
    r.check("splitting one place completely costs at most 3 dimensions", max_drop <= 3, json!(drops));
    let gens: Vec<DirichletCharacter> = sub.generators().iter().take(5).cloned().collect();
    let f = AbelianField::from_characters(&gens)?;
    let all_split = places.iter().all(|&pl| f.split(pl) == SplitData { e: 1, f: 1, g: f.degree() });
    r.check(
        "degree 32 subfield with P split completely",
        f.degree() == 32 && all_split,
        json!({"discriminants": f.quadratic_subfield_discs()}),
    );
    let cert = f.certify_split_multiple(4);
    r.check("every place splits into a multiple of 4", cert.verdict, json!(cert));

    // root number of E' over each quadratic subfield, two ways
    let w = rootnum::global_root_number(&ep)?.global;
    let local: Vec<(Place, i8)> =
        places.iter().map(|&pl| Ok((pl, rootnum::local_root_number(&ep, pl)?))).collect::<Result<_, RootError>>()?;
    let mut rows = Vec::new();
    let mut all_plus = true;
    for m in f.quadratic_subfield_discs() {
        let km = AbelianField::multiquadratic(&[m])?;
        // every place of P splits in Q(√m): each local value occurs twice
        let product: i8 = local.iter().map(|&(pl, v)| v.pow(km.split(pl).g as u32)).product();
        let via_twist = w * rootnum::quad_twist_sign(&ep, m)?;
        all_plus &= product == 1 && via_twist == 1;
        rows.push(json!({"m": m, "product_formula": product, "w(E')w(E'_m)": via_twist}));
    }
    r.check("root number of E' over every quadratic subfield is +1", all_plus, json!(rows));

    let mut ranks = Vec::new();
    let mut unevaluated = 0usize;
    let mut consistent = true;
    for m in f.quadratic_subfield_discs() {
        let t = ep.quadratic_twist(m)?;
        if *t.conductor() > num_bigint::BigInt::from(max_l_conductor) {
            unevaluated += 1;
            continue;
        }
        let dec = lfunc::analytic_rank_leq1(&t)?;
        consistent &= dec == RankDecision::Zero;
        ranks.push(json!({"m": m, "analytic_rank": dec}));
    }
    r.check("evaluated twists E'_m have analytic rank 0", consistent, json!(ranks));
    if unevaluated > 0 {
        r.push(
            "analytic ranks of the remaining twists",
            Status::Skipped,
            json!({"unevaluated": unevaluated, "max_twist_conductor": max_l_conductor}),
        );
    }
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_file_parses() {
        let f = fixtures().unwrap();
        assert_eq!(f.rank_over_field["480a1"]["F3"], 1);
        assert_eq!(f.sha2_dim["37a1"].values().sum::<u32>(), 2);
        assert_eq!(f.selmer2_order["14a1"]["-4,17"], 8);
    }

    #[test]
    fn outcome_codes() {
        assert_eq!(Outcome::Verified.exit_code(), 0);
        assert_eq!(Outcome::VerifiedWithFixtures.exit_code(), 10);
        assert_eq!(Outcome::OutOfScopePartsSkipped.exit_code(), 20);
        assert_eq!(Outcome::Failed.exit_code(), 1);
        let mut r = VerificationReport::new("x", Value::Null);
        r.fixture_check("a", "k".into(), true, Value::Null);
        assert_eq!(r.clone().finish().verdict, Outcome::VerifiedWithFixtures);
        r.push("b", Status::Skipped, Value::Null);
        assert_eq!(r.clone().finish().verdict, Outcome::OutOfScopePartsSkipped);
        r.check("c", false, Value::Null);
        assert_eq!(r.finish().verdict, Outcome::Failed);
    }

    #[test]
    fn local_table_sum_counts_places() {
        let f = field_f4().unwrap();
        let mut t = LocalInvariantTable::new(4);
        // 7 splits as (1, 2, 4) in F4
        t.set(Place::Prime(7), 1, 2, 3);
        t.set(Place::Prime(7), 1, 1, 1);
        assert_eq!(t.global_sum(&mut |pl| f.split(pl)), 0);
        let qi = AbelianField::multiquadratic(&[-4]).unwrap();
        let mut t = LocalInvariantTable::new(2);
        t.set(Place::Prime(2), 2, 1, 1);
        assert_eq!(t.global_sum(&mut |pl| qi.split(pl)), 1);
    }

    #[test]
    fn lemma_split_examples() {
        assert_eq!(check_lemma_split(&field_f3().unwrap(), 3, 100, 7).verdict, Outcome::Verified);
        assert_eq!(check_lemma_split(&field_f5().unwrap(), 5, 100, 7).verdict, Outcome::Verified);
        let qi = check_lemma_split(&AbelianField::multiquadratic(&[-4]).unwrap(), 2, 10, 7);
        assert_eq!(qi.verdict, Outcome::Failed);
        assert_eq!(qi.checks.last().unwrap().detail, json!("inapplicable: hypothesis not met"));
    }

    #[test]
    fn named_fields() {
        assert_eq!(named_field("F4").unwrap().unwrap().degree(), 8);
        assert_eq!(named_field("-4,17").unwrap().unwrap().degree(), 4);
        assert!(named_field("-4,18").unwrap().is_none());
        assert!(named_field("nonsense").unwrap().is_none());
    }
}
