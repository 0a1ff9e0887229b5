//! Local and global root numbers of elliptic curves over Q.
//!
//! Local values come from the reduction type, with the residue-symbol rule
//! for additive p ≥ 5. Additive places above 2 and 3 have no closed formula
//! here: their value is back-solved from the numerically determined global
//! sign.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abfield::Place;
use crate::arith::kronecker;
use crate::elliptic::{EllipticCurveQ, EllipticError, Reduction};
use crate::lfunc::{self, LError};

#[derive(Debug, Error)]
pub enum RootError {
    #[error("additive reduction at {0}: local root number needs the numeric path")]
    NeedsNumeric(u64),
    #[error("discriminant {d} shares a factor with the conductor {n}")]
    NotCoprime { d: i64, n: u64 },
    #[error(transparent)]
    Curve(#[from] EllipticError),
    #[error(transparent)]
    Numeric(#[from] Box<LError>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Formula,
    NumericFallback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRootEntry {
    pub place: Place,
    /// None when only the joint value at 2 and 3 is known
    pub value: Option<i8>,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootNumberReport {
    pub curve: String,
    pub entries: Vec<LocalRootEntry>,
    /// product of the local values at 2 and 3 when neither is determined alone
    pub joint_2_3: Option<i8>,
    pub global: i8,
}

impl RootNumberReport {
    pub fn value_at(&self, place: Place) -> Option<i8> {
        match place {
            Place::Prime(p) if !self.entries.iter().any(|e| e.place == place) => {
                let _ = p;
                Some(1)
            }
            _ => self.entries.iter().find(|e| e.place == place)?.value,
        }
    }

    pub fn used_numeric(&self) -> bool {
        self.entries.iter().any(|e| e.method == Method::NumericFallback)
    }
}

/// Local root number of E at a place.
pub fn local_root_number(e: &EllipticCurveQ, place: Place) -> Result<i8, RootError> {
    let p = match place {
        Place::Infinity => return Ok(-1),
        Place::Prime(p) => p,
    };
    let ld = e.local_data(p)?;
    Ok(match ld.kind {
        Reduction::Good => 1,
        Reduction::SplitMultiplicative => -1,
        Reduction::NonsplitMultiplicative => 1,
        Reduction::Additive if p < 5 => return Err(RootError::NeedsNumeric(p)),
        Reduction::Additive => {
            let p = p as i64;
            if ld.v_j.is_some_and(|v| v < 0) {
                kronecker(-1, p)
            } else {
                match 12 / (ld.v_disc as i64).gcd(&12) {
                    2 | 6 => kronecker(-1, p),
                    3 => kronecker(-3, p),
                    4 => kronecker(-2, p),
                    e => unreachable!("semistability defect {e} with additive reduction"),
                }
            }
        }
    })
}

fn cache() -> &'static Mutex<HashMap<String, RootNumberReport>> {
    static C: OnceLock<Mutex<HashMap<String, RootNumberReport>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn cache_key(e: &EllipticCurveQ) -> String {
    e.a_invariants()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Global root number with its local decomposition.
pub fn global_root_number(e: &EllipticCurveQ) -> Result<RootNumberReport, RootError> {
    let key = cache_key(e);
    if let Some(r) = cache().lock().expect("root cache").get(&key) {
        return Ok(r.clone());
    }
    let mut entries = vec![LocalRootEntry {
        place: Place::Infinity,
        value: Some(-1),
        method: Method::Formula,
    }];
    let mut known = -1i8;
    let mut unknown = Vec::new();
    for p in e.bad_primes() {
        match local_root_number(e, Place::Prime(p)) {
            Ok(v) => {
                known *= v;
                entries.push(LocalRootEntry {
                    place: Place::Prime(p),
                    value: Some(v),
                    method: Method::Formula,
                });
            }
            Err(RootError::NeedsNumeric(p)) => unknown.push(p),
            Err(err) => return Err(err),
        }
    }
    let mut joint = None;
    let global = if unknown.is_empty() {
        known
    } else {
        let w = lfunc::numeric_sign::<f64>(e).map_err(Box::new)?;
        let residual = w * known;
        let single = unknown.len() == 1;
        if !single {
            joint = Some(residual);
        }
        for p in unknown {
            entries.push(LocalRootEntry {
                place: Place::Prime(p),
                value: single.then_some(residual),
                method: Method::NumericFallback,
            });
        }
        w
    };
    entries.sort_by_key(|e| match e.place {
        Place::Prime(p) => p,
        Place::Infinity => u64::MAX,
    });
    let report = RootNumberReport {
        curve: e.name(),
        entries,
        joint_2_3: joint,
        global,
    };
    cache().lock().expect("root cache").insert(key, report.clone());
    Ok(report)
}

/// w(E_D) = χ_D(−N)·w(E) for a fundamental discriminant D prime to N.
pub fn quad_twist_sign(e: &EllipticCurveQ, d: i64) -> Result<i8, RootError> {
    let n = e.conductor_u64();
    if (d.unsigned_abs()).gcd(&n) != 1 {
        return Err(RootError::NotCoprime { d, n });
    }
    let w = global_root_number(e)?.global;
    Ok(kronecker(d, -(n as i64)) * w)
}
