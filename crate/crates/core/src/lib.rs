//! Rank congruences for elliptic curves over abelian fields: splitting
//! certificates, complete 2-descent, root numbers and L-values.
//!
//! Numerical routines are generic over `T: Float + FloatConst`; the aliases
//! below fix `T = f64`, which is what the pipelines use.

pub mod abfield;
pub mod arith;
pub mod descent2;
pub mod dirichlet;
pub mod elliptic;
pub mod harness;
pub mod lfunc;
pub mod rootnum;

/// Central value report in double precision.
pub type CentralValue = lfunc::CentralValueReport<f64>;

pub fn central_value(e: &elliptic::EllipticCurveQ) -> Result<CentralValue, lfunc::LError> {
    lfunc::central_value::<f64>(e)
}

pub fn central_derivative(e: &elliptic::EllipticCurveQ) -> Result<CentralValue, lfunc::LError> {
    lfunc::central_derivative::<f64>(e)
}

pub fn twisted_central_value(
    e: &elliptic::EllipticCurveQ,
    chi: &dirichlet::DirichletCharacter,
) -> Result<CentralValue, lfunc::LError> {
    lfunc::twisted_central_value::<f64>(e, chi)
}

pub fn twisted_central_derivative(
    e: &elliptic::EllipticCurveQ,
    chi: &dirichlet::DirichletCharacter,
) -> Result<CentralValue, lfunc::LError> {
    lfunc::twisted_central_derivative::<f64>(e, chi)
}
