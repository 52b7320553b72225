//! Exact arithmetic: rationals, sparse polynomials, rational functions,
//! fraction-free linear algebra and polynomial gcd.

pub mod gcd;
pub mod linalg;
pub mod modp;
pub mod operator;
pub mod poly;
pub mod ratfunc;

pub use gcd::{poly_gcd, poly_lcm};
pub use linalg::{bareiss_det, solve_linear};
pub use operator::OperatorPoly;
pub use poly::{Monomial, MultiPoly, Symbols};
pub use ratfunc::RatFunc;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Shorthand for `n / d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
