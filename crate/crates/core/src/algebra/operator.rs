//! Univariate polynomials in the differentiation operator with rational
//! function coefficients.

use std::fmt;

use num_traits::Signed;

use super::poly::{MultiPoly, Symbols};
use super::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorPoly {
    coeffs: Vec<RatFunc>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        OperatorPoly { coeffs: Vec::new() }
    }

    pub fn new(mut coeffs: Vec<RatFunc>) -> Self {
        while coeffs.last().is_some_and(RatFunc::is_zero) {
            coeffs.pop();
        }
        OperatorPoly { coeffs }
    }

    /// Splits a polynomial by powers of the variable `var`.
    pub fn from_poly_in(p: &MultiPoly, var: usize) -> Self {
        Self::new(p.coeffs_in(var).into_iter().map(RatFunc::from_poly).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero operator.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&RatFunc> {
        self.coeffs.get(k)
    }

    pub fn leading(&self) -> Option<&RatFunc> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(RatFunc::is_one)
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Self {
        let Some(lc) = self.leading() else {
            return self.clone();
        };
        let inv = lc.recip().expect("leading coefficient is nonzero");
        Self::new(self.coeffs.iter().map(|c| c * &inv).collect())
    }

    pub fn display<'a>(&'a self, symbols: &'a Symbols, var: &'a str) -> OperatorDisplay<'a> {
        OperatorDisplay { p: self, symbols, var }
    }
}

pub struct OperatorDisplay<'a> {
    p: &'a OperatorPoly,
    symbols: &'a Symbols,
    var: &'a str,
}

impl fmt::Display for OperatorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.p.coeffs.iter().enumerate().rev().filter(|(_, c)| !c.is_zero()).map(|(k, c)| {
            let label = match k {
                0 => String::new(),
                1 => self.var.to_string(),
                _ => format!("{}^{k}", self.var),
            };
            (c.clone(), label)
        });
        write_combination(f, terms, self.symbols)
    }
}

/// Writes `c1*m1 + c2*m2 - ...` where an empty label stands for the constant
/// monomial. Negative single-term coefficients are folded into the sign.
pub fn write_combination<I>(f: &mut fmt::Formatter<'_>, terms: I, symbols: &Symbols) -> fmt::Result
where
    I: IntoIterator<Item = (RatFunc, String)>,
{
    let mut first = true;
    for (c, label) in terms {
        let negative = c.numer().num_terms() == 1 && c.numer().leading_coeff().is_negative();
        let c = if negative { -c } else { c };
        match (first, negative) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        first = false;
        let body = c.display(symbols).to_string();
        if label.is_empty() {
            write!(f, "{body}")?;
        } else if c.is_one() {
            write!(f, "{label}")?;
        } else if c.is_polynomial() && c.numer().num_terms() > 1 {
            write!(f, "({body})*{label}")?;
        } else if !c.is_polynomial() && !body.starts_with('(') {
            write!(f, "({body})*{label}")?;
        } else {
            write!(f, "{body}*{label}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}
