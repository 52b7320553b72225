use num_rational::BigRational;

use crate::algebra::{RatFunc, Symbols};
use crate::error::ModelError;

/// `x' = A x + B u + f0`, `y = C x + D u + g0` with rational-function
/// entries. The symbol table lists the parameters followed by the operator
/// variable `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearModel {
    pub name: String,
    pub symbols: Symbols,
    pub states: Vec<String>,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
    pub a: Vec<Vec<RatFunc>>,
    pub b: Vec<Vec<RatFunc>>,
    pub c: Vec<Vec<RatFunc>>,
    pub d: Vec<Vec<RatFunc>>,
    pub f0: Vec<RatFunc>,
    pub g0: Vec<RatFunc>,
}

/// Model matrices evaluated at a parameter point.
#[derive(Clone, Debug)]
pub struct NumericModel {
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<Vec<BigRational>>,
    pub c: Vec<Vec<BigRational>>,
    pub d: Vec<Vec<BigRational>>,
    pub f0: Vec<BigRational>,
    pub g0: Vec<BigRational>,
}

impl LinearModel {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    /// Number of parameters, excluding the operator variable.
    pub fn num_params(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn params(&self) -> &[String] {
        &self.symbols.names()[..self.num_params()]
    }

    /// Index of the operator variable `s` in the symbol table.
    pub fn operator_var(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.symbols.len()
    }

    pub fn has_offsets(&self) -> bool {
        self.f0.iter().chain(&self.g0).any(|v| !v.is_zero())
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|o| o == name)
    }

    /// Checks dimensions and that no entry mentions the operator variable.
    pub fn validate(&self) -> Result<(), ModelError> {
        let (n, m, k) = (self.n(), self.m(), self.num_inputs());
        let shape_ok =
            |mat: &Vec<Vec<RatFunc>>, r: usize, c: usize| mat.len() == r && mat.iter().all(|row| row.len() == c);
        if n == 0 {
            return Err(ModelError::Invalid("model has no states".into()));
        }
        if !shape_ok(&self.a, n, n)
            || !shape_ok(&self.b, n, k)
            || !shape_ok(&self.c, m, n)
            || !shape_ok(&self.d, m, k)
            || self.f0.len() != n
            || self.g0.len() != m
        {
            return Err(ModelError::Invalid("inconsistent matrix dimensions".into()));
        }
        let s = self.operator_var();
        let all = self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d).flatten().chain(&self.f0).chain(&self.g0);
        for e in all {
            if e.nvars() != self.nvars() {
                return Err(ModelError::Invalid("entry over a different symbol table".into()));
            }
            if e.depends_on(s) {
                return Err(ModelError::Invalid("entry depends on the operator variable".into()));
            }
        }
        Ok(())
    }

    /// Evaluates every entry at `params` (one value per parameter); `None`
    /// when a denominator vanishes.
    pub fn at(&self, params: &[BigRational]) -> Option<NumericModel> {
        let mut point = params.to_vec();
        point.push(BigRational::from_integer(0.into()));
        let ev = |e: &RatFunc| e.eval(&point);
        let mat = |m: &Vec<Vec<RatFunc>>| {
            m.iter().map(|row| row.iter().map(ev).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()
        };
        Some(NumericModel {
            a: mat(&self.a)?,
            b: mat(&self.b)?,
            c: mat(&self.c)?,
            d: mat(&self.d)?,
            f0: self.f0.iter().map(ev).collect::<Option<_>>()?,
            g0: self.g0.iter().map(ev).collect::<Option<_>>()?,
        })
    }
}
