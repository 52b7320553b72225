//! Tokenizer and expression parser shared by both block kinds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::RatFunc;
use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    Arrow,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
}

/// Splits one line into tokens. `#` starts a comment. Columns are 1-based.
pub fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse::<BigInt>().expect("ascii digits");
            out.push(Token { tok: Tok::Int(value), col });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Arrow, col });
            i += 2;
            continue;
        }
        if "+-*/^()='".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
            continue;
        }
        return Err(ModelError::Syntax { line: line_no, col, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Ident { name: String, col: usize },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, i64, usize),
}

/// Recursive-descent parser over a token slice.
pub struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [Token], line: usize, end_col: usize) -> Self {
        ExprParser { toks, pos: 0, line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        ModelError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    /// Parses the whole slice as one expression.
    pub fn parse_all(mut self) -> Result<Expr, ModelError> {
        let e = self.sum()?;
        if self.pos < self.toks.len() {
            return Err(self.err("unexpected token after expression"));
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Sym('-')) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('*')) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Sym('/')) => {
                    let col = self.col();
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), col);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        match self.peek() {
            Some(Tok::Sym('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Sym('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ModelError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Sym('^')) {
            return Ok(base);
        }
        let col = self.col();
        self.pos += 1;
        let negative = if self.peek() == Some(&Tok::Sym('-')) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Int(n)) => {
                let e = n.to_i64().filter(|e| *e <= 64).ok_or_else(|| self.err("exponent too large"))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), if negative { -e } else { e }, col))
            }
            _ => Err(self.err("expected an integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ModelError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Ident { name, col })
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(&Tok::Sym(')')) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => Err(self.err("expected a number, symbol or `(`")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

/// How an identifier is interpreted during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    /// Parameter with the given symbol-table index.
    Param(usize),
    /// State or input with the given slot in the affine form.
    Linear(usize),
}

/// `Σ coeff[k]·v_k + constant`, each coefficient a rational function of the
/// parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub linear: Vec<RatFunc>,
    pub constant: RatFunc,
}

impl Affine {
    fn constant(slots: usize, c: RatFunc) -> Self {
        let n = c.nvars();
        Affine { linear: vec![RatFunc::zero(n); slots], constant: c }
    }

    pub fn is_constant(&self) -> bool {
        self.linear.iter().all(RatFunc::is_zero)
    }

    fn map(&self, f: impl Fn(&RatFunc) -> RatFunc) -> Self {
        Affine { linear: self.linear.iter().map(&f).collect(), constant: f(&self.constant) }
    }

    fn zip(&self, other: &Affine, f: impl Fn(&RatFunc, &RatFunc) -> RatFunc) -> Self {
        Affine {
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| f(a, b)).collect(),
            constant: f(&self.constant, &other.constant),
        }
    }
}

/// Evaluates `e` as an affine form in the `Linear` symbols. `resolve` maps an
/// identifier to its binding or `None` when undeclared.
pub fn eval_affine<F>(e: &Expr, nvars: usize, slots: usize, line: usize, resolve: &F) -> Result<Affine, ModelError>
where
    F: Fn(&str) -> Option<Binding>,
{
    let rec = |x: &Expr| eval_affine(x, nvars, slots, line, resolve);
    Ok(match e {
        Expr::Num(n) => Affine::constant(slots, RatFunc::constant(nvars, BigRational::from_integer(n.clone()))),
        Expr::Ident { name, .. } => match resolve(name) {
            Some(Binding::Param(i)) => Affine::constant(slots, RatFunc::var(nvars, i)),
            Some(Binding::Linear(k)) => {
                let mut a = Affine::constant(slots, RatFunc::zero(nvars));
                a.linear[k] = RatFunc::one(nvars);
                a
            }
            None => {
                return Err(ModelError::Semantic { line, msg: format!("undeclared symbol `{name}`") });
            }
        },
        Expr::Neg(x) => rec(x)?.map(|c| -c),
        Expr::Add(x, y) => rec(x)?.zip(&rec(y)?, |a, b| a + b),
        Expr::Sub(x, y) => rec(x)?.zip(&rec(y)?, |a, b| a - b),
        Expr::Mul(x, y) => {
            let (a, b) = (rec(x)?, rec(y)?);
            match (a.is_constant(), b.is_constant()) {
                (true, _) => b.map(|c| c * &a.constant),
                (_, true) => a.map(|c| c * &b.constant),
                _ => {
                    return Err(ModelError::Nonlinear { line, msg: "product of two state or input terms".into() });
                }
            }
        }
        Expr::Div(x, y, col) => {
            let (a, b) = (rec(x)?, rec(y)?);
            if !b.is_constant() {
                return Err(ModelError::Nonlinear { line, msg: "division by a state or input".into() });
            }
            let inv = b
                .constant
                .recip()
                .map_err(|_| ModelError::Semantic { line, msg: format!("division by zero at column {col}") })?;
            a.map(|c| c * &inv)
        }
        Expr::Pow(x, k, col) => {
            let a = rec(x)?;
            if !a.is_constant() {
                return match k {
                    1 => Ok(a),
                    _ => Err(ModelError::Nonlinear { line, msg: format!("power {k} of a state or input") }),
                };
            }
            let base = if *k < 0 {
                a.constant.recip().map_err(|_| ModelError::Semantic {
                    line,
                    msg: format!("zero to a negative power at column {col}"),
                })?
            } else {
                a.constant
            };
            Affine::constant(slots, base.pow(k.unsigned_abs() as u32))
        }
    })
}

/// Evaluates a parameter-only expression.
pub fn eval_param_expr<F>(e: &Expr, nvars: usize, line: usize, resolve: &F) -> Result<RatFunc, ModelError>
where
    F: Fn(&str) -> Option<usize>,
{
    let r = |name: &str| resolve(name).map(Binding::Param);
    let a = eval_affine(e, nvars, 0, line, &r)?;
    Ok(a.constant)
}

/// Identifiers appearing in `e`, in order of occurrence.
pub fn identifiers(e: &Expr, out: &mut Vec<(String, usize)>) {
    match e {
        Expr::Num(_) => {}
        Expr::Ident { name, col } => out.push((name.clone(), *col)),
        Expr::Neg(x) | Expr::Pow(x, _, _) => identifiers(x, out),
        Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y, _) => {
            identifiers(x, out);
            identifiers(y, out);
        }
    }
}

/// Evaluates `e` at rational values. `Err` names an unbound identifier;
/// `Ok(None)` signals a division by zero.
pub fn eval_rational<F>(e: &Expr, env: &F) -> Result<Option<BigRational>, String>
where
    F: Fn(&str) -> Option<BigRational>,
{
    let rec = |x: &Expr| eval_rational(x, env);
    Ok(match e {
        Expr::Num(n) => Some(BigRational::from_integer(n.clone())),
        Expr::Ident { name, .. } => Some(env(name).ok_or_else(|| name.clone())?),
        Expr::Neg(x) => rec(x)?.map(|v| -v),
        Expr::Add(x, y) => rec(x)?.zip(rec(y)?).map(|(a, b)| a + b),
        Expr::Sub(x, y) => rec(x)?.zip(rec(y)?).map(|(a, b)| a - b),
        Expr::Mul(x, y) => rec(x)?.zip(rec(y)?).map(|(a, b)| a * b),
        Expr::Div(x, y, _) => match (rec(x)?, rec(y)?) {
            (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
            _ => None,
        },
        Expr::Pow(x, k, _) => match rec(x)? {
            Some(v) if *k >= 0 => Some(num_traits::pow(v, *k as usize)),
            Some(v) if !v.is_zero() => Some(num_traits::pow(v.recip(), k.unsigned_abs() as usize)),
            _ => None,
        },
    })
}

/// Parses a standalone expression such as a command-line argument.
pub fn parse_expr(text: &str) -> Result<Expr, ModelError> {
    let toks = tokenize(text, 1)?;
    ExprParser::new(&toks, 1, text.chars().count() + 1).parse_all()
}
