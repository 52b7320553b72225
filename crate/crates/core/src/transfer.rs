//! Transfer-function matrix `C (sI − A)^{-1} B + D` with reduced entries.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{bareiss_det, poly_lcm, MultiPoly, OperatorPoly, RatFunc, Symbols};
use crate::model::LinearModel;

/// `num(s) / den(s)` over the rational functions in the parameters, coprime
/// and with `den` monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferEntry {
    pub num: OperatorPoly,
    pub den: OperatorPoly,
}

impl TransferEntry {
    /// Splits a reduced rational function of the parameters and `s`.
    pub fn from_ratfunc(f: &RatFunc, s_var: usize) -> Self {
        let nv = f.nvars();
        if f.is_zero() {
            return TransferEntry { num: OperatorPoly::zero(), den: OperatorPoly::new(vec![RatFunc::one(nv)]) };
        }
        let den = OperatorPoly::from_poly_in(f.denom(), s_var);
        let lc = den.leading().expect("nonzero denominator").recip().expect("nonzero");
        let scale = |p: &OperatorPoly| OperatorPoly::new(p.coeffs().iter().map(|c| c * &lc).collect());
        TransferEntry { num: scale(&OperatorPoly::from_poly_in(f.numer(), s_var)), den: scale(&den) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn display<'a>(&'a self, symbols: &'a Symbols) -> TransferDisplay<'a> {
        TransferDisplay { e: self, symbols }
    }
}

pub struct TransferDisplay<'a> {
    e: &'a TransferEntry,
    symbols: &'a Symbols,
}

impl fmt::Display for TransferDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = |p: &OperatorPoly| p.coeffs().iter().filter(|c| !c.is_zero()).count() <= 1;
        let num = self.e.num.display(self.symbols, "s").to_string();
        if self.e.den.degree() == Some(0) {
            return write!(f, "{num}");
        }
        let den = self.e.den.display(self.symbols, "s").to_string();
        let wrap = |s: String, simple: bool| if simple { s } else { format!("({s})") };
        write!(f, "{}/{}", wrap(num, single(&self.e.num)), wrap(den, single(&self.e.den) && self.e.den.is_monic()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferMatrix {
    /// `entries[output][input]`
    pub entries: Vec<Vec<TransferEntry>>,
    /// Constant offsets were present and dropped; the matrix describes the
    /// offset-free part with zero initial conditions.
    pub offsets_ignored: bool,
}

/// `(L, P)` with `P = L·sI − L·A` polynomial, `L` the lcm of the
/// denominators of `A`.
fn cleared_resolvent(model: &LinearModel) -> (MultiPoly, Vec<Vec<MultiPoly>>) {
    let n = model.n();
    let nv = model.nvars();
    let mut l = MultiPoly::one(nv);
    for e in model.a.iter().flatten() {
        if !e.denom().is_one() {
            l = poly_lcm(&l, e.denom());
        }
    }
    let s = MultiPoly::var(nv, model.operator_var());
    let p = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let la = &l.div_exact(model.a[r][c].denom()).expect("lcm is a multiple") * model.a[r][c].numer();
                    if r == c {
                        &(&l * &s) - &la
                    } else {
                        -la
                    }
                })
                .collect()
        })
        .collect();
    (l, p)
}

/// Coefficients of `det(sI − A)` in ascending powers of `s`; the last is 1.
pub fn characteristic_coefficients(model: &LinearModel) -> Vec<RatFunc> {
    let (l, p) = cleared_resolvent(model);
    let det = bareiss_det(&p, model.nvars()).expect("square matrix");
    let scale = RatFunc::from_poly(l.pow(model.n() as u32)).recip().expect("lcm is nonzero");
    let mut coeffs = det.coeffs_in(model.operator_var());
    coeffs.resize(model.n() + 1, MultiPoly::zero(model.nvars()));
    coeffs.into_iter().map(|c| &RatFunc::from_poly(c) * &scale).collect()
}

/// Each entry as a reduced rational function of the parameters and `s`.
pub fn transfer_ratfuncs(model: &LinearModel) -> Vec<Vec<RatFunc>> {
    let n = model.n();
    let nv = model.nvars();
    // (sI − A)^{-1} = L·adj(P)/det(P) with P = L·sI − L·A.
    let (l, p) = cleared_resolvent(model);
    let det = bareiss_det(&p, nv).expect("square matrix");
    let mut cofactors: HashMap<(usize, usize), RatFunc> = HashMap::new();
    let mut adj = |r: usize, c: usize| -> RatFunc {
        cofactors
            .entry((r, c))
            .or_insert_with(|| {
                let sub: Vec<Vec<MultiPoly>> = (0..n)
                    .filter(|&i| i != c)
                    .map(|i| (0..n).filter(|&j| j != r).map(|j| p[i][j].clone()).collect())
                    .collect();
                let m = bareiss_det(&sub, nv).expect("square matrix");
                RatFunc::from_poly(if (r + c) % 2 == 0 { m } else { -m })
            })
            .clone()
    };
    let scale = RatFunc::new(l, det).expect("characteristic polynomial is nonzero");
    (0..model.m())
        .map(|i| {
            (0..model.num_inputs())
                .map(|j| {
                    let mut acc = RatFunc::zero(nv);
                    for r in 0..n {
                        if model.c[i][r].is_zero() {
                            continue;
                        }
                        for c in 0..n {
                            if model.b[c][j].is_zero() {
                                continue;
                            }
                            let term = &(&model.c[i][r] * &model.b[c][j]) * &adj(r, c);
                            acc = &acc + &term;
                        }
                    }
                    &(&acc * &scale) + &model.d[i][j]
                })
                .collect()
        })
        .collect()
}

pub fn transfer_matrix(model: &LinearModel) -> TransferMatrix {
    let s_var = model.operator_var();
    let entries = transfer_ratfuncs(model)
        .iter()
        .map(|row| row.iter().map(|f| TransferEntry::from_ratfunc(f, s_var)).collect())
        .collect();
    TransferMatrix { entries, offsets_ignored: model.has_offsets() }
}

/// All numerator and denominator coefficients, rational constants and
/// repeats removed.
pub fn transfer_coefficients(h: &TransferMatrix) -> Vec<RatFunc> {
    let mut out: Vec<RatFunc> = Vec::new();
    for e in h.entries.iter().flatten().filter(|e| !e.is_zero()) {
        for c in e.num.coeffs().iter().chain(e.den.coeffs()) {
            if !c.is_constant() && !out.contains(c) {
                out.push(c.clone());
            }
        }
    }
    out
}
